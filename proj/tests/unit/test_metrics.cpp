#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfr/metrics.hpp"

using namespace cfr;

namespace {

// centered unit boxes on a per-image grid make IoU-1 matches trivial to stage
Box slot(int i) { return {i * 20.0, 0.0, i * 20.0 + 10.0, 10.0}; }

EvalDetection det(int image, int slot_idx, double conf, int cls = 0) {
  return {image, cls, slot(slot_idx), conf};
}

EvalGroundTruth gt(int image, int slot_idx, int cls = 0, bool ignore = false) {
  return {image, cls, slot(slot_idx), ignore};
}

}  // namespace

// fixtures below were hand-computed by independent pixel counting and
// PR/FPPI-curve walking before the implementation was written

TEST_CASE("dice_score fixtures") {
  CHECK(dice_score({1, 1, 0, 0}, {1, 1, 0, 0}) == 1.0);
  CHECK(dice_score({1, 1, 0, 0}, {0, 0, 1, 1}) == 0.0);
  CHECK(dice_score({1, 1, 1, 1, 0, 0}, {0, 0, 1, 1, 1, 1}) == 0.5);
  CHECK(dice_score({0, 0, 0}, {0, 0, 0}) == 1.0);  // both empty
  CHECK(dice_score({0, 0, 0}, {1, 0, 0}) == 0.0);
  CHECK(dice_score({1, 1, 1, 0, 0}, {1, 1, 1, 1, 1}) == 0.75);
  CHECK(dice_score({1, 0, 0}, {1, 1, 1}) == 0.5);
}

TEST_CASE("dice_score properties") {
  Rng rng(64);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<uint8_t> a(32), b(32);
    for (auto& v : a) v = rng.bernoulli(0.4);
    for (auto& v : b) v = rng.bernoulli(0.4);
    CHECK(dice_score(a, b) == dice_score(b, a));  // symmetry
    const double d = dice_score(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    bool identical = a == b;
    bool union_nonempty = false;
    for (size_t i = 0; i < a.size(); ++i) union_nonempty |= (a[i] || b[i]);
    if (union_nonempty) CHECK((d == 1.0) == identical);
  }
}

TEST_CASE("binarize_logits thresholds at probability 0.5") {
  Tensor logits = Tensor::from_data(Shape{4}, {-3.0f, -0.0f, 0.0f, 2.0f});
  const auto bin = binarize_logits(logits);
  CHECK(bin[0] == 0);
  CHECK(bin[1] == 1);  // sigmoid(0) = 0.5, >= threshold
  CHECK(bin[2] == 1);
  CHECK(bin[3] == 1);
}

TEST_CASE("average_precision fixtures") {
  SUBCASE("all gt detected, no false positives") {
    std::vector<EvalDetection> d{det(0, 0, 1.0), det(0, 1, 1.0)};
    std::vector<EvalGroundTruth> g{gt(0, 0), gt(0, 1)};
    CHECK(average_precision(d, g, 0.5, 0) == doctest::Approx(1.0));
  }
  SUBCASE("zero detections") {
    std::vector<EvalGroundTruth> g{gt(0, 0), gt(0, 1), gt(1, 0)};
    CHECK(average_precision({}, g, 0.5, 0) == 0.0);
  }
  SUBCASE("tp then fp with one gt: recall saturates first") {
    std::vector<EvalDetection> d{det(0, 0, 0.9), det(0, 3, 0.8)};
    std::vector<EvalGroundTruth> g{gt(0, 0)};
    CHECK(average_precision(d, g, 0.5, 0) == doctest::Approx(1.0));
  }
  SUBCASE("tp, fp, tp over two gt") {
    std::vector<EvalDetection> d{det(0, 0, 0.9), det(0, 3, 0.8), det(0, 1, 0.7)};
    std::vector<EvalGroundTruth> g{gt(0, 0), gt(0, 1)};
    CHECK(average_precision(d, g, 0.5, 0) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  }
  SUBCASE("fp outranking the only tp") {
    std::vector<EvalDetection> d{det(0, 3, 0.9), det(0, 0, 0.8)};
    std::vector<EvalGroundTruth> g{gt(0, 0)};
    CHECK(average_precision(d, g, 0.5, 0) == doctest::Approx(0.5));
  }
  SUBCASE("duplicate below the claiming detection is a plain fp") {
    std::vector<EvalDetection> d{det(0, 0, 0.9), det(0, 0, 0.8)};
    std::vector<EvalGroundTruth> g{gt(0, 0)};
    CHECK(average_precision(d, g, 0.5, 0) == doctest::Approx(1.0));
  }
  SUBCASE("three gt with tps at ranks 1, 3, 5") {
    std::vector<EvalDetection> d{det(0, 0, 0.9), det(0, 5, 0.8), det(0, 1, 0.7),
                                 det(0, 6, 0.6), det(0, 2, 0.5)};
    std::vector<EvalGroundTruth> g{gt(0, 0), gt(0, 1), gt(0, 2)};
    CHECK(average_precision(d, g, 0.5, 0) ==
          doctest::Approx(0.7555555555555555).epsilon(1e-12));
  }
}

TEST_CASE("AP is invariant to removing duplicates below all claiming detections") {
  Rng rng(65);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<EvalGroundTruth> g;
    std::vector<EvalDetection> with_dups, without_dups;
    std::vector<int> claimed;
    const int n_gt = 2 + static_cast<int>(rng.uniform_int(3));
    double conf = 1.0;
    for (int i = 0; i < n_gt; ++i) {
      g.push_back(gt(0, i));
      if (rng.bernoulli(0.7)) {
        conf -= 0.05;
        with_dups.push_back(det(0, i, conf));
        without_dups.push_back(det(0, i, conf));
        claimed.push_back(i);
      }
    }
    // duplicates of already-claimed gt, strictly below every claiming detection
    for (int i : claimed)
      if (rng.bernoulli(0.5)) with_dups.push_back(det(0, i, 0.05 + 0.01 * i));
    CHECK(average_precision(with_dups, g, 0.5, 0) ==
          doctest::Approx(average_precision(without_dups, g, 0.5, 0)).epsilon(1e-12));
  }
}

TEST_CASE("mean_average_precision skips classes without ground truth") {
  std::vector<EvalDetection> d{det(0, 0, 0.9, 0), det(0, 1, 0.8, 1)};
  std::vector<EvalGroundTruth> g{gt(0, 0, 0), gt(0, 1, 1)};
  const MapResult full = mean_average_precision(d, g, 0.5, 3);
  CHECK(full.per_class.size() == 2);
  CHECK(full.skipped_classes == std::vector<int>{2});
  CHECK(full.map == doctest::Approx(1.0));
}

TEST_CASE("log_average_miss_rate fixtures") {
  SUBCASE("fppi grid is 9 log-spaced points in [1e-2, 1]") {
    const auto grid = lamr_fppi_grid();
    REQUIRE(grid.size() == 9);
    CHECK(grid.front() == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(grid.back() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grid[4] == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("perfect detector scores 0") {
    std::vector<EvalDetection> d{det(0, 0, 0.9), det(0, 1, 0.8)};
    std::vector<EvalGroundTruth> g{gt(0, 0), gt(0, 1)};
    const auto r = log_average_miss_rate(d, g, 0.5, 1, 0);
    CHECK(r.defined);
    CHECK(r.value == 0.0);
  }
  SUBCASE("detector that outputs nothing scores 1") {
    std::vector<EvalGroundTruth> g{gt(0, 0)};
    const auto r = log_average_miss_rate({}, g, 0.5, 1, 0);
    CHECK(r.defined);
    CHECK(r.value == 1.0);
  }
  SUBCASE("single image, one gt missed at every threshold, no fp") {
    std::vector<EvalDetection> d;  // nothing above any threshold
    std::vector<EvalGroundTruth> g{gt(0, 0)};
    CHECK(log_average_miss_rate(d, g, 0.5, 1, 0).value == 1.0);
  }
  SUBCASE("one tp and one fp over two gt in one image") {
    std::vector<EvalDetection> d{det(0, 0, 0.9), det(0, 5, 0.8)};
    std::vector<EvalGroundTruth> g{gt(0, 0), gt(0, 1)};
    CHECK(log_average_miss_rate(d, g, 0.5, 1, 0).value == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("staged curve over ten images") {
    std::vector<EvalDetection> d{det(0, 0, 0.9), det(1, 5, 0.8), det(2, 0, 0.7)};
    for (int i = 0; i < 9; ++i) d.push_back(det(i, 6, 0.5 - i * 0.01));
    std::vector<EvalGroundTruth> g{gt(0, 0), gt(2, 0), gt(3, 0), gt(4, 0)};
    CHECK(log_average_miss_rate(d, g, 0.5, 10, 0).value ==
          doctest::Approx(0.5987324355742017).epsilon(1e-12));
  }
  SUBCASE("fp ranked first over two images") {
    std::vector<EvalDetection> d{det(0, 5, 0.95), det(0, 0, 0.9)};
    std::vector<EvalGroundTruth> g{gt(0, 0), gt(1, 0)};
    CHECK(log_average_miss_rate(d, g, 0.5, 2, 0).value ==
          doctest::Approx(0.8572439828530728).epsilon(1e-12));
  }
  SUBCASE("no gt after filtering is reported as absent") {
    std::vector<EvalGroundTruth> g{gt(0, 0, 0, /*ignore=*/true)};
    const auto r = log_average_miss_rate({}, g, 0.5, 1, 0);
    CHECK(!r.defined);
  }
  SUBCASE("detections matching ignored gt are not false positives") {
    std::vector<EvalDetection> d{det(0, 1, 0.9), det(0, 0, 0.8)};
    std::vector<EvalGroundTruth> g{gt(0, 0), gt(0, 1, 0, /*ignore=*/true)};
    CHECK(log_average_miss_rate(d, g, 0.5, 1, 0).value == 0.0);
  }
}

TEST_CASE("recall_at_fppi walks the curve") {
  std::vector<EvalDetection> d{det(0, 0, 0.9), det(0, 5, 0.8), det(1, 0, 0.7)};
  std::vector<EvalGroundTruth> g{gt(0, 0), gt(1, 0)};
  // prefix states: (fppi 0, recall .5), (fppi .5, recall .5), (fppi .5, recall 1)
  CHECK(recall_at_fppi(d, g, 0.5, 2, 1.0, 0) == doctest::Approx(1.0));
  CHECK(recall_at_fppi(d, g, 0.5, 2, 0.25, 0) == doctest::Approx(0.5));
  CHECK(recall_at_fppi({}, g, 0.5, 2, 1.0, 0) == 0.0);
}

TEST_CASE("metrics are deterministic across repeated evaluation") {
  Rng rng(66);
  std::vector<EvalDetection> d;
  std::vector<EvalGroundTruth> g;
  for (int i = 0; i < 30; ++i) {
    d.push_back(det(i % 5, static_cast<int>(rng.uniform_int(4)), rng.uniform()));
    if (i % 2 == 0) g.push_back(gt(i % 5, static_cast<int>(rng.uniform_int(4))));
  }
  const double ap1 = average_precision(d, g, 0.5, 0);
  const double ap2 = average_precision(d, g, 0.5, 0);
  CHECK(ap1 == ap2);
  CHECK(log_average_miss_rate(d, g, 0.5, 5, 0).value ==
        log_average_miss_rate(d, g, 0.5, 5, 0).value);
}

TEST_CASE("timing_profile contract and sanity") {
  CHECK_THROWS_AS(timing_profile([] {}, 1, 50), ContractError);
  CHECK_THROWS_AS(timing_profile([] {}, 5, 10), ContractError);
  volatile double sink = 0;
  const TimingStat stat = timing_profile(
      [&] {
        double acc = 0;
        for (int i = 0; i < 20000; ++i) acc += std::sqrt(static_cast<double>(i));
        sink = acc;
      },
      5, 51);
  CHECK(stat.median_ms > 0.0);
  CHECK(stat.iters == 51);
}

TEST_CASE("pgm writer emits a valid P5 header and payload") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "cfr_test_mask.pgm";
  write_pgm(path.string(), 2, 4, {0, 255, 0, 255, 255, 0, 255, 0});
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string bytes = ss.str();
  CHECK(bytes.rfind("P5\n4 2\n255\n", 0) == 0);
  CHECK(bytes.size() == 11 + 8);
  CHECK(static_cast<unsigned char>(bytes[11]) == 0);
  CHECK(static_cast<unsigned char>(bytes[12]) == 255);
  fs::remove(path);
}
