#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfr/synthetic.hpp"

using namespace cfr;
namespace fs = std::filesystem;

namespace {

SceneSpec base_spec() {
  SceneSpec spec;
  spec.image_size = 64;
  spec.object_count_min = 2;
  spec.object_count_max = 4;
  spec.object_size_min = 12;
  spec.object_size_max = 30;
  return spec;
}

bool tensors_equal(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) return false;
  for (size_t i = 0; i < a.data().size(); ++i)
    if (a.data()[i] != b.data()[i]) return false;
  return true;
}

std::string file_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// mean absolute per-pixel contrast of one spectrum against a reference render
double region_contrast(const Tensor& img, const Tensor& reference, const Box& box,
                       int64_t channel) {
  const int64_t n = img.shape()[3];
  double acc = 0.0;
  int64_t count = 0;
  for (int64_t y = static_cast<int64_t>(box.y1); y < static_cast<int64_t>(box.y2); ++y)
    for (int64_t x = static_cast<int64_t>(box.x1); x < static_cast<int64_t>(box.x2); ++x) {
      acc += std::abs(static_cast<double>(img.ptr()[channel * n * n + y * n + x]) -
                      static_cast<double>(reference.ptr()[channel * n * n + y * n + x]));
      ++count;
    }
  return count ? acc / count : 0.0;
}

}  // namespace

TEST_CASE("generation is bit-deterministic in (spec, seed)") {
  SceneSpec spec = base_spec();
  SpectralSample a = generate_scene(spec, 2024);
  SpectralSample b = generate_scene(spec, 2024);
  CHECK(tensors_equal(a.visible, b.visible));
  CHECK(tensors_equal(a.thermal, b.thermal));
  CHECK(tensors_equal(a.gt.mask, b.gt.mask));
  REQUIRE(a.gt.boxes.size() == b.gt.boxes.size());
  for (size_t i = 0; i < a.gt.boxes.size(); ++i) {
    CHECK(a.gt.boxes[i].box.x1 == b.gt.boxes[i].box.x1);
    CHECK(a.gt.visibility[i] == b.gt.visibility[i]);
  }
  SpectralSample c = generate_scene(spec, 2025);
  CHECK(!tensors_equal(a.visible, c.visible));
}

TEST_CASE("p_both = 1 with no noise renders every object in both spectra") {
  SceneSpec spec = base_spec();
  spec.p_both = 1.0;
  spec.p_visible_only = spec.p_thermal_only = 0.0;
  spec.clutter = 0;
  spec.noise_sigma = 0.0;

  // same seed with flipped tags gives the untouched background per spectrum:
  // geometry is placed before tags are drawn
  SceneSpec thermal_only = spec;
  thermal_only.p_both = 0.0;
  thermal_only.p_thermal_only = 1.0;
  SceneSpec visible_only = spec;
  visible_only.p_both = 0.0;
  visible_only.p_visible_only = 1.0;

  for (uint64_t seed : {101ull, 102ull, 103ull}) {
    SpectralSample s = generate_scene(spec, seed);
    SpectralSample vis_bg = generate_scene(thermal_only, seed);   // visible untouched
    SpectralSample thm_bg = generate_scene(visible_only, seed);   // thermal untouched
    REQUIRE(!s.gt.boxes.empty());
    REQUIRE(s.gt.boxes.size() == vis_bg.gt.boxes.size());
    for (const BoxAnn& ann : s.gt.boxes) {
      for (int64_t c = 0; c < 3; ++c)
        CHECK(region_contrast(s.visible, vis_bg.visible, ann.box, c) > 0.2);
      CHECK(region_contrast(s.thermal, thm_bg.thermal, ann.box, 0) > 0.2);
    }
    for (auto tag : s.gt.visibility) CHECK(tag == Visibility::both);
  }
}

TEST_CASE("thermal-only objects leave no visible contrast, day or night") {
  SceneSpec spec = base_spec();
  spec.p_both = 0.0;
  spec.p_visible_only = 0.0;
  spec.p_thermal_only = 1.0;
  spec.clutter = 0;
  spec.noise_sigma = 0.0;
  spec.time_of_day = TimeOfDay::night;
  SpectralSample s = generate_scene(spec, 314);
  REQUIRE(!s.gt.boxes.empty());
  // visible must be the pure smooth background: its discrete Laplacian is 0
  const int64_t n = spec.image_size;
  for (int64_t c = 0; c < 3; ++c) {
    const float* plane = s.visible.ptr() + c * n * n;
    for (int64_t y = 1; y + 1 < n; ++y)
      for (int64_t x = 1; x + 1 < n; ++x) {
        const double lap = 4.0 * plane[y * n + x] - plane[y * n + x - 1] -
                           plane[y * n + x + 1] - plane[(y - 1) * n + x] -
                           plane[(y + 1) * n + x];
        CHECK(std::abs(lap) < 1e-5);
      }
  }
}

TEST_CASE("object centroids coincide exactly across spectra") {
  SceneSpec spec = base_spec();
  spec.p_both = 1.0;
  spec.p_visible_only = spec.p_thermal_only = 0.0;
  spec.clutter = 0;
  spec.noise_sigma = 0.0;

  SceneSpec thermal_only = spec;
  thermal_only.p_both = 0.0;
  thermal_only.p_thermal_only = 1.0;
  SceneSpec visible_only = spec;
  visible_only.p_both = 0.0;
  visible_only.p_visible_only = 1.0;

  for (uint64_t seed : {21ull, 22ull}) {
    SpectralSample s = generate_scene(spec, seed);
    SpectralSample vis_bg = generate_scene(thermal_only, seed);
    SpectralSample thm_bg = generate_scene(visible_only, seed);
    const int64_t n = spec.image_size;
    for (size_t obj = 0; obj < s.gt.boxes.size(); ++obj) {
      const BoxAnn& ann = s.gt.boxes[obj];
      double vx = 0, vy = 0, tx = 0, ty = 0;
      int64_t vn = 0, tn = 0;
      for (int64_t y = 0; y < n; ++y)
        for (int64_t x = 0; x < n; ++x) {
          if (!(x + 0.5 > ann.box.x1 && x + 0.5 < ann.box.x2 && y + 0.5 > ann.box.y1 &&
                y + 0.5 < ann.box.y2))
            continue;
          // overlapping neighbors can cancel in the signed visible channel;
          // restrict the support to pixels owned by this box alone
          bool shared = false;
          for (size_t other = 0; other < s.gt.boxes.size(); ++other) {
            if (other == obj) continue;
            const Box& ob = s.gt.boxes[other].box;
            if (x + 0.5 > ob.x1 && x + 0.5 < ob.x2 && y + 0.5 > ob.y1 && y + 0.5 < ob.y2)
              shared = true;
          }
          if (shared) continue;
          if (std::abs(s.visible.ptr()[y * n + x] - vis_bg.visible.ptr()[y * n + x]) >
              0.02) {
            vx += x;
            vy += y;
            ++vn;
          }
          if (std::abs(s.thermal.ptr()[y * n + x] - thm_bg.thermal.ptr()[y * n + x]) >
              0.02) {
            tx += x;
            ty += y;
            ++tn;
          }
        }
      REQUIRE(vn > 0);
      REQUIRE(tn > 0);
      CHECK(vx / vn == doctest::Approx(tx / tn).epsilon(1e-12));
      CHECK(vy / vn == doctest::Approx(ty / tn).epsilon(1e-12));
    }
  }
}

TEST_CASE("visible-only objects are statistically invisible in thermal") {
  SceneSpec spec = base_spec();
  spec.p_both = 0.0;
  spec.p_visible_only = 1.0;
  spec.p_thermal_only = 0.0;
  SpectralSample s = generate_scene(spec, 777);
  REQUIRE(!s.gt.boxes.empty());
  const int64_t n = spec.image_size;
  for (const BoxAnn& ann : s.gt.boxes) {
    // object crop vs a surrounding ring: means must agree within noise
    double in_acc = 0, ring_acc = 0;
    int64_t in_n = 0, ring_n = 0;
    for (int64_t y = 0; y < n; ++y)
      for (int64_t x = 0; x < n; ++x) {
        const bool inside = x + 0.5 > ann.box.x1 && x + 0.5 < ann.box.x2 &&
                            y + 0.5 > ann.box.y1 && y + 0.5 < ann.box.y2;
        const bool in_ring = !inside && x + 0.5 > ann.box.x1 - 6 &&
                             x + 0.5 < ann.box.x2 + 6 && y + 0.5 > ann.box.y1 - 6 &&
                             y + 0.5 < ann.box.y2 + 6;
        if (inside) {
          in_acc += s.thermal.ptr()[y * n + x];
          ++in_n;
        } else if (in_ring) {
          ring_acc += s.thermal.ptr()[y * n + x];
          ++ring_n;
        }
      }
    REQUIRE(in_n > 0);
    REQUIRE(ring_n > 0);
    CHECK(std::abs(in_acc / in_n - ring_acc / ring_n) < 0.05);
  }
}

TEST_CASE("mask is exactly the union of box interiors") {
  SpectralSample s = generate_scene(base_spec(), 31337);
  Tensor expected = rasterize_boxes(s.gt.boxes, 64, 64);
  CHECK(tensors_equal(s.gt.mask, expected));
  CHECK(s.gt.visibility.size() == s.gt.boxes.size());
}

TEST_CASE("dataset generation, manifests, and round trip") {
  const fs::path root = fs::temp_directory_path() / "cfr_synth_test";
  fs::remove_all(root);
  fs::create_directories(root);
  SceneSpec spec = base_spec();
  const auto paths = generate_dataset(spec, 6, 3, 99, (root / "data").string());

  Manifest train = load_manifest(paths.train_manifest);
  Manifest test = load_manifest(paths.test_manifest);
  CHECK(train.entries.size() == 6);
  CHECK(test.entries.size() == 3);
  CHECK(train.split == "train");
  CHECK(train.header.at("seed") == "99");

  SUBCASE("train and test ids are disjoint") {
    for (const auto& tr : train.entries)
      for (const auto& te : test.entries) CHECK(tr.id != te.id);
  }
  SUBCASE("reloaded samples equal the in-memory originals") {
    for (const auto& e : train.entries) {
      SpectralSample disk = load_sample((root / "data").string(), e);
      SpectralSample mem = generate_scene(spec, e.sample_seed);
      CHECK(tensors_equal(disk.visible, mem.visible));
      CHECK(tensors_equal(disk.thermal, mem.thermal));
      CHECK(tensors_equal(disk.gt.mask, mem.gt.mask));
      REQUIRE(disk.gt.boxes.size() == mem.gt.boxes.size());
      for (size_t i = 0; i < disk.gt.boxes.size(); ++i) {
        CHECK(disk.gt.boxes[i].box.x1 == mem.gt.boxes[i].box.x1);
        CHECK(disk.gt.boxes[i].box.y2 == mem.gt.boxes[i].box.y2);
        CHECK(disk.gt.visibility[i] == mem.gt.visibility[i]);
      }
    }
  }
  SUBCASE("regeneration is byte-identical") {
    const auto paths2 = generate_dataset(spec, 6, 3, 99, (root / "data2").string());
    CHECK(file_bytes(paths.train_manifest) == file_bytes(paths2.train_manifest));
    Manifest m2 = load_manifest(paths2.train_manifest);
    CHECK(file_bytes((root / "data" / train.entries[0].visible_path).string()) ==
          file_bytes((root / "data2" / m2.entries[0].visible_path).string()));
  }
  SUBCASE("missing parent directory fails without a partial manifest") {
    const std::string bad = (root / "missing" / "nested" / "data").string();
    CHECK_THROWS_AS(generate_dataset(spec, 2, 1, 1, bad), IoError);
    CHECK(!fs::exists(root / "missing"));
  }
  SUBCASE("converter hook walks every sample") {
    int count = 0;
    convert_dataset((root / "data").string(), "test",
                    [&](const SpectralSample& s, const std::string& id) {
                      CHECK(s.id == id);
                      ++count;
                    });
    CHECK(count == 3);
  }
  fs::remove_all(root);
}

TEST_CASE("visibility probabilities must sum to one") {
  SceneSpec spec = base_spec();
  spec.p_both = 0.5;
  spec.p_visible_only = 0.3;
  spec.p_thermal_only = 0.3;
  CHECK_THROWS_AS(spec.validate(), ContractError);
}
