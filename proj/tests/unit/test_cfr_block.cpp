#include <doctest.h>

#include <cmath>

#include "cfr/cfr_block.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cfr;

namespace {

CfrConfig small_config(int loops, bool shared_stats = true) {
  CfrConfig cfg;
  cfg.channels = 4;
  cfg.loops = loops;
  cfg.bn_stats_shared_across_loops = shared_stats;
  return cfg;
}

}  // namespace

TEST_CASE("parameter count is constant in the loop count") {
  int64_t reference = -1;
  for (int loops : {1, 2, 3, 4}) {
    Rng rng(40);
    auto params = CfrParamsT<float>::init(small_config(loops), rng);
    const int64_t count = params.parameter_count();
    if (reference < 0) reference = count;
    CHECK(count == reference);
  }
  // C=4: fuse 4*8*9 + gamma 4 + beta 4 + two heads of (4 + 1)
  CHECK(reference == 4 * 8 * 9 + 4 + 4 + 2 * 5);
}

TEST_CASE("fuse_step preserves shape and honors the zero kernel") {
  Rng rng(41);
  auto cfg = small_config(1);
  auto params = CfrParamsT<float>::init(cfg, rng);
  Tensor ft = Tensor::randn(Shape{2, 4, 6, 6}, rng);
  Tensor fv = Tensor::randn(Shape{2, 4, 6, 6}, rng);
  Tensor ff = fuse_step(ft, fv, params, RunMode::train);
  CHECK(ff.shape() == ft.shape());

  for (auto& v : params.fuse_weight.data()) v = 0.0f;
  Tensor zero = fuse_step(ft, fv, params, RunMode::train);
  for (float v : zero.data()) CHECK(v == 0.0f);

  Tensor bad = Tensor::randn(Shape{2, 3, 6, 6}, rng);
  CHECK_THROWS_AS(fuse_step(bad, bad, params, RunMode::train), ContractError);
}

TEST_CASE("fuse_step matches a straight-line concat-conv-bn reference") {
  Rng rng(42);
  auto cfg = small_config(1);
  auto params = CfrParamsT<double>::init(cfg, rng);
  DTensor ft = DTensor::randn(Shape{1, 4, 5, 5}, rng);
  DTensor fv = DTensor::randn(Shape{1, 4, 5, 5}, rng);

  SUBCASE("train mode") {
    DTensor got = fuse_step(ft, fv, params, RunMode::train);
    const auto cat = oracle::naive_concat(ft.data(), 4, fv.data(), 4, 1, 5, 5);
    const auto conv = oracle::naive_conv2d(cat, 1, 8, 5, 5, params.fuse_weight.data(), 4,
                                           3, 3, nullptr, 1, 1);
    const auto ref = oracle::naive_batchnorm_train(conv, 1, 4, 5, 5,
                                                   params.bn_gamma.data(),
                                                   params.bn_beta.data(), cfg.bn_eps);
    CHECK(testutil::max_abs_diff(got, ref) < 1e-6);
  }
  SUBCASE("eval mode with nontrivial running stats") {
    Rng srng(43);
    for (auto& m : params.bn_stats[0].mean) m = srng.normal(0.0, 0.3);
    for (auto& v : params.bn_stats[0].var) v = 0.5 + srng.uniform();
    DTensor got = fuse_step(ft, fv, params, RunMode::eval);
    const auto cat = oracle::naive_concat(ft.data(), 4, fv.data(), 4, 1, 5, 5);
    const auto conv = oracle::naive_conv2d(cat, 1, 8, 5, 5, params.fuse_weight.data(), 4,
                                           3, 3, nullptr, 1, 1);
    const auto ref = oracle::naive_batchnorm_eval(
        conv, 1, 4, 5, 5, params.bn_gamma.data(), params.bn_beta.data(),
        params.bn_stats[0].mean, params.bn_stats[0].var, cfg.bn_eps);
    CHECK(testutil::max_abs_diff(got, ref) < 1e-6);
  }
}

TEST_CASE("refine_step residual semantics") {
  Rng rng(44);
  Tensor prev = Tensor::randn(Shape{1, 4, 3, 3}, rng);
  for (auto& v : prev.data()) v = std::abs(v);
  Tensor zero = Tensor::zeros(prev.shape());
  Tensor same = refine_step(prev, zero);
  for (size_t i = 0; i < prev.data().size(); ++i) CHECK(same.data()[i] == prev.data()[i]);

  Tensor neg = mul_scalar(prev, -1.0);
  Tensor cancelled = refine_step(prev, neg);
  for (float v : cancelled.data()) CHECK(v == 0.0f);
}

TEST_CASE("predict_masks matches a direct dot-product oracle") {
  Rng rng(45);
  auto params = CfrParamsT<float>::init(small_config(1), rng);
  Tensor ft = Tensor::randn(Shape{2, 4, 5, 5}, rng);
  Tensor fv = Tensor::randn(Shape{2, 4, 5, 5}, rng);
  auto [mt, mv] = predict_masks(ft, fv, params);
  CHECK(mt.shape() == Shape{2, 1, 5, 5});
  CHECK(mv.shape() == Shape{2, 1, 5, 5});
  for (int64_t n = 0; n < 2; ++n)
    for (int64_t y = 0; y < 5; ++y)
      for (int64_t x = 0; x < 5; ++x) {
        double acc = params.seg_t_bias.data()[0];
        for (int64_t c = 0; c < 4; ++c)
          acc += params.seg_t_weight.at(0, c, 0, 0) * ft.at(n, c, y, x);
        CHECK(mt.at(n, 0, y, x) == doctest::Approx(acc).epsilon(1e-6));
      }

  SUBCASE("zero head weights give a constant logit at the bias") {
    for (auto& v : params.seg_v_weight.data()) v = 0.0f;
    params.seg_v_bias.data()[0] = -1.25f;
    auto [mt2, mv2] = predict_masks(ft, fv, params);
    for (float v : mv2.data()) CHECK(v == doctest::Approx(-1.25f));
  }
}

TEST_CASE("run_cycle trace structure and replay") {
  Rng rng(46);
  auto cfg = small_config(3);
  auto params = CfrParamsT<float>::init(cfg, rng);
  Tensor ft = Tensor::randn(Shape{1, 4, 6, 6}, rng);
  Tensor fv = Tensor::randn(Shape{1, 4, 6, 6}, rng);

  SUBCASE("loop count 1 yields one entry per list") {
    auto c1 = small_config(1);
    auto trace = run_cycle(ft, fv, c1, params, RunMode::eval);
    CHECK(trace.loops() == 1);
    CHECK(trace.f_t.size() == 1);
    CHECK(trace.f_v.size() == 1);
    CHECK(trace.f_f.size() == 1);
    CHECK(trace.mask_logits_t.size() == 1);
    CHECK(trace.mask_logits_v.size() == 1);
  }
  SUBCASE("replaying the recurrence from the trace matches exactly") {
    auto trace = run_cycle(ft, fv, cfg, params, RunMode::eval);
    REQUIRE(trace.loops() == 3);
    // f_t[2] = relu(f_t[1] + f_f[2]), recomputed externally, bitwise equal
    Tensor replay = relu(add(trace.f_t[1], trace.f_f[2]));
    for (size_t i = 0; i < replay.data().size(); ++i)
      CHECK(replay.data()[i] == trace.f_t[2].data()[i]);
    Tensor replay_v = relu(add(trace.f_v[0], trace.f_f[1]));
    for (size_t i = 0; i < replay_v.data().size(); ++i)
      CHECK(replay_v.data()[i] == trace.f_v[1].data()[i]);
    for (const auto& t : trace.f_f) CHECK(t.all_finite());
  }
  SUBCASE("zero loops is a contract violation") {
    auto c0 = small_config(0);
    CHECK_THROWS_AS(run_cycle(ft, fv, c0, params, RunMode::eval), ContractError);
  }
}

TEST_CASE("eval-mode prefix property with per-loop statistics") {
  Rng rng(47);
  auto cfg4 = small_config(4, /*shared_stats=*/false);
  auto params = CfrParamsT<float>::init(cfg4, rng);
  Rng srng(48);
  for (auto& stats : params.bn_stats) {
    for (auto& m : stats.mean) m = srng.normal(0.0, 0.2);
    for (auto& v : stats.var) v = 0.6 + srng.uniform();
  }
  Tensor ft = Tensor::randn(Shape{1, 4, 6, 6}, rng);
  Tensor fv = Tensor::randn(Shape{1, 4, 6, 6}, rng);
  auto full = run_cycle(ft, fv, cfg4, params, RunMode::eval);
  for (int k : {1, 2, 3}) {
    auto cfgk = small_config(k, false);
    auto truncated = run_cycle(ft, fv, cfgk, params, RunMode::eval);
    REQUIRE(truncated.loops() == k);
    for (int i = 0; i < k; ++i) {
      for (size_t j = 0; j < full.f_t[i].data().size(); ++j) {
        CHECK(truncated.f_t[i].data()[j] == full.f_t[i].data()[j]);
        CHECK(truncated.f_v[i].data()[j] == full.f_v[i].data()[j]);
        CHECK(truncated.f_f[i].data()[j] == full.f_f[i].data()[j]);
      }
    }
  }
}

TEST_CASE("final_fusion formula and properties") {
  Rng rng(49);
  auto cfg = small_config(3);
  auto params = CfrParamsT<double>::init(cfg, rng);

  SUBCASE("single loop averages the two refined streams") {
    auto c1 = small_config(1);
    DTensor ft = DTensor::randn(Shape{1, 4, 4, 4}, rng);
    DTensor fv = DTensor::randn(Shape{1, 4, 4, 4}, rng);
    auto trace = run_cycle(ft, fv, c1, params, RunMode::eval);
    DTensor fused = final_fusion(trace);
    for (int64_t i = 0; i < fused.numel(); ++i)
      CHECK(fused.data()[i] ==
            doctest::Approx(0.5 * (trace.f_t[0].data()[i] + trace.f_v[0].data()[i]))
                .epsilon(1e-12));
  }
  SUBCASE("mean of identical features is the feature") {
    CfrTraceT<double> trace;
    DTensor x = DTensor::randn(Shape{1, 2, 3, 3}, rng);
    for (int i = 0; i < 3; ++i) {
      trace.f_t.push_back(x);
      trace.f_v.push_back(x);
      trace.f_f.push_back(x);
    }
    DTensor fused = final_fusion(trace);
    for (int64_t i = 0; i < x.numel(); ++i)
      CHECK(fused.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-15));
  }
  SUBCASE("random traces match the brute-force double sum within 1e-12") {
    for (int trial = 0; trial < 20; ++trial) {
      CfrTraceT<double> trace;
      Rng trng(Rng::mix(50, trial));
      const int loops = 1 + trng.uniform_int(4);
      for (int i = 0; i < loops; ++i) {
        trace.f_t.push_back(DTensor::randn(Shape{1, 3, 4, 4}, trng, 2.0));
        trace.f_v.push_back(DTensor::randn(Shape{1, 3, 4, 4}, trng, 2.0));
        trace.f_f.push_back(DTensor::randn(Shape{1, 3, 4, 4}, trng, 2.0));
      }
      DTensor fused = final_fusion(trace);
      for (int64_t j = 0; j < fused.numel(); ++j) {
        double acc = 0.0;
        for (int i = 0; i < loops; ++i)
          acc += trace.f_t[i].data()[j] + trace.f_v[i].data()[j];
        CHECK(std::abs(fused.data()[j] - acc / (2.0 * loops)) < 1e-12);
      }
    }
  }
  SUBCASE("swapping the spectral lists leaves the mean unchanged") {
    CfrTraceT<double> trace;
    Rng trng(51);
    for (int i = 0; i < 3; ++i) {
      trace.f_t.push_back(DTensor::randn(Shape{1, 2, 4, 4}, trng));
      trace.f_v.push_back(DTensor::randn(Shape{1, 2, 4, 4}, trng));
      trace.f_f.push_back(DTensor::randn(Shape{1, 2, 4, 4}, trng));
    }
    CfrTraceT<double> swapped = trace;
    std::swap(swapped.f_t, swapped.f_v);
    DTensor a = final_fusion(trace), b = final_fusion(swapped);
    for (int64_t j = 0; j < a.numel(); ++j)
      CHECK(a.data()[j] == doctest::Approx(b.data()[j]).epsilon(1e-15));
  }
  SUBCASE("empty trace is a contract violation") {
    CfrTraceT<double> empty;
    CHECK_THROWS_AS(final_fusion(empty), ContractError);
  }
}

TEST_CASE("baseline_fuse strategies") {
  Rng rng(52);
  Tensor x = Tensor::randn(Shape{1, 3, 4, 4}, rng);

  SUBCASE("average of a tensor with itself is itself") {
    Tensor y = baseline_fuse(x, x, FuseStrategy::average);
    for (size_t i = 0; i < x.data().size(); ++i)
      CHECK(y.data()[i] == doctest::Approx(x.data()[i]));
  }
  SUBCASE("max picks elementwise maxima") {
    Tensor a = Tensor::from_data(Shape{1, 1, 1, 2}, {1.0f, -2.0f});
    Tensor b = Tensor::from_data(Shape{1, 1, 1, 2}, {0.0f, 5.0f});
    Tensor y = baseline_fuse(a, b, FuseStrategy::max);
    CHECK(y.data()[0] == 1.0f);
    CHECK(y.data()[1] == 5.0f);
  }
  SUBCASE("concat_conv with a selector kernel returns the thermal stream") {
    ConcatFuseParamsT<float> p;
    p.weight = Tensor::zeros(Shape{3, 6, 1, 1}, true);
    p.bias = Tensor::zeros(Shape{3}, true);
    for (int64_t c = 0; c < 3; ++c)
      p.weight.data()[c * 6 + c] = 1.0f;  // out c <- first-block channel c
    Tensor other = Tensor::randn(Shape{1, 3, 4, 4}, rng);
    Tensor y = baseline_fuse(x, other, FuseStrategy::concat_conv, &p);
    for (size_t i = 0; i < x.data().size(); ++i)
      CHECK(y.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-6));
  }
  SUBCASE("concat_conv without params is a contract violation") {
    CHECK_THROWS_AS(baseline_fuse(x, x, FuseStrategy::concat_conv), ContractError);
  }
  SUBCASE("unknown strategy name is a config error") {
    CHECK_THROWS_AS(parse_fuse_strategy("blend"), ConfigError);
    CHECK(parse_fuse_strategy("average") == FuseStrategy::average);
  }
}

TEST_CASE("checkpoint names follow the cfr.* scheme") {
  Rng rng(53);
  auto params = CfrParamsT<float>::init(small_config(2), rng);
  std::vector<StateEntry<float>> state;
  params.collect_state(state);
  std::vector<std::string> names;
  for (const auto& e : state) names.push_back(e.name);
  CHECK(std::find(names.begin(), names.end(), "cfr.fuse_weight") != names.end());
  CHECK(std::find(names.begin(), names.end(), "cfr.bn.gamma") != names.end());
  CHECK(std::find(names.begin(), names.end(), "cfr.bn.running_mean") != names.end());
  CHECK(std::find(names.begin(), names.end(), "cfr.seg_t.weight") != names.end());
  CHECK(std::find(names.begin(), names.end(), "cfr.seg_v.bias") != names.end());
}
