#ifndef CFR_GRADCHECK_SUITE_HPP_
#define CFR_GRADCHECK_SUITE_HPP_

#include <vector>

#include "cfr/gradcheck.hpp"
#include "cfr/model.hpp"

namespace cfr {

/// Double-precision finite-difference checks of every differentiable op plus
/// an end-to-end tiny detector (N=1, C=2, 16x16 input, 2 loops) through the
/// joint loss. Deterministic in the seed.
inline std::vector<FiniteDiffReport> run_gradcheck_suite(uint64_t seed,
                                                         double h = 1e-4,
                                                         double tol = 1e-4) {
  using T = DTensor;
  std::vector<FiniteDiffReport> reports;
  Rng rng(seed);

  auto randn = [&](Shape s) { return T::randn(s, rng, 1.0); };
  auto projection = [&](int64_t n) {
    std::vector<double> w(n);
    Rng prng(Rng::mix(seed, 555 + static_cast<uint64_t>(n)));
    for (double& v : w) v = prng.normal(0.0, 1.0);
    return w;
  };
  // scalar-valued wrapper: project the op output onto fixed coefficients
  auto check = [&](const std::string& name, std::vector<T> inputs, auto&& fwd) {
    const int64_t out_n = fwd().numel();
    const std::vector<double> w = projection(out_n);
    reports.push_back(finite_diff_check<double>(
        name, [&, w]() { return weighted_sum(fwd(), w); }, inputs, h, tol));
  };

  {
    T x = randn(Shape{1, 2, 5, 5}), k = randn(Shape{3, 2, 3, 3});
    T b = randn(Shape{3});
    check("conv2d(3x3,pad1)", {x, k, b},
          [&]() { return conv2d(x, k, std::optional<T>(b), 1, 1); });
  }
  {
    T x = randn(Shape{2, 3, 6, 6}), k = randn(Shape{2, 3, 3, 3});
    check("conv2d(3x3,stride2)", {x, k}, [&]() { return conv2d(x, k, 2, 1); });
  }
  {
    T x = randn(Shape{1, 4, 4, 4}), k = randn(Shape{2, 4, 1, 1});
    T b = randn(Shape{2});
    check("conv2d(1x1)", {x, k, b},
          [&]() { return conv2d(x, k, std::optional<T>(b), 1, 0); });
  }
  {
    T x = randn(Shape{2, 3, 4, 4}), g = randn(Shape{3}), b = randn(Shape{3});
    RunningStats<double> stats = RunningStats<double>::init(3);
    check("batchnorm2d(train)", {x, g, b}, [&]() {
      RunningStats<double> local = stats;  // keep the check side-effect free
      return batchnorm2d(x, g, b, local, RunMode::train, 0.1, 1e-5);
    });
  }
  {
    T x = randn(Shape{2, 3, 4, 4}), g = randn(Shape{3}), b = randn(Shape{3});
    RunningStats<double> stats = RunningStats<double>::init(3);
    Rng srng(Rng::mix(seed, 77));
    for (auto& m : stats.mean) m = srng.normal(0.0, 0.5);
    for (auto& v : stats.var) v = 0.5 + srng.uniform();
    check("batchnorm2d(eval)", {x, g, b}, [&]() {
      RunningStats<double> local = stats;
      return batchnorm2d(x, g, b, local, RunMode::eval, 0.1, 1e-5);
    });
  }
  {
    T x = randn(Shape{2, 3, 4, 4});
    check("relu", {x}, [&]() { return relu(x); });
  }
  {
    T a = randn(Shape{1, 2, 3, 3}), b = randn(Shape{1, 3, 3, 3});
    check("concat_channels", {a, b}, [&]() { return concat_channels(a, b); });
  }
  {
    T a = randn(Shape{2, 2, 2, 2}), b = randn(Shape{2, 2, 2, 2});
    check("add", {a, b}, [&]() { return add(a, b); });
    check("ewise_max", {a, b}, [&]() { return ewise_max(a, b); });
    check("mul_scalar", {a}, [&]() { return mul_scalar(a, -1.7); });
  }
  {
    T a = randn(Shape{1, 2, 3, 3}), b = randn(Shape{1, 2, 3, 3}), c = randn(Shape{1, 2, 3, 3});
    check("mean_of_list", {a, b, c}, [&]() { return mean_of_list<double>({a, b, c}); });
  }
  {
    T x = randn(Shape{12});
    std::vector<int64_t> idx{3, 0, 7, 3, 11, 5};
    check("gather", {x}, [&]() { return gather(x, idx); });
    check("reshape", {x}, [&]() { return reshape(x, Shape{3, 4}); });
  }
  {
    T a = randn(Shape{4}), b = randn(Shape{2, 3});
    check("concat_flat", {a, b}, [&]() { return concat_flat<double>({a, b}); });
  }
  {
    T logits = randn(Shape{2, 1, 4, 4});
    T targets = T::zeros(Shape{2, 1, 4, 4});
    Rng trng(Rng::mix(seed, 88));
    for (auto& v : targets.data()) v = trng.bernoulli(0.5) ? 1.0 : 0.0;
    reports.push_back(finite_diff_check<double>(
        "sigmoid_bce", [&]() { return sigmoid_bce(logits, targets); }, {logits}, h, tol));
  }
  {
    T logits = randn(Shape{5, 3});
    std::vector<int> labels{0, 2, 1, 2, 0};
    reports.push_back(finite_diff_check<double>(
        "softmax_ce", [&]() { return softmax_ce(logits, labels); }, {logits}, h, tol));
  }
  {
    // keep |pred - target| away from the smooth-l1 kink at 1
    T pred = randn(Shape{3, 4});
    T target = pred.clone();
    Rng srng(Rng::mix(seed, 99));
    for (auto& v : target.data()) {
      double d = srng.normal(0.0, 1.0);
      if (std::abs(std::abs(d) - 1.0) < 0.05) d = d > 0 ? 1.2 : -1.2;
      v += d;
    }
    reports.push_back(finite_diff_check<double>(
        "smooth_l1", [&]() { return smooth_l1(pred, target); }, {pred}, h, tol));
  }

  // cyclic block pieces
  CfrConfig ccfg;
  ccfg.channels = 2;
  ccfg.loops = 2;
  {
    CfrParamsT<double> params = CfrParamsT<double>::init(ccfg, rng);
    T ft = randn(Shape{1, 2, 4, 4}), fv = randn(Shape{1, 2, 4, 4});
    check("fuse_step", {ft, fv, params.fuse_weight, params.bn_gamma, params.bn_beta},
          [&]() {
            CfrParamsT<double> local = params;
            local.bn_stats = params.bn_stats;
            return fuse_step(ft, fv, local, RunMode::train);
          });
  }
  {
    T a = randn(Shape{1, 2, 4, 4}), b = randn(Shape{1, 2, 4, 4});
    check("refine_step", {a, b}, [&]() { return refine_step(a, b); });
  }
  {
    CfrParamsT<double> params = CfrParamsT<double>::init(ccfg, rng);
    T ft = randn(Shape{1, 2, 4, 4}), fv = randn(Shape{1, 2, 4, 4});
    check("predict_masks", {ft, fv, params.seg_t_weight, params.seg_t_bias},
          [&]() { return predict_masks(ft, fv, params).first; });
  }
  {
    CfrParamsT<double> params = CfrParamsT<double>::init(ccfg, rng);
    T ft = randn(Shape{1, 2, 4, 4}), fv = randn(Shape{1, 2, 4, 4});
    check("run_cycle+final_fusion",
          {ft, fv, params.fuse_weight, params.bn_gamma, params.bn_beta}, [&]() {
            CfrParamsT<double> local = params;
            local.bn_stats = params.bn_stats;
            CfrTraceT<double> trace = run_cycle(ft, fv, ccfg, local, RunMode::train);
            return final_fusion(trace);
          });
  }
  {
    T ft = randn(Shape{1, 3, 4, 4}), fv = randn(Shape{1, 3, 4, 4});
    check("baseline_fuse(average)", {ft, fv},
          [&]() { return baseline_fuse(ft, fv, FuseStrategy::average); });
    Rng crng(Rng::mix(seed, 123));
    ConcatFuseParamsT<double> cp = ConcatFuseParamsT<double>::init(3, crng);
    check("baseline_fuse(concat_conv)", {ft, fv, cp.weight, cp.bias},
          [&]() { return baseline_fuse(ft, fv, FuseStrategy::concat_conv, &cp); });
  }

  // end-to-end tiny detector through the joint loss
  {
    // one detection layer: deeper layers of a 16x16 input would feed batch
    // norm over <=4 values, whose curvature swamps a central difference
    ModelConfig mc;
    mc.image_size = 16;
    mc.backbone.stem_channels = {};
    mc.backbone.fusion_channels = 2;
    mc.backbone.downsample = 2;
    mc.backbone.det_strides = {4};
    mc.backbone.trunk_channels = 4;
    mc.cfr.channels = 2;
    mc.cfr.loops = 2;
    mc.fusion = FusionKind::cfr;
    mc.preset.name = "tiny";
    mc.preset.layers = {{4, {4.0, 6.0}}};
    mc.preset.ratios = {0.41};
    mc.preset.num_classes = 1;
    Rng mrng(Rng::mix(seed, 2024));
    DetectorModelT<double> model = DetectorModelT<double>::init(mc, mrng);

    AnchorLayout layout;
    const std::vector<AnchorBox> anchors =
        generate_anchors(16, mc.preset.layers, mc.preset.ratios, &layout);
    std::vector<BoxAnn> gt{{{3.0, 2.0, 8.0, 13.0}, 0}};
    const std::vector<MatchResult> matches{match_anchors(anchors, gt, 0.5, 0.4)};
    T mask = T::zeros(Shape{1, 1, 8, 8});
    Rng grng(Rng::mix(seed, 321));
    for (auto& v : mask.data()) v = grng.bernoulli(0.3) ? 1.0 : 0.0;
    T vis = randn(Shape{1, 3, 16, 16});
    T thm = randn(Shape{1, 1, 16, 16});

    std::vector<T> inputs{vis, thm};
    model.collect_learnable(inputs);
    // hard-negative mining is a discrete selection; freeze it at the base
    // point so the check probes the smooth branch backward differentiates
    const std::vector<uint8_t> selection = mine_loss_selection(
        model.forward(vis, thm, RunMode::train), layout, matches);
    // the smallest permitted step: the composed model has far more curvature
    // than single ops, and relu kinks near the base point must not be
    // straddled; at double precision the difference noise stays ~1e-7
    reports.push_back(finite_diff_check<double>(
        "end_to_end_tiny_model",
        [&]() {
          ForwardResultT<double> out = model.forward(vis, thm, RunMode::train);
          return joint_loss(out, layout, matches, mask, 1.0, &selection).total;
        },
        inputs, 1e-6, tol));
  }

  return reports;
}

}  // namespace cfr

#endif  // CFR_GRADCHECK_SUITE_HPP_
