#ifndef CFR_CFR_BLOCK_HPP_
#define CFR_CFR_BLOCK_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "cfr/batchnorm.hpp"
#include "cfr/conv.hpp"
#include "cfr/ops.hpp"
#include "cfr/state.hpp"
#include "cfr/tensor.hpp"

namespace cfr {

/// Cyclic fuse-and-refine block configuration. loops == 0 means the block is
/// bypassed and a baseline fusion must be used instead.
struct CfrConfig {
  int64_t channels = 32;
  int loops = 3;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
  // One shared running-statistics set updated at every loop (default), or an
  // independent set per loop position.
  bool bn_stats_shared_across_loops = true;

  void validate() const {
    CFR_CHECK(channels > 0, "cfr: channels must be positive");
    CFR_CHECK(loops >= 0 && loops <= 8, "cfr: loops must be in [0, 8]");
    CFR_CHECK(bn_momentum > 0.0 && bn_momentum <= 1.0, "cfr: bad bn_momentum");
  }
};

/// Learned state of the block. The fusion convolution and both segmentation
/// heads are shared by every loop, so the learnable parameter count does not
/// depend on the loop count.
template <class S>
struct CfrParamsT {
  TensorT<S> fuse_weight;  // [C, 2C, 3, 3], no bias (BN beta subsumes it)
  TensorT<S> bn_gamma, bn_beta;                     // [C]
  std::vector<RunningStats<S>> bn_stats;            // 1 entry, or loops entries
  TensorT<S> seg_t_weight, seg_t_bias;              // [1, C, 1, 1], [1]
  TensorT<S> seg_v_weight, seg_v_bias;
  CfrConfig config;

  static CfrParamsT init(const CfrConfig& cfg, Rng& rng) {
    cfg.validate();
    const int64_t c = cfg.channels;
    CfrParamsT p;
    p.config = cfg;
    const double fuse_std = std::sqrt(2.0 / static_cast<double>(2 * c * 3 * 3));
    p.fuse_weight = TensorT<S>::randn(Shape{c, 2 * c, 3, 3}, rng, fuse_std, true);
    p.bn_gamma = TensorT<S>::full(Shape{c}, S(1), true);
    p.bn_beta = TensorT<S>::zeros(Shape{c}, true);
    const int stat_sets = cfg.bn_stats_shared_across_loops ? 1 : std::max(cfg.loops, 1);
    for (int i = 0; i < stat_sets; ++i) p.bn_stats.push_back(RunningStats<S>::init(c));
    const double seg_std = std::sqrt(2.0 / static_cast<double>(c));
    p.seg_t_weight = TensorT<S>::randn(Shape{1, c, 1, 1}, rng, seg_std, true);
    p.seg_t_bias = TensorT<S>::zeros(Shape{1}, true);
    p.seg_v_weight = TensorT<S>::randn(Shape{1, c, 1, 1}, rng, seg_std, true);
    p.seg_v_bias = TensorT<S>::zeros(Shape{1}, true);
    return p;
  }

  /// Learnable scalar count; constant in the loop count by construction.
  int64_t parameter_count() const {
    return fuse_weight.numel() + bn_gamma.numel() + bn_beta.numel() +
           seg_t_weight.numel() + seg_t_bias.numel() + seg_v_weight.numel() +
           seg_v_bias.numel();
  }

  void collect_learnable(std::vector<TensorT<S>>& out) {
    for (const auto& t : {fuse_weight, bn_gamma, bn_beta, seg_t_weight, seg_t_bias,
                          seg_v_weight, seg_v_bias})
      out.push_back(t);
  }

  void collect_state(std::vector<StateEntry<S>>& out) {
    out.push_back({"cfr.fuse_weight", fuse_weight, nullptr});
    out.push_back({"cfr.bn.gamma", bn_gamma, nullptr});
    out.push_back({"cfr.bn.beta", bn_beta, nullptr});
    if (bn_stats.size() == 1) {
      out.push_back({"cfr.bn.running_mean", {}, &bn_stats[0].mean});
      out.push_back({"cfr.bn.running_var", {}, &bn_stats[0].var});
    } else {
      for (size_t i = 0; i < bn_stats.size(); ++i) {
        const std::string base = "cfr.bn.loop" + std::to_string(i);
        out.push_back({base + ".running_mean", {}, &bn_stats[i].mean});
        out.push_back({base + ".running_var", {}, &bn_stats[i].var});
      }
    }
    out.push_back({"cfr.seg_t.weight", seg_t_weight, nullptr});
    out.push_back({"cfr.seg_t.bias", seg_t_bias, nullptr});
    out.push_back({"cfr.seg_v.weight", seg_v_weight, nullptr});
    out.push_back({"cfr.seg_v.bias", seg_v_bias, nullptr});
  }

  RunningStats<S>& stats_for_loop(int loop_idx) {
    if (bn_stats.size() == 1) return bn_stats[0];
    CFR_CHECK(loop_idx >= 0 && loop_idx < static_cast<int>(bn_stats.size()),
              "cfr: loop index outside per-loop statistics range");
    return bn_stats[loop_idx];
  }
};

/// Per-loop record of the unrolled cycle: refined spectral features, fused
/// features, and mask logits, indexed 0..I-1 for loops 1..I.
template <class S>
struct CfrTraceT {
  std::vector<TensorT<S>> f_t, f_v, f_f;
  std::vector<TensorT<S>> mask_logits_t, mask_logits_v;

  int loops() const { return static_cast<int>(f_f.size()); }
};

/// One fusion: concat both spectral features to 2C channels, 3x3 convolution
/// back to C, batch norm. The same weights serve every loop; loop_idx only
/// selects the running-statistics set when those are per-loop.
template <class S>
TensorT<S> fuse_step(const TensorT<S>& f_t_prev, const TensorT<S>& f_v_prev,
                     CfrParamsT<S>& params, RunMode mode, int loop_idx = 0) {
  CFR_CHECK(f_t_prev.shape() == f_v_prev.shape(), "fuse_step: stream shape mismatch");
  CFR_CHECK(f_t_prev.shape()[1] == params.config.channels,
            "fuse_step: channel count does not match params");
  TensorT<S> cat = concat_channels(f_t_prev, f_v_prev);
  TensorT<S> conv = conv2d(cat, params.fuse_weight, 1, 1);
  return batchnorm2d(conv, params.bn_gamma, params.bn_beta,
                     params.stats_for_loop(loop_idx), mode, params.config.bn_momentum,
                     params.config.bn_eps);
}

/// Residual refinement: relu(f_prev + f_f), applied per spectral stream.
template <class S>
TensorT<S> refine_step(const TensorT<S>& f_prev, const TensorT<S>& f_f) {
  CFR_CHECK(f_prev.shape() == f_f.shape(), "refine_step: shape mismatch");
  return relu(add(f_prev, f_f));
}

/// Per-spectrum 1x1 convolution producing mask logits [N,1,H,W]. The same
/// heads are reused at every loop.
template <class S>
std::pair<TensorT<S>, TensorT<S>> predict_masks(const TensorT<S>& f_t,
                                                const TensorT<S>& f_v,
                                                CfrParamsT<S>& params) {
  CFR_CHECK(f_t.shape()[1] == params.config.channels &&
                f_v.shape()[1] == params.config.channels,
            "predict_masks: channel count does not match params");
  TensorT<S> mt = conv2d(f_t, params.seg_t_weight, std::optional<TensorT<S>>(params.seg_t_bias), 1, 0);
  TensorT<S> mv = conv2d(f_v, params.seg_v_weight, std::optional<TensorT<S>>(params.seg_v_bias), 1, 0);
  return {mt, mv};
}

/// Unrolled cycle: for i = 1..I, fuse both streams, refine each residually,
/// and predict one mask per spectrum from the refined features.
template <class S>
CfrTraceT<S> run_cycle(const TensorT<S>& f_t0, const TensorT<S>& f_v0,
                       const CfrConfig& config, CfrParamsT<S>& params, RunMode mode) {
  config.validate();
  CFR_CHECK(config.loops >= 1,
            "run_cycle: loops must be >= 1 (use baseline_fuse when bypassed)");
  CfrTraceT<S> trace;
  TensorT<S> ft = f_t0, fv = f_v0;
  for (int i = 0; i < config.loops; ++i) {
    TensorT<S> ff = fuse_step(ft, fv, params, mode, i);
    ft = refine_step(ft, ff);
    fv = refine_step(fv, ff);
    auto [mt, mv] = predict_masks(ft, fv, params);
    trace.f_f.push_back(ff);
    trace.f_t.push_back(ft);
    trace.f_v.push_back(fv);
    trace.mask_logits_t.push_back(mt);
    trace.mask_logits_v.push_back(mv);
  }
  return trace;
}

/// Aggregates all refined spectral features: (1/2I) * (sum f_t[i] + sum f_v[i]).
template <class S>
TensorT<S> final_fusion(const CfrTraceT<S>& trace) {
  CFR_CHECK(trace.loops() >= 1, "final_fusion: empty trace");
  std::vector<TensorT<S>> all;
  all.insert(all.end(), trace.f_t.begin(), trace.f_t.end());
  all.insert(all.end(), trace.f_v.begin(), trace.f_v.end());
  return mean_of_list(all);
}

enum class FuseStrategy { average, max, concat_conv };

inline FuseStrategy parse_fuse_strategy(const std::string& name) {
  if (name == "average") return FuseStrategy::average;
  if (name == "max") return FuseStrategy::max;
  if (name == "concat_conv") return FuseStrategy::concat_conv;
  throw ConfigError("unknown fusion strategy '" + name + "'");
}

/// Parameters of the concat_conv baseline (1x1 convolution, 2C -> C).
template <class S>
struct ConcatFuseParamsT {
  TensorT<S> weight;  // [C, 2C, 1, 1]
  TensorT<S> bias;    // [C]

  static ConcatFuseParamsT init(int64_t channels, Rng& rng) {
    ConcatFuseParamsT p;
    const double std = std::sqrt(2.0 / static_cast<double>(2 * channels));
    p.weight = TensorT<S>::randn(Shape{channels, 2 * channels, 1, 1}, rng, std, true);
    p.bias = TensorT<S>::zeros(Shape{channels}, true);
    return p;
  }

  void collect_learnable(std::vector<TensorT<S>>& out) {
    out.push_back(weight);
    out.push_back(bias);
  }

  void collect_state(std::vector<StateEntry<S>>& out) {
    out.push_back({"fuse.concat.weight", weight, nullptr});
    out.push_back({"fuse.concat.bias", bias, nullptr});
  }
};

/// Single-shot fusion control arm: element-wise average, element-wise max, or
/// concatenation compressed by a 1x1 convolution.
template <class S>
TensorT<S> baseline_fuse(const TensorT<S>& f_t, const TensorT<S>& f_v,
                         FuseStrategy strategy, ConcatFuseParamsT<S>* params = nullptr) {
  CFR_CHECK(f_t.shape() == f_v.shape(), "baseline_fuse: shape mismatch");
  switch (strategy) {
    case FuseStrategy::average:
      return mul_scalar(add(f_t, f_v), 0.5);
    case FuseStrategy::max:
      return ewise_max(f_t, f_v);
    case FuseStrategy::concat_conv: {
      CFR_CHECK(params != nullptr, "baseline_fuse: concat_conv requires its own params");
      TensorT<S> cat = concat_channels(f_t, f_v);
      return conv2d(cat, params->weight, std::optional<TensorT<S>>(params->bias), 1, 0);
    }
  }
  throw ContractError("baseline_fuse: unreachable");
}

}  // namespace cfr

#endif  // CFR_CFR_BLOCK_HPP_
