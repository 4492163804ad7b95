#ifndef CFR_MODEL_HPP_
#define CFR_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cfr/anchors.hpp"
#include "cfr/batchnorm.hpp"
#include "cfr/cfr_block.hpp"
#include "cfr/conv.hpp"
#include "cfr/losses.hpp"
#include "cfr/matching.hpp"
#include "cfr/ops.hpp"
#include "cfr/state.hpp"

namespace cfr {

/// Two-stream stem geometry. Both streams use this architecture with
/// independent weights; the fusion point sits after `downsample` total
/// striding and carries fusion_channels channels.
struct BackboneConfig {
  std::vector<int64_t> stem_channels = {16, 32};
  int64_t fusion_channels = 32;
  int downsample = 4;
  std::vector<int> det_strides = {8, 16, 32};
  int64_t trunk_channels = 64;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
};

enum class FusionKind { cfr, average, max, concat_conv, visible_only, thermal_only };

inline FusionKind parse_fusion_kind(const std::string& s) {
  if (s == "cfr") return FusionKind::cfr;
  if (s == "average") return FusionKind::average;
  if (s == "max") return FusionKind::max;
  if (s == "concat_conv") return FusionKind::concat_conv;
  if (s == "visible_only") return FusionKind::visible_only;
  if (s == "thermal_only") return FusionKind::thermal_only;
  throw ConfigError("unknown fusion kind '" + s + "'");
}

inline std::string fusion_kind_name(FusionKind k) {
  switch (k) {
    case FusionKind::cfr: return "cfr";
    case FusionKind::average: return "average";
    case FusionKind::max: return "max";
    case FusionKind::concat_conv: return "concat_conv";
    case FusionKind::visible_only: return "visible_only";
    case FusionKind::thermal_only: return "thermal_only";
  }
  return "cfr";
}

struct ModelConfig {
  BackboneConfig backbone;
  CfrConfig cfr;
  FusionKind fusion = FusionKind::cfr;
  DetectorPreset preset;
  int image_size = 96;
};

/// conv(3x3, no bias) + batch norm + relu.
template <class S>
struct ConvBnReluT {
  TensorT<S> weight;
  TensorT<S> gamma, beta;
  RunningStats<S> stats;
  int64_t stride = 1;
  double bn_momentum = 0.1, bn_eps = 1e-5;

  static ConvBnReluT init(int64_t cin, int64_t cout, int64_t stride, Rng& rng,
                          double bn_momentum, double bn_eps) {
    ConvBnReluT b;
    const double std = std::sqrt(2.0 / static_cast<double>(cin * 9));
    b.weight = TensorT<S>::randn(Shape{cout, cin, 3, 3}, rng, std, true);
    b.gamma = TensorT<S>::full(Shape{cout}, S(1), true);
    b.beta = TensorT<S>::zeros(Shape{cout}, true);
    b.stats = RunningStats<S>::init(cout);
    b.stride = stride;
    b.bn_momentum = bn_momentum;
    b.bn_eps = bn_eps;
    return b;
  }

  TensorT<S> forward(const TensorT<S>& x, RunMode mode) {
    TensorT<S> y = conv2d(x, weight, stride, 1);
    y = batchnorm2d(y, gamma, beta, stats, mode, bn_momentum, bn_eps);
    return relu(y);
  }

  void collect_learnable(std::vector<TensorT<S>>& out) {
    out.push_back(weight);
    out.push_back(gamma);
    out.push_back(beta);
  }

  void collect_state(const std::string& prefix, std::vector<StateEntry<S>>& out) {
    out.push_back({prefix + ".conv.weight", weight, nullptr});
    out.push_back({prefix + ".bn.gamma", gamma, nullptr});
    out.push_back({prefix + ".bn.beta", beta, nullptr});
    out.push_back({prefix + ".bn.running_mean", {}, &stats.mean});
    out.push_back({prefix + ".bn.running_var", {}, &stats.var});
  }
};

/// Plain 3x3 conv with bias (detection heads).
template <class S>
struct HeadConvT {
  TensorT<S> weight, bias;

  static HeadConvT init(int64_t cin, int64_t cout, Rng& rng) {
    HeadConvT h;
    const double std = std::sqrt(2.0 / static_cast<double>(cin * 9));
    h.weight = TensorT<S>::randn(Shape{cout, cin, 3, 3}, rng, std, true);
    h.bias = TensorT<S>::zeros(Shape{cout}, true);
    return h;
  }

  TensorT<S> forward(const TensorT<S>& x) {
    return conv2d(x, weight, std::optional<TensorT<S>>(bias), 1, 1);
  }

  void collect_learnable(std::vector<TensorT<S>>& out) {
    out.push_back(weight);
    out.push_back(bias);
  }

  void collect_state(const std::string& prefix, std::vector<StateEntry<S>>& out) {
    out.push_back({prefix + ".weight", weight, nullptr});
    out.push_back({prefix + ".bias", bias, nullptr});
  }
};

template <class S>
struct ForwardResultT {
  std::vector<TensorT<S>> cls;  // per det layer [N, A*(K+1), Hl, Wl]
  std::vector<TensorT<S>> box;  // per det layer [N, A*4, Hl, Wl]
  CfrTraceT<S> trace;           // non-empty only for FusionKind::cfr
  TensorT<S> fused;             // features entering the trunk
};

/// Two-stream detector: independent stems, one fusion site (cyclic block or a
/// baseline strategy), a strided trunk producing the detection layers, and
/// per-layer class/box heads.
template <class S>
struct DetectorModelT {
  ModelConfig cfg;
  std::vector<ConvBnReluT<S>> stem_v, stem_t;
  CfrParamsT<S> cfr_params;
  ConcatFuseParamsT<S> concat_fuse;
  std::vector<ConvBnReluT<S>> trunk;
  std::vector<HeadConvT<S>> cls_heads, box_heads;

  bool has_visible_stream() const { return cfg.fusion != FusionKind::thermal_only; }
  bool has_thermal_stream() const { return cfg.fusion != FusionKind::visible_only; }
  int num_classes() const { return cfg.preset.num_classes; }
  int64_t anchors_per_cell() const {
    return static_cast<int64_t>(cfg.preset.layers[0].scales.size() *
                                cfg.preset.ratios.size());
  }

  static std::vector<ConvBnReluT<S>> make_stem(int64_t in_channels,
                                               const BackboneConfig& bb, Rng& rng) {
    int n_stride2 = 0;
    for (int d = bb.downsample; d > 1; d /= 2) {
      CFR_CHECK(d % 2 == 0, "backbone: downsample must be a power of two");
      ++n_stride2;
    }
    std::vector<int64_t> widths = bb.stem_channels;
    widths.push_back(bb.fusion_channels);
    CFR_CHECK(static_cast<int>(widths.size()) >= n_stride2,
              "backbone: not enough stem blocks for the requested downsample");
    std::vector<ConvBnReluT<S>> blocks;
    int64_t cin = in_channels;
    for (size_t i = 0; i < widths.size(); ++i) {
      const int64_t stride = static_cast<int>(i) < n_stride2 ? 2 : 1;
      blocks.push_back(
          ConvBnReluT<S>::init(cin, widths[i], stride, rng, bb.bn_momentum, bb.bn_eps));
      cin = widths[i];
    }
    return blocks;
  }

  static DetectorModelT init(const ModelConfig& cfg, Rng& rng) {
    DetectorModelT m;
    m.cfg = cfg;
    const BackboneConfig& bb = cfg.backbone;
    if (cfg.fusion == FusionKind::cfr) {
      CFR_CHECK(bb.fusion_channels == cfg.cfr.channels,
                "model: fusion point width must equal the cfr channel count");
      CFR_CHECK(cfg.cfr.loops >= 1, "model: cfr fusion needs loops >= 1");
    }
    for (size_t i = 0; i < bb.det_strides.size(); ++i)
      CFR_CHECK(bb.det_strides[i] == bb.downsample << (i + 1),
                "model: detection strides must double from the fusion point");
    if (m.has_visible_stream()) m.stem_v = make_stem(3, bb, rng);
    if (m.has_thermal_stream()) m.stem_t = make_stem(1, bb, rng);
    if (cfg.fusion == FusionKind::cfr) m.cfr_params = CfrParamsT<S>::init(cfg.cfr, rng);
    if (cfg.fusion == FusionKind::concat_conv)
      m.concat_fuse = ConcatFuseParamsT<S>::init(bb.fusion_channels, rng);
    int64_t cin = bb.fusion_channels;
    for (size_t i = 0; i < bb.det_strides.size(); ++i) {
      m.trunk.push_back(
          ConvBnReluT<S>::init(cin, bb.trunk_channels, 2, rng, bb.bn_momentum, bb.bn_eps));
      cin = bb.trunk_channels;
    }
    const int64_t a = m.anchors_per_cell();
    const int64_t k1 = cfg.preset.num_classes + 1;
    for (size_t i = 0; i < bb.det_strides.size(); ++i) {
      m.cls_heads.push_back(HeadConvT<S>::init(bb.trunk_channels, a * k1, rng));
      m.box_heads.push_back(HeadConvT<S>::init(bb.trunk_channels, a * 4, rng));
    }
    return m;
  }

  TensorT<S> run_stem(std::vector<ConvBnReluT<S>>& stem, const TensorT<S>& x,
                      RunMode mode) {
    TensorT<S> y = x;
    for (auto& block : stem) y = block.forward(y, mode);
    return y;
  }

  ForwardResultT<S> forward(const TensorT<S>& visible, const TensorT<S>& thermal,
                            RunMode mode) {
    ForwardResultT<S> out;
    TensorT<S> fv, ft;
    if (has_visible_stream()) fv = run_stem(stem_v, visible, mode);
    if (has_thermal_stream()) ft = run_stem(stem_t, thermal, mode);
    switch (cfg.fusion) {
      case FusionKind::cfr: {
        out.trace = run_cycle(ft, fv, cfg.cfr, cfr_params, mode);
        out.fused = final_fusion(out.trace);
        break;
      }
      case FusionKind::average:
        out.fused = baseline_fuse(ft, fv, FuseStrategy::average);
        break;
      case FusionKind::max:
        out.fused = baseline_fuse(ft, fv, FuseStrategy::max);
        break;
      case FusionKind::concat_conv:
        out.fused = baseline_fuse(ft, fv, FuseStrategy::concat_conv, &concat_fuse);
        break;
      case FusionKind::visible_only:
        out.fused = fv;
        break;
      case FusionKind::thermal_only:
        out.fused = ft;
        break;
    }
    TensorT<S> y = out.fused;
    for (size_t i = 0; i < trunk.size(); ++i) {
      y = trunk[i].forward(y, mode);
      out.cls.push_back(cls_heads[i].forward(y));
      out.box.push_back(box_heads[i].forward(y));
    }
    return out;
  }

  void collect_learnable(std::vector<TensorT<S>>& out) {
    for (auto& b : stem_v) b.collect_learnable(out);
    for (auto& b : stem_t) b.collect_learnable(out);
    if (cfg.fusion == FusionKind::cfr) cfr_params.collect_learnable(out);
    if (cfg.fusion == FusionKind::concat_conv) concat_fuse.collect_learnable(out);
    for (auto& b : trunk) b.collect_learnable(out);
    for (size_t i = 0; i < cls_heads.size(); ++i) {
      cls_heads[i].collect_learnable(out);
      box_heads[i].collect_learnable(out);
    }
  }

  std::vector<StateEntry<S>> collect_state() {
    std::vector<StateEntry<S>> out;
    for (size_t i = 0; i < stem_v.size(); ++i)
      stem_v[i].collect_state("backbone_v.stem" + std::to_string(i), out);
    for (size_t i = 0; i < stem_t.size(); ++i)
      stem_t[i].collect_state("backbone_t.stem" + std::to_string(i), out);
    if (cfg.fusion == FusionKind::cfr) cfr_params.collect_state(out);
    if (cfg.fusion == FusionKind::concat_conv) concat_fuse.collect_state(out);
    for (size_t i = 0; i < trunk.size(); ++i)
      trunk[i].collect_state("head.trunk" + std::to_string(i), out);
    for (size_t i = 0; i < cls_heads.size(); ++i) {
      cls_heads[i].collect_state("head.cls" + std::to_string(i), out);
      box_heads[i].collect_state("head.box" + std::to_string(i), out);
    }
    return out;
  }

  int64_t parameter_count() {
    std::vector<TensorT<S>> ps;
    collect_learnable(ps);
    int64_t n = 0;
    for (const auto& p : ps) n += p.numel();
    return n;
  }
};

template <class S>
struct JointLossPartsT {
  TensorT<S> total;  // scalar with graph
  double cls = 0.0, loc = 0.0, seg = 0.0;  // detached, for logging
  int num_positive = 0;
};

namespace detail {

struct AnchorRef {
  int layer;
  int64_t channel_block;  // anchor-within-cell index a
  int64_t cell_y, cell_x;
};

inline AnchorRef locate_anchor(const AnchorLayout& layout, int64_t global) {
  for (size_t l = 0; l < layout.layers.size(); ++l) {
    const auto& lay = layout.layers[l];
    const int64_t count = lay.cells_y * lay.cells_x * lay.anchors_per_cell;
    if (global < lay.first_anchor + count) {
      const int64_t local = global - lay.first_anchor;
      const int64_t cell = local / lay.anchors_per_cell;
      AnchorRef r;
      r.layer = static_cast<int>(l);
      r.channel_block = local % lay.anchors_per_cell;
      r.cell_y = cell / lay.cells_x;
      r.cell_x = cell % lay.cells_x;
      return r;
    }
  }
  throw ContractError("anchor index out of range");
}

}  // namespace detail

/// Anchors entering the classification term: all positives plus the 3:1
/// hard-mined negatives per sample, ranked by background loss. Exposed so a
/// finite-difference check can freeze the (discrete) selection while probing
/// the smooth branch around a base point.
template <class S>
std::vector<uint8_t> mine_loss_selection(const ForwardResultT<S>& out,
                                         const AnchorLayout& layout,
                                         const std::vector<MatchResult>& matches) {
  const int64_t batch = out.cls.empty() ? 0 : out.cls[0].shape()[0];
  CFR_CHECK(static_cast<int64_t>(matches.size()) == batch,
            "joint_loss: one match result per sample required");
  const int64_t total_anchors = layout.total_anchors;
  const int64_t k1 = out.cls[0].shape()[1] / layout.layers[0].anchors_per_cell;
  std::vector<uint8_t> in_cls(batch * total_anchors, 0);
  for (int64_t n = 0; n < batch; ++n) {
    const MatchResult& match = matches[n];
    CFR_CHECK(static_cast<int64_t>(match.labels.size()) == total_anchors,
              "joint_loss: match size does not cover the anchor grid");
    int num_pos = 0;
    for (int64_t g = 0; g < total_anchors; ++g) {
      if (match.labels[g] >= 1) {
        in_cls[n * total_anchors + g] = 1;
        ++num_pos;
      }
    }
    // hard-negative mining: rank background anchors by -log p(background)
    std::vector<std::pair<double, int64_t>> cand;
    for (int64_t g = 0; g < total_anchors; ++g) {
      if (match.labels[g] != 0) continue;
      const auto ref = detail::locate_anchor(layout, g);
      const TensorT<S>& t = out.cls[ref.layer];
      const Shape& s = t.shape();
      double mx = -1e30, bg = 0.0;
      for (int64_t k = 0; k < k1; ++k) {
        const int64_t c = ref.channel_block * k1 + k;
        const double v = static_cast<double>(
            t.ptr()[((n * s[1] + c) * s[2] + ref.cell_y) * s[3] + ref.cell_x]);
        if (k == 0) bg = v;
        mx = std::max(mx, v);
      }
      double lse = 0.0;
      for (int64_t k = 0; k < k1; ++k) {
        const int64_t c = ref.channel_block * k1 + k;
        lse += std::exp(static_cast<double>(
                   t.ptr()[((n * s[1] + c) * s[2] + ref.cell_y) * s[3] + ref.cell_x]) -
               mx);
      }
      const double bg_loss = std::log(lse) + mx - bg;
      cand.emplace_back(bg_loss, g);
    }
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const size_t want = 3 * static_cast<size_t>(std::max(num_pos, 1));
    for (size_t i = 0; i < cand.size() && i < want; ++i)
      in_cls[n * total_anchors + cand[i].second] = 1;
  }
  return in_cls;
}

/// Joint detection + segmentation objective.
/// Detection: mean softmax CE over positives plus 3:1 hard-mined negatives
/// (per sample, hardest by background loss), plus mean smooth-L1 over encoded
/// offsets of positive anchors. Segmentation: seg_weight times the mean over
/// loops and spectra of sigmoid BCE against the downsampled ground-truth mask.
/// fixed_selection, when given, replaces the live mining result.
template <class S>
JointLossPartsT<S> joint_loss(const ForwardResultT<S>& out,
                              const AnchorLayout& layout,
                              const std::vector<MatchResult>& matches,
                              const TensorT<S>& gt_mask_ds, double seg_weight,
                              const std::vector<uint8_t>* fixed_selection = nullptr) {
  CFR_CHECK(seg_weight >= 0.0, "joint_loss: seg_weight must be >= 0");
  const int64_t batch = out.cls.empty() ? 0 : out.cls[0].shape()[0];
  const int64_t total_anchors = layout.total_anchors;
  const int64_t k1 = out.cls[0].shape()[1] / layout.layers[0].anchors_per_cell;

  const std::vector<uint8_t> in_cls =
      fixed_selection ? *fixed_selection : mine_loss_selection(out, layout, matches);
  CFR_CHECK(static_cast<int64_t>(in_cls.size()) == batch * total_anchors,
            "joint_loss: selection mask size mismatch");
  std::vector<uint8_t> in_loc(batch * total_anchors, 0);
  int num_pos_total = 0;
  for (int64_t n = 0; n < batch; ++n) {
    for (int64_t g = 0; g < total_anchors; ++g) {
      if (matches[n].labels[g] >= 1) {
        in_loc[n * total_anchors + g] = 1;
        ++num_pos_total;
      }
    }
  }

  // gather selected logits layer by layer, order: (layer, sample, anchor)
  std::vector<TensorT<S>> cls_parts, loc_parts;
  std::vector<int> ce_labels;
  std::vector<S> loc_targets;
  for (size_t l = 0; l < layout.layers.size(); ++l) {
    const auto& lay = layout.layers[l];
    const Shape& cs = out.cls[l].shape();
    const Shape& bs = out.box[l].shape();
    const int64_t layer_count = lay.cells_y * lay.cells_x * lay.anchors_per_cell;
    std::vector<int64_t> cls_idx, box_idx;
    for (int64_t n = 0; n < batch; ++n) {
      for (int64_t local = 0; local < layer_count; ++local) {
        const int64_t g = lay.first_anchor + local;
        const int64_t a = local % lay.anchors_per_cell;
        const int64_t cell = local / lay.anchors_per_cell;
        const int64_t ci = cell / lay.cells_x, cj = cell % lay.cells_x;
        if (in_cls[n * total_anchors + g]) {
          for (int64_t k = 0; k < k1; ++k) {
            const int64_t c = a * k1 + k;
            cls_idx.push_back(((n * cs[1] + c) * cs[2] + ci) * cs[3] + cj);
          }
          ce_labels.push_back(std::max(matches[n].labels[g], 0));
        }
        if (in_loc[n * total_anchors + g]) {
          for (int64_t k = 0; k < 4; ++k) {
            const int64_t c = a * 4 + k;
            box_idx.push_back(((n * bs[1] + c) * bs[2] + ci) * bs[3] + cj);
          }
          for (int64_t k = 0; k < 4; ++k)
            loc_targets.push_back(static_cast<S>(matches[n].deltas[g][k]));
        }
      }
    }
    if (!cls_idx.empty()) cls_parts.push_back(gather(out.cls[l], std::move(cls_idx)));
    if (!box_idx.empty()) loc_parts.push_back(gather(out.box[l], std::move(box_idx)));
  }

  JointLossPartsT<S> parts;
  parts.num_positive = num_pos_total;
  TensorT<S> total;
  if (!cls_parts.empty()) {
    TensorT<S> logits = reshape(concat_flat(cls_parts),
                                Shape{static_cast<int64_t>(ce_labels.size()), k1});
    TensorT<S> ce = softmax_ce(logits, ce_labels);
    parts.cls = static_cast<double>(ce.item());
    total = ce;
  } else {
    total = TensorT<S>::zeros(Shape{1});
  }
  if (!loc_parts.empty()) {
    TensorT<S> pred = reshape(concat_flat(loc_parts),
                              Shape{static_cast<int64_t>(loc_targets.size() / 4), 4});
    TensorT<S> target = TensorT<S>::from_data(pred.shape(), loc_targets);
    TensorT<S> l1 = smooth_l1(pred, target);
    parts.loc = static_cast<double>(l1.item());
    total = add(total, l1);
  }
  if (out.trace.loops() > 0 && gt_mask_ds.defined()) {
    std::vector<TensorT<S>> seg_terms;
    for (int i = 0; i < out.trace.loops(); ++i) {
      seg_terms.push_back(sigmoid_bce(out.trace.mask_logits_t[i], gt_mask_ds));
      seg_terms.push_back(sigmoid_bce(out.trace.mask_logits_v[i], gt_mask_ds));
    }
    TensorT<S> seg = mean_of_list(seg_terms);
    parts.seg = static_cast<double>(seg.item());
    if (seg_weight > 0.0) total = add(total, mul_scalar(seg, seg_weight));
  }
  parts.total = total;
  return parts;
}

/// Decodes one sample's detections: softmax confidences, offset decoding,
/// confidence filtering, then greedy per-class NMS (ties to the lower anchor
/// index). Boxes are clipped to the image; degenerate boxes are dropped.
template <class S>
std::vector<Detection> decode_detections(const ForwardResultT<S>& out, int64_t sample,
                                         const std::vector<AnchorBox>& anchors,
                                         const AnchorLayout& layout, int num_classes,
                                         double image_size, double nms_iou,
                                         double conf_threshold) {
  const int64_t k1 = num_classes + 1;
  std::vector<Detection> candidates;
  for (int64_t g = 0; g < layout.total_anchors; ++g) {
    const auto ref = detail::locate_anchor(layout, g);
    const TensorT<S>& ct = out.cls[ref.layer];
    const Shape& cs = ct.shape();
    double mx = -1e30;
    std::vector<double> logit(k1);
    for (int64_t k = 0; k < k1; ++k) {
      const int64_t c = ref.channel_block * k1 + k;
      logit[k] = static_cast<double>(
          ct.ptr()[((sample * cs[1] + c) * cs[2] + ref.cell_y) * cs[3] + ref.cell_x]);
      mx = std::max(mx, logit[k]);
    }
    double z = 0.0;
    for (int64_t k = 0; k < k1; ++k) z += std::exp(logit[k] - mx);
    bool any = false;
    for (int64_t k = 1; k < k1; ++k)
      if (std::exp(logit[k] - mx) / z >= conf_threshold) any = true;
    if (!any) continue;
    const TensorT<S>& bt = out.box[ref.layer];
    const Shape& bs = bt.shape();
    std::array<double, 4> deltas;
    for (int64_t k = 0; k < 4; ++k) {
      const int64_t c = ref.channel_block * 4 + k;
      deltas[k] = static_cast<double>(
          bt.ptr()[((sample * bs[1] + c) * bs[2] + ref.cell_y) * bs[3] + ref.cell_x]);
    }
    Box box = decode_box(deltas, anchors[g]);
    box.x1 = std::clamp(box.x1, 0.0, image_size);
    box.y1 = std::clamp(box.y1, 0.0, image_size);
    box.x2 = std::clamp(box.x2, 0.0, image_size);
    box.y2 = std::clamp(box.y2, 0.0, image_size);
    if (box.x2 <= box.x1 || box.y2 <= box.y1) continue;
    for (int64_t k = 1; k < k1; ++k) {
      const double conf = std::exp(logit[k] - mx) / z;
      if (conf < conf_threshold) continue;
      Detection d;
      d.box = box;
      d.class_id = static_cast<int>(k - 1);
      d.confidence = conf;
      d.anchor_index = g;
      candidates.push_back(d);
    }
  }
  return nms(std::move(candidates), nms_iou);
}

/// Inference on one visible/thermal pair (eval mode, no graph).
template <class S>
std::vector<Detection> detect(DetectorModelT<S>& model, const TensorT<S>& visible,
                              const TensorT<S>& thermal,
                              const std::vector<AnchorBox>& anchors,
                              const AnchorLayout& layout, double nms_iou,
                              double conf_threshold) {
  autograd::NoGradGuard no_grad;
  ForwardResultT<S> out = model.forward(visible, thermal, RunMode::eval);
  return decode_detections(out, 0, anchors, layout, model.num_classes(),
                           static_cast<double>(model.cfg.image_size), nms_iou,
                           conf_threshold);
}

}  // namespace cfr

#endif  // CFR_MODEL_HPP_
