#include "cfr/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numeric>

#include "cfr/augment.hpp"
#include "cfr/sgd.hpp"

namespace fs = std::filesystem;

namespace cfr {

namespace {

Tensor stack_batch(const std::vector<const Tensor*>& parts) {
  const Shape& s = parts[0]->shape();
  const int64_t per = s[1] * s[2] * s[3];
  Tensor out = Tensor::zeros(Shape{static_cast<int64_t>(parts.size()), s[1], s[2], s[3]});
  for (size_t i = 0; i < parts.size(); ++i)
    std::copy_n(parts[i]->ptr(), per, out.ptr() + static_cast<int64_t>(i) * per);
  return out;
}

}  // namespace

DetectorModelT<float> build_model(const RunConfig& cfg) {
  Rng rng(Rng::mix(cfg.seed, 1));
  return DetectorModelT<float>::init(cfg.model_config(), rng);
}

TrainResult train_model(const RunConfig& cfg, DetectorModelT<float>& model,
                        const std::vector<SpectralSample>& train_samples,
                        std::ostream& log, bool write_artifacts) {
  CFR_CHECK(!train_samples.empty(), "train: dataset is empty");
  AnchorLayout layout;
  const std::vector<AnchorBox> anchors = generate_anchors(
      cfg.image_size, model.cfg.preset.layers, model.cfg.preset.ratios, &layout);

  std::vector<TensorT<float>> params;
  model.collect_learnable(params);
  SgdOptimizer<float> opt(params, cfg.lr, cfg.momentum);

  TrainResult result;
  if (write_artifacts) fs::create_directories(cfg.out_dir);
  const int64_t ds_factor = model.cfg.backbone.downsample;
  const int n = static_cast<int>(train_samples.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(Rng::mix(cfg.seed, 100 + static_cast<uint64_t>(epoch)));
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

    EpochLog ep;
    ep.epoch = epoch;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int bsz = std::min(cfg.batch_size, n - start);
      std::vector<SpectralSample> batch;
      batch.reserve(bsz);
      for (int b = 0; b < bsz; ++b) {
        const int idx = order[start + b];
        if (cfg.augment) {
          Rng aug_rng(Rng::mix(cfg.seed,
                               1000003ull * static_cast<uint64_t>(epoch) + idx));
          batch.push_back(augment_pair(train_samples[idx], aug_rng));
        } else {
          batch.push_back(train_samples[idx]);
        }
      }
      std::vector<const Tensor*> vis, thm, masks;
      std::vector<Tensor> masks_ds;
      std::vector<MatchResult> matches;
      for (const SpectralSample& s : batch) {
        vis.push_back(&s.visible);
        thm.push_back(&s.thermal);
        masks_ds.push_back(downsample_mask(s.gt.mask, ds_factor));
        matches.push_back(match_anchors(anchors, s.gt.boxes, cfg.iou_pos, cfg.iou_neg));
      }
      for (const Tensor& m : masks_ds) masks.push_back(&m);
      Tensor vis_batch = stack_batch(vis);
      Tensor thm_batch = stack_batch(thm);
      Tensor mask_batch = stack_batch(masks);

      ForwardResultT<float> out = model.forward(vis_batch, thm_batch, RunMode::train);
      JointLossPartsT<float> loss =
          joint_loss(out, layout, matches, mask_batch, cfg.seg_weight);
      const double joint = static_cast<double>(loss.total.item());
      if (!std::isfinite(joint)) {
        // rerun with per-op finite checks to name the offending op
        autograd::check_finite() = true;
        std::string op = "unknown";
        try {
          ForwardResultT<float> probe = model.forward(vis_batch, thm_batch, RunMode::train);
          joint_loss(probe, layout, matches, mask_batch, cfg.seg_weight);
        } catch (const NumericError& e) {
          op = e.op_name;
        }
        autograd::check_finite() = false;
        throw Error("non-finite loss in epoch " + std::to_string(epoch) + " batch " +
                    std::to_string(batches) + " (first sample '" + batch[0].id +
                    "'), op: " + op);
      }
      opt.zero_grad();
      loss.total.backward();
      opt.step();

      ep.joint += joint;
      ep.cls += loss.cls;
      ep.loc += loss.loc;
      ep.seg += loss.seg;
      ++batches;
    }
    ep.joint /= batches;
    ep.cls /= batches;
    ep.loc /= batches;
    ep.seg /= batches;
    result.epochs.push_back(ep);
    log << "epoch " << std::setw(3) << (epoch + 1) << "/" << cfg.epochs << "  joint "
        << std::fixed << std::setprecision(5) << ep.joint << "  det_cls " << ep.cls
        << "  det_loc " << ep.loc << "  seg " << ep.seg << "\n";
    log.flush();

    if (write_artifacts && cfg.checkpoint_every > 0 &&
        (epoch + 1) % cfg.checkpoint_every == 0 && epoch + 1 < cfg.epochs) {
      auto state = model.collect_state();
      save_checkpoint((fs::path(cfg.out_dir) /
                       ("checkpoint_epoch" + std::to_string(epoch + 1) + ".cfrckpt"))
                          .string(),
                      state_to_named(state));
    }
  }

  if (write_artifacts) {
    auto state = model.collect_state();
    result.checkpoint_path = (fs::path(cfg.out_dir) / "checkpoint.cfrckpt").string();
    save_checkpoint(result.checkpoint_path, state_to_named(state));
  }
  return result;
}

}  // namespace cfr
