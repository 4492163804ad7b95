#include "cfr/evaluator.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;

namespace cfr {

namespace {

void dump_mask_pgm(const std::string& path, const Tensor& logits_or_mask, bool is_logits) {
  const Shape& s = logits_or_mask.shape();
  const int64_t h = s[2], w = s[3];
  const std::vector<uint8_t> bin = is_logits ? binarize_logits(logits_or_mask)
                                             : binarize_values(logits_or_mask);
  std::vector<uint8_t> gray(bin.size());
  for (size_t i = 0; i < bin.size(); ++i) gray[i] = bin[i] ? 255 : 0;
  write_pgm(path, h, w, gray);
}

}  // namespace

std::vector<std::pair<int, TimingStat>> time_loop_counts(
    DetectorModelT<float>& model, const SpectralSample& sample,
    const std::vector<int>& loop_counts, int warmup, int iters) {
  autograd::NoGradGuard no_grad;
  std::vector<std::pair<int, TimingStat>> out;
  const int saved = model.cfg.cfr.loops;
  for (int loops : loop_counts) {
    if (model.cfg.fusion == FusionKind::cfr) {
      if (loops < 1) continue;
      model.cfg.cfr.loops = loops;
    }
    TimingStat stat = timing_profile(
        [&]() { model.forward(sample.visible, sample.thermal, RunMode::eval); }, warmup,
        iters);
    out.emplace_back(loops, stat);
    if (model.cfg.fusion != FusionKind::cfr) break;  // loop count is irrelevant
  }
  model.cfg.cfr.loops = saved;
  return out;
}

EvalReport evaluate_model(const RunConfig& cfg, DetectorModelT<float>& model,
                          const std::vector<SpectralSample>& test_samples,
                          const std::string& out_dir, std::ostream* log) {
  CFR_CHECK(!test_samples.empty(), "eval: dataset is empty");
  AnchorLayout layout;
  const std::vector<AnchorBox> anchors = generate_anchors(
      cfg.image_size, model.cfg.preset.layers, model.cfg.preset.ratios, &layout);

  EvalReport report;
  report.config_resolved = cfg.resolved();
  report.n_images = static_cast<int>(test_samples.size());
  const double min_height = cfg.resolved_min_height();

  std::vector<EvalDetection> dets;
  std::vector<EvalGroundTruth> gts;
  std::vector<double> dice_sums;
  std::ostringstream det_csv;
  det_csv << "image_id,class,x1,y1,x2,y2,confidence\n";
  det_csv << std::fixed << std::setprecision(4);

  const bool dump = !out_dir.empty() && cfg.dump_masks > 0;
  if (dump) fs::create_directories(fs::path(out_dir) / "masks");

  autograd::NoGradGuard no_grad;
  for (int i = 0; i < report.n_images; ++i) {
    const SpectralSample& s = test_samples[i];
    ForwardResultT<float> out = model.forward(s.visible, s.thermal, RunMode::eval);
    std::vector<Detection> sample_dets =
        decode_detections(out, 0, anchors, layout, model.num_classes(),
                          static_cast<double>(cfg.image_size), cfg.nms_iou,
                          cfg.conf_threshold);
    for (const Detection& d : sample_dets) {
      dets.push_back({i, d.class_id, d.box, d.confidence});
      det_csv << i << "," << d.class_id << "," << d.box.x1 << "," << d.box.y1 << ","
              << d.box.x2 << "," << d.box.y2 << "," << d.confidence << "\n";
    }
    for (const BoxAnn& ann : s.gt.boxes) {
      EvalGroundTruth g;
      g.image_id = i;
      g.class_id = ann.class_id;
      g.box = ann.box;
      g.ignore = ann.box.h() < min_height;
      gts.push_back(g);
      if (!g.ignore) ++report.n_gt;
    }
    if (out.trace.loops() > 0) {
      if (dice_sums.empty()) dice_sums.assign(out.trace.loops(), 0.0);
      for (int l = 0; l < out.trace.loops(); ++l) {
        dice_sums[l] += dice_score(binarize_logits(out.trace.mask_logits_t[l]),
                                   binarize_logits(out.trace.mask_logits_v[l]));
      }
      if (dump && i < cfg.dump_masks) {
        const fs::path mdir = fs::path(out_dir) / "masks";
        for (int l = 0; l < out.trace.loops(); ++l) {
          dump_mask_pgm((mdir / (s.id + "_loop" + std::to_string(l + 1) + "_t.pgm")).string(),
                        out.trace.mask_logits_t[l], true);
          dump_mask_pgm((mdir / (s.id + "_loop" + std::to_string(l + 1) + "_v.pgm")).string(),
                        out.trace.mask_logits_v[l], true);
        }
        dump_mask_pgm((mdir / (s.id + "_gt.pgm")).string(),
                      downsample_mask(s.gt.mask, model.cfg.backbone.downsample), false);
      }
    }
  }
  for (double d : dice_sums) report.dice_per_loop.push_back(d / report.n_images);

  report.map = mean_average_precision(dets, gts, cfg.ap_iou, model.num_classes());
  report.lamr = log_average_miss_rate(dets, gts, cfg.ap_iou, report.n_images, 0);
  if (log) {
    for (int c : report.map.skipped_classes)
      *log << "note: class " << c << " has no ground truth, excluded from mAP\n";
  }

  if (cfg.timing) {
    std::vector<int> counts = model.cfg.fusion == FusionKind::cfr
                                  ? std::vector<int>{1, 2, 3, 4}
                                  : std::vector<int>{0};
    report.timing = time_loop_counts(model, test_samples[0], counts, cfg.timing_warmup,
                                     cfg.timing_iters);
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    {
      std::ofstream os(fs::path(out_dir) / "detections.csv", std::ios::binary);
      if (!os) throw IoError("cannot write detections.csv under " + out_dir);
      os << det_csv.str();
    }
    {
      std::ofstream os(fs::path(out_dir) / "report.txt", std::ios::binary);
      if (!os) throw IoError("cannot write report.txt under " + out_dir);
      os << format_report(report);
    }
    {
      std::ofstream os(fs::path(out_dir) / "report.csv", std::ios::binary);
      if (!os) throw IoError("cannot write report.csv under " + out_dir);
      os << "metric,value\n" << std::setprecision(10);
      os << "map," << report.map.map << "\n";
      for (const auto& [c, ap] : report.map.per_class)
        os << "ap.class" << c << "," << ap << "\n";
      os << "lamr," << (report.lamr.defined ? std::to_string(report.lamr.value) : "absent")
         << "\n";
      for (size_t l = 0; l < report.dice_per_loop.size(); ++l)
        os << "dice.loop" << (l + 1) << "," << report.dice_per_loop[l] << "\n";
      os << "n_images," << report.n_images << "\n";
      os << "n_gt," << report.n_gt << "\n";
    }
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream os;
  os << "# cfr evaluation report\n";
  os << "[config]\n" << report.config_resolved;
  os << "[metrics]\n" << std::setprecision(10);
  os << "map = " << report.map.map << "\n";
  for (const auto& [c, ap] : report.map.per_class) os << "ap.class" << c << " = " << ap << "\n";
  for (int c : report.map.skipped_classes) os << "ap.class" << c << " = absent\n";
  os << "lamr = " << (report.lamr.defined ? std::to_string(report.lamr.value) : "absent")
     << "\n";
  for (size_t l = 0; l < report.dice_per_loop.size(); ++l)
    os << "dice.loop" << (l + 1) << " = " << report.dice_per_loop[l] << "\n";
  os << "n_images = " << report.n_images << "\n";
  os << "n_gt = " << report.n_gt << "\n";
  if (!report.timing.empty()) {
    os << "[timing]\n";
    for (const auto& [loops, stat] : report.timing) {
      os << "loops" << loops << ".median_ms = " << stat.median_ms << "\n";
      os << "loops" << loops << ".iqr_ms = " << stat.iqr_ms << "\n";
    }
  }
  return os.str();
}

}  // namespace cfr
