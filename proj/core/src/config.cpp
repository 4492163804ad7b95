#include "cfr/config.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

namespace cfr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected unsigned integer, got '" + v + "'");
  }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::string cur;
  for (char c : v + ",") {
    if (c == ',') {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(parse_int(key, t));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

void RunConfig::apply_line(const std::string& key, const std::string& value) {
  if (key == "image_size") image_size = parse_int(key, value);
  else if (key == "n_train") n_train = parse_int(key, value);
  else if (key == "n_test") n_test = parse_int(key, value);
  else if (key == "object_count_min") object_count_min = parse_int(key, value);
  else if (key == "object_count_max") object_count_max = parse_int(key, value);
  else if (key == "object_size_min") object_size_min = parse_double(key, value);
  else if (key == "object_size_max") object_size_max = parse_double(key, value);
  else if (key == "p_both") p_both = parse_double(key, value);
  else if (key == "p_visible_only") p_visible_only = parse_double(key, value);
  else if (key == "p_thermal_only") p_thermal_only = parse_double(key, value);
  else if (key == "clutter") clutter = parse_int(key, value);
  else if (key == "noise_sigma") noise_sigma = parse_double(key, value);
  else if (key == "time_of_day") time_of_day = value;
  else if (key == "night_contrast") night_contrast = parse_double(key, value);
  else if (key == "preset") preset = value;
  else if (key == "fusion") fusion = value;
  else if (key == "loops") loops = parse_int(key, value);
  else if (key == "channels") channels = parse_int(key, value);
  else if (key == "trunk_channels") trunk_channels = parse_int(key, value);
  else if (key == "stem_channels") stem_channels = parse_int_list(key, value);
  else if (key == "anchor_scale_base") anchor_scale_base = parse_double(key, value);
  else if (key == "bn_momentum") bn_momentum = parse_double(key, value);
  else if (key == "bn_shared_stats") bn_shared_stats = parse_bool(key, value);
  else if (key == "lr") lr = parse_double(key, value);
  else if (key == "momentum") momentum = parse_double(key, value);
  else if (key == "epochs") epochs = parse_int(key, value);
  else if (key == "batch_size") batch_size = parse_int(key, value);
  else if (key == "seg_weight") seg_weight = parse_double(key, value);
  else if (key == "checkpoint_every") checkpoint_every = parse_int(key, value);
  else if (key == "augment") augment = parse_bool(key, value);
  else if (key == "iou_pos") iou_pos = parse_double(key, value);
  else if (key == "iou_neg") iou_neg = parse_double(key, value);
  else if (key == "nms_iou") nms_iou = parse_double(key, value);
  else if (key == "conf_threshold") conf_threshold = parse_double(key, value);
  else if (key == "ap_iou") ap_iou = parse_double(key, value);
  else if (key == "reasonable_min_height") reasonable_min_height = parse_double(key, value);
  else if (key == "loop_counts") loop_counts = parse_int_list(key, value);
  else if (key == "n_seeds") n_seeds = parse_int(key, value);
  else if (key == "data_dir") data_dir = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "checkpoint") checkpoint = value;
  else if (key == "dump_masks") dump_masks = parse_int(key, value);
  else if (key == "timing") timing = parse_bool(key, value);
  else if (key == "timing_warmup") timing_warmup = parse_int(key, value);
  else if (key == "timing_iters") timing_iters = parse_int(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    cfg.apply_line(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::validate() const {
  scene_spec();  // validates dataset keys
  parse_fusion_kind(fusion);
  make_preset(preset, anchor_scale_base);
  CFR_CHECK(n_train > 0 && n_test > 0, "config: n_train and n_test must be positive");
  CFR_CHECK(loops >= 0 && loops <= 8, "config: loops must be in [0, 8]");
  CFR_CHECK(channels > 0 && trunk_channels > 0, "config: channel widths must be positive");
  CFR_CHECK(lr > 0 && epochs > 0 && batch_size > 0, "config: bad trainer settings");
  CFR_CHECK(momentum >= 0 && momentum < 1, "config: momentum must be in [0, 1)");
  CFR_CHECK(seg_weight >= 0, "config: seg_weight must be >= 0");
  CFR_CHECK(iou_pos >= iou_neg, "config: iou_pos must be >= iou_neg");
  CFR_CHECK(n_seeds > 0, "config: n_seeds must be positive");
  for (int l : loop_counts)
    CFR_CHECK(l >= 0 && l <= 8, "config: loop_counts entries must be in [0, 8]");
  CFR_CHECK(timing_warmup >= 5 && timing_iters >= 50,
            "config: timing needs >=5 warmup and >=50 iterations");
}

std::string RunConfig::resolved() const {
  std::ostringstream os;
  os << "image_size = " << image_size << "\n";
  os << "n_train = " << n_train << "\n";
  os << "n_test = " << n_test << "\n";
  os << "object_count_min = " << object_count_min << "\n";
  os << "object_count_max = " << object_count_max << "\n";
  os << "object_size_min = " << fmt(object_size_min) << "\n";
  os << "object_size_max = " << fmt(object_size_max) << "\n";
  os << "p_both = " << fmt(p_both) << "\n";
  os << "p_visible_only = " << fmt(p_visible_only) << "\n";
  os << "p_thermal_only = " << fmt(p_thermal_only) << "\n";
  os << "clutter = " << clutter << "\n";
  os << "noise_sigma = " << fmt(noise_sigma) << "\n";
  os << "time_of_day = " << time_of_day << "\n";
  os << "night_contrast = " << fmt(night_contrast) << "\n";
  os << "preset = " << preset << "\n";
  os << "fusion = " << fusion << "\n";
  os << "loops = " << loops << "\n";
  os << "channels = " << channels << "\n";
  os << "trunk_channels = " << trunk_channels << "\n";
  os << "stem_channels = " << fmt(stem_channels) << "\n";
  os << "anchor_scale_base = " << fmt(anchor_scale_base) << "\n";
  os << "bn_momentum = " << fmt(bn_momentum) << "\n";
  os << "bn_shared_stats = " << (bn_shared_stats ? "true" : "false") << "\n";
  os << "lr = " << fmt(lr) << "\n";
  os << "momentum = " << fmt(momentum) << "\n";
  os << "epochs = " << epochs << "\n";
  os << "batch_size = " << batch_size << "\n";
  os << "seg_weight = " << fmt(seg_weight) << "\n";
  os << "checkpoint_every = " << checkpoint_every << "\n";
  os << "augment = " << (augment ? "true" : "false") << "\n";
  os << "iou_pos = " << fmt(iou_pos) << "\n";
  os << "iou_neg = " << fmt(iou_neg) << "\n";
  os << "nms_iou = " << fmt(nms_iou) << "\n";
  os << "conf_threshold = " << fmt(conf_threshold) << "\n";
  os << "ap_iou = " << fmt(ap_iou) << "\n";
  os << "reasonable_min_height = " << fmt(reasonable_min_height) << "\n";
  os << "loop_counts = " << fmt(loop_counts) << "\n";
  os << "n_seeds = " << n_seeds << "\n";
  os << "data_dir = " << data_dir << "\n";
  os << "out_dir = " << out_dir << "\n";
  os << "checkpoint = " << checkpoint << "\n";
  os << "dump_masks = " << dump_masks << "\n";
  os << "timing = " << (timing ? "true" : "false") << "\n";
  os << "timing_warmup = " << timing_warmup << "\n";
  os << "timing_iters = " << timing_iters << "\n";
  os << "seed = " << seed << "\n";
  return os.str();
}

SceneSpec RunConfig::scene_spec() const {
  SceneSpec spec;
  spec.image_size = image_size;
  spec.object_count_min = object_count_min;
  spec.object_count_max = object_count_max;
  spec.object_size_min = object_size_min;
  spec.object_size_max = object_size_max;
  spec.p_both = p_both;
  spec.p_visible_only = p_visible_only;
  spec.p_thermal_only = p_thermal_only;
  spec.clutter = clutter;
  spec.noise_sigma = noise_sigma;
  spec.time_of_day = parse_time_of_day(time_of_day);
  spec.night_contrast = night_contrast;
  spec.validate();
  return spec;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig mc;
  mc.image_size = image_size;
  mc.backbone.stem_channels.assign(stem_channels.begin(), stem_channels.end());
  mc.backbone.fusion_channels = channels;
  mc.backbone.trunk_channels = trunk_channels;
  mc.backbone.bn_momentum = bn_momentum;
  mc.cfr.channels = channels;
  mc.cfr.loops = loops;
  mc.cfr.bn_momentum = bn_momentum;
  mc.cfr.bn_stats_shared_across_loops = bn_shared_stats;
  mc.fusion = parse_fusion_kind(fusion);
  mc.preset = make_preset(preset, anchor_scale_base);
  return mc;
}

}  // namespace cfr
