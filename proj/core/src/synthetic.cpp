#include "cfr/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cfr/rng.hpp"
#include "cfr/serialize.hpp"

namespace fs = std::filesystem;

namespace cfr {

void SceneSpec::validate() const {
  CFR_CHECK(image_size >= 16, "scene: image_size too small");
  CFR_CHECK(object_count_min >= 0 && object_count_max >= object_count_min,
            "scene: bad object count range");
  CFR_CHECK(object_size_min > 0 && object_size_max >= object_size_min,
            "scene: bad object size range");
  CFR_CHECK(object_size_max < image_size, "scene: objects must fit in the image");
  CFR_CHECK(p_both >= 0 && p_visible_only >= 0 && p_thermal_only >= 0,
            "scene: probabilities must be non-negative");
  CFR_CHECK(std::abs(p_both + p_visible_only + p_thermal_only - 1.0) <= 1e-9,
            "scene: visibility probabilities must sum to 1");
  CFR_CHECK(noise_sigma >= 0, "scene: noise_sigma must be >= 0");
  CFR_CHECK(clutter >= 0, "scene: clutter must be >= 0");
}

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// pedestrian-like upright aspect, matching the anchor family
constexpr double kObjectAspect = 0.41;

struct Ellipse {
  double cx, cy, rx, ry;

  bool contains(double px, double py) const {
    const double dx = (px - cx) / rx, dy = (py - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
  }
};

void add_ellipse(float* plane, int64_t w, int64_t h, const Ellipse& e,
                 const std::function<double(double, double)>& value) {
  const int64_t y0 = std::max<int64_t>(0, static_cast<int64_t>(e.cy - e.ry) - 1);
  const int64_t y1 = std::min<int64_t>(h - 1, static_cast<int64_t>(e.cy + e.ry) + 1);
  const int64_t x0 = std::max<int64_t>(0, static_cast<int64_t>(e.cx - e.rx) - 1);
  const int64_t x1 = std::min<int64_t>(w - 1, static_cast<int64_t>(e.cx + e.rx) + 1);
  for (int64_t y = y0; y <= y1; ++y) {
    for (int64_t x = x0; x <= x1; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      if (e.contains(px, py)) plane[y * w + x] += static_cast<float>(value(px, py));
    }
  }
}

void add_rect(float* plane, int64_t w, int64_t h, const Box& b, double value) {
  const int64_t y0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(b.y1)));
  const int64_t y1 = std::min<int64_t>(h - 1, static_cast<int64_t>(std::ceil(b.y2)));
  const int64_t x0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(b.x1)));
  const int64_t x1 = std::min<int64_t>(w - 1, static_cast<int64_t>(std::ceil(b.x2)));
  for (int64_t y = y0; y <= y1; ++y) {
    const double py = y + 0.5;
    if (py <= b.y1 || py >= b.y2) continue;
    for (int64_t x = x0; x <= x1; ++x) {
      const double px = x + 0.5;
      if (px > b.x1 && px < b.x2) plane[y * w + x] += static_cast<float>(value);
    }
  }
}

void clamp01(Tensor& t) {
  for (float& v : t.data()) v = std::min(1.0f, std::max(0.0f, v));
}

}  // namespace

std::map<std::string, std::string> SceneSpec::describe() const {
  return {
      {"image_size", std::to_string(image_size)},
      {"object_count_min", std::to_string(object_count_min)},
      {"object_count_max", std::to_string(object_count_max)},
      {"object_size_min", fmt_double(object_size_min)},
      {"object_size_max", fmt_double(object_size_max)},
      {"p_both", fmt_double(p_both)},
      {"p_visible_only", fmt_double(p_visible_only)},
      {"p_thermal_only", fmt_double(p_thermal_only)},
      {"clutter", std::to_string(clutter)},
      {"noise_sigma", fmt_double(noise_sigma)},
      {"time_of_day", time_of_day == TimeOfDay::day ? "day" : "night"},
      {"night_contrast", fmt_double(night_contrast)},
  };
}

SpectralSample generate_scene(const SceneSpec& spec, uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const int64_t n = spec.image_size;
  const double vis_scale =
      spec.time_of_day == TimeOfDay::night ? spec.night_contrast : 1.0;

  SpectralSample sample;
  sample.seed = seed;
  sample.visible = Tensor::zeros(Shape{1, 3, n, n});
  sample.thermal = Tensor::zeros(Shape{1, 1, n, n});

  // smooth backgrounds with a shared gradient direction per spectrum
  double vis_base[3];
  for (double& b : vis_base) b = rng.uniform(0.30, 0.55);
  const double vgx = rng.uniform(-0.08, 0.08), vgy = rng.uniform(-0.08, 0.08);
  const double thm_base = rng.uniform(0.20, 0.40);
  const double tgx = rng.uniform(-0.08, 0.08), tgy = rng.uniform(-0.08, 0.08);
  for (int64_t c = 0; c < 3; ++c) {
    float* plane = sample.visible.ptr() + c * n * n;
    for (int64_t y = 0; y < n; ++y)
      for (int64_t x = 0; x < n; ++x)
        plane[y * n + x] = static_cast<float>(vis_base[c] + vgx * (2.0 * x / n - 1) +
                                              vgy * (2.0 * y / n - 1));
  }
  for (int64_t y = 0; y < n; ++y)
    for (int64_t x = 0; x < n; ++x)
      sample.thermal.ptr()[y * n + x] = static_cast<float>(
          thm_base + tgx * (2.0 * x / n - 1) + tgy * (2.0 * y / n - 1));

  // place objects by rejection sampling (max 100 attempts per object)
  const int want =
      spec.object_count_min +
      static_cast<int>(rng.uniform_int(spec.object_count_max - spec.object_count_min + 1));
  std::vector<Ellipse> shapes;
  for (int obj = 0; obj < want; ++obj) {
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      const double h = rng.uniform(spec.object_size_min, spec.object_size_max);
      const double w = h * kObjectAspect;
      if (w + 2 >= n || h + 2 >= n) continue;
      const double cx = rng.uniform(w / 2 + 1, n - w / 2 - 1);
      const double cy = rng.uniform(h / 2 + 1, n - h / 2 - 1);
      const Box box{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
      bool overlaps = false;
      for (const BoxAnn& prev : sample.gt.boxes)
        if (iou(prev.box, box) > 0.3) overlaps = true;
      if (overlaps) continue;
      shapes.push_back({cx, cy, w / 2, h / 2});
      sample.gt.boxes.push_back({box, 0});
      placed = true;
    }
    if (!placed) {
      sample.placement_reduced = true;
      break;
    }
  }

  // visibility tags and per-spectrum rendering
  for (size_t i = 0; i < shapes.size(); ++i) {
    const Ellipse& e = shapes[i];
    const double u = rng.uniform();
    Visibility tag = Visibility::both;
    if (u >= spec.p_both)
      tag = u < spec.p_both + spec.p_visible_only ? Visibility::visible_only
                                                  : Visibility::thermal_only;
    sample.gt.visibility.push_back(tag);

    if (tag != Visibility::thermal_only) {
      // textured color contrast; sign shared across channels
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      double mag[3];
      for (double& m : mag) m = rng.uniform(0.35, 0.60);
      const double period = rng.uniform(4.0, 8.0);
      const double phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      for (int64_t c = 0; c < 3; ++c) {
        float* plane = sample.visible.ptr() + c * n * n;
        const double amp = sign * mag[c] * vis_scale;
        add_ellipse(plane, n, n, e, [&](double, double py) {
          return amp * (1.0 + 0.2 * std::sin(2.0 * 3.14159265358979323846 * py / period +
                                             phase));
        });
      }
    }
    if (tag != Visibility::visible_only) {
      // warm blob with a mild radial falloff
      const double heat = rng.uniform(0.35, 0.60);
      add_ellipse(sample.thermal.ptr(), n, n, e, [&](double px, double py) {
        const double dx = (px - e.cx) / e.rx, dy = (py - e.cy) / e.ry;
        return heat * (1.0 - 0.3 * (dx * dx + dy * dy));
      });
    }
  }

  // spectrum-specific clutter (distractors, never annotated)
  for (int spectrum = 0; spectrum < 2; ++spectrum) {
    for (int i = 0; i < spec.clutter; ++i) {
      const double sx = rng.uniform(4.0, 16.0);
      const double sy = rng.uniform(4.0, 16.0);
      const double cx = rng.uniform(0.0, static_cast<double>(n));
      const double cy = rng.uniform(0.0, static_cast<double>(n));
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      const double mag = rng.uniform(0.05, 0.18);
      const bool rect = rng.bernoulli(0.5);
      if (spectrum == 0) {
        const double amp = sign * mag * vis_scale;
        for (int64_t c = 0; c < 3; ++c) {
          float* plane = sample.visible.ptr() + c * n * n;
          if (rect)
            add_rect(plane, n, n, {cx - sx / 2, cy - sy / 2, cx + sx / 2, cy + sy / 2}, amp);
          else
            add_ellipse(plane, n, n, {cx, cy, sx / 2, sy / 2},
                        [&](double, double) { return amp; });
        }
      } else {
        const double amp = sign * mag;
        if (rect)
          add_rect(sample.thermal.ptr(), n, n,
                   {cx - sx / 2, cy - sy / 2, cx + sx / 2, cy + sy / 2}, amp);
        else
          add_ellipse(sample.thermal.ptr(), n, n, {cx, cy, sx / 2, sy / 2},
                      [&](double, double) { return amp; });
      }
    }
  }

  if (spec.noise_sigma > 0) {
    for (float& v : sample.visible.data())
      v += static_cast<float>(rng.normal(0.0, spec.noise_sigma));
    for (float& v : sample.thermal.data())
      v += static_cast<float>(rng.normal(0.0, spec.noise_sigma));
  }
  clamp01(sample.visible);
  clamp01(sample.thermal);

  sample.gt.mask = rasterize_boxes(sample.gt.boxes, n, n);
  return sample;
}

namespace {

std::string boxes_field(const std::vector<BoxAnn>& boxes) {
  if (boxes.empty()) return "-";
  std::ostringstream os;
  os << std::setprecision(17);
  for (size_t i = 0; i < boxes.size(); ++i) {
    if (i) os << ";";
    os << boxes[i].box.x1 << "," << boxes[i].box.y1 << "," << boxes[i].box.x2 << ","
       << boxes[i].box.y2 << "," << boxes[i].class_id;
  }
  return os.str();
}

std::string tags_field(const std::vector<Visibility>& tags) {
  if (tags.empty()) return "-";
  std::string out;
  for (size_t i = 0; i < tags.size(); ++i) {
    if (i) out += ";";
    out += visibility_name(tags[i]);
  }
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open manifest for write: " + path);
  os << "# cfr-dataset v1\n";
  os << "# split " << manifest.split << "\n";
  for (const auto& [k, v] : manifest.header) os << "# " << k << " = " << v << "\n";
  os << "id\tvisible\tthermal\tmask\tboxes\ttags\tsample_seed\tplacement_reduced\n";
  for (const ManifestEntry& e : manifest.entries) {
    os << e.id << "\t" << e.visible_path << "\t" << e.thermal_path << "\t" << e.mask_path
       << "\t" << boxes_field(e.boxes) << "\t" << tags_field(e.tags) << "\t"
       << e.sample_seed << "\t" << (e.placement_reduced ? 1 : 0) << "\n";
  }
  if (!os) throw IoError("manifest write failed: " + path);
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  Manifest m;
  std::string line;
  bool saw_columns = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find(" = ");
      if (body.rfind("split ", 0) == 0) {
        m.split = body.substr(6);
      } else if (eq != std::string::npos) {
        m.header[body.substr(0, eq)] = body.substr(eq + 3);
      }
      continue;
    }
    if (!saw_columns) {  // column header row
      saw_columns = true;
      continue;
    }
    const auto cols = split_on(line, '\t');
    if (cols.size() != 8) throw IoError("manifest row with wrong column count: " + path);
    ManifestEntry e;
    e.id = cols[0];
    e.visible_path = cols[1];
    e.thermal_path = cols[2];
    e.mask_path = cols[3];
    if (cols[4] != "-") {
      for (const std::string& b : split_on(cols[4], ';')) {
        const auto f = split_on(b, ',');
        if (f.size() != 5) throw IoError("bad boxes field in manifest: " + path);
        BoxAnn ann;
        ann.box = {std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])};
        ann.class_id = std::stoi(f[4]);
        e.boxes.push_back(ann);
      }
    }
    if (cols[5] != "-")
      for (const std::string& t : split_on(cols[5], ';')) e.tags.push_back(parse_visibility(t));
    e.sample_seed = std::stoull(cols[6]);
    e.placement_reduced = cols[7] == "1";
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetPaths generate_dataset(const SceneSpec& spec, int n_train, int n_test,
                              uint64_t seed, const std::string& out_dir) {
  spec.validate();
  CFR_CHECK(n_train > 0 && n_test > 0, "generate_dataset: n_train and n_test must be > 0");
  const fs::path root = fs::absolute(out_dir).lexically_normal();
  if (!fs::exists(root.parent_path()))
    throw IoError("parent directory does not exist: " + root.parent_path().string());
  std::error_code ec;
  fs::create_directory(root, ec);
  if (ec && !fs::is_directory(root))
    throw IoError("cannot create output directory: " + root.string());
  fs::create_directory(root / "samples", ec);
  if (!fs::is_directory(root / "samples"))
    throw IoError("cannot create samples directory under: " + root.string());

  auto emit_split = [&](const std::string& split, int count, uint64_t salt_base) {
    Manifest manifest;
    manifest.split = split;
    manifest.header = spec.describe();
    manifest.header["seed"] = std::to_string(seed);
    manifest.header["count"] = std::to_string(count);
    for (int i = 0; i < count; ++i) {
      const uint64_t sample_seed = Rng::mix(seed, salt_base + static_cast<uint64_t>(i));
      SpectralSample s = generate_scene(spec, sample_seed);
      std::ostringstream id;
      id << split << "_" << std::setw(6) << std::setfill('0') << i;
      s.id = id.str();
      ManifestEntry e;
      e.id = s.id;
      e.visible_path = "samples/" + s.id + "_visible.cfrt";
      e.thermal_path = "samples/" + s.id + "_thermal.cfrt";
      e.mask_path = "samples/" + s.id + "_mask.cfrt";
      e.boxes = s.gt.boxes;
      e.tags = s.gt.visibility;
      e.sample_seed = sample_seed;
      e.placement_reduced = s.placement_reduced;
      save_tensor_file((root / e.visible_path).string(), s.visible);
      save_tensor_file((root / e.thermal_path).string(), s.thermal);
      save_tensor_file((root / e.mask_path).string(), s.gt.mask);
      manifest.entries.push_back(std::move(e));
    }
    const std::string path = (root / ("manifest_" + split + ".tsv")).string();
    write_manifest(path, manifest);
    return path;
  };

  DatasetPaths paths;
  paths.train_manifest = emit_split("train", n_train, 0);
  paths.test_manifest = emit_split("test", n_test, 1000000000ull);
  return paths;
}

SpectralSample load_sample(const std::string& dataset_dir, const ManifestEntry& entry) {
  const fs::path root(dataset_dir);
  SpectralSample s;
  s.id = entry.id;
  s.visible = load_tensor_file<float>((root / entry.visible_path).string());
  s.thermal = load_tensor_file<float>((root / entry.thermal_path).string());
  s.gt.mask = load_tensor_file<float>((root / entry.mask_path).string());
  s.gt.boxes = entry.boxes;
  s.gt.visibility = entry.tags;
  s.seed = entry.sample_seed;
  s.placement_reduced = entry.placement_reduced;
  return s;
}

std::vector<SpectralSample> load_split(const std::string& dataset_dir,
                                       const std::string& split) {
  const Manifest m =
      load_manifest((fs::path(dataset_dir) / ("manifest_" + split + ".tsv")).string());
  std::vector<SpectralSample> out;
  out.reserve(m.entries.size());
  for (const ManifestEntry& e : m.entries) out.push_back(load_sample(dataset_dir, e));
  return out;
}

void convert_dataset(const std::string& dataset_dir, const std::string& split,
                     const SampleConverter& converter) {
  const Manifest m =
      load_manifest((fs::path(dataset_dir) / ("manifest_" + split + ".tsv")).string());
  for (const ManifestEntry& e : m.entries) converter(load_sample(dataset_dir, e), e.id);
}

}  // namespace cfr
