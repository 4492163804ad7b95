#ifndef CFR_SYNTHETIC_HPP_
#define CFR_SYNTHETIC_HPP_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cfr/sample.hpp"

namespace cfr {

enum class TimeOfDay { day, night };

inline TimeOfDay parse_time_of_day(const std::string& s) {
  if (s == "day") return TimeOfDay::day;
  if (s == "night") return TimeOfDay::night;
  throw ConfigError("time_of_day must be day or night");
}

/// Scene recipe. Objects are upright ellipses with a pedestrian-like aspect
/// ratio; what each spectrum shows is controlled by per-object visibility
/// tags drawn from (p_both, p_visible_only, p_thermal_only).
struct SceneSpec {
  int image_size = 96;
  int object_count_min = 1;
  int object_count_max = 4;
  double object_size_min = 16.0;  // object height in pixels
  double object_size_max = 48.0;
  double p_both = 0.5;
  double p_visible_only = 0.25;
  double p_thermal_only = 0.25;
  int clutter = 4;           // distractor shapes per spectrum
  double noise_sigma = 0.02;
  TimeOfDay time_of_day = TimeOfDay::day;
  double night_contrast = 0.25;  // visible-contrast multiplier at night

  void validate() const;
  std::map<std::string, std::string> describe() const;
};

/// Renders one aligned visible/thermal pair. Deterministic in (spec, seed).
SpectralSample generate_scene(const SceneSpec& spec, uint64_t seed);

/// One dataset row; paths are relative to the dataset directory.
struct ManifestEntry {
  std::string id;
  std::string visible_path, thermal_path, mask_path;
  std::vector<BoxAnn> boxes;
  std::vector<Visibility> tags;
  uint64_t sample_seed = 0;
  bool placement_reduced = false;
};

struct Manifest {
  std::string split;  // train | test
  std::map<std::string, std::string> header;  // resolved spec + seed
  std::vector<ManifestEntry> entries;
};

/// Writes n_train + n_test samples (tensor files) plus two manifests under
/// out_dir. Train and test draw from disjoint seed streams. The parent of
/// out_dir must already exist; no partial manifest is left on failure.
struct DatasetPaths {
  std::string train_manifest;
  std::string test_manifest;
};
DatasetPaths generate_dataset(const SceneSpec& spec, int n_train, int n_test,
                              uint64_t seed, const std::string& out_dir);

Manifest load_manifest(const std::string& path);

/// Reloads one sample from its tensor files.
SpectralSample load_sample(const std::string& dataset_dir, const ManifestEntry& entry);

std::vector<SpectralSample> load_split(const std::string& dataset_dir,
                                       const std::string& split);

/// Hook for exporting samples to an external format (e.g. image files keyed
/// by sample id). The library itself ships no converter; callers supply one.
using SampleConverter =
    std::function<void(const SpectralSample& sample, const std::string& id)>;

void convert_dataset(const std::string& dataset_dir, const std::string& split,
                     const SampleConverter& converter);

}  // namespace cfr

#endif  // CFR_SYNTHETIC_HPP_
