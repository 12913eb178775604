#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "giuda/pointcloud.hpp"
#include "giuda/rng.hpp"

namespace giuda {

struct OcclusionSpec {
  double fraction = 0.3;  // of points removed from the far side
};

struct DomainProfile {
  std::size_t points_per_cloud = 1024;
  double noise_sigma = 0.0;
  std::optional<OcclusionSpec> occlusion;

  void validate() const {
    if (points_per_cloud < 32)
      throw std::invalid_argument("DomainProfile: points_per_cloud must be >= 32");
    if (occlusion && (occlusion->fraction < 0.0 || occlusion->fraction >= 1.0))
      throw std::invalid_argument("DomainProfile: occlusion fraction in [0,1)");
  }
};

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  int label = 0;
};

struct DatasetManifest {
  std::string root;
  std::vector<ManifestEntry> entries;
  std::size_t class_count = 0;
};

// Shape classes: 0 = unit sphere surface, 1 = cube surface (half width 0.5),
// 2 = cylinder surface (radius 0.5, height 1); sampled uniformly by area,
// then normalized to unit scale.
PointCloud gen_shape(int class_id, std::size_t n, Rng& rng);

constexpr std::size_t kShapeClassCount = 3;

// Subsample, Gaussian jitter, half-space occlusion along a random direction,
// then re-normalize. Label preserved.
PointCloud apply_domain_shift(const PointCloud& cloud,
                              const DomainProfile& profile, Rng& rng);

// Writes <out_root>/source and <out_root>/target trees of XYZ files plus
// manifest.csv files ("path,label" header) with balanced classes.
// Returns {source, target} manifests.
std::pair<DatasetManifest, DatasetManifest> gen_dataset(
    std::size_t class_count, std::size_t per_class_count,
    const DomainProfile& profile_a, const DomainProfile& profile_b,
    std::uint64_t seed, const std::string& out_root);

DatasetManifest load_manifest(const std::string& manifest_path);
void save_manifest(const DatasetManifest& manifest,
                   const std::string& manifest_path);

// Loads every cloud of the manifest, labels attached.
std::vector<PointCloud> load_dataset(const DatasetManifest& manifest);

}  // namespace giuda
