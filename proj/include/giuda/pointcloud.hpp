#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "giuda/rng.hpp"

namespace giuda {

using Point3 = std::array<double, 3>;

struct PointCloud {
  std::vector<Point3> points;
  std::optional<int> label;

  std::size_t size() const { return points.size(); }
};

// Text XYZ I/O: one "x y z" line per point, '#' starts a comment line,
// blank lines ignored. Coordinates written with 17 significant digits.
PointCloud load_xyz(const std::string& path);
void save_xyz(const PointCloud& cloud, const std::string& path);

// Subtracts the centroid and scales uniformly so max |coordinate| = 0.5.
PointCloud normalize_unit_scale(const PointCloud& cloud);

// Brings the cloud to exactly target_count points: subsample uniformly
// without replacement if too large, append duplicates drawn uniformly with
// replacement if too small.
PointCloud pad_duplicative(const PointCloud& cloud, std::size_t target_count,
                           Rng& rng);

PointCloud rotate_z(const PointCloud& cloud, double angle);

}  // namespace giuda
