#pragma once

#include <functional>
#include <string>
#include <vector>

#include "giuda/kdtree.hpp"
#include "giuda/pointcloud.hpp"
#include "giuda/rng.hpp"

namespace giuda {

// Per-point local affinity d_j (mean distance to the M nearest neighbors,
// the point itself excluded by index) and their cloud-wide mean, the
// adaptive clamping threshold.
struct AffinityProfile {
  std::vector<double> per_point;
  double threshold = 0.0;
  std::size_t neighbor_count = 0;
};

struct QuerySet {
  std::vector<Point3> points;
};

AffinityProfile local_affinity(const PointCloud& cloud, std::size_t m);

// Adaptive unsigned distance: nearest-cloud distance D, clamped to 0
// whenever D <= threshold.
std::vector<double> aud(const KdTree& tree, const AffinityProfile& profile,
                        const QuerySet& queries);
std::vector<double> aud(const PointCloud& cloud, const AffinityProfile& profile,
                        const QuerySet& queries);

QuerySet sample_queries(std::size_t k, double cube_half_width, Rng& rng);

// Symmetric mean of squared nearest-neighbor distances.
double chamfer(const PointCloud& a, const PointCloud& b);

// Samples n uniform cube points and keeps those with predicted distance
// strictly below epsilon. May return an empty cloud.
using FieldEvaluator =
    std::function<std::vector<double>(const std::vector<Point3>&)>;
PointCloud resample_from_implicit(const FieldEvaluator& evaluate,
                                  std::size_t n_samples, double epsilon,
                                  double cube_half_width, Rng& rng);

// Lines of "x y z d", same text conventions as the XYZ format.
void save_field_dump(const std::vector<Point3>& queries,
                     const std::vector<double>& values,
                     const std::string& path);

}  // namespace giuda
