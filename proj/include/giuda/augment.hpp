#pragma once

#include <stdexcept>

#include "giuda/field.hpp"
#include "giuda/pointcloud.hpp"
#include "giuda/rng.hpp"

namespace giuda {

struct MaskSpec {
  double radius_min = 0.1;
  double radius_max = 0.3;

  void validate() const {
    if (radius_min < 0.0 || radius_min > radius_max)
      throw std::invalid_argument("MaskSpec: need 0 <= radius_min <= radius_max");
  }
};

// Pads the cloud to target_count by duplicating random source points with a
// per-coordinate uniform offset in [-d_j/2, d_j/2], d_j the source point's
// local affinity.
PointCloud affinity_jitter(const PointCloud& cloud,
                           const AffinityProfile& profile,
                           std::size_t target_count, Rng& rng);

// Comparison baseline: offsets with absolute value uniform in [lo, hi] per
// coordinate and random sign.
PointCloud uniform_jitter_baseline(const PointCloud& cloud,
                                   std::size_t target_count, double lo,
                                   double hi, Rng& rng);

// Removes all points within a random-radius ball around a random seed point.
// Never returns an empty cloud: if everything falls inside the ball, the
// single farthest point is kept.
PointCloud random_mask(const PointCloud& cloud, const MaskSpec& spec, Rng& rng);

}  // namespace giuda
