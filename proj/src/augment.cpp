#include "giuda/augment.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace giuda {

namespace {

PointCloud jitter_pad(const PointCloud& cloud, std::size_t target_count,
                      Rng& rng,
                      const std::function<double(std::size_t, Rng&)>& offset) {
  const std::size_t n = cloud.points.size();
  if (target_count < n)
    throw std::invalid_argument("jitter: target_count < cloud size");
  PointCloud out;
  out.label = cloud.label;
  out.points = cloud.points;
  out.points.reserve(target_count);
  while (out.points.size() < target_count) {
    const std::size_t j = rng.index(n);
    Point3 p = cloud.points[j];
    for (int a = 0; a < 3; ++a) p[a] += offset(j, rng);
    out.points.push_back(p);
  }
  return out;
}

}  // namespace

PointCloud affinity_jitter(const PointCloud& cloud,
                           const AffinityProfile& profile,
                           std::size_t target_count, Rng& rng) {
  if (profile.per_point.size() != cloud.points.size())
    throw std::invalid_argument("affinity_jitter: profile/cloud size mismatch");
  return jitter_pad(cloud, target_count, rng, [&](std::size_t j, Rng& r) {
    const double half = profile.per_point[j] * 0.5;
    return r.uniform(-half, half);
  });
}

PointCloud uniform_jitter_baseline(const PointCloud& cloud,
                                   std::size_t target_count, double lo,
                                   double hi, Rng& rng) {
  if (lo < 0.0 || lo > hi)
    throw std::invalid_argument("uniform_jitter_baseline: need 0 <= lo <= hi");
  return jitter_pad(cloud, target_count, rng, [lo, hi](std::size_t, Rng& r) {
    const double mag = r.uniform(lo, hi);
    return r.uniform() < 0.5 ? -mag : mag;
  });
}

PointCloud random_mask(const PointCloud& cloud, const MaskSpec& spec,
                       Rng& rng) {
  spec.validate();
  if (cloud.points.size() < 2)
    throw std::invalid_argument("random_mask: cloud must have >= 2 points");
  const double radius = rng.uniform(spec.radius_min, spec.radius_max);
  const Point3 seed = cloud.points[rng.index(cloud.points.size())];
  PointCloud out;
  out.label = cloud.label;
  double far_d2 = -1.0;
  std::size_t far_idx = 0;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Point3& p = cloud.points[i];
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double d = p[a] - seed[a];
      d2 += d * d;
    }
    if (d2 > far_d2) {
      far_d2 = d2;
      far_idx = i;
    }
    if (d2 > r2) out.points.push_back(p);
  }
  if (out.points.empty()) out.points.push_back(cloud.points[far_idx]);
  return out;
}

}  // namespace giuda
