#include "giuda/field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace giuda {

AffinityProfile local_affinity(const PointCloud& cloud, std::size_t m) {
  const std::size_t n = cloud.points.size();
  if (m < 1) throw std::invalid_argument("local_affinity: M must be >= 1");
  if (n <= m)
    throw std::invalid_argument("local_affinity: cloud must have > M points");
  KdTree tree(cloud.points);
  AffinityProfile profile;
  profile.neighbor_count = m;
  profile.per_point.resize(n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    // Over-fetch one and drop the point itself (by index, so duplicate
    // coordinates still count as neighbors).
    auto neighbors = tree.knn(cloud.points[j], m + 1);
    double dj = 0.0;
    std::size_t used = 0;
    for (const Neighbor& nb : neighbors) {
      if (nb.index == j) continue;
      if (used == m) break;
      dj += nb.distance;
      ++used;
    }
    dj /= static_cast<double>(m);
    profile.per_point[j] = dj;
    sum += dj;
  }
  profile.threshold = sum / static_cast<double>(n);
  return profile;
}

std::vector<double> aud(const KdTree& tree, const AffinityProfile& profile,
                        const QuerySet& queries) {
  std::vector<double> out;
  out.reserve(queries.points.size());
  for (const Point3& q : queries.points) {
    const double d = tree.nearest(q).distance;
    out.push_back(d > profile.threshold ? d : 0.0);
  }
  return out;
}

std::vector<double> aud(const PointCloud& cloud, const AffinityProfile& profile,
                        const QuerySet& queries) {
  KdTree tree(cloud.points);
  return aud(tree, profile, queries);
}

QuerySet sample_queries(std::size_t k, double cube_half_width, Rng& rng) {
  if (cube_half_width <= 0.0)
    throw std::invalid_argument("sample_queries: cube_half_width must be > 0");
  QuerySet qs;
  qs.points.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    Point3 p;
    for (int a = 0; a < 3; ++a)
      p[a] = rng.uniform(-cube_half_width, cube_half_width);
    qs.points.push_back(p);
  }
  return qs;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  if (a.points.empty() || b.points.empty())
    throw std::invalid_argument("chamfer: empty cloud");
  KdTree ta(a.points), tb(b.points);
  double sum_ab = 0.0, sum_ba = 0.0;
  for (const Point3& p : a.points) {
    const double d = tb.nearest(p).distance;
    sum_ab += d * d;
  }
  for (const Point3& q : b.points) {
    const double d = ta.nearest(q).distance;
    sum_ba += d * d;
  }
  return sum_ab / static_cast<double>(a.points.size()) +
         sum_ba / static_cast<double>(b.points.size());
}

PointCloud resample_from_implicit(const FieldEvaluator& evaluate,
                                  std::size_t n_samples, double epsilon,
                                  double cube_half_width, Rng& rng) {
  if (epsilon <= 0.0)
    throw std::invalid_argument("resample_from_implicit: epsilon must be > 0");
  // Evaluate in chunks to bound peak memory at large n_samples.
  constexpr std::size_t kChunk = 8192;
  PointCloud out;
  std::size_t remaining = n_samples;
  while (remaining > 0) {
    const std::size_t n = std::min(kChunk, remaining);
    remaining -= n;
    QuerySet qs = sample_queries(n, cube_half_width, rng);
    const std::vector<double> d = evaluate(qs.points);
    if (d.size() != n)
      throw std::runtime_error("resample_from_implicit: evaluator size mismatch");
    for (std::size_t i = 0; i < n; ++i)
      if (d[i] < epsilon) out.points.push_back(qs.points[i]);
  }
  return out;
}

void save_field_dump(const std::vector<Point3>& queries,
                     const std::vector<double>& values,
                     const std::string& path) {
  if (queries.size() != values.size())
    throw std::invalid_argument("save_field_dump: size mismatch");
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("save_field_dump: cannot open '" + path + "'");
  char buf[192];
  for (std::size_t i = 0; i < queries.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", queries[i][0],
                  queries[i][1], queries[i][2], values[i]);
    out << buf;
  }
  if (!out)
    throw std::runtime_error("save_field_dump: write failed for '" + path + "'");
}

}  // namespace giuda
