#include "giuda/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace giuda {

PointCloud load_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_xyz: cannot open '" + path + "'");
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Point3 p;
    std::string extra;
    if (!(ss >> p[0] >> p[1] >> p[2]) || (ss >> extra))
      throw std::runtime_error("load_xyz: malformed line " +
                               std::to_string(line_no) + " in '" + path + "'");
    cloud.points.push_back(p);
  }
  if (cloud.points.empty())
    throw std::runtime_error("load_xyz: no points in '" + path + "'");
  return cloud;
}

void save_xyz(const PointCloud& cloud, const std::string& path) {
  if (cloud.points.empty())
    throw std::invalid_argument("save_xyz: empty cloud");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_xyz: cannot open '" + path + "'");
  char buf[128];
  for (const Point3& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
    out << buf;
  }
  if (!out) throw std::runtime_error("save_xyz: write failed for '" + path + "'");
}

PointCloud normalize_unit_scale(const PointCloud& cloud) {
  if (cloud.points.empty())
    throw std::invalid_argument("normalize_unit_scale: empty cloud");
  Point3 centroid{0.0, 0.0, 0.0};
  for (const Point3& p : cloud.points)
    for (int a = 0; a < 3; ++a) centroid[a] += p[a];
  const double n = static_cast<double>(cloud.points.size());
  for (int a = 0; a < 3; ++a) centroid[a] /= n;
  double max_abs = 0.0;
  for (const Point3& p : cloud.points)
    for (int a = 0; a < 3; ++a)
      max_abs = std::max(max_abs, std::abs(p[a] - centroid[a]));
  if (max_abs == 0.0)
    throw std::invalid_argument(
        "normalize_unit_scale: degenerate cloud (all points identical)");
  const double scale = 0.5 / max_abs;
  PointCloud out;
  out.label = cloud.label;
  out.points.reserve(cloud.points.size());
  for (const Point3& p : cloud.points)
    out.points.push_back({(p[0] - centroid[0]) * scale,
                          (p[1] - centroid[1]) * scale,
                          (p[2] - centroid[2]) * scale});
  return out;
}

PointCloud pad_duplicative(const PointCloud& cloud, std::size_t target_count,
                           Rng& rng) {
  if (target_count < 1)
    throw std::invalid_argument("pad_duplicative: target_count must be >= 1");
  const std::size_t n = cloud.points.size();
  PointCloud out;
  out.label = cloud.label;
  if (n >= target_count) {
    // Partial Fisher-Yates draw without replacement.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < target_count; ++i) {
      const std::size_t j = i + rng.index(n - i);
      std::swap(idx[i], idx[j]);
    }
    out.points.reserve(target_count);
    for (std::size_t i = 0; i < target_count; ++i)
      out.points.push_back(cloud.points[idx[i]]);
  } else {
    out.points = cloud.points;
    out.points.reserve(target_count);
    while (out.points.size() < target_count)
      out.points.push_back(cloud.points[rng.index(n)]);
  }
  return out;
}

PointCloud rotate_z(const PointCloud& cloud, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  PointCloud out;
  out.label = cloud.label;
  out.points.reserve(cloud.points.size());
  for (const Point3& p : cloud.points)
    out.points.push_back({c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]});
  return out;
}

}  // namespace giuda
