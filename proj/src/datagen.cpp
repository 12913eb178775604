#include "giuda/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace giuda {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

Point3 sphere_point(Rng& rng) {
  // Uniform on the unit sphere: z uniform in [-1,1], azimuth uniform.
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Point3 cube_point(Rng& rng) {
  // Six faces of equal area, half width 0.5.
  const std::size_t face = rng.index(6);
  const int axis = static_cast<int>(face / 2);
  const double side = (face % 2 == 0) ? -0.5 : 0.5;
  Point3 p;
  p[axis] = side;
  p[(axis + 1) % 3] = rng.uniform(-0.5, 0.5);
  p[(axis + 2) % 3] = rng.uniform(-0.5, 0.5);
  return p;
}

Point3 cylinder_point(Rng& rng) {
  // Radius 0.5, height 1 (z in [-0.5, 0.5]). Side area pi, caps pi/4 each.
  const double side_area = 2.0 * kPi * 0.5 * 1.0;
  const double cap_area = kPi * 0.25;
  const double u = rng.uniform() * (side_area + 2.0 * cap_area);
  if (u < side_area) {
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    return {0.5 * std::cos(phi), 0.5 * std::sin(phi), rng.uniform(-0.5, 0.5)};
  }
  const double z = (u < side_area + cap_area) ? -0.5 : 0.5;
  const double r = 0.5 * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Point3 random_unit_vector(Rng& rng) {
  while (true) {
    Point3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

}  // namespace

PointCloud gen_shape(int class_id, std::size_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_shape: n must be >= 1");
  PointCloud cloud;
  cloud.label = class_id;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (class_id) {
      case 0:
        cloud.points.push_back(sphere_point(rng));
        break;
      case 1:
        cloud.points.push_back(cube_point(rng));
        break;
      case 2:
        cloud.points.push_back(cylinder_point(rng));
        break;
      default:
        throw std::invalid_argument("gen_shape: unknown class " +
                                    std::to_string(class_id));
    }
  }
  return normalize_unit_scale(cloud);
}

PointCloud apply_domain_shift(const PointCloud& cloud,
                              const DomainProfile& profile, Rng& rng) {
  profile.validate();
  PointCloud out = pad_duplicative(cloud, profile.points_per_cloud, rng);
  if (profile.noise_sigma > 0.0)
    for (Point3& p : out.points)
      for (int a = 0; a < 3; ++a) p[a] += profile.noise_sigma * rng.normal();
  if (profile.occlusion) {
    const Point3 dir = random_unit_vector(rng);
    const std::size_t keep = static_cast<std::size_t>(
        std::ceil((1.0 - profile.occlusion->fraction) *
                  static_cast<double>(out.points.size())));
    std::vector<std::pair<double, std::size_t>> proj;
    proj.reserve(out.points.size());
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      const Point3& p = out.points[i];
      proj.emplace_back(p[0] * dir[0] + p[1] * dir[1] + p[2] * dir[2], i);
    }
    std::sort(proj.begin(), proj.end());
    PointCloud kept;
    kept.label = out.label;
    kept.points.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i)
      kept.points.push_back(out.points[proj[i].second]);
    out = std::move(kept);
  }
  return normalize_unit_scale(out);
}

void save_manifest(const DatasetManifest& manifest,
                   const std::string& manifest_path) {
  std::ofstream out(manifest_path);
  if (!out)
    throw std::runtime_error("save_manifest: cannot open '" + manifest_path +
                             "'");
  out << "path,label\n";
  for (const ManifestEntry& e : manifest.entries)
    out << e.path << "," << e.label << "\n";
  if (!out)
    throw std::runtime_error("save_manifest: write failed '" + manifest_path +
                             "'");
}

DatasetManifest load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in)
    throw std::runtime_error("load_manifest: cannot open '" + manifest_path +
                             "'");
  DatasetManifest m;
  m.root = fs::path(manifest_path).parent_path().string();
  std::string line;
  if (!std::getline(in, line) || line != "path,label")
    throw std::runtime_error("load_manifest: bad header in '" + manifest_path +
                             "'");
  int max_label = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos)
      throw std::runtime_error("load_manifest: malformed row '" + line + "'");
    ManifestEntry e;
    e.path = line.substr(0, comma);
    e.label = std::stoi(line.substr(comma + 1));
    max_label = std::max(max_label, e.label);
    m.entries.push_back(std::move(e));
  }
  m.class_count = static_cast<std::size_t>(max_label + 1);
  return m;
}

std::vector<PointCloud> load_dataset(const DatasetManifest& manifest) {
  std::vector<PointCloud> clouds;
  clouds.reserve(manifest.entries.size());
  for (const ManifestEntry& e : manifest.entries) {
    PointCloud c = load_xyz((fs::path(manifest.root) / e.path).string());
    c.label = e.label;
    clouds.push_back(std::move(c));
  }
  return clouds;
}

std::pair<DatasetManifest, DatasetManifest> gen_dataset(
    std::size_t class_count, std::size_t per_class_count,
    const DomainProfile& profile_a, const DomainProfile& profile_b,
    std::uint64_t seed, const std::string& out_root) {
  if (class_count < 1 || class_count > kShapeClassCount)
    throw std::invalid_argument("gen_dataset: class_count must be in [1, 3]");
  std::pair<DatasetManifest, DatasetManifest> result;
  const char* domain_names[2] = {"source", "target"};
  const DomainProfile* profiles[2] = {&profile_a, &profile_b};
  DatasetManifest* manifests[2] = {&result.first, &result.second};
  // Raw shapes are sampled dense enough that either profile can subsample.
  const std::size_t raw_n =
      std::max({profile_a.points_per_cloud, profile_b.points_per_cloud,
                static_cast<std::size_t>(2048)});
  for (int d = 0; d < 2; ++d) {
    const fs::path dir = fs::path(out_root) / domain_names[d];
    fs::create_directories(dir);
    DatasetManifest& m = *manifests[d];
    m.root = dir.string();
    m.class_count = class_count;
    for (std::size_t cls = 0; cls < class_count; ++cls) {
      for (std::size_t i = 0; i < per_class_count; ++i) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(d) + 1, cls, i));
        PointCloud raw = gen_shape(static_cast<int>(cls), raw_n, rng);
        PointCloud shifted = apply_domain_shift(raw, *profiles[d], rng);
        std::ostringstream name;
        name << "cls" << cls << "_" << i << ".xyz";
        save_xyz(shifted, (dir / name.str()).string());
        m.entries.push_back({name.str(), static_cast<int>(cls)});
      }
    }
    save_manifest(m, (dir / "manifest.csv").string());
  }
  return result;
}

}  // namespace giuda
