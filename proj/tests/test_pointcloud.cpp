#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "giuda/pointcloud.hpp"

using namespace giuda;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

double dist(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

TEST_CASE("load_xyz parses points, skips comments and blanks") {
  const fs::path p = temp_file("giuda_load.xyz");
  std::ofstream(p) << "# a comment\n0 0 0\n\n1 0 0\n";
  PointCloud c = load_xyz(p.string());
  REQUIRE(c.size() == 2);
  CHECK(c.points[1][0] == 1.0);
  CHECK_FALSE(c.label.has_value());
}

TEST_CASE("load_xyz reports malformed lines and empty files") {
  const fs::path p = temp_file("giuda_bad.xyz");
  std::ofstream(p) << "0 0 0\n1 2\n";
  CHECK_THROWS_WITH_AS(load_xyz(p.string()), doctest::Contains("line 2"),
                       std::runtime_error);
  std::ofstream(p) << "# only comments\n";
  CHECK_THROWS_AS(load_xyz(p.string()), std::runtime_error);
  CHECK_THROWS_AS(load_xyz("/nonexistent/file.xyz"), std::runtime_error);
}

TEST_CASE("save/load round trip is coordinate exact") {
  PointCloud c;
  Rng rng(42);
  for (int i = 0; i < 64; ++i)
    c.points.push_back({rng.uniform(-1, 1) / 3.0, rng.uniform(-1, 1) * 1e-7,
                        rng.uniform(-1, 1) * 1e5});
  const fs::path p = temp_file("giuda_rt.xyz");
  save_xyz(c, p.string());
  PointCloud back = load_xyz(p.string());
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    for (int a = 0; a < 3; ++a) CHECK(back.points[i][a] == c.points[i][a]);
}

TEST_CASE("save_xyz rejects empty clouds") {
  PointCloud empty;
  CHECK_THROWS_AS(save_xyz(empty, temp_file("giuda_e.xyz").string()),
                  std::invalid_argument);
}

TEST_CASE("normalize_unit_scale centers and scales to half-unit cube") {
  PointCloud c;
  c.points = {{0, 0, 0}, {2, 0, 0}};
  PointCloud n = normalize_unit_scale(c);
  CHECK(n.points[0][0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(n.points[1][0] == doctest::Approx(0.5).epsilon(1e-12));

  // fixed point: already centered with max |coord| = 0.5
  PointCloud again = normalize_unit_scale(n);
  for (std::size_t i = 0; i < n.size(); ++i)
    for (int a = 0; a < 3; ++a)
      CHECK(again.points[i][a] == doctest::Approx(n.points[i][a]).epsilon(1e-12));
}

TEST_CASE("normalize_unit_scale invariants on random clouds") {
  Rng rng(7);
  PointCloud c;
  for (int i = 0; i < 100; ++i)
    c.points.push_back({rng.uniform(-3, 9), rng.uniform(0, 2), rng.uniform(-5, -1)});
  PointCloud n = normalize_unit_scale(c);
  double cx = 0, cy = 0, cz = 0, max_abs = 0;
  for (const Point3& p : n.points) {
    cx += p[0];
    cy += p[1];
    cz += p[2];
    for (int a = 0; a < 3; ++a) max_abs = std::max(max_abs, std::abs(p[a]));
  }
  const double inv = 1.0 / static_cast<double>(n.size());
  CHECK(std::abs(cx * inv) < 1e-9);
  CHECK(std::abs(cy * inv) < 1e-9);
  CHECK(std::abs(cz * inv) < 1e-9);
  CHECK(max_abs == doctest::Approx(0.5).epsilon(1e-9));

  // translation invariance
  PointCloud shifted = c;
  for (Point3& p : shifted.points) {
    p[0] += 17.0;
    p[2] -= 3.5;
  }
  PointCloud ns = normalize_unit_scale(shifted);
  for (std::size_t i = 0; i < n.size(); ++i)
    for (int a = 0; a < 3; ++a)
      CHECK(ns.points[i][a] == doctest::Approx(n.points[i][a]).epsilon(1e-9));
}

TEST_CASE("normalize_unit_scale rejects degenerate clouds") {
  PointCloud c;
  c.points = {{1, 1, 1}, {1, 1, 1}};
  CHECK_THROWS_AS(normalize_unit_scale(c), std::invalid_argument);
}

TEST_CASE("pad_duplicative invents no coordinates") {
  Rng gen(3);
  PointCloud c;
  for (int i = 0; i < 38; ++i)
    c.points.push_back({gen.uniform(), gen.uniform(), gen.uniform()});
  std::set<std::array<double, 3>> originals(c.points.begin(), c.points.end());

  Rng rng(11);
  PointCloud padded = pad_duplicative(c, 1024, rng);
  REQUIRE(padded.size() == 1024);
  std::set<std::array<double, 3>> unique_out(padded.points.begin(),
                                             padded.points.end());
  CHECK(unique_out.size() <= 38);
  for (const auto& p : padded.points) CHECK(originals.count(p) == 1);
}

TEST_CASE("pad_duplicative subsamples without replacement") {
  Rng gen(5);
  PointCloud c;
  for (int i = 0; i < 2048; ++i)
    c.points.push_back({gen.uniform(), gen.uniform(), gen.uniform()});
  Rng rng(13);
  PointCloud sub = pad_duplicative(c, 1024, rng);
  REQUIRE(sub.size() == 1024);
  std::set<std::array<double, 3>> unique_out(sub.points.begin(),
                                             sub.points.end());
  CHECK(unique_out.size() == 1024);  // all distinct original points
}

TEST_CASE("pad_duplicative at exact size keeps a copy") {
  PointCloud c;
  c.points = {{1, 2, 3}, {4, 5, 6}};
  c.label = 1;
  Rng rng(1);
  PointCloud out = pad_duplicative(c, 2, rng);
  REQUIRE(out.size() == 2);
  std::set<std::array<double, 3>> a(c.points.begin(), c.points.end());
  std::set<std::array<double, 3>> b(out.points.begin(), out.points.end());
  CHECK(a == b);
  CHECK(out.label == 1);
}

TEST_CASE("rotate_z basics") {
  PointCloud c;
  c.points = {{1, 0, 0}};
  c.label = 2;
  const double pi = 3.14159265358979323846;

  PointCloud same = rotate_z(c, 0.0);
  CHECK(same.points[0][0] == 1.0);
  CHECK(same.label == 2);

  PointCloud flipped = rotate_z(c, pi);
  CHECK(flipped.points[0][0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(flipped.points[0][1]) < 1e-12);

  PointCloud back = rotate_z(rotate_z(c, 0.7), -0.7);
  for (int a = 0; a < 3; ++a)
    CHECK(back.points[0][a] == doctest::Approx(c.points[0][a]).epsilon(1e-12));
}

TEST_CASE("rotate_z preserves pairwise distances and z exactly") {
  Rng rng(23);
  PointCloud c;
  for (int i = 0; i < 50; ++i)
    c.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  PointCloud r = rotate_z(c, 1.234);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(r.points[i][2] == c.points[i][2]);
    for (std::size_t j = i + 1; j < c.size(); ++j)
      CHECK(dist(r.points[i], r.points[j]) ==
            doctest::Approx(dist(c.points[i], c.points[j])).epsilon(1e-9));
  }
}
