#pragma once

#include <cstddef>
#include <vector>

#include "giuda/pointcloud.hpp"

namespace giuda {

struct Neighbor {
  std::size_t index;  // original point index
  double distance;    // Euclidean
};

// Immutable exact-search k-d tree over 3-D points. Results match a
// brute-force scan, including the tie rule (equal distances ordered by
// lower original index).
class KdTree {
 public:
  explicit KdTree(const std::vector<Point3>& points);

  std::size_t size() const { return points_.size(); }

  // The k exactly-nearest indexed points, sorted ascending by
  // (distance, index). Throws if k == 0 or k > size().
  std::vector<Neighbor> knn(const Point3& query, std::size_t k) const;

  Neighbor nearest(const Point3& query) const { return knn(query, 1)[0]; }

 private:
  struct Node {
    std::size_t point;  // index into points_
    int axis;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi);
  void search(int node, const Point3& query, std::size_t k,
              std::vector<Neighbor>& best) const;

  std::vector<Point3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Reference scan with the same tie rule; used by tests as the oracle.
std::vector<Neighbor> brute_force_knn(const std::vector<Point3>& points,
                                      const Point3& query, std::size_t k);

}  // namespace giuda
