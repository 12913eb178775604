#include "giuda/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace giuda {

namespace {

double dist2(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

struct Candidate {
  double d2;
  std::size_t index;
  bool operator<(const Candidate& o) const {
    return d2 != o.d2 ? d2 < o.d2 : index < o.index;
  }
};

}  // namespace

KdTree::KdTree(const std::vector<Point3>& points) : points_(points) {
  if (points_.empty()) throw std::invalid_argument("KdTree: empty input");
  nodes_.reserve(points_.size());
  std::vector<std::size_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), 0);
  root_ = build(idx, 0, idx.size());
}

int KdTree::build(std::vector<std::size_t>& idx, std::size_t lo,
                  std::size_t hi) {
  if (lo >= hi) return -1;
  // Split along the axis with the widest spread.
  Point3 mn = points_[idx[lo]], mx = points_[idx[lo]];
  for (std::size_t i = lo; i < hi; ++i)
    for (int a = 0; a < 3; ++a) {
      mn[a] = std::min(mn[a], points_[idx[i]][a]);
      mx[a] = std::max(mx[a], points_[idx[i]][a]);
    }
  int axis = 0;
  for (int a = 1; a < 3; ++a)
    if (mx[a] - mn[a] > mx[axis] - mn[axis]) axis = a;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_[a][axis], vb = points_[b][axis];
                     return va != vb ? va < vb : a < b;
                   });
  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back({idx[mid], axis, -1, -1});
  const int left = build(idx, lo, mid);
  const int right = build(idx, mid + 1, hi);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree::search(int node, const Point3& query, std::size_t k,
                    std::vector<Neighbor>& best) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Point3& p = points_[n.point];

  const Candidate cand{dist2(query, p), n.point};
  auto worse = [&](const Neighbor& nb) {
    const Candidate c{nb.distance, nb.index};  // distance holds d2 here
    return cand < c;
  };
  if (best.size() < k) {
    auto it = std::find_if(best.begin(), best.end(), worse);
    best.insert(it, Neighbor{cand.index, cand.d2});
  } else if (worse(best.back())) {
    auto it = std::find_if(best.begin(), best.end(), worse);
    best.insert(it, Neighbor{cand.index, cand.d2});
    best.pop_back();
  }

  const double diff = query[n.axis] - p[n.axis];
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search(near, query, k, best);
  if (best.size() < k || diff * diff <= best.back().distance)
    search(far, query, k, best);
}

std::vector<Neighbor> KdTree::knn(const Point3& query, std::size_t k) const {
  if (k == 0 || k > points_.size())
    throw std::invalid_argument("KdTree::knn: k out of range");
  std::vector<Neighbor> best;
  best.reserve(k + 1);
  search(root_, query, k, best);
  for (Neighbor& nb : best) nb.distance = std::sqrt(nb.distance);
  return best;
}

std::vector<Neighbor> brute_force_knn(const std::vector<Point3>& points,
                                      const Point3& query, std::size_t k) {
  if (k == 0 || k > points.size())
    throw std::invalid_argument("brute_force_knn: k out of range");
  std::vector<Candidate> all;
  all.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    all.push_back({dist2(points[i], query), i});
  std::partial_sort(all.begin(), all.begin() + k, all.end());
  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    out.push_back({all[i].index, std::sqrt(all[i].d2)});
  return out;
}

}  // namespace giuda
