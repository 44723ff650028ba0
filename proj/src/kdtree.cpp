#include "pcot/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pcot {

namespace {

inline double coord(const Point3& p, int axis) {
    return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
}

}  // namespace

KdTree::KdTree(const std::vector<Point3>& points) : points_(points) {
    if (points_.empty()) throw std::invalid_argument("KdTree: empty point set");
    std::vector<std::size_t> idx(points_.size());
    std::iota(idx.begin(), idx.end(), 0);
    nodes_.reserve(points_.size());
    root_ = build(idx, 0, idx.size(), 0);
}

std::size_t KdTree::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi,
                          int depth) {
    if (lo >= hi) return npos;
    const int axis = depth % 3;
    const std::size_t mid = lo + (hi - lo) / 2;
    // (coordinate, index) ordering keeps the build deterministic under ties.
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [&](std::size_t a, std::size_t b) {
                         const double ca = coord(points_[a], axis);
                         const double cb = coord(points_[b], axis);
                         return ca < cb || (ca == cb && a < b);
                     });
    const std::size_t node_id = nodes_.size();
    nodes_.push_back(Node{idx[mid], axis, npos, npos});
    const std::size_t left = build(idx, lo, mid, depth + 1);
    const std::size_t right = build(idx, mid + 1, hi, depth + 1);
    nodes_[node_id].left = left;
    nodes_[node_id].right = right;
    return node_id;
}

void KdTree::search_nearest(std::size_t node, const Point3& q, std::size_t exclude,
                            Best& best) const {
    if (node == npos) return;
    const Node& n = nodes_[node];
    const Point3& p = points_[n.point];
    if (n.point != exclude) {
        const double d2 = squared_distance(q, p);
        if (d2 < best.d2 || (d2 == best.d2 && n.point < best.index)) {
            best.d2 = d2;
            best.index = n.point;
        }
    }
    const double delta = coord(q, n.axis) - coord(p, n.axis);
    const std::size_t near_side = delta < 0.0 ? n.left : n.right;
    const std::size_t far_side = delta < 0.0 ? n.right : n.left;
    search_nearest(near_side, q, exclude, best);
    // <= keeps equal-distance candidates reachable so index ties stay exact.
    if (delta * delta <= best.d2) search_nearest(far_side, q, exclude, best);
}

std::pair<std::size_t, double> KdTree::nearest(const Point3& query, std::size_t exclude) const {
    Best best;
    search_nearest(root_, query, exclude, best);
    if (best.index == npos) throw std::invalid_argument("KdTree::nearest: no eligible point");
    return {best.index, std::sqrt(best.d2)};
}

void KdTree::search_knearest(std::size_t node, const Point3& q, std::size_t k,
                             std::size_t exclude, std::vector<HeapEntry>& heap) const {
    if (node == npos) return;
    const Node& n = nodes_[node];
    const Point3& p = points_[n.point];
    if (n.point != exclude) {
        const HeapEntry cand{squared_distance(q, p), n.point};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end());
        }
    }
    const double delta = coord(q, n.axis) - coord(p, n.axis);
    const std::size_t near_side = delta < 0.0 ? n.left : n.right;
    const std::size_t far_side = delta < 0.0 ? n.right : n.left;
    search_knearest(near_side, q, k, exclude, heap);
    if (heap.size() < k || delta * delta <= heap.front().d2)
        search_knearest(far_side, q, k, exclude, heap);
}

std::vector<std::pair<std::size_t, double>> KdTree::nearest_k(const Point3& query, std::size_t k,
                                                              std::size_t exclude) const {
    std::vector<HeapEntry> heap;
    heap.reserve(k + 1);
    search_knearest(root_, query, k, exclude, heap);
    if (heap.size() < k) throw std::invalid_argument("KdTree::nearest_k: fewer than k points");
    std::sort(heap.begin(), heap.end());
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(k);
    for (const HeapEntry& e : heap) out.emplace_back(e.index, std::sqrt(e.d2));
    return out;
}

}  // namespace pcot
