// Axis-aligned bounding-box tree over mesh faces. Split rule is a median
// split along the longest box axis with (centroid, face index) ordering, so
// the tree is deterministic for a given mesh. Queries are pure; the tree is
// immutable after build.
#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "refu/point_triangle.hpp"
#include "refu/trimesh.hpp"

namespace refu {

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void expand(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void expand(const Aabb& b) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    bool contains(const Aabb& b) const {
        return (lo.array() <= b.lo.array()).all() && (hi.array() >= b.hi.array()).all();
    }
    bool overlaps(const Aabb& b) const {
        return (lo.array() <= b.hi.array()).all() && (hi.array() >= b.lo.array()).all();
    }
    double distance_squared(const Vec3& p) const {
        Vec3 d = (lo - p).cwiseMax(0.0).cwiseMax(p - hi);
        return d.squaredNorm();
    }
    int longest_axis() const {
        Vec3 ext = hi - lo;
        int axis = 0;
        if (ext.y() > ext.x()) axis = 1;
        if (ext.z() > ext[axis]) axis = 2;
        return axis;
    }
};

struct ClosestPointResult {
    Vec3 point = Vec3::Zero();
    int face = -1;
    Vec3 bary = Vec3::Zero();
    double distance = std::numeric_limits<double>::infinity();
};

class Bvh {
public:
    struct Node {
        Aabb box;
        int left = -1;    // child node id, -1 for leaves
        int right = -1;
        int begin = 0;    // leaf range into face_order_
        int end = 0;
    };

    Bvh() = default;

    explicit Bvh(const TriMesh& mesh, int leaf_size = 4) : leaf_size_(std::max(1, leaf_size)) {
        if (mesh.face_count() == 0) throw Error("Bvh: empty mesh");
        const int nf = mesh.face_count();
        tri_a_.resize(nf);
        tri_b_.resize(nf);
        tri_c_.resize(nf);
        std::vector<Aabb> boxes(nf);
        std::vector<Vec3> centroids(nf);
        for (int f = 0; f < nf; ++f) {
            const auto& t = mesh.faces[f];
            tri_a_[f] = mesh.vertices[t[0]];
            tri_b_[f] = mesh.vertices[t[1]];
            tri_c_[f] = mesh.vertices[t[2]];
            boxes[f].expand(tri_a_[f]);
            boxes[f].expand(tri_b_[f]);
            boxes[f].expand(tri_c_[f]);
            centroids[f] = (tri_a_[f] + tri_b_[f] + tri_c_[f]) / 3.0;
        }
        face_order_.resize(nf);
        std::iota(face_order_.begin(), face_order_.end(), 0);
        nodes_.reserve(2 * nf);
        build(boxes, centroids, 0, nf);
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<int>& face_order() const { return face_order_; }
    bool empty() const { return nodes_.empty(); }
    const Aabb& root_box() const { return nodes_.front().box; }

    // Globally minimal point-to-triangle distance over all faces.
    // Ties on squared distance are broken by the lowest face index.
    ClosestPointResult closest_point(const Vec3& q) const {
        ClosestPointResult best;
        double best_d2 = std::numeric_limits<double>::infinity();
        descend(0, q, best, best_d2);
        best.distance = std::sqrt(best_d2);
        return best;
    }

    // Collects every face index reachable by full traversal (test census).
    void traverse_faces(std::vector<int>& out) const {
        for (const auto& n : nodes_)
            if (n.left < 0)
                for (int i = n.begin; i < n.end; ++i) out.push_back(face_order_[i]);
    }

private:
    int build(const std::vector<Aabb>& boxes, const std::vector<Vec3>& centroids, int begin,
              int end) {
        Node node;
        for (int i = begin; i < end; ++i) node.box.expand(boxes[face_order_[i]]);
        const int id = int(nodes_.size());
        nodes_.push_back(node);
        if (end - begin <= leaf_size_) {
            nodes_[id].begin = begin;
            nodes_[id].end = end;
            return id;
        }
        const int axis = node.box.longest_axis();
        const int mid = (begin + end) / 2;
        std::sort(face_order_.begin() + begin, face_order_.begin() + end,
                  [&](int fa, int fb) {
                      double ca = centroids[fa][axis], cb = centroids[fb][axis];
                      return ca < cb || (ca == cb && fa < fb);
                  });
        const int left = build(boxes, centroids, begin, mid);
        const int right = build(boxes, centroids, mid, end);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    void descend(int id, const Vec3& q, ClosestPointResult& best, double& best_d2) const {
        const Node& n = nodes_[id];
        if (n.left < 0) {
            for (int i = n.begin; i < n.end; ++i) {
                const int f = face_order_[i];
                TrianglePoint tp = closest_point_on_triangle(q, tri_a_[f], tri_b_[f], tri_c_[f]);
                const double d2 = (q - tp.point).squaredNorm();
                if (d2 < best_d2 || (d2 == best_d2 && f < best.face)) {
                    best_d2 = d2;
                    best.face = f;
                    best.point = tp.point;
                    best.bary = tp.bary;
                }
            }
            return;
        }
        double dl = nodes_[n.left].box.distance_squared(q);
        double dr = nodes_[n.right].box.distance_squared(q);
        int first = n.left, second = n.right;
        if (dr < dl) {
            std::swap(first, second);
            std::swap(dl, dr);
        }
        if (dl <= best_d2) descend(first, q, best, best_d2);
        if (dr <= best_d2) descend(second, q, best, best_d2);
    }

    int leaf_size_ = 4;
    std::vector<Node> nodes_;
    std::vector<int> face_order_;
    std::vector<Vec3> tri_a_, tri_b_, tri_c_;
};

}  // namespace refu
