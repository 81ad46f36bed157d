// Accurate signed distance for watertight triangle meshes: BVH closest-point
// query plus angle-weighted pseudo-normals at the closest feature for a
// robust inside/outside sign, following Baerentzen & Aanaes. The gradient is
// (q - closest)/f away from the surface and the feature pseudo-normal on it.
#pragma once

#include <cmath>
#include <unordered_map>

#include "refu/bvh.hpp"
#include "refu/sdf_engine.hpp"
#include "refu/trimesh.hpp"

namespace refu {

class ExactSdf : public SdfEngine {
public:
    explicit ExactSdf(const TriMesh& mesh, int leaf_size = 4)
        : mesh_(&mesh), bvh_(mesh, leaf_size), watertight_(is_watertight(mesh)) {
        face_normals_.resize(mesh.face_count());
        for (int f = 0; f < mesh.face_count(); ++f) {
            Vec3 n = mesh.face_normal_unnormalized(f);
            double len = n.norm();
            face_normals_[f] = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
        }
        vertex_normals_.assign(mesh.vertex_count(), Vec3::Zero());
        edge_normals_.reserve(mesh.edges.size());
        for (int f = 0; f < mesh.face_count(); ++f) {
            const auto& t = mesh.faces[f];
            const Vec3& n = face_normals_[f];
            if (n.isZero()) continue;  // degenerate face contributes nothing
            for (int k = 0; k < 3; ++k) {
                const Vec3& p0 = mesh.vertices[t[k]];
                const Vec3 e1 = (mesh.vertices[t[(k + 1) % 3]] - p0).normalized();
                const Vec3 e2 = (mesh.vertices[t[(k + 2) % 3]] - p0).normalized();
                const double angle = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
                vertex_normals_[t[k]] += angle * n;
                auto [it, fresh] =
                    edge_normals_.try_emplace(edge_key(t[k], t[(k + 1) % 3]), Vec3::Zero());
                it->second += n;
            }
        }
    }

    const TriMesh& mesh() const { return *mesh_; }
    const Bvh& bvh() const { return bvh_; }
    bool watertight() const { return watertight_; }

    ClosestPointResult closest_point(const Vec3& q) const { return bvh_.closest_point(q); }

    SignedDistanceResult query(const Vec3& q) const override {
        const ClosestPointResult cp = bvh_.closest_point(q);
        const Vec3 n = pseudo_normal(cp);
        const Vec3 delta = q - cp.point;
        SignedDistanceResult r;
        if (cp.distance <= kOnSurface) {
            // query on the surface: zero value, gradient from the feature normal
            r.value = 0.0;
            const double len = n.norm();
            if (len > 0.0) {
                r.gradient = n / len;
            } else {
                r.gradient = Vec3::Zero();
                r.degenerate_gradient = true;
            }
            r.raw_gradient = r.gradient;
            return r;
        }
        const double sign = delta.dot(n) < 0.0 ? -1.0 : 1.0;
        r.value = sign * cp.distance;
        r.gradient = delta / r.value;
        r.raw_gradient = r.gradient;
        return r;
    }

    // Pseudo-normal at the closest feature, selected from the barycentric
    // coordinates (exact zeros mark edge/vertex regions).
    Vec3 pseudo_normal(const ClosestPointResult& cp) const {
        const auto& t = mesh_->faces[cp.face];
        int zero_mask = 0, zeros = 0;
        for (int k = 0; k < 3; ++k) {
            if (cp.bary[k] == 0.0) {
                zero_mask |= 1 << k;
                ++zeros;
            }
        }
        if (zeros == 0) return face_normals_[cp.face];
        if (zeros == 2) {
            const int k = zero_mask == 6 ? 0 : (zero_mask == 5 ? 1 : 2);
            return vertex_normals_[t[k]];
        }
        const int miss = zero_mask == 1 ? 0 : (zero_mask == 2 ? 1 : 2);
        auto it = edge_normals_.find(edge_key(t[(miss + 1) % 3], t[(miss + 2) % 3]));
        return it != edge_normals_.end() ? it->second : face_normals_[cp.face];
    }

    // Interpolated angle-weighted normal at an on-surface sample point.
    Vec3 interpolated_vertex_normal(int face, const Vec3& bary) const {
        const auto& t = mesh_->faces[face];
        Vec3 n = bary[0] * vertex_normals_[t[0]] + bary[1] * vertex_normals_[t[1]] +
                 bary[2] * vertex_normals_[t[2]];
        double len = n.norm();
        return len > 0.0 ? Vec3(n / len) : face_normals_[face];
    }

private:
    static constexpr double kOnSurface = 1e-300;  // exact zeros only

    static std::uint64_t edge_key(int a, int b) {
        if (a > b) std::swap(a, b);
        return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
    }

    const TriMesh* mesh_;
    Bvh bvh_;
    bool watertight_;
    std::vector<Vec3> face_normals_;
    std::vector<Vec3> vertex_normals_;
    std::unordered_map<std::uint64_t, Vec3> edge_normals_;
};

}  // namespace refu
