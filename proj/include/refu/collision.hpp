// Ground-truth garment-body collision detection: vertex containment through
// the exact SDF, and surface intersections through a BVH-vs-BVH broad phase
// with the exact triangle test as narrow phase. Colliding garment triangles
// are VF-classified when they own a penetrating vertex and EE-classified
// otherwise (pure edge crossing).
#pragma once

#include <algorithm>
#include <unordered_set>
#include <utility>
#include <vector>

#include "refu/exact_sdf.hpp"
#include "refu/tri_tri.hpp"

namespace refu {

struct IntersectionPair {
    int garment_face = -1;
    int body_face = -1;
    bool coplanar = false;
};

struct CollisionReport {
    std::vector<int> penetrating_vertices;      // f(x) < 0, ascending
    std::vector<double> penetration_depths;     // matching |f| for each entry
    std::vector<IntersectionPair> pairs;        // sorted by (garment, body) face
    std::vector<int> vf_triangles;              // garment triangles owning a penetrating vertex
    std::vector<int> ee_triangles;              // intersecting triangles with no such vertex
    bool coplanar_contact = false;

    bool collision_free() const { return penetrating_vertices.empty() && pairs.empty(); }
    double penetration_energy() const {
        double e = 0.0;
        for (double d : penetration_depths) e += d * d;
        return e;
    }
};

inline std::vector<int> detect_vf(const TriMesh& garment, const SdfEngine& body,
                                  std::vector<double>* values_out = nullptr) {
    std::vector<SignedDistanceResult> results;
    body.query_batch(garment.vertices, results);
    std::vector<int> penetrating;
    if (values_out) values_out->assign(garment.vertex_count(), 0.0);
    for (int i = 0; i < garment.vertex_count(); ++i) {
        if (values_out) (*values_out)[i] = results[i].value;
        if (results[i].value < 0.0) penetrating.push_back(i);
    }
    return penetrating;
}

namespace collision_detail {

inline void overlap_pairs(const Bvh& a, const Bvh& b, int na, int nb,
                          std::vector<std::pair<int, int>>& out) {
    const auto& nodea = a.nodes()[na];
    const auto& nodeb = b.nodes()[nb];
    if (!nodea.box.overlaps(nodeb.box)) return;
    const bool leafa = nodea.left < 0, leafb = nodeb.left < 0;
    if (leafa && leafb) {
        for (int i = nodea.begin; i < nodea.end; ++i)
            for (int j = nodeb.begin; j < nodeb.end; ++j)
                out.emplace_back(a.face_order()[i], b.face_order()[j]);
        return;
    }
    if (leafb || (!leafa && (nodea.box.hi - nodea.box.lo).squaredNorm() >
                                (nodeb.box.hi - nodeb.box.lo).squaredNorm())) {
        overlap_pairs(a, b, nodea.left, nb, out);
        overlap_pairs(a, b, nodea.right, nb, out);
    } else {
        overlap_pairs(a, b, na, nodeb.left, out);
        overlap_pairs(a, b, na, nodeb.right, out);
    }
}

}  // namespace collision_detail

inline std::vector<IntersectionPair> detect_intersections(const TriMesh& garment,
                                                          const Bvh& garment_bvh,
                                                          const TriMesh& body,
                                                          const Bvh& body_bvh) {
    std::vector<std::pair<int, int>> candidates;
    collision_detail::overlap_pairs(garment_bvh, body_bvh, 0, 0, candidates);
    std::vector<IntersectionPair> hits;
    for (const auto& [gf, bf] : candidates) {
        const auto& gt = garment.faces[gf];
        const auto& bt = body.faces[bf];
        bool coplanar = false;
        if (tri_tri_intersect(garment.vertices[gt[0]], garment.vertices[gt[1]],
                              garment.vertices[gt[2]], body.vertices[bt[0]],
                              body.vertices[bt[1]], body.vertices[bt[2]], &coplanar))
            hits.push_back({gf, bf, coplanar});
    }
    std::sort(hits.begin(), hits.end(), [](const IntersectionPair& x, const IntersectionPair& y) {
        return x.garment_face != y.garment_face ? x.garment_face < y.garment_face
                                                : x.body_face < y.body_face;
    });
    return hits;
}

inline std::vector<IntersectionPair> detect_intersections(const TriMesh& garment,
                                                          const TriMesh& body) {
    if (garment.face_count() == 0 || body.face_count() == 0) return {};
    return detect_intersections(garment, Bvh(garment), body, Bvh(body));
}

inline CollisionReport compute_collision_report(const TriMesh& garment, const ExactSdf& body) {
    CollisionReport rep;
    std::vector<double> values;
    rep.penetrating_vertices = detect_vf(garment, body, &values);
    rep.penetration_depths.reserve(rep.penetrating_vertices.size());
    for (int i : rep.penetrating_vertices) rep.penetration_depths.push_back(-values[i]);

    if (garment.face_count() > 0 && body.mesh().face_count() > 0)
        rep.pairs = detect_intersections(garment, Bvh(garment), body.mesh(), body.bvh());

    std::unordered_set<int> penetrating(rep.penetrating_vertices.begin(),
                                        rep.penetrating_vertices.end());
    auto owns_penetrating = [&](int f) {
        const auto& t = garment.faces[f];
        return penetrating.count(t[0]) || penetrating.count(t[1]) || penetrating.count(t[2]);
    };
    // every triangle owning a penetrating vertex is a VF contact, whether or
    // not it crosses the body surface itself
    for (int f = 0; f < garment.face_count(); ++f)
        if (owns_penetrating(f)) rep.vf_triangles.push_back(f);
    for (const auto& p : rep.pairs) {
        rep.coplanar_contact |= p.coplanar;
        if (!owns_penetrating(p.garment_face)) rep.ee_triangles.push_back(p.garment_face);
    }
    std::sort(rep.ee_triangles.begin(), rep.ee_triangles.end());
    rep.ee_triangles.erase(std::unique(rep.ee_triangles.begin(), rep.ee_triangles.end()),
                           rep.ee_triangles.end());
    return rep;
}

}  // namespace refu
