// Procedural watertight primitives: tetrahedron, box, icosphere, wedge prism,
// and a generalized capsule (bent spine, varying radius profile) that the
// synthetic body generator builds on.
#pragma once

#include <cmath>
#include <map>
#include <numbers>

#include "refu/trimesh.hpp"

namespace refu {

inline TriMesh make_tetrahedron(double scale = 1.0) {
    std::vector<Vec3> v = {
        {1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    for (auto& p : v) p *= scale;
    // outward-facing windings
    std::vector<std::array<int, 3>> f = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    return make_mesh(std::move(v), std::move(f));
}

inline TriMesh make_box(const Vec3& center, const Vec3& half) {
    std::vector<Vec3> v(8);
    for (int i = 0; i < 8; ++i)
        v[i] = center + Vec3((i & 1) ? half.x() : -half.x(), (i & 2) ? half.y() : -half.y(),
                             (i & 4) ? half.z() : -half.z());
    std::vector<std::array<int, 3>> f = {
        {0, 2, 3}, {0, 3, 1},  // z-
        {4, 5, 7}, {4, 7, 6},  // z+
        {0, 1, 5}, {0, 5, 4},  // y-
        {2, 6, 7}, {2, 7, 3},  // y+
        {0, 4, 6}, {0, 6, 2},  // x-
        {1, 3, 7}, {1, 7, 5},  // x+
    };
    return make_mesh(std::move(v), std::move(f));
}

inline TriMesh make_icosphere(const Vec3& center, double radius, int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                           {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                           {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (auto& p : v) p.normalize();
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoints;
        auto midpoint = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            Vec3 m = (v[a] + v[b]).normalized();
            v.push_back(m);
            int id = int(v.size()) - 1;
            midpoints.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(f.size() * 4);
        for (const auto& tri : f) {
            int ab = midpoint(tri[0], tri[1]);
            int bc = midpoint(tri[1], tri[2]);
            int ca = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    for (auto& p : v) p = center + radius * p;
    return make_mesh(std::move(v), std::move(f));
}

// Triangular prism with its ridge along y: apex at z = height, base corners
// at x = +-half_width, z = 0, extruded over y in [-half_len, half_len].
inline TriMesh make_wedge(double half_width, double height, double half_len) {
    std::vector<Vec3> v = {
        {0, -half_len, height},         // 0 apex near
        {-half_width, -half_len, 0.0},  // 1 base left near
        {half_width, -half_len, 0.0},   // 2 base right near
        {0, half_len, height},          // 3 apex far
        {-half_width, half_len, 0.0},   // 4 base left far
        {half_width, half_len, 0.0},    // 5 base right far
    };
    std::vector<std::array<int, 3>> f = {
        {0, 1, 2},             // near cap (normal -y)
        {3, 5, 4},             // far cap (normal +y)
        {0, 3, 4}, {0, 4, 1},  // left slant
        {0, 2, 5}, {0, 5, 3},  // right slant
        {1, 4, 5}, {1, 5, 2},  // bottom
    };
    return make_mesh(std::move(v), std::move(f));
}

// Closed tube of `rings` cross-sections with `segments` vertices each plus
// two cap fans. spine(t) and radius(t, angle) are sampled at t in [0, 1].
template <class SpineFn, class RadiusFn>
TriMesh make_generalized_capsule(int rings, int segments, SpineFn&& spine, RadiusFn&& radius) {
    if (rings < 2 || segments < 3) throw Error("make_generalized_capsule: too few samples");
    std::vector<Vec3> v;
    std::vector<std::array<int, 3>> f;
    const double two_pi = 2.0 * std::numbers::pi;

    // parallel-transported frames along the spine keep rings from twisting
    std::vector<Vec3> centers(rings), tangents(rings);
    for (int r = 0; r < rings; ++r) {
        const double t = double(r) / double(rings - 1);
        centers[r] = spine(t);
        const double h = 1.0 / double(rings - 1);
        const Vec3 ahead = spine(std::min(1.0, t + h));
        const Vec3 behind = spine(std::max(0.0, t - h));
        tangents[r] = (ahead - behind).normalized();
    }
    Vec3 normal = tangents[0].cross(Vec3(0, 0, 1));
    if (normal.norm() < 1e-9) normal = tangents[0].cross(Vec3(0, 1, 0));
    normal.normalize();

    for (int r = 0; r < rings; ++r) {
        if (r > 0) {
            // transport the frame across the tangent change
            normal = (normal - tangents[r] * normal.dot(tangents[r])).normalized();
        }
        const Vec3 binormal = tangents[r].cross(normal).normalized();
        const double t = double(r) / double(rings - 1);
        for (int s = 0; s < segments; ++s) {
            const double phi = two_pi * double(s) / double(segments);
            const double rad = radius(t, phi);
            v.push_back(centers[r] + rad * (std::cos(phi) * normal + std::sin(phi) * binormal));
        }
    }
    auto ring_vertex = [&](int r, int s) { return r * segments + (s % segments); };
    for (int r = 0; r + 1 < rings; ++r) {
        for (int s = 0; s < segments; ++s) {
            int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
            int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
            f.push_back({a, b, d});
            f.push_back({a, d, c});
        }
    }
    // flat cap fans around the spine endpoints
    const int start_center = int(v.size());
    v.push_back(centers[0]);
    const int end_center = int(v.size());
    v.push_back(centers[rings - 1]);
    for (int s = 0; s < segments; ++s) {
        f.push_back({start_center, ring_vertex(0, s + 1), ring_vertex(0, s)});
        f.push_back({end_center, ring_vertex(rings - 1, s), ring_vertex(rings - 1, s + 1)});
    }
    return make_mesh(std::move(v), std::move(f));
}

}  // namespace refu
