// Closest point on a triangle, with barycentric coordinates.
// Region classification follows the standard Voronoi-region case analysis;
// barycentric coordinates are exact zeros in vertex/edge regions, which the
// signed-distance code relies on to pick the closest feature.
#pragma once

#include "refu/core.hpp"

namespace refu {

struct TrianglePoint {
    Vec3 point;
    Vec3 bary;  // weights for (a, b, c); nonnegative, sums to 1
};

inline TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                               const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return {a, Vec3(1, 0, 0)};

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return {b, Vec3(0, 1, 0)};

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return {a + v * ab, Vec3(1 - v, v, 0)};
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return {c, Vec3(0, 0, 1)};

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return {a + w * ac, Vec3(1 - w, 0, w)};
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return {b + w * (c - b), Vec3(0, 1 - w, w)};
    }

    // interior
    const double denom = va + vb + vc;
    if (denom <= 0.0) {
        // degenerate (zero-area) triangle: fall back to the closest edge point
        TrianglePoint best = {a, Vec3(1, 0, 0)};
        double best_d2 = (p - a).squaredNorm();
        auto consider_edge = [&](const Vec3& u, const Vec3& v, int iu, int iv) {
            const Vec3 uv = v - u;
            const double len2 = uv.squaredNorm();
            double t = len2 > 0.0 ? std::clamp(uv.dot(p - u) / len2, 0.0, 1.0) : 0.0;
            Vec3 q = u + t * uv;
            double d2q = (p - q).squaredNorm();
            if (d2q < best_d2) {
                best_d2 = d2q;
                Vec3 w = Vec3::Zero();
                w[iu] = 1 - t;
                w[iv] = t;
                best = {q, w};
            }
        };
        consider_edge(a, b, 0, 1);
        consider_edge(a, c, 0, 2);
        consider_edge(b, c, 1, 2);
        return best;
    }
    const double v = vb / denom, w = vc / denom;
    return {a + ab * v + ac * w, Vec3(1 - v - w, v, w)};
}

}  // namespace refu
