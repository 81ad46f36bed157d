// Triangle-triangle intersection along the lines of Moller's interval test,
// in double precision with plane normals normalized so the epsilon snap acts
// on true distances. Touching contacts count as intersections; coplanar
// overlap is detected in 2D and reported through the coplanar flag.
// Zero-area triangles never intersect anything (the loader reports them).
#pragma once

#include <algorithm>
#include <cmath>

#include "refu/core.hpp"

namespace refu {

namespace tritri_detail {

constexpr double kPlaneEps = 1e-12;

inline double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

inline bool segments_overlap_2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
    const double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
    const double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
    if (o1 == 0.0 && o2 == 0.0 && o3 == 0.0 && o4 == 0.0) {
        // collinear: 1D interval overlap along the dominant direction
        const int ax = std::abs(b.x() - a.x()) >= std::abs(b.y() - a.y()) ? 0 : 1;
        double lo1 = std::min(a[ax], b[ax]), hi1 = std::max(a[ax], b[ax]);
        double lo2 = std::min(c[ax], d[ax]), hi2 = std::max(c[ax], d[ax]);
        return !(hi1 < lo2 || hi2 < lo1);
    }
    return o1 * o2 <= 0.0 && o3 * o4 <= 0.0;
}

inline bool point_in_tri_2d(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                            const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const double o1 = orient2d(a, b, p);
    const double o2 = orient2d(b, c, p);
    const double o3 = orient2d(c, a, p);
    const bool has_neg = o1 < 0 || o2 < 0 || o3 < 0;
    const bool has_pos = o1 > 0 || o2 > 0 || o3 > 0;
    return !(has_neg && has_pos);
}

inline bool coplanar_overlap(const Vec3 v[3], const Vec3 u[3], const Vec3& n) {
    // project onto the plane's dominant axis pair
    int drop = 0;
    if (std::abs(n.y()) > std::abs(n.x())) drop = 1;
    if (std::abs(n.z()) > std::abs(n[drop])) drop = 2;
    const int i0 = (drop + 1) % 3, i1 = (drop + 2) % 3;
    Eigen::Vector2d pv[3], pu[3];
    for (int k = 0; k < 3; ++k) {
        pv[k] = {v[k][i0], v[k][i1]};
        pu[k] = {u[k][i0], u[k][i1]};
    }
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            if (segments_overlap_2d(pv[a], pv[(a + 1) % 3], pu[b], pu[(b + 1) % 3])) return true;
    if (point_in_tri_2d(pv[0], pu[0], pu[1], pu[2])) return true;
    if (point_in_tri_2d(pu[0], pv[0], pv[1], pv[2])) return true;
    return false;
}

// interval of a triangle (projections p, plane distances d) on the
// intersection line; requires mixed signs among d
inline void interval(const double p[3], const double d[3], double& lo, double& hi) {
    // pick the vertex that is alone on its side (or on the plane)
    int alone;
    if (d[0] * d[1] > 0.0) alone = 2;
    else if (d[0] * d[2] > 0.0) alone = 1;
    else if (d[1] * d[2] > 0.0 || d[0] != 0.0) alone = 0;
    else if (d[1] != 0.0) alone = 1;
    else alone = 2;
    const int o1 = (alone + 1) % 3, o2 = (alone + 2) % 3;
    auto cross_t = [&](int i, int j) {
        return p[i] + (p[j] - p[i]) * d[i] / (d[i] - d[j]);
    };
    double t1 = d[alone] == d[o1] ? p[alone] : cross_t(alone, o1);
    double t2 = d[alone] == d[o2] ? p[alone] : cross_t(alone, o2);
    lo = std::min(t1, t2);
    hi = std::max(t1, t2);
}

}  // namespace tritri_detail

// True when the (closed) triangles share at least one point. When the shared
// region arises from coplanar overlap, *coplanar is set.
inline bool tri_tri_intersect(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& u0,
                              const Vec3& u1, const Vec3& u2, bool* coplanar = nullptr) {
    using namespace tritri_detail;
    if (coplanar) *coplanar = false;

    Vec3 n1 = (v1 - v0).cross(v2 - v0);
    Vec3 n2 = (u1 - u0).cross(u2 - u0);
    const double len1 = n1.norm(), len2 = n2.norm();
    if (len1 == 0.0 || len2 == 0.0) return false;  // degenerate
    n1 /= len1;
    n2 /= len2;

    double du[3] = {n1.dot(u0 - v0), n1.dot(u1 - v0), n1.dot(u2 - v0)};
    for (double& d : du)
        if (std::abs(d) < kPlaneEps) d = 0.0;
    if ((du[0] > 0 && du[1] > 0 && du[2] > 0) || (du[0] < 0 && du[1] < 0 && du[2] < 0))
        return false;

    double dv[3] = {n2.dot(v0 - u0), n2.dot(v1 - u0), n2.dot(v2 - u0)};
    for (double& d : dv)
        if (std::abs(d) < kPlaneEps) d = 0.0;
    if ((dv[0] > 0 && dv[1] > 0 && dv[2] > 0) || (dv[0] < 0 && dv[1] < 0 && dv[2] < 0))
        return false;

    const Vec3 v[3] = {v0, v1, v2};
    const Vec3 u[3] = {u0, u1, u2};
    if (du[0] == 0.0 && du[1] == 0.0 && du[2] == 0.0) {
        const bool hit = coplanar_overlap(v, u, n1);
        if (hit && coplanar) *coplanar = true;
        return hit;
    }

    // direction of the intersection line; project on its dominant axis
    const Vec3 dir = n1.cross(n2);
    int axis = 0;
    if (std::abs(dir.y()) > std::abs(dir.x())) axis = 1;
    if (std::abs(dir.z()) > std::abs(dir[axis])) axis = 2;

    const double pv[3] = {v0[axis], v1[axis], v2[axis]};
    const double pu[3] = {u0[axis], u1[axis], u2[axis]};
    double lo1, hi1, lo2, hi2;
    interval(pv, dv, lo1, hi1);
    interval(pu, du, lo2, hi2);
    return !(hi1 < lo2 || hi2 < lo1);
}

}  // namespace refu
