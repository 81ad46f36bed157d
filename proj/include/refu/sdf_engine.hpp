// Signed-distance engine interface shared by the exact mesh-based engine and
// the learned network engine. Engines are immutable once built and safe to
// query from many workers.
#pragma once

#include <vector>

#include "refu/core.hpp"

namespace refu {

struct SignedDistanceResult {
    double value = 0.0;            // signed meters, negative inside
    Vec3 gradient = Vec3::Zero();  // unit direction of increasing value
    Vec3 raw_gradient = Vec3::Zero();  // engine gradient before normalization
    bool degenerate_gradient = false;
};

class SdfEngine {
public:
    virtual ~SdfEngine() = default;

    virtual SignedDistanceResult query(const Vec3& q) const = 0;

    virtual void query_batch(const std::vector<Vec3>& points,
                             std::vector<SignedDistanceResult>& out) const {
        out.resize(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = query(points[i]);
    }

    // d/dx (grad f(x) . u) for each (point, tangent) pair. Engines without
    // usable curvature information report zero (the exact engine's field is
    // piecewise smooth; its curvature term is deliberately dropped).
    virtual void hessian_vp_batch(const std::vector<Vec3>& points,
                                  const std::vector<Vec3>& tangents,
                                  std::vector<Vec3>& out) const {
        (void)points;
        out.assign(tangents.size(), Vec3::Zero());
    }

    virtual bool has_curvature() const { return false; }
};

}  // namespace refu
