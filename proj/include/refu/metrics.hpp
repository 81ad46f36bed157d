// The evaluation metric suite: MPVE, VFCP, CFMP, colliding-triangle counts,
// penetration energy with histogram, and local Laplacian error over the
// initially-collided region.
#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "refu/collision.hpp"
#include "refu/laplacian.hpp"

namespace refu {

// mean per-vertex Euclidean distance, reported in millimeters
inline double mpve_mm(const TriMesh& pred, const TriMesh& truth) {
    if (pred.vertex_count() != truth.vertex_count())
        throw Error("mpve: vertex count mismatch");
    if (pred.vertex_count() == 0) return 0.0;
    double acc = 0.0;
    for (int i = 0; i < pred.vertex_count(); ++i)
        acc += (pred.vertices[i] - truth.vertices[i]).norm();
    return acc / double(pred.vertex_count()) * 1000.0;
}

struct Histogram {
    std::vector<double> edges;   // size bins+1
    std::vector<int> counts;     // size bins

    static Histogram build(const std::vector<double>& samples, int bins = 50) {
        Histogram h;
        if (samples.empty() || bins <= 0) return h;
        const double hi = *std::max_element(samples.begin(), samples.end());
        const double top = hi > 0.0 ? hi : 1.0;
        h.edges.resize(bins + 1);
        for (int i = 0; i <= bins; ++i) h.edges[i] = top * double(i) / bins;
        h.counts.assign(bins, 0);
        for (double s : samples) {
            int bin = std::min(bins - 1, int(std::floor(s / top * bins)));
            h.counts[std::max(0, bin)]++;
        }
        return h;
    }
};

// aggregate statistics over a set of per-model collision reports
struct CollisionStats {
    double vfcp_pct = 0.0;   // penetrating vertices / all vertices
    double cfmp_pct = 0.0;   // fully collision-free models
    double avg_vf = 0.0;     // mean VF-classified colliding triangles per model
    double avg_ee = 0.0;     // mean EE-classified colliding triangles per model
    double mean_penetration_energy = 0.0;
};

inline CollisionStats aggregate_collision_stats(const std::vector<CollisionReport>& reports,
                                                const std::vector<int>& vertex_counts) {
    if (reports.empty()) throw Error("aggregate_collision_stats: empty dataset");
    if (reports.size() != vertex_counts.size())
        throw Error("aggregate_collision_stats: size mismatch");
    CollisionStats s;
    long total_vertices = 0, total_penetrating = 0;
    int clean = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        total_vertices += vertex_counts[i];
        total_penetrating += long(reports[i].penetrating_vertices.size());
        if (reports[i].collision_free()) ++clean;
        s.avg_vf += double(reports[i].vf_triangles.size());
        s.avg_ee += double(reports[i].ee_triangles.size());
        s.mean_penetration_energy += reports[i].penetration_energy();
    }
    const double n = double(reports.size());
    s.vfcp_pct = total_vertices > 0 ? 100.0 * double(total_penetrating) / double(total_vertices)
                                    : 0.0;
    s.cfmp_pct = 100.0 * double(clean) / n;
    s.avg_vf /= n;
    s.avg_ee /= n;
    s.mean_penetration_energy /= n;
    return s;
}

// mean |L(pred) - L(truth)| in mm over the initially-collided vertices and
// their one-rings; nullopt-style flag via the returned pair (value, valid)
struct LaplacianError {
    double value_mm = 0.0;
    bool applicable = false;
};

inline LaplacianError local_laplacian_error_mm(const TriMesh& pred, const TriMesh& truth,
                                               const std::vector<int>& collided_vertices) {
    if (pred.vertex_count() != truth.vertex_count())
        throw Error("local_laplacian_error: vertex count mismatch");
    LaplacianError result;
    if (collided_vertices.empty()) return result;
    std::set<int> region(collided_vertices.begin(), collided_vertices.end());
    for (int v : collided_vertices)
        for (int j : truth.one_ring[v]) region.insert(j);

    const auto lap_pred = uniform_laplacian(pred, pred.vertices);
    const auto lap_truth = uniform_laplacian(truth, truth.vertices);
    double acc = 0.0;
    for (int v : region) acc += (lap_pred[v] - lap_truth[v]).norm();
    result.value_mm = acc / double(region.size()) * 1000.0;
    result.applicable = true;
    return result;
}

}  // namespace refu
