// Uniform (unweighted one-ring mean) Laplacian of a per-vertex 3D field.
#pragma once

#include <vector>

#include "refu/trimesh.hpp"

namespace refu {

// L(u)_i = mean over one-ring neighbors j of (u_j - u_i).
// Isolated vertices get a zero vector; their ids are appended to
// isolated_out when given.
inline std::vector<Vec3> uniform_laplacian(const TriMesh& mesh,
                                           const std::vector<Vec3>& values,
                                           std::vector<int>* isolated_out = nullptr) {
    if (int(values.size()) != mesh.vertex_count())
        throw Error("uniform_laplacian: field size does not match vertex count");
    std::vector<Vec3> out(values.size(), Vec3::Zero());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const auto& ring = mesh.one_ring[i];
        if (ring.empty()) {
            if (isolated_out) isolated_out->push_back(i);
            continue;
        }
        Vec3 acc = Vec3::Zero();
        for (int j : ring) acc += values[j] - values[i];
        out[i] = acc / double(ring.size());
    }
    return out;
}

}  // namespace refu
