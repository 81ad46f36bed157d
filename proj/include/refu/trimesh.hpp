// Indexed triangle mesh with derived edge list and one-ring adjacency.
// Meshes are treated as immutable after construction; queries never mutate.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "refu/core.hpp"

namespace refu {

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    // derived, filled by finalize()
    std::vector<std::array<int, 2>> edges;        // unique unordered pairs, a < b
    std::vector<std::vector<int>> one_ring;       // sorted neighbor vertex ids
    std::vector<int> degenerate_faces;            // zero-area faces, kept but reported

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }

    Vec3 face_normal_unnormalized(int f) const {
        const auto& t = faces[f];
        return (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    }

    double face_area(int f) const { return 0.5 * face_normal_unnormalized(f).norm(); }

    // Validates invariants and builds edges/adjacency. Throws refu::Error on
    // out-of-range or repeated indices.
    void finalize() {
        const int nv = vertex_count();
        for (std::size_t f = 0; f < faces.size(); ++f) {
            const auto& t = faces[f];
            for (int k = 0; k < 3; ++k) {
                if (t[k] < 0 || t[k] >= nv)
                    throw Error("face " + std::to_string(f) + ": vertex index " +
                                std::to_string(t[k]) + " out of range [0," +
                                std::to_string(nv) + ")");
            }
            if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
                throw Error("face " + std::to_string(f) + " repeats a vertex index");
        }
        edges.clear();
        edges.reserve(faces.size() * 3 / 2);
        for (const auto& t : faces) {
            for (int k = 0; k < 3; ++k) {
                int a = t[k], b = t[(k + 1) % 3];
                if (a > b) std::swap(a, b);
                edges.push_back({a, b});
            }
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        one_ring.assign(nv, {});
        for (const auto& e : edges) {
            one_ring[e[0]].push_back(e[1]);
            one_ring[e[1]].push_back(e[0]);
        }
        for (auto& ring : one_ring) std::sort(ring.begin(), ring.end());

        degenerate_faces.clear();
        for (int f = 0; f < face_count(); ++f)
            if (face_area(f) == 0.0) degenerate_faces.push_back(f);
    }

    Vec3 centroid() const {
        Vec3 c = Vec3::Zero();
        for (const auto& v : vertices) c += v;
        return vertices.empty() ? c : Vec3(c / double(vertices.size()));
    }

    double bounding_radius() const {
        Vec3 c = centroid();
        double r = 0.0;
        for (const auto& v : vertices) r = std::max(r, (v - c).norm());
        return r;
    }
};

inline TriMesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces) {
    TriMesh m;
    m.vertices = std::move(vertices);
    m.faces = std::move(faces);
    m.finalize();
    return m;
}

// A closed orientable manifold: every unordered edge is shared by exactly two
// faces with opposite winding. Sign of the exact SDF is only guaranteed then.
inline bool is_watertight(const TriMesh& mesh) {
    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(mesh.faces.size() * 3);
    auto key = [](int a, int b) {
        return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
    };
    for (const auto& t : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            if (++directed[key(a, b)] > 1) return false;  // repeated half-edge
        }
    }
    for (const auto& [k, count] : directed) {
        int a = int(k >> 32), b = int(k & 0xffffffffu);
        auto rev = directed.find(key(b, a));
        if (rev == directed.end() || rev->second != 1) return false;
    }
    return true;
}

}  // namespace refu
