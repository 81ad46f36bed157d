// ASCII OBJ reader/writer. Only `v` and `f` records are interpreted
// (triangles only, 1-based indices); other record types are skipped.
// Coordinates are written with 17 significant digits so save/load round-trips
// are bit-exact in 64-bit.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "refu/trimesh.hpp"

namespace refu {

namespace detail {
// "f 3/1/2" style references: the vertex index is the token up to the first '/'
inline int parse_face_index(const std::string& token, const std::string& where) {
    std::size_t slash = token.find('/');
    std::string head = slash == std::string::npos ? token : token.substr(0, slash);
    int idx = 0;
    try {
        idx = std::stoi(head);
    } catch (const std::exception&) {
        throw Error(where + ": bad face index '" + token + "'");
    }
    return idx;
}
}  // namespace detail

inline TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open OBJ file: " + path);
    TriMesh mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z()))
                throw Error(where + ": malformed vertex record");
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::string tok;
            std::array<int, 3> f{};
            int n = 0;
            while (ls >> tok) {
                if (n >= 3) throw Error(where + ": non-triangle face");
                int idx = detail::parse_face_index(tok, where);
                if (idx < 0) idx = int(mesh.vertices.size()) + idx + 1;  // relative indexing
                if (idx < 1 || idx > int(mesh.vertices.size()))
                    throw Error(where + ": face index " + std::to_string(idx) +
                                " out of range (1-based, " +
                                std::to_string(mesh.vertices.size()) + " vertices)");
                f[n++] = idx - 1;
            }
            if (n != 3) throw Error(where + ": non-triangle face");
            mesh.faces.push_back(f);
        }
        // everything else (vn, vt, #, o, g, s, mtllib, usemtl) is ignored
    }
    try {
        mesh.finalize();
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
    return mesh;
}

inline void save_obj(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open OBJ file for writing: " + path);
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!out) throw Error("I/O failure while writing " + path);
}

}  // namespace refu
