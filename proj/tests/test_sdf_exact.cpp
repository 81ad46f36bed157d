#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "refu/exact_sdf.hpp"
#include "refu/shapes.hpp"
#include "support/oracles.hpp"

using namespace refu;

namespace {

// icosphere with a smooth radial bump field; stays embedded for small amp
TriMesh bumpy_sphere(std::uint64_t seed, int sub = 2, double amp = 0.08) {
    TriMesh m = make_icosphere(Vec3::Zero(), 1.0, sub);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> freq(1.0, 3.0);
    std::uniform_real_distribution<double> phase(0.0, 6.28);
    const double f1 = freq(rng), f2 = freq(rng), p1 = phase(rng), p2 = phase(rng);
    for (auto& v : m.vertices) {
        const double r = 1.0 + amp * std::sin(f1 * v.x() + p1) * std::cos(f2 * v.y() + p2);
        v *= r;
    }
    m.finalize();
    return m;
}

std::vector<Vec3> random_points(std::uint64_t seed, int n, double extent) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> c(-extent, extent);
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = Vec3(c(rng), c(rng), c(rng));
    return pts;
}

}  // namespace

TEST_CASE("closest point on triangle hits all Voronoi regions") {
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
    SECTION("interior projection") {
        auto r = closest_point_on_triangle(Vec3(0.25, 0.25, 0.7), a, b, c);
        CHECK((r.point - Vec3(0.25, 0.25, 0)).norm() < 1e-15);
        CHECK(r.bary.minCoeff() > 0.0);
        CHECK(std::abs(r.bary.sum() - 1.0) < 1e-12);
    }
    SECTION("vertex region gives exact barycentric zeros") {
        auto r = closest_point_on_triangle(Vec3(-1, -1, 0.3), a, b, c);
        CHECK(r.point == a);
        CHECK(r.bary == Vec3(1, 0, 0));
    }
    SECTION("edge region") {
        auto r = closest_point_on_triangle(Vec3(0.5, -2, 0), a, b, c);
        CHECK((r.point - Vec3(0.5, 0, 0)).norm() < 1e-15);
        CHECK(r.bary[2] == 0.0);
    }
    SECTION("hypotenuse edge region") {
        auto r = closest_point_on_triangle(Vec3(1, 1, 0), a, b, c);
        CHECK((r.point - Vec3(0.5, 0.5, 0)).norm() < 1e-12);
        CHECK(r.bary[0] == 0.0);
    }
}

TEST_CASE("bvh: single triangle mesh is one root leaf") {
    TriMesh m = make_mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}});
    Bvh bvh(m);
    REQUIRE(bvh.nodes().size() == 1);
    CHECK(bvh.nodes()[0].left == -1);
}

TEST_CASE("bvh: traversal census covers every face exactly once") {
    TriMesh m = make_icosphere(Vec3::Zero(), 1.0, 3);  // 1280 faces
    Bvh bvh(m);
    std::vector<int> faces;
    bvh.traverse_faces(faces);
    REQUIRE(int(faces.size()) == m.face_count());
    std::sort(faces.begin(), faces.end());
    for (int f = 0; f < m.face_count(); ++f) CHECK(faces[f] == f);

    // every node box contains its descendants' boxes
    const auto& nodes = bvh.nodes();
    for (const auto& n : nodes) {
        if (n.left < 0) continue;
        CHECK(n.box.contains(nodes[n.left].box));
        CHECK(n.box.contains(nodes[n.right].box));
    }
}

TEST_CASE("bvh: degenerate face gets a point/segment box") {
    TriMesh m = make_mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0)},
                          {{0, 1, 3}, {0, 1, 2}});
    Bvh bvh(m, 1);
    std::vector<int> faces;
    bvh.traverse_faces(faces);
    CHECK(faces.size() == 2);
}

TEST_CASE("bvh: empty mesh rejected") {
    TriMesh empty;
    CHECK_THROWS_AS(Bvh(empty), Error);
}

TEST_CASE("closest point: analytic checks") {
    SECTION("point above triangle centroid") {
        TriMesh m = make_mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}});
        Bvh bvh(m);
        auto r = bvh.closest_point(Vec3(1.0 / 3, 1.0 / 3, 0.5));
        CHECK(r.face == 0);
        CHECK(r.distance == Catch::Approx(0.5).margin(1e-15));
    }
    SECTION("query coincident with a mesh vertex") {
        TriMesh m = make_icosphere(Vec3::Zero(), 1.0, 1);
        Bvh bvh(m);
        auto r = bvh.closest_point(m.vertices[17]);
        CHECK(r.distance == 0.0);
        CHECK((r.point - m.vertices[17]).norm() == 0.0);
    }
}

TEST_CASE("closest point matches exhaustive scan on random meshes") {
    TriMesh m = bumpy_sphere(42, 2);  // 320 faces
    Bvh bvh(m);
    auto queries = random_points(99, 500, 1.6);
    for (const auto& q : queries) {
        auto fast = bvh.closest_point(q);
        int face;
        double dist;
        Vec3 point;
        oracle::brute_closest_point(m, q, face, dist, point);
        CHECK(fast.face == face);
        CHECK(fast.distance == Catch::Approx(dist).margin(1e-12));
    }
}

TEST_CASE("signed distance: unit cube center") {
    TriMesh cube = make_box(Vec3::Zero(), Vec3(0.5, 0.5, 0.5));
    ExactSdf sdf(cube);
    REQUIRE(sdf.watertight());
    auto r = sdf.query(Vec3::Zero());
    CHECK(r.value == Catch::Approx(-0.5).margin(1e-15));
    // direction is axis-aligned, tie broken deterministically
    Vec3 g = r.gradient.cwiseAbs();
    CHECK(g.maxCoeff() == Catch::Approx(1.0).margin(1e-12));
    CHECK(g.minCoeff() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("signed distance: icosphere approximates the analytic sphere") {
    TriMesh m = make_icosphere(Vec3::Zero(), 1.0, 4);
    // for a convex polyhedron inscribed in the sphere, the SDF deviates from
    // the analytic sphere SDF by at most the worst face-plane sagitta
    double chord_err = 0.0;
    for (int f = 0; f < m.face_count(); ++f) {
        const auto& t = m.faces[f];
        const Vec3 n = m.face_normal_unnormalized(f).normalized();
        chord_err = std::max(chord_err, 1.0 - n.dot(m.vertices[t[0]]));
    }

    ExactSdf sdf(m);
    auto r = sdf.query(Vec3(0, 0, 2.0));
    CHECK(std::abs(r.value - 1.0) < chord_err + 1e-12);
    CHECK((r.gradient - Vec3(0, 0, 1)).norm() < 0.05);

    auto inside = sdf.query(Vec3(0.2, 0.1, -0.05));
    const double expect = Vec3(0.2, 0.1, -0.05).norm() - 1.0;
    CHECK(std::abs(inside.value - expect) < chord_err + 1e-12);
}

TEST_CASE("signed distance: sign agrees with ray parity on random meshes") {
    TriMesh m = bumpy_sphere(7, 2);
    ExactSdf sdf(m);
    auto queries = random_points(123, 1000, 1.4);
    int checked = 0;
    for (const auto& q : queries) {
        auto r = sdf.query(q);
        if (std::abs(r.value) <= 1e-6) continue;
        ++checked;
        CHECK(oracle::ray_parity_inside(m, q) == (r.value < 0.0));
    }
    CHECK(checked > 900);
}

TEST_CASE("signed distance: on-surface query returns pseudo-normal gradient") {
    TriMesh m = make_icosphere(Vec3::Zero(), 1.0, 2);
    ExactSdf sdf(m);
    const Vec3 v = m.vertices[31];
    auto r = sdf.query(v);
    CHECK(r.value == 0.0);
    CHECK(r.gradient.norm() == Catch::Approx(1.0).margin(1e-12));
    // for a sphere the vertex pseudo-normal is radial
    CHECK((r.gradient - v.normalized()).norm() < 1e-6);
}

TEST_CASE("gradient consistency: q - f * grad lands on the surface") {
    TriMesh m = bumpy_sphere(21, 2);
    ExactSdf sdf(m);
    auto queries = random_points(55, 300, 1.3);
    for (const auto& q : queries) {
        auto r = sdf.query(q);
        if (std::abs(r.value) < 1e-3) continue;  // skip near-surface noise
        const Vec3 foot = q - r.value * r.gradient;
        auto back = sdf.query(foot);
        CHECK(std::abs(back.value) < 1e-7);
    }
}

TEST_CASE("eikonal property holds under finite differences") {
    TriMesh m = make_icosphere(Vec3::Zero(), 1.0, 3);
    ExactSdf sdf(m);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss;
    const double h = 1e-5;
    int tested = 0;
    while (tested < 200) {
        Vec3 dir = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
        std::uniform_real_distribution<double> rad(0.3, 1.6);
        const double r = rad(rng);
        if (std::abs(r - 1.0) < 1e-2) continue;  // off-surface requirement
        const Vec3 q = r * dir;                  // medial axis is the origin; r >= 0.3 clears it
        Vec3 grad_fd;
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 dq = Vec3::Zero();
            dq[axis] = h;
            grad_fd[axis] = (sdf.query(q + dq).value - sdf.query(q - dq).value) / (2 * h);
        }
        CHECK(std::abs(grad_fd.norm() - 1.0) < 1e-3);
        ++tested;
    }
}

TEST_CASE("brute-force equivalence of signed distance magnitude") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        TriMesh m = bumpy_sphere(seed, 1);
        ExactSdf sdf(m);
        for (const auto& q : random_points(seed * 31 + 5, 200, 1.5)) {
            int face;
            double dist;
            Vec3 point;
            oracle::brute_closest_point(m, q, face, dist, point);
            CHECK(std::abs(sdf.query(q).value) == Catch::Approx(dist).margin(1e-9));
        }
    }
}

TEST_CASE("non-watertight mesh is flagged") {
    TriMesh m = make_mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}});
    ExactSdf sdf(m);
    CHECK_FALSE(sdf.watertight());
}
