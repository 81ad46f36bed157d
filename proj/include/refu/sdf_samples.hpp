// Training-sample generation for the body SDF network. Three sources: the
// body surface (with and without Gaussian disturbance), the garment surface
// (likewise), and uniform points inside the fixed 4 m x 4 m x 4 m box at the
// origin. Every sample is labeled through the exact engine; only undisturbed
// body-surface samples carry normals (angle-weighted, vertex-interpolated).
#pragma once

#include <random>
#include <vector>

#include "refu/body_state.hpp"
#include "refu/exact_sdf.hpp"

namespace refu {

enum class SampleCategory { BodySurface, BodyDisturbed, GarmentSurface, GarmentDisturbed, Bbox };

struct SdfSample {
    Vec3 point = Vec3::Zero();
    double value = 0.0;
    Vec3 normal = Vec3::Zero();
    bool has_normal = false;  // true only for undisturbed body-surface samples
    SampleCategory category = SampleCategory::Bbox;
    int body_id = -1;
};

struct SampleCounts {
    int body_surface = 0;
    int body_disturbed = 0;
    int garment_surface = 0;
    int garment_disturbed = 0;
    int bbox = 0;

    int total() const {
        return body_surface + body_disturbed + garment_surface + garment_disturbed + bbox;
    }
};

constexpr double kSdfBboxHalf = 2.0;  // 4 m cube centered at the origin

// area-weighted face picker with uniform barycentric placement
class SurfaceSampler {
public:
    explicit SurfaceSampler(const TriMesh& mesh) : mesh_(&mesh) {
        cumulative_.reserve(mesh.face_count());
        double acc = 0.0;
        for (int f = 0; f < mesh.face_count(); ++f) {
            acc += mesh.face_area(f);
            cumulative_.push_back(acc);
        }
        if (cumulative_.empty() || cumulative_.back() <= 0.0)
            throw Error("SurfaceSampler: mesh has no area");
    }

    struct Sample {
        Vec3 point;
        int face;
        Vec3 bary;
    };

    Sample sample(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> uni(0.0, cumulative_.back());
        const double pick = uni(rng);
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), pick);
        const int f = int(it - cumulative_.begin());
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const double r1 = std::sqrt(u01(rng)), r2 = u01(rng);
        const Vec3 bary(1.0 - r1, r1 * (1.0 - r2), r1 * r2);
        const auto& t = mesh_->faces[f];
        Vec3 p = bary[0] * mesh_->vertices[t[0]] + bary[1] * mesh_->vertices[t[1]] +
                 bary[2] * mesh_->vertices[t[2]];
        return {p, f, bary};
    }

private:
    const TriMesh* mesh_;
    std::vector<double> cumulative_;
};

inline std::vector<SdfSample> sample_training_points(const BodyState& body,
                                                     const ExactSdf& body_sdf,
                                                     const TriMesh& garment,
                                                     const SampleCounts& counts, double sigma,
                                                     std::mt19937_64& rng, int body_id = -1) {
    if (!body_sdf.watertight()) throw Error("sample_training_points: body is not watertight");
    std::vector<SdfSample> out;
    out.reserve(counts.total());
    std::normal_distribution<double> gauss;
    auto disturb = [&](const Vec3& p) {
        return Vec3(p.x() + sigma * gauss(rng), p.y() + sigma * gauss(rng),
                    p.z() + sigma * gauss(rng));
    };
    auto label = [&](const Vec3& p, SampleCategory cat, bool with_normal, const Vec3& n) {
        SdfSample s;
        s.point = p;
        s.value = body_sdf.query(p).value;
        s.category = cat;
        s.has_normal = with_normal;
        if (with_normal) s.normal = n;
        s.body_id = body_id;
        return s;
    };

    SurfaceSampler body_sampler(body.mesh);
    for (int i = 0; i < counts.body_surface; ++i) {
        auto s = body_sampler.sample(rng);
        const Vec3 n = body_sdf.interpolated_vertex_normal(s.face, s.bary);
        out.push_back(label(s.point, SampleCategory::BodySurface, true, n));
    }
    for (int i = 0; i < counts.body_disturbed; ++i) {
        auto s = body_sampler.sample(rng);
        out.push_back(label(disturb(s.point), SampleCategory::BodyDisturbed, false, Vec3::Zero()));
    }
    if (counts.garment_surface > 0 || counts.garment_disturbed > 0) {
        SurfaceSampler garment_sampler(garment);
        for (int i = 0; i < counts.garment_surface; ++i) {
            auto s = garment_sampler.sample(rng);
            out.push_back(label(s.point, SampleCategory::GarmentSurface, false, Vec3::Zero()));
        }
        for (int i = 0; i < counts.garment_disturbed; ++i) {
            auto s = garment_sampler.sample(rng);
            out.push_back(
                label(disturb(s.point), SampleCategory::GarmentDisturbed, false, Vec3::Zero()));
        }
    }
    std::uniform_real_distribution<double> box(-kSdfBboxHalf, kSdfBboxHalf);
    for (int i = 0; i < counts.bbox; ++i) {
        const Vec3 p(box(rng), box(rng), box(rng));
        out.push_back(label(p, SampleCategory::Bbox, false, Vec3::Zero()));
    }
    return out;
}

}  // namespace refu
