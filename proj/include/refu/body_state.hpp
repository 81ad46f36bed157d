// Parametric body instance: shape/pose parameters, garment style, and the
// resolved body mesh. Parameter dimensions are fixed at dataset-generation
// time and never change within a run.
#pragma once

#include "refu/trimesh.hpp"

namespace refu {

struct BodyState {
    VectorXd shape;  // beta
    VectorXd pose;   // theta
    VectorXd style;  // gamma, carried with the frame for the garment nets
    TriMesh mesh;

    // conditioning vector for the body SDF network
    VectorXd sdf_conditioning() const {
        VectorXd c(shape.size() + pose.size());
        c << shape, pose;
        return c;
    }

    // full parameter vector for the garment backbone and global latent
    VectorXd garment_features() const {
        VectorXd c(shape.size() + pose.size() + style.size());
        c << shape, pose, style;
        return c;
    }
};

}  // namespace refu
