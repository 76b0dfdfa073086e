#pragma once

#include "itra/types.hpp"

#include <array>

namespace itra::descriptors {

// Pyramid histogram of oriented gradients over a single frame.
struct PhogConfig {
    std::vector<int> levels = {0, 1, 2};  // level l contributes a 2^l x 2^l grid
    int bins = 9;
    bool signed_orientations = false;  // false: orientations folded into [0, pi)

    Index dim() const;
    void validate() const;
};

// Gradient histograms per level cell, concatenated coarse to fine, each level
// block l1-normalized. Gradients are central differences with replicated
// edges, weighted by magnitude.
Vector phog(const Frame& frame, const PhogConfig& cfg);

struct CuboidSpec {
    Index x = 0, y = 0, t0 = 0;
    Index width = 0, height = 0, depth = 0;
};

// Uniformly positioned in-bounds cuboids over a (width x height x depth)
// volume; deterministic under a fixed seed.
std::vector<CuboidSpec> sample_cuboids(Index vol_width, Index vol_height, Index vol_depth,
                                       Index cub_width, Index cub_height, Index cub_depth,
                                       Index count, std::uint64_t seed);

struct Hog3dConfig {
    std::array<Index, 3> cell_grid = {5, 2, 3};  // cells along x, y, t
    Matrix axes;                                 // 3 x n_axes unit orientation axes
    double clip = 0.0;                           // per-entry cap; 0 disables

    Hog3dConfig();

    // One axis per antipodal dodecahedron-vertex pair (the 10 folded
    // icosahedron face normals).
    static Matrix icosahedron_face_axes();
    // One axis per antipodal icosahedron-vertex pair (6 axes), for compact
    // low-dimensional variants.
    static Matrix icosahedron_vertex_axes();

    Index dim() const;
    void validate() const;
};

// 3D gradient orientation histogram over a spatio-temporal volume. Each
// voxel's gradient magnitude is assigned to the axis with maximal absolute
// cosine (ties toward the lower axis index). The volume is padded by edge
// replication up to a multiple of the cell grid. Output is unnormalized.
Vector hog3d(const std::vector<Frame>& cuboid, const Hog3dConfig& cfg);

enum class ColumnNorm { l1, l2 };

// Drops columns whose l2 norm is <= threshold and rescales the survivors to
// unit norm, preserving column order.
Matrix filter_and_normalize(const Matrix& descs, double threshold,
                            ColumnNorm norm = ColumnNorm::l2);

// Threshold that drops roughly `drop_fraction` of the columns (the value of
// the k-th smallest column norm, k = floor(drop_fraction * n)).
double auto_threshold(const Matrix& descs, double drop_fraction);

}  // namespace itra::descriptors
