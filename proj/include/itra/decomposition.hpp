#pragma once

#include "itra/descriptors.hpp"
#include "itra/solvers.hpp"
#include "itra/types.hpp"

namespace itra::decomposition {

struct VideoTensor {
    std::vector<Frame> frames;
    std::string id;
    std::optional<int> class_label;

    Index n_frames() const { return static_cast<Index>(frames.size()); }
    void validate() const;
};

struct ContributionScores {
    Vector r;  // one entry per frame
};

enum class ScoreMode { signed_sum, absolute };

struct SelectionConfig {
    Index k = 3;
    Index t = 3;
    std::optional<double> theta;  // candidate threshold; nullopt = auto
    ScoreMode score_mode = ScoreMode::absolute;
};

// Per-frame reconstruction contribution: row sums of the concatenated
// coefficient matrix [W_self | W_rest], signed or in absolute value.
ContributionScores frame_contribution_scores(const Matrix& w_full, ScoreMode mode);

// Picks cfg.k frame indices. Candidates are frames with score > theta; if
// fewer than k qualify (or theta is auto) the threshold relaxes to the k-th
// largest score (inclusive). Anchors at floor((j - 1/2) * n / k) each grab
// their nearest unused candidate (ties toward the earlier frame). Sorted
// ascending.
std::vector<Index> select_keyframes(const ContributionScores& scores,
                                    const SelectionConfig& cfg, Index n_frames);

// 2t+1 consecutive frames centered on each index; positions past either end
// replicate the boundary frame.
std::vector<std::vector<Frame>> extract_keysequences(const VideoTensor& video,
                                                     const std::vector<Index>& centers,
                                                     Index t);

// One column of phog per frame.
Matrix phog_matrix(const VideoTensor& video, const descriptors::PhogConfig& cfg);

struct KeySequence {
    Index key_frame_index = 0;
    std::vector<Frame> frames;   // exactly 2t+1
    Matrix cuboid_descriptors;   // delta x n' (post filter/normalize)
};

struct KeySequenceSet {
    std::vector<KeySequence> sequences;  // centers sorted ascending
    std::string source_video;
    int reference_class = -1;
};

struct DecomposeConfig {
    descriptors::PhogConfig phog;
    SelectionConfig selection;
    solvers::AdmmConfig admm;
    descriptors::Hog3dConfig hog3d;
    Index cuboid_count = 300;
    Index cuboid_width = 12;
    Index cuboid_height = 12;
    Index cuboid_depth = 7;
    double filter_threshold = 0.0;
    descriptors::ColumnNorm column_norm = descriptors::ColumnNorm::l2;
};

// Windows plus cuboid HOG3D descriptors for caller-chosen centers (sorted
// ascending, duplicates allowed). One cuboid layout is sampled per video and
// shared by all windows, so the layout depends only on (video shape, seed).
KeySequenceSet describe_keysequences(const VideoTensor& video,
                                     const std::vector<Index>& centers,
                                     const DecomposeConfig& cfg, int reference_class,
                                     std::uint64_t seed);

// Full per-video decomposition: PHOG frame matrix, joint row-sparse solve
// against the reference-class frame matrix (may have zero columns), key-frame
// selection, window extraction, then cuboid HOG3D descriptors per window.
// One cuboid layout is sampled per video and shared by all windows.
KeySequenceSet decompose(const VideoTensor& video, const Matrix& class_frames,
                         const DecomposeConfig& cfg, int reference_class,
                         std::uint64_t seed);

}  // namespace itra::decomposition
