#include "itra/decomposition.hpp"

#include <algorithm>
#include <cmath>

namespace itra::decomposition {

void VideoTensor::validate() const {
    if (frames.empty()) throw invalid_input("video has no frames");
    const Index h = frames.front().rows();
    const Index w = frames.front().cols();
    if (h < 1 || w < 1) throw invalid_input("video frames are empty");
    for (const auto& f : frames)
        if (f.rows() != h || f.cols() != w)
            throw invalid_input("video frames must share one size");
}

ContributionScores frame_contribution_scores(const Matrix& w_full, ScoreMode mode) {
    require_finite(w_full, "coefficient matrix");
    ContributionScores s;
    s.r = mode == ScoreMode::absolute ? Vector(w_full.cwiseAbs().rowwise().sum())
                                      : Vector(w_full.rowwise().sum());
    return s;
}

std::vector<Index> select_keyframes(const ContributionScores& scores,
                                    const SelectionConfig& cfg, Index n_frames) {
    if (cfg.k < 1) throw invalid_input("k must be >= 1");
    if (n_frames < cfg.k) throw invalid_input("fewer frames than requested key-frames");
    if (scores.r.size() != n_frames) throw invalid_input("score/frame count mismatch");
    require_finite(scores.r, "contribution scores");

    std::vector<Index> candidates;
    if (cfg.theta) {
        for (Index j = 0; j < n_frames; ++j)
            if (scores.r(j) > *cfg.theta) candidates.push_back(j);
    }
    if (static_cast<Index>(candidates.size()) < cfg.k) {
        // Relax to the k-th largest score, inclusive, which always yields at
        // least k candidates.
        std::vector<double> sorted(scores.r.data(), scores.r.data() + n_frames);
        std::nth_element(sorted.begin(), sorted.begin() + (cfg.k - 1), sorted.end(),
                         std::greater<double>());
        const double relaxed = sorted[static_cast<std::size_t>(cfg.k - 1)];
        candidates.clear();
        for (Index j = 0; j < n_frames; ++j)
            if (scores.r(j) >= relaxed) candidates.push_back(j);
    }

    std::vector<bool> used(candidates.size(), false);
    std::vector<Index> selected;
    selected.reserve(static_cast<std::size_t>(cfg.k));
    for (Index j = 1; j <= cfg.k; ++j) {
        const Index anchor = ((2 * j - 1) * n_frames) / (2 * cfg.k);
        Index best = -1;
        Index best_dist = n_frames + 1;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            const Index dist = std::abs(candidates[c] - anchor);
            if (dist < best_dist) {
                best_dist = dist;
                best = static_cast<Index>(c);
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        selected.push_back(candidates[static_cast<std::size_t>(best)]);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::vector<std::vector<Frame>> extract_keysequences(const VideoTensor& video,
                                                     const std::vector<Index>& centers,
                                                     Index t) {
    video.validate();
    if (t < 0) throw invalid_input("t must be >= 0");
    const Index n = video.n_frames();
    std::vector<std::vector<Frame>> windows;
    windows.reserve(centers.size());
    for (Index c : centers) {
        if (c < 0 || c >= n) throw invalid_input("key-frame index out of range");
        std::vector<Frame> window;
        window.reserve(static_cast<std::size_t>(2 * t + 1));
        for (Index off = -t; off <= t; ++off) {
            const Index idx = std::clamp<Index>(c + off, 0, n - 1);
            window.push_back(video.frames[static_cast<std::size_t>(idx)]);
        }
        windows.push_back(std::move(window));
    }
    return windows;
}

Matrix phog_matrix(const VideoTensor& video, const descriptors::PhogConfig& cfg) {
    video.validate();
    Matrix z(cfg.dim(), video.n_frames());
    for (Index j = 0; j < video.n_frames(); ++j)
        z.col(j) = descriptors::phog(video.frames[static_cast<std::size_t>(j)], cfg);
    return z;
}

KeySequenceSet describe_keysequences(const VideoTensor& video,
                                     const std::vector<Index>& centers,
                                     const DecomposeConfig& cfg, int reference_class,
                                     std::uint64_t seed) {
    video.validate();
    if (centers.empty()) throw invalid_input("no key-frame centers given");
    if (!std::is_sorted(centers.begin(), centers.end()))
        throw invalid_input("key-frame centers must be sorted ascending");

    std::vector<std::vector<Frame>> windows =
        extract_keysequences(video, centers, cfg.selection.t);

    const Index width = video.frames.front().cols();
    const Index height = video.frames.front().rows();
    const Index depth = 2 * cfg.selection.t + 1;
    const std::vector<descriptors::CuboidSpec> specs = descriptors::sample_cuboids(
        width, height, depth, cfg.cuboid_width, cfg.cuboid_height, cfg.cuboid_depth,
        cfg.cuboid_count, split_seed(seed, "cuboids"));

    KeySequenceSet out;
    out.source_video = video.id;
    out.reference_class = reference_class;
    out.sequences.reserve(windows.size());
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const auto& window = windows[wi];
        Matrix descs(cfg.hog3d.dim(), cfg.cuboid_count);
        for (std::size_t si = 0; si < specs.size(); ++si) {
            const auto& s = specs[si];
            std::vector<Frame> sub;
            sub.reserve(static_cast<std::size_t>(s.depth));
            for (Index ti = 0; ti < s.depth; ++ti)
                sub.push_back(window[static_cast<std::size_t>(s.t0 + ti)].block(
                    s.y, s.x, s.height, s.width));
            descs.col(static_cast<Index>(si)) = descriptors::hog3d(sub, cfg.hog3d);
        }
        KeySequence seq;
        seq.key_frame_index = centers[wi];
        seq.frames = window;
        seq.cuboid_descriptors =
            descriptors::filter_and_normalize(descs, cfg.filter_threshold, cfg.column_norm);
        out.sequences.push_back(std::move(seq));
    }
    return out;
}

KeySequenceSet decompose(const VideoTensor& video, const Matrix& class_frames,
                         const DecomposeConfig& cfg, int reference_class,
                         std::uint64_t seed) {
    video.validate();
    if (video.n_frames() < cfg.selection.k)
        throw invalid_input("video too short for the requested key-frame count");

    const Matrix z_self = phog_matrix(video, cfg.phog);
    const Matrix z_rest = class_frames.size() == 0 ? Matrix(z_self.rows(), 0) : class_frames;
    if (z_rest.cols() > 0 && z_rest.rows() != z_self.rows())
        throw invalid_input("class frame descriptors have the wrong dimension");

    solvers::RowSparseSolution sol = solvers::solve_joint_row_sparse(z_self, z_rest, cfg.admm);
    Matrix w_full(sol.w_self.rows(), sol.w_self.cols() + sol.w_rest.cols());
    w_full << sol.w_self, sol.w_rest;

    const ContributionScores scores =
        frame_contribution_scores(w_full, cfg.selection.score_mode);
    const std::vector<Index> centers =
        select_keyframes(scores, cfg.selection, video.n_frames());
    return describe_keysequences(video, centers, cfg, reference_class, seed);
}

}  // namespace itra::decomposition
