#pragma once

#include "itra/features.hpp"

#include <filesystem>

namespace itra::classifier {

struct ClassifierModel {
    Matrix b;  // itra_dim x total atoms, concatenated class blocks
    std::vector<std::pair<Index, Index>> block_ranges;  // (start, length) per class
    std::vector<Index> atoms_per_class;
    Index lambda5 = 0;
    Index itra_dim = 0;

    Index n_classes() const { return static_cast<Index>(block_ranges.size()); }
    void validate() const;
};

// Per-class K-SVD on the ITRA training descriptors. A class with fewer
// descriptors than mu * itra_dim gets that many atoms instead.
ClassifierModel train_classifier(const std::vector<Matrix>& itra_by_class, int mu,
                                 double sparsity_fraction, int ksvd_iters,
                                 std::uint64_t seed);

struct ClassificationResult {
    int label = -1;
    std::vector<int> partial_votes;  // one per reference-class projection
    Matrix per_class_mass;           // row v: pooled mass per class for projection v
};

// Vote aggregation: per projection the argmax-mass class (ties toward the
// smaller id); final label by majority, breaking ties by total pooled mass
// and then by the smaller id.
ClassificationResult resolve_votes(const Matrix& per_class_mass);

// Codes each reference-class descriptor against the concatenated model and
// pools per class block.
ClassificationResult classify_descriptors(const ClassifierModel& model,
                                          const std::vector<Vector>& descriptors,
                                          bool absolute_pooling = false);

struct ClassifyConfig {
    decomposition::DecomposeConfig decompose;
    features::ItraConfig itra;
};

// Full inference: decompose the video once per reference class (shared seed,
// so the cuboid layout is identical), build each class's descriptor, then
// vote. per_class_frames[c] holds class c's training-frame PHOG columns.
ClassificationResult classify(const decomposition::VideoTensor& video,
                              const std::vector<Matrix>& per_class_frames,
                              const features::DictionaryBank& bank,
                              const ClassifierModel& model, const ClassifyConfig& cfg,
                              std::uint64_t seed);

void save_classifier(const std::filesystem::path& dir, const ClassifierModel& model);
ClassifierModel load_classifier(const std::filesystem::path& dir);

}  // namespace itra::classifier
