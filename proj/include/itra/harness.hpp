#pragma once

#include "itra/classifier.hpp"

#include <filesystem>
#include <string>

namespace itra::harness {

enum class Split { train, test };

struct LabeledVideo {
    decomposition::VideoTensor video;
    int class_id = -1;
    Split split = Split::train;
};

struct Dataset {
    std::vector<std::string> classes;
    std::vector<LabeledVideo> videos;

    Index n_classes() const { return static_cast<Index>(classes.size()); }
    void validate() const;  // dense ids, at least one train video per class
};

// Directory layout: root/{train,test}/{class}/{video}/frame_*.pgm for image
// sequences, or root/{train,test}/{class}/{video}.vidf for raw tensors.
// Classes are ordered lexicographically; frames and videos by filename.
Dataset ingest(const std::filesystem::path& root);

// Single video: a VIDF file or a directory of PGM frames (sorted by name).
decomposition::VideoTensor load_video_file(const std::filesystem::path& path);

// Writes every video as a VIDF tensor under the same layout ingest reads.
void save_dataset(const std::filesystem::path& root, const Dataset& dataset);

struct SynthConfig {
    int classes = 3;
    int train_per_class = 10;
    int test_per_class = 5;
    int frames = 24;
    int height = 32;
    int width = 32;
    double noise_sigma = 0.05;

    void validate() const;
};

// Six motion archetypes (right-moving bar, falling bar, breathing blob,
// rotating bar, bouncing dot, flickering grid), each with three distinct
// temporal acts. Class c uses archetype c, so at most six classes.
Dataset synth_gen(const SynthConfig& cfg, std::uint64_t seed);

// K equal segments (rounded boundaries), central frame of each.
std::vector<Index> baseline_uniform_keyframes(Index n_frames, Index k);

struct KmeansResult {
    Matrix centers;  // dim x k
    std::vector<Index> assignment;
};

// Seeded k-means++ init plus Lloyd iterations. Nearest-center ties go to the
// lower center index; an emptied cluster is re-seeded from the point farthest
// from its assigned center.
KmeansResult kmeans(const Matrix& points, Index k, int iters, std::uint64_t seed);

struct WindowClusters {
    Matrix centers;  // (2t+1)*phog_dim x k
    Index t = 3;
    descriptors::PhogConfig phog;
};

// Embeds every sliding 2t+1 window of every video (concatenated per-frame
// PHOG columns) and clusters the pooled set to k centers.
WindowClusters fit_window_clusters(const std::vector<const decomposition::VideoTensor*>& videos,
                                   Index k, Index t, const descriptors::PhogConfig& phog,
                                   std::uint64_t seed);

// For each cluster center, the video's nearest window yields its center frame
// (ties toward the earlier window; duplicates fall through to the next
// nearest). Sorted ascending.
std::vector<Index> cluster_keyframes(const WindowClusters& clusters,
                                     const decomposition::VideoTensor& video);

// Fit on one class's videos, then map each of them through its clusters.
std::vector<std::vector<Index>> baseline_kmeans_keyframes(
    const std::vector<const decomposition::VideoTensor*>& class_videos, Index k, Index t,
    const descriptors::PhogConfig& phog, std::uint64_t seed);

struct SharedDictionary {
    solvers::Dictionary dict;
    Index lambda = 1;
};

// Single dictionary learned from the pooled cuboids of all classes and
// positions, ignoring the class/position structure.
SharedDictionary ablation_shared_dictionary(const Matrix& pooled_cuboids,
                                            const features::BankConfig& cfg,
                                            std::uint64_t seed);

// One pooled-coefficient scalar per temporal position; length K.
Vector shared_descriptor(const decomposition::KeySequenceSet& ks,
                         const SharedDictionary& shared, bool absolute_pooling = false);

// The inter-class block alone, flattened position-major; length K*C and equal
// to the leading block of the full descriptor.
Vector ablation_inter_only(const decomposition::KeySequenceSet& ks,
                           const features::DictionaryBank& bank,
                           const features::ItraConfig& cfg);

struct EvalReport {
    double accuracy = 0.0;
    Eigen::MatrixXi confusion;  // row: truth, column: prediction
    std::vector<double> per_class_recall;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truth,
                    Index n_classes);

void write_report_json(const std::filesystem::path& path, const EvalReport& report,
                       const std::vector<std::string>& classes);
void write_confusion_csv(const std::filesystem::path& path, const EvalReport& report,
                         const std::vector<std::string>& classes);

enum class FrameMethod { proposed, uniform, window_clusters };
enum class DescriptorMethod { full, shared_dictionary, inter_only };

struct ExperimentConfig {
    decomposition::DecomposeConfig decompose;
    features::BankConfig bank;
    features::ItraConfig itra;
    int classifier_mu = 2;
    double classifier_sparsity_fraction = 0.10;
    int classifier_ksvd_iters = 10;
    FrameMethod frame_method = FrameMethod::proposed;
    DescriptorMethod descriptor_method = DescriptorMethod::full;
};

std::string frame_method_name(FrameMethod m);
std::string descriptor_method_name(DescriptorMethod m);

// Train the chosen frame-selection / descriptor variant on the train split
// and score the test split. Deterministic per seed.
EvalReport run_experiment(const Dataset& dataset, const ExperimentConfig& cfg,
                          std::uint64_t seed);

}  // namespace itra::harness
