#include "itra/classifier.hpp"

#include "itra/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace itra::classifier {

void ClassifierModel::validate() const {
    if (block_ranges.empty()) throw invalid_dictionary("classifier model has no class blocks");
    if (itra_dim <= 0) throw invalid_dictionary("classifier model has nonpositive descriptor dim");
    if (b.rows() != itra_dim) throw invalid_dictionary("classifier model dim mismatch");
    Index cursor = 0;
    for (std::size_t c = 0; c < block_ranges.size(); ++c) {
        auto [start, len] = block_ranges[c];
        if (start != cursor || len <= 0)
            throw invalid_dictionary("classifier block ranges do not partition the atom set");
        if (atoms_per_class[c] != len)
            throw invalid_dictionary("classifier atom counts disagree with block ranges");
        cursor += len;
    }
    if (cursor != b.cols())
        throw invalid_dictionary("classifier block ranges do not cover all atoms");
    if (lambda5 < 1 || lambda5 > b.cols())
        throw invalid_dictionary("classifier sparsity budget out of range");
}

ClassifierModel train_classifier(const std::vector<Matrix>& itra_by_class, int mu,
                                 double sparsity_fraction, int ksvd_iters,
                                 std::uint64_t seed) {
    if (itra_by_class.empty()) throw invalid_input("no training classes");
    if (mu < 1) throw invalid_input("atom multiplier must be at least 1");
    if (!(sparsity_fraction > 0.0) || sparsity_fraction > 1.0)
        throw invalid_input("sparsity fraction must lie in (0, 1]");
    if (ksvd_iters < 1) throw invalid_input("dictionary learning needs at least one iteration");

    const Index d = itra_by_class.front().rows();
    if (d <= 0) throw invalid_input("training descriptors are empty");

    ClassifierModel model;
    model.itra_dim = d;
    std::vector<Matrix> blocks;
    Index total = 0;
    for (std::size_t c = 0; c < itra_by_class.size(); ++c) {
        const Matrix& y = itra_by_class[c];
        if (y.cols() == 0)
            throw invalid_input("class " + std::to_string(c) + " has no training descriptors");
        if (y.rows() != d)
            throw invalid_input("class " + std::to_string(c) + " descriptor dim mismatch");
        require_finite(y, "training descriptors");
        const Index n_b = std::min<Index>(static_cast<Index>(mu) * d, y.cols());
        const Index lambda4 = features::sparsity_for(sparsity_fraction, n_b);
        solvers::KsvdResult learned = solvers::ksvd(y, n_b, lambda4, ksvd_iters,
                                  split_seed(seed, "classifier", static_cast<std::uint64_t>(c)));
        blocks.push_back(std::move(learned.dictionary.atoms));
        model.block_ranges.emplace_back(total, n_b);
        model.atoms_per_class.push_back(n_b);
        total += n_b;
    }
    model.b.resize(d, total);
    for (std::size_t c = 0; c < blocks.size(); ++c)
        model.b.middleCols(model.block_ranges[c].first, model.block_ranges[c].second) = blocks[c];
    model.lambda5 = std::min<Index>(features::sparsity_for(sparsity_fraction, total), d);
    model.validate();
    return model;
}

ClassificationResult resolve_votes(const Matrix& per_class_mass) {
    const Index c = per_class_mass.cols();
    if (c <= 0 || per_class_mass.rows() != c)
        throw invalid_input("vote matrix must be square with one row per projection");
    require_finite(per_class_mass, "vote matrix");

    ClassificationResult result;
    result.per_class_mass = per_class_mass;
    result.partial_votes.resize(static_cast<std::size_t>(c));
    std::vector<int> counts(static_cast<std::size_t>(c), 0);
    for (Index v = 0; v < c; ++v) {
        Index best = 0;
        for (Index j = 1; j < c; ++j)
            if (per_class_mass(v, j) > per_class_mass(v, best)) best = j;
        result.partial_votes[static_cast<std::size_t>(v)] = static_cast<int>(best);
        ++counts[static_cast<std::size_t>(best)];
    }
    const int top = *std::max_element(counts.begin(), counts.end());
    Index label = -1;
    double label_mass = 0.0;
    for (Index j = 0; j < c; ++j) {
        if (counts[static_cast<std::size_t>(j)] != top) continue;
        const double mass = per_class_mass.col(j).sum();
        if (label < 0 || mass > label_mass) {
            label = j;
            label_mass = mass;
        }
    }
    result.label = static_cast<int>(label);
    return result;
}

ClassificationResult classify_descriptors(const ClassifierModel& model,
                                          const std::vector<Vector>& descriptors,
                                          bool absolute_pooling) {
    model.validate();
    const Index c = model.n_classes();
    if (static_cast<Index>(descriptors.size()) != c)
        throw invalid_input("expected one descriptor per reference class");

    solvers::Dictionary dict{model.b, std::nullopt};
    Matrix mass = Matrix::Zero(c, c);
    for (Index v = 0; v < c; ++v) {
        const Vector& omega = descriptors[static_cast<std::size_t>(v)];
        if (omega.size() != model.itra_dim)
            throw invalid_input("descriptor " + std::to_string(v) + " has wrong length");
        solvers::SparseCode code = solvers::omp(dict, omega, model.lambda5);
        for (Index j = 0; j < c; ++j) {
            auto [start, len] = model.block_ranges[static_cast<std::size_t>(j)];
            auto block = code.coefficients.segment(start, len);
            mass(v, j) = absolute_pooling ? block.cwiseAbs().sum() : block.sum();
        }
    }
    return resolve_votes(mass);
}

ClassificationResult classify(const decomposition::VideoTensor& video,
                              const std::vector<Matrix>& per_class_frames,
                              const features::DictionaryBank& bank,
                              const ClassifierModel& model, const ClassifyConfig& cfg,
                              std::uint64_t seed) {
    model.validate();
    bank.validate();
    if (static_cast<Index>(per_class_frames.size()) != bank.c)
        throw invalid_input("need one training-frame matrix per class");
    if (model.n_classes() != bank.c)
        throw invalid_input("classifier and dictionary bank class counts differ");

    std::vector<Vector> descriptors;
    descriptors.reserve(per_class_frames.size());
    for (Index c = 0; c < bank.c; ++c) {
        decomposition::KeySequenceSet ks = decomposition::decompose(
            video, per_class_frames[static_cast<std::size_t>(c)], cfg.decompose,
            static_cast<int>(c), seed);
        features::ItraDescriptor omega = features::itra(ks, bank, static_cast<int>(c), cfg.itra);
        descriptors.push_back(std::move(omega.flat));
    }
    return classify_descriptors(model, descriptors, cfg.itra.absolute_pooling);
}

void save_classifier(const std::filesystem::path& dir, const ClassifierModel& model) {
    model.validate();
    std::filesystem::create_directories(dir);
    io::save_matrix(dir / "atoms.matx", model.b);
    nlohmann::json manifest;
    manifest["itra_dim"] = model.itra_dim;
    manifest["lambda5"] = model.lambda5;
    manifest["atoms_per_class"] = model.atoms_per_class;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw io_error("cannot write classifier manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

ClassifierModel load_classifier(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw io_error("cannot read classifier manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("malformed classifier manifest: " + std::string(e.what()));
    }
    ClassifierModel model;
    try {
        model.itra_dim = manifest.at("itra_dim").get<Index>();
        model.lambda5 = manifest.at("lambda5").get<Index>();
        model.atoms_per_class = manifest.at("atoms_per_class").get<std::vector<Index>>();
    } catch (const nlohmann::json::exception& e) {
        throw io_error("classifier manifest missing fields: " + std::string(e.what()));
    }
    model.b = io::load_matrix(dir / "atoms.matx");
    Index cursor = 0;
    for (Index n : model.atoms_per_class) {
        model.block_ranges.emplace_back(cursor, n);
        cursor += n;
    }
    model.validate();
    return model;
}

}  // namespace itra::classifier
