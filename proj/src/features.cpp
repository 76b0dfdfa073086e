#include "itra/features.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "itra/io.hpp"

namespace itra::features {

void BankConfig::validate() const {
    if (mu < 1) throw invalid_input("mu must be >= 1");
    if (delta < 1) throw invalid_input("delta must be >= 1");
    if (!(sparsity_fraction > 0.0) || sparsity_fraction > 1.0)
        throw invalid_input("sparsity_fraction must be in (0, 1]");
    if (ksvd_iters < 1) throw invalid_input("ksvd_iters must be >= 1");
}

Index sparsity_for(double fraction, Index count) {
    const auto s = static_cast<Index>(std::ceil(fraction * static_cast<double>(count)));
    return std::max<Index>(s, 1);
}

const solvers::Dictionary& DictionaryBank::at(Index cls, Index pos) const {
    if (cls < 0 || cls >= c || pos < 0 || pos >= k)
        throw invalid_input("bank cell out of range");
    return dicts[static_cast<std::size_t>(cls * k + pos)];
}

Index DictionaryBank::lambda_inter(double fraction) const {
    return std::min(sparsity_for(fraction, c * n_a), delta);
}

Index DictionaryBank::lambda_intra(double fraction) const {
    if (k < 2) return 1;
    return std::min(sparsity_for(fraction, (k - 1) * n_a), delta);
}

void DictionaryBank::validate() const {
    if (c < 1 || k < 1) throw invalid_input("bank needs at least one class and position");
    if (static_cast<Index>(dicts.size()) != c * k)
        throw invalid_input("bank cell count mismatch");
    for (const auto& d : dicts)
        if (d.atoms.rows() != delta || d.atoms.cols() != n_a)
            throw invalid_input("bank dictionaries must share one shape");
}

DictionaryBank learn_dictionary_bank(const std::vector<std::vector<Matrix>>& train_sets,
                                     const BankConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (train_sets.empty()) throw invalid_input("no classes in the training set");
    const Index c = static_cast<Index>(train_sets.size());
    const Index k = static_cast<Index>(train_sets.front().size());
    if (k < 1) throw invalid_input("no temporal positions in the training set");

    DictionaryBank bank;
    bank.c = c;
    bank.k = k;
    bank.n_a = cfg.n_atoms();
    bank.delta = cfg.delta;
    bank.dicts.reserve(static_cast<std::size_t>(c * k));

    const Index lambda1 = std::min(sparsity_for(cfg.sparsity_fraction, bank.n_a), bank.n_a);
    for (Index cls = 0; cls < c; ++cls) {
        if (static_cast<Index>(train_sets[static_cast<std::size_t>(cls)].size()) != k)
            throw invalid_input("class " + std::to_string(cls) +
                                " has the wrong number of temporal positions");
        for (Index pos = 0; pos < k; ++pos) {
            const Matrix& y = train_sets[static_cast<std::size_t>(cls)]
                                        [static_cast<std::size_t>(pos)];
            if (y.rows() != cfg.delta)
                throw invalid_input("cell (c=" + std::to_string(cls) +
                                    ", j=" + std::to_string(pos) +
                                    ") descriptors have the wrong dimension");
            if (y.cols() < bank.n_a)
                throw invalid_input("cell (c=" + std::to_string(cls) +
                                    ", j=" + std::to_string(pos) + ") has " +
                                    std::to_string(y.cols()) + " descriptors, needs " +
                                    std::to_string(bank.n_a));
            solvers::KsvdResult res = solvers::ksvd(
                y, bank.n_a, lambda1, cfg.ksvd_iters, split_seed(seed, "bank", cls * k + pos));
            res.dictionary.meta = solvers::DictionaryMeta{static_cast<std::uint32_t>(cls),
                                                          static_cast<std::uint32_t>(pos)};
            bank.dicts.push_back(std::move(res.dictionary));
        }
    }
    return bank;
}

Vector sum_pool(const solvers::SparseCode& code,
                const std::vector<std::pair<Index, Index>>& blocks, bool absolute) {
    if (blocks.empty()) throw invalid_input("sum_pool needs at least one block");
    Index cursor = 0;
    for (const auto& [start, len] : blocks) {
        if (start != cursor || len < 1)
            throw invalid_input("blocks must partition the coefficients contiguously");
        cursor += len;
    }
    if (cursor != code.coefficients.size())
        throw invalid_input("blocks do not cover the coefficient vector");

    Vector out(static_cast<Index>(blocks.size()));
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto seg = code.coefficients.segment(blocks[b].first, blocks[b].second);
        out(static_cast<Index>(b)) = absolute ? seg.cwiseAbs().sum() : seg.sum();
    }
    return out;
}

namespace {

// Codes every cuboid column against `dict` and accumulates the pooled block
// masses over cuboids.
Vector pooled_projection(const Matrix& cuboids, const solvers::Dictionary& dict,
                         const std::vector<std::pair<Index, Index>>& blocks, Index sparsity,
                         bool absolute) {
    Vector acc = Vector::Zero(static_cast<Index>(blocks.size()));
    for (Index i = 0; i < cuboids.cols(); ++i) {
        solvers::SparseCode code = solvers::omp(dict, cuboids.col(i), sparsity);
        acc += sum_pool(code, blocks, absolute);
    }
    return acc;
}

}  // namespace

Matrix inter_descriptor(const decomposition::KeySequenceSet& ks, const DictionaryBank& bank,
                        Index lambda2, bool absolute) {
    bank.validate();
    if (static_cast<Index>(ks.sequences.size()) != bank.k)
        throw invalid_input("key-sequence count does not match the bank positions");

    Matrix phi(bank.c, bank.k);
    std::vector<std::pair<Index, Index>> blocks;
    for (Index cls = 0; cls < bank.c; ++cls) blocks.emplace_back(cls * bank.n_a, bank.n_a);

    for (Index pos = 0; pos < bank.k; ++pos) {
        const Matrix& cuboids =
            ks.sequences[static_cast<std::size_t>(pos)].cuboid_descriptors;
        if (cuboids.cols() == 0) throw empty_result("key-sequence has no cuboid descriptors");
        if (cuboids.rows() != bank.delta)
            throw invalid_input("cuboid descriptors do not match the bank dimension");
        solvers::Dictionary concat;
        concat.atoms = Matrix(bank.delta, bank.c * bank.n_a);
        for (Index cls = 0; cls < bank.c; ++cls)
            concat.atoms.middleCols(cls * bank.n_a, bank.n_a) = bank.at(cls, pos).atoms;
        phi.col(pos) = pooled_projection(cuboids, concat, blocks, lambda2, absolute);
    }
    return phi;
}

Matrix intra_descriptor(const decomposition::KeySequenceSet& ks, const DictionaryBank& bank,
                        Index cls, Index lambda3, bool absolute) {
    bank.validate();
    if (cls < 0 || cls >= bank.c) throw invalid_input("class id out of range");
    if (static_cast<Index>(ks.sequences.size()) != bank.k)
        throw invalid_input("key-sequence count does not match the bank positions");
    if (bank.k < 2) return Matrix(bank.k, 0);

    Matrix psi(bank.k, bank.k - 1);
    std::vector<std::pair<Index, Index>> blocks;
    for (Index b = 0; b < bank.k - 1; ++b) blocks.emplace_back(b * bank.n_a, bank.n_a);

    for (Index pos = 0; pos < bank.k; ++pos) {
        const Matrix& cuboids =
            ks.sequences[static_cast<std::size_t>(pos)].cuboid_descriptors;
        if (cuboids.cols() == 0) throw empty_result("key-sequence has no cuboid descriptors");
        if (cuboids.rows() != bank.delta)
            throw invalid_input("cuboid descriptors do not match the bank dimension");
        solvers::Dictionary concat;
        concat.atoms = Matrix(bank.delta, (bank.k - 1) * bank.n_a);
        Index slot = 0;
        for (Index other = 0; other < bank.k; ++other) {
            if (other == pos) continue;
            concat.atoms.middleCols(slot * bank.n_a, bank.n_a) = bank.at(cls, other).atoms;
            ++slot;
        }
        psi.row(pos) = pooled_projection(cuboids, concat, blocks, lambda3, absolute)
                           .transpose();
    }
    return psi;
}

Index itra_dim(Index c, Index k) { return k * (c + k - 1); }

ItraDescriptor itra(const decomposition::KeySequenceSet& ks, const DictionaryBank& bank,
                    int reference_class, const ItraConfig& cfg) {
    if (!(cfg.sparsity_fraction > 0.0) || cfg.sparsity_fraction > 1.0)
        throw invalid_input("sparsity_fraction must be in (0, 1]");

    ItraDescriptor d;
    d.reference_class = reference_class;
    d.phi = inter_descriptor(ks, bank, bank.lambda_inter(cfg.sparsity_fraction),
                             cfg.absolute_pooling);
    d.psi = intra_descriptor(ks, bank, reference_class,
                             bank.lambda_intra(cfg.sparsity_fraction), cfg.absolute_pooling);

    if (cfg.normalize_blocks) {
        for (Index pos = 0; pos < bank.k; ++pos) {
            const double pn = d.phi.col(pos).norm();
            if (pn > 0.0) d.phi.col(pos) /= pn;
        }
        for (Index pos = 0; pos < d.psi.rows(); ++pos) {
            const double sn = d.psi.row(pos).norm();
            if (sn > 0.0) d.psi.row(pos) /= sn;
        }
    }

    d.flat = Vector(itra_dim(bank.c, bank.k));
    Index cursor = 0;
    for (Index pos = 0; pos < bank.k; ++pos) {
        d.flat.segment(cursor, bank.c) = d.phi.col(pos);
        cursor += bank.c;
    }
    for (Index pos = 0; pos < bank.k; ++pos) {
        d.flat.segment(cursor, bank.k - 1) = d.psi.row(pos).transpose();
        cursor += bank.k - 1;
    }
    return d;
}

namespace {

std::string cell_name(Index cls, Index pos) {
    return "c" + std::to_string(cls) + "_p" + std::to_string(pos) + ".dict";
}

}  // namespace

void save_bank(const std::filesystem::path& dir, const DictionaryBank& bank) {
    bank.validate();
    std::filesystem::create_directories(dir);
    for (Index cls = 0; cls < bank.c; ++cls)
        for (Index pos = 0; pos < bank.k; ++pos)
            io::save_dictionary(dir / cell_name(cls, pos), bank.at(cls, pos));
    nlohmann::json manifest;
    manifest["classes"] = bank.c;
    manifest["positions"] = bank.k;
    manifest["atoms"] = bank.n_a;
    manifest["descriptor_dim"] = bank.delta;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw io_error("cannot write bank manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

DictionaryBank load_bank(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw io_error("cannot read bank manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("malformed bank manifest: " + std::string(e.what()));
    }
    DictionaryBank bank;
    try {
        bank.c = manifest.at("classes").get<Index>();
        bank.k = manifest.at("positions").get<Index>();
        bank.n_a = manifest.at("atoms").get<Index>();
        bank.delta = manifest.at("descriptor_dim").get<Index>();
    } catch (const nlohmann::json::exception& e) {
        throw io_error("bank manifest missing fields: " + std::string(e.what()));
    }
    if (bank.c < 1 || bank.k < 1) throw io_error("bank manifest has no cells");
    bank.dicts.reserve(static_cast<std::size_t>(bank.c * bank.k));
    for (Index cls = 0; cls < bank.c; ++cls)
        for (Index pos = 0; pos < bank.k; ++pos)
            bank.dicts.push_back(io::load_dictionary(dir / cell_name(cls, pos)));
    bank.validate();
    for (const auto& d : bank.dicts)
        if (d.atoms.rows() != bank.delta || d.atoms.cols() != bank.n_a)
            throw io_error("bank cell shape disagrees with manifest in " + dir.string());
    return bank;
}

}  // namespace itra::features
