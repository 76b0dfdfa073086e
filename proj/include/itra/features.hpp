#pragma once

#include <filesystem>

#include "itra/decomposition.hpp"
#include "itra/solvers.hpp"
#include "itra/types.hpp"

namespace itra::features {

struct BankConfig {
    int mu = 2;                       // atom redundancy: n_a = mu * delta
    Index delta = 300;                // cuboid descriptor dimension
    double sparsity_fraction = 0.10;  // source of the coding sparsities
    int ksvd_iters = 10;

    Index n_atoms() const { return static_cast<Index>(mu) * delta; }
    void validate() const;
};

// Fraction of `count`, rounded up, at least 1.
Index sparsity_for(double fraction, Index count);

struct DictionaryBank {
    std::vector<solvers::Dictionary> dicts;  // row-major: index = cls * k + pos
    Index c = 0;      // classes
    Index k = 0;      // temporal positions
    Index n_a = 0;    // atoms per dictionary
    Index delta = 0;  // descriptor dimension

    const solvers::Dictionary& at(Index cls, Index pos) const;
    // Coding sparsity against the position-concatenated dictionary (C blocks),
    // capped at delta since an OMP support cannot exceed the signal dimension.
    Index lambda_inter(double fraction) const;
    // Same for the leave-one-position-out concatenation (K-1 blocks).
    Index lambda_intra(double fraction) const;
    void validate() const;
};

// One K-SVD run per (class, position) cell; train_sets[cls][pos] holds that
// cell's delta x n_s descriptor matrix with n_s >= n_a.
DictionaryBank learn_dictionary_bank(const std::vector<std::vector<Matrix>>& train_sets,
                                     const BankConfig& cfg, std::uint64_t seed);

// Sums coefficients per contiguous block; blocks must partition the
// coefficient vector exactly.
Vector sum_pool(const solvers::SparseCode& code,
                const std::vector<std::pair<Index, Index>>& blocks, bool absolute = false);

// Phi: for each position, code every cuboid descriptor against the
// class-concatenated dictionary and accumulate each class block's pooled
// mass. Result is C x K (class, position).
Matrix inter_descriptor(const decomposition::KeySequenceSet& ks, const DictionaryBank& bank,
                        Index lambda2, bool absolute = false);

// Psi: for each position, code against the same class's dictionaries at the
// other K-1 positions. Result is K x (K-1); row j holds the pooled mass per
// other position in ascending position order.
Matrix intra_descriptor(const decomposition::KeySequenceSet& ks, const DictionaryBank& bank,
                        Index cls, Index lambda3, bool absolute = false);

struct ItraConfig {
    double sparsity_fraction = 0.10;
    bool absolute_pooling = false;   // signed sums by default
    bool normalize_blocks = false;   // per-position l2 normalization of each block
};

struct ItraDescriptor {
    Matrix phi;  // C x K
    Matrix psi;  // K x (K-1)
    Vector flat;  // [phi cols position-major, then psi rows], length K*(C+K-1)
    int reference_class = -1;
};

// Full descriptor: Phi and Psi concatenated position-major.
ItraDescriptor itra(const decomposition::KeySequenceSet& ks, const DictionaryBank& bank,
                    int reference_class, const ItraConfig& cfg);

Index itra_dim(Index c, Index k);

// One DICT file per (class, position) cell plus a manifest.
void save_bank(const std::filesystem::path& dir, const DictionaryBank& bank);
DictionaryBank load_bank(const std::filesystem::path& dir);

}  // namespace itra::features
