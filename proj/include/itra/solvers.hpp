#pragma once

#include "itra/types.hpp"

namespace itra::solvers {

// Configuration for the constrained joint row-sparse solver (ADMM).
// alpha weighs the cross-reconstruction term, lambda_budget is the shared
// l1,2 budget. Either block's budget can be overridden independently.
struct AdmmConfig {
    double alpha = 1.0;
    double lambda_budget = 1.0;
    double rho = 1.0;
    int max_iters = 500;
    double primal_tol = 1e-5;
    double dual_tol = 1e-5;
    std::optional<double> lambda_self;
    std::optional<double> lambda_rest;

    double budget_self() const { return lambda_self ? *lambda_self : lambda_budget; }
    double budget_rest() const { return lambda_rest ? *lambda_rest : lambda_budget; }
    void validate() const;
};

struct RowSparseSolution {
    Matrix w_self;                      // n_i x n_i
    Matrix w_rest;                      // n_i x (n - n_i)
    std::vector<double> objective_trace;  // last entry = objective of the returned matrices
    bool converged = false;
};

struct SparseCode {
    Vector coefficients;        // full-length, exact zeros off-support
    std::vector<Index> support;  // in selection order
    double residual_norm = 0.0;
};

struct DictionaryMeta {
    std::uint32_t class_id = 0;
    std::uint32_t temporal_position = 0;
};

struct Dictionary {
    Matrix atoms;  // m x n_a, unit-norm columns
    std::optional<DictionaryMeta> meta;

    Index dim() const { return atoms.rows(); }
    Index n_atoms() const { return atoms.cols(); }
};

// Sum of the l2 norms of the rows.
double l12_norm(const Matrix& a);

// Euclidean projection of a nonnegative vector onto {x >= 0, sum(x) <= budget}.
// Sort-based thresholding; exact up to rounding.
Vector project_nonneg_l1_ball(const Vector& v, double budget);

// Euclidean projection onto {X : ||X||_{1,2} <= budget}. Row directions are
// preserved; only the row norms are rescaled.
Matrix project_l12_ball(const Matrix& a, double budget);

double joint_objective(const Matrix& z_self, const Matrix& z_rest,
                       const Matrix& w_self, const Matrix& w_rest, double alpha);

// Minimizes ||Z_i - Z_i W_i||_F^2 + alpha ||Z_rest - Z_i W_rest||_F^2 subject
// to both l1,2 budgets. Returns the best feasible iterate found; converged is
// set when the primal and dual residuals fall below the tolerances.
RowSparseSolution solve_joint_row_sparse(const Matrix& z_self, const Matrix& z_rest,
                                         const AdmmConfig& cfg);

// Orthogonal Matching Pursuit. Greedy selection by maximal absolute
// correlation (ties -> lowest atom index), least-squares refit on the support
// each iteration. Stops early when the residual norm falls below 1e-12 or no
// atom correlates with the residual.
SparseCode omp(const Dictionary& dict, const Vector& y, Index sparsity);

struct KsvdResult {
    Dictionary dictionary;
    Matrix codes;                      // n_atoms x n_samples
    std::vector<double> error_trace;   // ||Y - DX||_F^2 after each coding pass
};

// K-SVD dictionary learning: alternates OMP coding (with coefficient reuse,
// so the error trace is non-increasing) and rank-1 SVD atom updates. Unused
// atoms are replaced by the worst-reconstructed sample, normalized.
KsvdResult ksvd(const Matrix& samples, Index n_atoms, Index sparsity, int iters,
                std::uint64_t seed);

}  // namespace itra::solvers
