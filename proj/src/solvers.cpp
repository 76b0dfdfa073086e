#include "itra/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace itra::solvers {

namespace {

constexpr double kRidge = 1e-8;
constexpr double kAtomNormTol = 1e-6;
constexpr double kResidualStop = 1e-12;
constexpr double kCorrelationStop = 1e-13;

// Euclidean projection of a nonnegative vector onto the simplex
// {x >= 0, sum(x) = budget}, sort-based thresholding.
Vector project_simplex(const Vector& v, double budget) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0;
    double tau = 0.0;
    int rho = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cum += u[k];
        const double t = (cum - budget) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) {
            rho = static_cast<int>(k + 1);
            tau = t;
        }
    }
    (void)rho;
    return (v.array() - tau).max(0.0).matrix();
}

}  // namespace

void AdmmConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw invalid_input("alpha must be >= 0");
    if (!(lambda_budget > 0.0)) throw invalid_input("lambda_budget must be > 0");
    if (lambda_self && !(*lambda_self > 0.0)) throw invalid_input("lambda_self must be > 0");
    if (lambda_rest && !(*lambda_rest > 0.0)) throw invalid_input("lambda_rest must be > 0");
    if (!(rho > 0.0)) throw invalid_input("rho must be > 0");
    if (max_iters <= 0) throw invalid_input("max_iters must be > 0");
    if (!(primal_tol > 0.0) || !(dual_tol > 0.0)) throw invalid_input("tolerances must be > 0");
}

double l12_norm(const Matrix& a) { return a.rowwise().norm().sum(); }

Vector project_nonneg_l1_ball(const Vector& v, double budget) {
    if (!(budget > 0.0)) throw invalid_input("projection budget must be > 0");
    if ((v.array() < 0.0).any()) throw invalid_input("projection input must be nonnegative");
    if (v.sum() <= budget) return v;
    return project_simplex(v, budget);
}

Matrix project_l12_ball(const Matrix& a, double budget) {
    if (!(budget > 0.0)) throw invalid_input("projection budget must be > 0");
    require_finite(a, "projection input");
    Vector norms = a.rowwise().norm();
    if (norms.sum() <= budget) return a;
    Vector target = project_simplex(norms, budget);
    Matrix out(a.rows(), a.cols());
    for (Index r = 0; r < a.rows(); ++r) {
        if (norms(r) > 0.0)
            out.row(r) = a.row(r) * (target(r) / norms(r));
        else
            out.row(r).setZero();
    }
    return out;
}

double joint_objective(const Matrix& z_self, const Matrix& z_rest,
                       const Matrix& w_self, const Matrix& w_rest, double alpha) {
    double obj = (z_self - z_self * w_self).squaredNorm();
    if (z_rest.cols() > 0) obj += alpha * (z_rest - z_self * w_rest).squaredNorm();
    return obj;
}

RowSparseSolution solve_joint_row_sparse(const Matrix& z_self, const Matrix& z_rest,
                                         const AdmmConfig& cfg) {
    cfg.validate();
    if (z_self.rows() == 0 || z_self.cols() == 0) throw invalid_input("z_self is empty");
    if (z_rest.cols() > 0 && z_rest.rows() != z_self.rows())
        throw invalid_input("z_self and z_rest row counts differ");
    require_finite(z_self, "z_self");
    if (z_rest.size() > 0) require_finite(z_rest, "z_rest");

    const Index ni = z_self.cols();
    const Index nr = z_rest.cols();
    const bool has_rest = nr > 0 && cfg.alpha > 0.0;

    const Matrix g = z_self.transpose() * z_self;
    const Matrix b_self = 2.0 * g;  // gradient constant of the self block
    const Matrix b_rest = has_rest
                              ? Matrix(2.0 * cfg.alpha * (z_self.transpose() * z_rest))
                              : Matrix::Zero(ni, nr);

    double rho = cfg.rho;
    Eigen::LDLT<Matrix> solver_self;
    Eigen::LDLT<Matrix> solver_rest;
    auto refactor = [&]() {
        Matrix id = Matrix::Identity(ni, ni);
        solver_self.compute(2.0 * g + (2.0 * kRidge + rho) * id);
        if (has_rest)
            solver_rest.compute(2.0 * cfg.alpha * g + (2.0 * cfg.alpha * kRidge + rho) * id);
    };
    refactor();

    Matrix ws = Matrix::Zero(ni, ni), us = ws, ys = ws;
    Matrix wr = Matrix::Zero(ni, nr), ur = wr, yr = wr;

    RowSparseSolution out;
    out.objective_trace.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);
    double best_obj = joint_objective(z_self, z_rest, us, ur, cfg.alpha);
    Matrix best_us = us, best_ur = ur;

    for (int it = 0; it < cfg.max_iters; ++it) {
        ws = solver_self.solve(b_self + rho * (us - ys));
        if (has_rest)
            wr = solver_rest.solve(b_rest + rho * (ur - yr));
        else if (nr > 0)
            wr = ur - yr;

        const Matrix us_prev = us, ur_prev = ur;
        us = project_l12_ball(ws + ys, cfg.budget_self());
        if (nr > 0) ur = project_l12_ball(wr + yr, cfg.budget_rest());

        ys += ws - us;
        if (nr > 0) yr += wr - ur;

        const double obj = joint_objective(z_self, z_rest, us, ur, cfg.alpha);
        out.objective_trace.push_back(obj);
        if (obj < best_obj) {
            best_obj = obj;
            best_us = us;
            best_ur = ur;
        }

        const double primal = std::sqrt((ws - us).squaredNorm() + (wr - ur).squaredNorm());
        const double dual =
            rho * std::sqrt((us - us_prev).squaredNorm() + (ur - ur_prev).squaredNorm());
        const double primal_scale = std::max(
            {1.0, std::sqrt(ws.squaredNorm() + wr.squaredNorm()),
             std::sqrt(us.squaredNorm() + ur.squaredNorm())});
        const double dual_scale =
            std::max(1.0, rho * std::sqrt(ys.squaredNorm() + yr.squaredNorm()));
        if (primal <= cfg.primal_tol * primal_scale && dual <= cfg.dual_tol * dual_scale) {
            out.converged = true;
            break;
        }

        if (primal > 10.0 * dual && rho < 1e6) {
            rho *= 2.0;
            ys *= 0.5;
            yr *= 0.5;
            refactor();
        } else if (dual > 10.0 * primal && rho > 1e-6) {
            rho *= 0.5;
            ys *= 2.0;
            yr *= 2.0;
            refactor();
        }
    }

    out.w_self = best_us;
    out.w_rest = best_ur;
    if (out.objective_trace.empty() || out.objective_trace.back() != best_obj)
        out.objective_trace.push_back(best_obj);
    return out;
}

SparseCode omp(const Dictionary& dict, const Vector& y, Index sparsity) {
    const Index m = dict.dim();
    const Index n_a = dict.n_atoms();
    if (n_a < 1) throw invalid_dictionary("dictionary has no atoms");
    if (sparsity < 1) throw invalid_input("sparsity must be >= 1");
    if (sparsity > n_a) throw invalid_input("sparsity exceeds the atom count");
    if (y.size() != m) throw invalid_input("signal dimension does not match the dictionary");
    require_finite(dict.atoms, "dictionary atoms");
    require_finite(y, "omp signal");
    for (Index c = 0; c < n_a; ++c) {
        const double norm = dict.atoms.col(c).norm();
        if (norm < kAtomNormTol) throw invalid_dictionary("zero-norm atom");
        if (std::abs(norm - 1.0) > kAtomNormTol)
            throw invalid_dictionary("atoms must have unit norm");
    }

    SparseCode code;
    code.coefficients = Vector::Zero(n_a);
    Vector residual = y;
    std::vector<Index> support;
    support.reserve(static_cast<std::size_t>(sparsity));
    Matrix sub(m, sparsity);
    Vector fit;

    for (Index it = 0; it < sparsity; ++it) {
        if (residual.norm() < kResidualStop) break;
        Vector corr = dict.atoms.transpose() * residual;
        Index best = 0;
        double best_abs = -1.0;
        for (Index j = 0; j < n_a; ++j) {
            const double a = std::abs(corr(j));
            if (a > best_abs) {
                best_abs = a;
                best = j;
            }
        }
        if (best_abs < kCorrelationStop) break;
        support.push_back(best);
        sub.col(static_cast<Index>(support.size()) - 1) = dict.atoms.col(best);
        auto active = sub.leftCols(static_cast<Index>(support.size()));
        fit = active.colPivHouseholderQr().solve(y);
        residual = y - active * fit;
    }

    for (std::size_t k = 0; k < support.size(); ++k)
        code.coefficients(support[k]) = fit(static_cast<Index>(k));
    code.support = std::move(support);
    code.residual_norm = residual.norm();
    return code;
}

KsvdResult ksvd(const Matrix& samples, Index n_atoms, Index sparsity, int iters,
                std::uint64_t seed) {
    const Index m = samples.rows();
    const Index n_s = samples.cols();
    if (n_atoms < 1) throw invalid_input("n_atoms must be >= 1");
    if (n_s < n_atoms) throw invalid_input("need at least as many samples as atoms");
    if (sparsity < 1) throw invalid_input("sparsity must be >= 1");
    if (sparsity > n_atoms) throw invalid_input("sparsity exceeds the atom count");
    if (iters < 1) throw invalid_input("iters must be >= 1");
    require_finite(samples, "ksvd samples");

    KsvdResult res;
    res.dictionary.atoms = Matrix(m, n_atoms);

    // Seeded init: distinct sample columns, normalized; all-zero picks fall
    // back to coordinate vectors so the dictionary is always valid.
    Rng rng(seed);
    std::vector<Index> picks = rng.sample_without_replacement(n_s, n_atoms);
    for (Index j = 0; j < n_atoms; ++j) {
        Vector col = samples.col(picks[static_cast<std::size_t>(j)]);
        const double norm = col.norm();
        if (norm > 1e-12)
            res.dictionary.atoms.col(j) = col / norm;
        else
            res.dictionary.atoms.col(j) = Vector::Unit(m, j % m);
    }

    Matrix x = Matrix::Zero(n_atoms, n_s);
    res.error_trace.reserve(static_cast<std::size_t>(iters));

    auto code_all = [&](bool reuse) {
        for (Index i = 0; i < n_s; ++i) {
            SparseCode c = omp(res.dictionary, samples.col(i), sparsity);
            if (reuse) {
                const double old_res =
                    (samples.col(i) - res.dictionary.atoms * x.col(i)).norm();
                if (old_res <= c.residual_norm) continue;
            }
            x.col(i) = c.coefficients;
        }
    };

    for (int it = 0; it < iters; ++it) {
        code_all(it > 0);
        res.error_trace.push_back((samples - res.dictionary.atoms * x).squaredNorm());

        if (it + 1 == iters) break;

        for (Index j = 0; j < n_atoms; ++j) {
            std::vector<Index> users;
            for (Index i = 0; i < n_s; ++i)
                if (x(j, i) != 0.0) users.push_back(i);
            if (users.empty()) {
                // Dead atom: replace with the worst-reconstructed sample.
                Index worst = -1;
                double worst_res = kResidualStop;
                for (Index i = 0; i < n_s; ++i) {
                    const double r =
                        (samples.col(i) - res.dictionary.atoms * x.col(i)).norm();
                    if (r > worst_res) {
                        worst_res = r;
                        worst = i;
                    }
                }
                if (worst >= 0)
                    res.dictionary.atoms.col(j) = samples.col(worst).normalized();
                continue;
            }
            Matrix e(m, static_cast<Index>(users.size()));
            for (std::size_t k = 0; k < users.size(); ++k) {
                const Index i = users[k];
                e.col(static_cast<Index>(k)) =
                    samples.col(i) - res.dictionary.atoms * x.col(i) +
                    res.dictionary.atoms.col(j) * x(j, i);
            }
            Eigen::JacobiSVD<Matrix> svd(e, Eigen::ComputeThinU | Eigen::ComputeThinV);
            Vector atom = svd.matrixU().col(0);
            Vector coef = svd.singularValues()(0) * svd.matrixV().col(0);
            // Fix the sign so reruns are reproducible regardless of SVD
            // sign conventions.
            Index peak = 0;
            atom.cwiseAbs().maxCoeff(&peak);
            if (atom(peak) < 0.0) {
                atom = -atom;
                coef = -coef;
            }
            res.dictionary.atoms.col(j) = atom;
            for (std::size_t k = 0; k < users.size(); ++k)
                x(j, users[k]) = coef(static_cast<Index>(k));
        }
    }

    res.codes = std::move(x);
    return res;
}

}  // namespace itra::solvers
