// Acceptance gate: eight numbered end-to-end checks, one PASS/FAIL line each.
// Exits nonzero if any check fails. Tolerances are pinned as constants below.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "itra/classifier.hpp"
#include "itra/decomposition.hpp"
#include "itra/features.hpp"
#include "itra/harness.hpp"
#include "itra/io.hpp"
#include "itra/solvers.hpp"
#include "oracles.hpp"

using namespace itra;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kOmpCoeffTol = 1e-8;
constexpr double kOmpTimeLimit = 10.0;
constexpr int kOmpInstances = 200;

constexpr double kAdmmSlackTol = 1e-6;
constexpr double kAdmmObjRatio = 1.01;
constexpr double kAdmmTimeLimit = 60.0;
constexpr int kAdmmInstances = 100;
constexpr int kPgIters = 10000;

constexpr double kKsvdRecoveryTol = 1e-6;
constexpr double kKsvdTraceTol = 1e-9;
constexpr int kKsvdMaxIters = 20;
constexpr int kKsvdSeeds = 10;

constexpr double kMeanAccuracyFloor = 0.90;
constexpr double kRunTimeLimit = 300.0;
constexpr int kExperimentSeeds = 5;

constexpr int kPropertyCases = 100;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

Matrix gaussian(Index rows, Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
    return m;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Small-data configuration: 12-dim window descriptors, 24 atoms per cell.
harness::ExperimentConfig desk_config() {
    harness::ExperimentConfig cfg;
    cfg.decompose.phog.levels = {0, 1};
    cfg.decompose.phog.bins = 6;
    cfg.decompose.selection.k = 3;
    cfg.decompose.selection.t = 3;
    cfg.decompose.admm.max_iters = 150;
    cfg.decompose.admm.lambda_budget = 3.0;
    cfg.decompose.hog3d.axes = descriptors::Hog3dConfig::icosahedron_vertex_axes();
    cfg.decompose.hog3d.cell_grid = {1, 2, 1};
    cfg.decompose.cuboid_count = 40;
    cfg.decompose.cuboid_width = 12;
    cfg.decompose.cuboid_height = 12;
    cfg.decompose.cuboid_depth = 7;
    cfg.decompose.filter_threshold = 1e-8;
    cfg.bank.mu = 2;
    cfg.bank.delta = 12;
    cfg.bank.ksvd_iters = 5;
    cfg.classifier_mu = 2;
    cfg.classifier_ksvd_iters = 10;
    return cfg;
}

// 1. Greedy sparse coding equals exhaustive best-support search.
Outcome check_omp_oracle() {
    const auto t0 = Clock::now();
    Rng rng(split_seed(9001, "accept-omp"));
    for (int i = 0; i < kOmpInstances; ++i) {
        const Index n_a = 2 + static_cast<Index>(rng.below(7));
        const Index m = n_a + static_cast<Index>(rng.below(4));
        solvers::Dictionary d;
        d.atoms = oracle::random_orthonormal(m, n_a, split_seed(9001, "accept-omp-dict", i));
        Vector y(m);
        for (Index r = 0; r < m; ++r) y(r) = rng.normal();
        const int sparsity = 1 + static_cast<int>(rng.below(2));

        solvers::SparseCode code = solvers::omp(d, y, sparsity);
        oracle::BestSupport best = oracle::best_support_search(d.atoms, y, sparsity);

        std::set<Index> got(code.support.begin(), code.support.end());
        std::set<Index> want(best.support.begin(), best.support.end());
        if (got != want)
            return {false, fmt("instance %d: support mismatch", i)};
        const double err = (code.coefficients - best.coefficients).norm();
        if (err >= kOmpCoeffTol)
            return {false, fmt("instance %d: coefficient error %.3e", i, err)};
    }
    const double dt = since(t0);
    if (dt >= kOmpTimeLimit) return {false, fmt("took %.1fs (limit %.0fs)", dt, kOmpTimeLimit)};
    return {true, fmt("matches exhaustive best-support search on %d/%d orthonormal "
                      "instances, coefficient error < 1e-8 (%.2fs)",
                      kOmpInstances, kOmpInstances, dt)};
}

// 2. Joint row-sparse solver: feasibility and near-optimality.
Outcome check_joint_solver_bound() {
    const auto t0 = Clock::now();
    Rng rng(split_seed(9002, "accept-admm"));
    for (int i = 0; i < kAdmmInstances; ++i) {
        Index m = 6 + static_cast<Index>(rng.below(15));       // <= 20
        Index ni = 4 + static_cast<Index>(rng.below(27));      // <= 30
        Index nr = static_cast<Index>(rng.below(31));          // <= 30
        if (i < 2) {                                           // pin the size caps
            m = 20;
            ni = 30;
            nr = 30;
        }
        Matrix zs = gaussian(m, ni, rng);
        Matrix zr = gaussian(m, nr, rng);
        solvers::AdmmConfig cfg;
        cfg.alpha = 0.5 + rng.real01();
        cfg.lambda_budget = 0.3 + 1.5 * rng.real01();
        cfg.max_iters = 2000;
        cfg.primal_tol = 1e-8;
        cfg.dual_tol = 1e-8;

        solvers::RowSparseSolution sol = solvers::solve_joint_row_sparse(zs, zr, cfg);
        const double slack_self = solvers::l12_norm(sol.w_self) - cfg.budget_self();
        const double slack_rest = solvers::l12_norm(sol.w_rest) - cfg.budget_rest();
        if (slack_self > kAdmmSlackTol || slack_rest > kAdmmSlackTol)
            return {false, fmt("instance %d: constraint slack %.3e / %.3e", i, slack_self,
                               slack_rest)};

        oracle::PgResult pg = oracle::projected_gradient_joint(
            zs, zr, cfg.alpha, cfg.budget_self(), cfg.budget_rest(), kPgIters);
        const double obj = sol.objective_trace.back();
        if (obj > pg.objective * kAdmmObjRatio + 1e-10)
            return {false, fmt("instance %d: objective %.6e vs reference %.6e", i, obj,
                               pg.objective)};
    }
    const double dt = since(t0);
    if (dt >= kAdmmTimeLimit)
        return {false, fmt("took %.1fs (limit %.0fs)", dt, kAdmmTimeLimit)};
    return {true, fmt("feasible (slack <= 1e-6) and within 1%% of a %d-iteration "
                      "projected-gradient reference on %d/%d instances (%.1fs)",
                      kPgIters, kAdmmInstances, kAdmmInstances, dt)};
}

// 3. Dictionary learning recovers a planted 5-atom model.
Outcome check_ksvd_planted() {
    const auto t0 = Clock::now();
    for (std::uint64_t seed = 0; seed < kKsvdSeeds; ++seed) {
        Rng rng(split_seed(9003, "accept-ksvd", seed));
        Matrix planted(8, 5);
        for (Index c = 0; c < 5; ++c) {
            for (Index r = 0; r < 8; ++r) planted(r, c) = rng.normal();
            planted.col(c).normalize();
        }
        Matrix samples(8, 200);
        for (Index i = 0; i < 200; ++i)
            samples.col(i) = planted.col(i % 5) * rng.uniform(0.5, 1.5);

        solvers::KsvdResult res =
            solvers::ksvd(samples, 5, 1, kKsvdMaxIters, split_seed(9003, "accept-run", seed));
        const double err = oracle::planted_match_error(res.dictionary.atoms, planted);
        if (err >= kKsvdRecoveryTol)
            return {false, fmt("seed %llu: atom recovery error %.3e",
                               static_cast<unsigned long long>(seed), err)};
        for (std::size_t i = 1; i < res.error_trace.size(); ++i)
            if (res.error_trace[i] > res.error_trace[i - 1] + kKsvdTraceTol)
                return {false, fmt("seed %llu: error trace not monotone",
                                   static_cast<unsigned long long>(seed))};
    }
    return {true, fmt("planted 5-atom model recovered to < 1e-6 within %d iterations on "
                      "%d/%d seeds, trace monotone (%.1fs)",
                      kKsvdMaxIters, kKsvdSeeds, kKsvdSeeds, since(t0))};
}

// 4. Descriptor dimension law.
Outcome check_dimension_law() {
    const struct {
        Index c, k, want;
    } cases[] = {{6, 3, 24}, {16, 3, 54}, {8, 3, 30}};
    for (const auto& cs : cases)
        if (features::itra_dim(cs.c, cs.k) != cs.want)
            return {false, fmt("dim(%lld,%lld) = %lld, wanted %lld",
                               static_cast<long long>(cs.c), static_cast<long long>(cs.k),
                               static_cast<long long>(features::itra_dim(cs.c, cs.k)),
                               static_cast<long long>(cs.want))};
    return {true, "descriptor length K*(C+K-1) gives 24 / 54 / 30 for (C,K) = "
                  "(6,3), (16,3), (8,3), exact"};
}

struct EndToEnd {
    std::vector<double> full, uniform, inter;
    double worst_seconds = 0.0;
    std::string error;
};

// Shared runs for checks 5 and 6: same datasets, same seeds, three variants.
EndToEnd run_end_to_end() {
    EndToEnd out;
    harness::SynthConfig synth;
    synth.classes = 3;
    synth.train_per_class = 10;
    synth.test_per_class = 5;
    synth.frames = 24;
    synth.height = 32;
    synth.width = 32;
    synth.noise_sigma = 0.05;

    try {
        for (std::uint64_t seed = 1; seed <= kExperimentSeeds; ++seed) {
            const harness::Dataset ds = harness::synth_gen(synth, seed);
            auto run = [&](harness::FrameMethod fm, harness::DescriptorMethod dm) {
                harness::ExperimentConfig cfg = desk_config();
                cfg.frame_method = fm;
                cfg.descriptor_method = dm;
                const auto t0 = Clock::now();
                harness::EvalReport rep = harness::run_experiment(ds, cfg, seed);
                out.worst_seconds = std::max(out.worst_seconds, since(t0));
                return rep.accuracy;
            };
            out.full.push_back(
                run(harness::FrameMethod::proposed, harness::DescriptorMethod::full));
            out.uniform.push_back(
                run(harness::FrameMethod::uniform, harness::DescriptorMethod::full));
            out.inter.push_back(
                run(harness::FrameMethod::proposed, harness::DescriptorMethod::inter_only));
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0
                     : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// 5. End-to-end synthetic recognition accuracy.
Outcome check_recognition(const EndToEnd& e2e) {
    if (!e2e.error.empty()) return {false, "experiment failed: " + e2e.error};
    const double m = mean(e2e.full);
    if (m < kMeanAccuracyFloor)
        return {false, fmt("mean accuracy %.3f < %.2f over %d seeds", m, kMeanAccuracyFloor,
                           kExperimentSeeds)};
    if (e2e.worst_seconds >= kRunTimeLimit)
        return {false, fmt("slowest run %.1fs (limit %.0fs)", e2e.worst_seconds,
                           kRunTimeLimit)};
    return {true, fmt("mean test accuracy %.3f >= %.2f over %d seeds (3 classes, 10+5 "
                      "videos each, 24x32x32, sigma 0.05); slowest run %.1fs",
                      m, kMeanAccuracyFloor, kExperimentSeeds, e2e.worst_seconds)};
}

// 6. Pipeline beats (or ties) its two ablation baselines.
Outcome check_ablation_direction(const EndToEnd& e2e) {
    if (!e2e.error.empty()) return {false, "experiment failed: " + e2e.error};
    const double mf = mean(e2e.full), mu = mean(e2e.uniform), mi = mean(e2e.inter);
    if (mf + 1e-12 < mu)
        return {false, fmt("full %.3f < uniform-frames baseline %.3f", mf, mu)};
    if (mf + 1e-12 < mi)
        return {false, fmt("full %.3f < inter-only descriptor %.3f", mf, mi)};
    return {true, fmt("full pipeline %.3f >= uniform-frames %.3f and >= inter-only %.3f "
                      "over %d paired seeds",
                      mf, mu, mi, kExperimentSeeds)};
}

// 7. Bitwise determinism of serialized artifacts and lossless round-trips.
Outcome check_determinism_roundtrip() {
    const auto t0 = Clock::now();
    Rng rng(split_seed(9007, "accept-det"));

    // Raw video tensors survive a save/load cycle bit for bit.
    std::vector<Frame> video;
    for (int f = 0; f < 5; ++f) {
        Frame fr(9, 7);
        for (Index r = 0; r < 9; ++r)
            for (Index c = 0; c < 7; ++c)
                fr(r, c) = static_cast<double>(static_cast<float>(rng.real01()));
        video.push_back(fr);
    }
    std::ostringstream vout;
    io::save_video(vout, video);
    std::istringstream vin(vout.str());
    const std::vector<Frame> video_back = io::load_video(vin);
    if (video_back.size() != video.size()) return {false, "video round-trip: frame count"};
    for (std::size_t f = 0; f < video.size(); ++f)
        if (!(video_back[f] == video[f])) return {false, "video round-trip: pixel bytes"};

    // Dictionaries too.
    solvers::Dictionary dict;
    dict.atoms = gaussian(6, 9, rng);
    for (Index c = 0; c < 9; ++c) dict.atoms.col(c).normalize();
    std::ostringstream dout;
    io::save_dictionary(dout, dict);
    std::istringstream din(dout.str());
    if (!(io::load_dictionary(din).atoms == dict.atoms))
        return {false, "dictionary round-trip: atom bytes"};

    const fs::path root = fs::temp_directory_path() / "itra_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    // Identical seeds give bitwise-identical serialized banks.
    std::vector<std::vector<Matrix>> train_sets(2, std::vector<Matrix>(2));
    for (auto& row : train_sets)
        for (auto& cell : row) cell = gaussian(6, 30, rng);
    features::BankConfig bcfg;
    bcfg.mu = 1;
    bcfg.delta = 6;
    bcfg.ksvd_iters = 3;
    features::save_bank(root / "bank_a", features::learn_dictionary_bank(train_sets, bcfg, 31));
    features::save_bank(root / "bank_b", features::learn_dictionary_bank(train_sets, bcfg, 31));
    for (const auto& e : fs::directory_iterator(root / "bank_a")) {
        const auto name = e.path().filename();
        if (file_bytes(e.path()) != file_bytes(root / "bank_b" / name))
            return {false, "bank serialization differs across identical runs: " +
                               name.string()};
    }

    // ... and bitwise-identical classifier models.
    std::vector<Matrix> by_class = {gaussian(8, 12, rng), gaussian(8, 9, rng)};
    classifier::save_classifier(root / "model_a",
                                classifier::train_classifier(by_class, 1, 0.25, 3, 77));
    classifier::save_classifier(root / "model_b",
                                classifier::train_classifier(by_class, 1, 0.25, 3, 77));
    for (const char* name : {"atoms.matx", "manifest.json"})
        if (file_bytes(root / "model_a" / name) != file_bytes(root / "model_b" / name))
            return {false, std::string("model serialization differs: ") + name};

    // ... and bitwise-identical experiment reports.
    harness::SynthConfig synth;
    synth.classes = 2;
    synth.train_per_class = 2;
    synth.test_per_class = 1;
    synth.frames = 12;
    synth.height = 16;
    synth.width = 16;
    synth.noise_sigma = 0.02;
    harness::ExperimentConfig ecfg = desk_config();
    ecfg.decompose.selection.k = 2;
    ecfg.decompose.selection.t = 2;
    ecfg.decompose.cuboid_count = 14;
    ecfg.decompose.cuboid_width = 7;
    ecfg.decompose.cuboid_height = 7;
    ecfg.decompose.cuboid_depth = 5;
    ecfg.bank.mu = 1;
    ecfg.bank.ksvd_iters = 2;
    ecfg.classifier_ksvd_iters = 3;
    const harness::Dataset ds = harness::synth_gen(synth, 13);
    const std::vector<std::string> names = ds.classes;
    harness::write_report_json(root / "report_a.json",
                               harness::run_experiment(ds, ecfg, 13), names);
    harness::write_report_json(root / "report_b.json",
                               harness::run_experiment(ds, ecfg, 13), names);
    if (file_bytes(root / "report_a.json") != file_bytes(root / "report_b.json"))
        return {false, "report bytes differ across identical runs"};

    fs::remove_all(root);
    return {true, fmt("video and dictionary round-trips lossless; banks, models, and "
                      "reports bitwise identical across repeated seeded runs (%.1fs)",
                      since(t0))};
}

// 8. Invariant property suites, >= 100 random cases each.
Outcome check_property_suites() {
    const auto t0 = Clock::now();
    std::vector<std::string> failed;

    // Mixed-norm ball projection: feasibility and idempotence.
    {
        Rng rng(split_seed(9008, "accept-proj"));
        bool ok = true;
        for (int i = 0; i < kPropertyCases && ok; ++i) {
            const Index rows = 1 + static_cast<Index>(rng.below(8));
            const Index cols = 1 + static_cast<Index>(rng.below(8));
            const double budget = 0.1 + 3.0 * rng.real01();
            Matrix a = gaussian(rows, cols, rng);
            Matrix p = solvers::project_l12_ball(a, budget);
            ok = ok && solvers::l12_norm(p) <= budget + 1e-9;
            ok = ok && (solvers::project_l12_ball(p, budget) - p).norm() <= 1e-9;
            if (solvers::l12_norm(a) <= budget) ok = ok && (p - a).norm() <= 1e-12;
        }
        if (!ok) failed.push_back("projection");
    }

    // Sparse coding: support budget, exact off-support zeros, least-squares
    // optimality on the support, repeat determinism.
    {
        Rng rng(split_seed(9008, "accept-code"));
        bool ok = true;
        for (int i = 0; i < kPropertyCases && ok; ++i) {
            const Index m = 4 + static_cast<Index>(rng.below(7));
            const Index n_a = 2 + static_cast<Index>(rng.below(7));
            Matrix atoms = gaussian(m, n_a, rng);
            for (Index c = 0; c < n_a; ++c) atoms.col(c).normalize();
            solvers::Dictionary d{atoms, std::nullopt};
            Vector y(m);
            for (Index r = 0; r < m; ++r) y(r) = rng.normal();
            const int s = 1 + static_cast<int>(rng.below(3));

            solvers::SparseCode a = solvers::omp(d, y, std::min<Index>(s, n_a));
            solvers::SparseCode b = solvers::omp(d, y, std::min<Index>(s, n_a));
            ok = ok && a.support == b.support && a.coefficients == b.coefficients;
            ok = ok && static_cast<Index>(a.support.size()) <= std::min<Index>(s, n_a);
            const Vector resid = y - atoms * a.coefficients;
            for (Index j = 0; j < n_a; ++j) {
                const bool on = std::find(a.support.begin(), a.support.end(), j) !=
                                a.support.end();
                if (on)
                    ok = ok && std::abs(atoms.col(j).dot(resid)) <= 1e-8;
                else
                    ok = ok && a.coefficients(j) == 0.0;
            }
        }
        if (!ok) failed.push_back("sparse-coding");
    }

    // Pooling partition identity: block masses sum to the code's total.
    {
        Rng rng(split_seed(9008, "accept-pool"));
        bool ok = true;
        for (int i = 0; i < kPropertyCases && ok; ++i) {
            const Index n = 2 + static_cast<Index>(rng.below(20));
            solvers::SparseCode code;
            code.coefficients = Vector(n);
            for (Index j = 0; j < n; ++j) {
                const bool on = rng.real01() < 0.4;
                code.coefficients(j) = on ? rng.normal() : 0.0;
                if (on) code.support.push_back(j);
            }
            std::vector<std::pair<Index, Index>> blocks;
            Index at = 0;
            while (at < n) {
                const Index len = std::min<Index>(1 + static_cast<Index>(rng.below(5)), n - at);
                blocks.emplace_back(at, len);
                at += len;
            }
            const Vector pooled = features::sum_pool(code, blocks, false);
            const Vector pooled_abs = features::sum_pool(code, blocks, true);
            ok = ok && std::abs(pooled.sum() - code.coefficients.sum()) <= 1e-12;
            for (Index b = 0; b < pooled.size(); ++b)
                ok = ok && pooled_abs(b) >= std::abs(pooled(b)) - 1e-12;
        }
        if (!ok) failed.push_back("pooling");
    }

    // Dictionary learning: unit-norm atoms and a monotone error trace.
    {
        bool ok = true;
        for (int i = 0; i < kPropertyCases && ok; ++i) {
            Rng rng(split_seed(9008, "accept-learn", static_cast<std::uint64_t>(i)));
            Matrix samples = gaussian(5, 20, rng);
            solvers::KsvdResult res =
                solvers::ksvd(samples, 3, 1, 3, static_cast<std::uint64_t>(i));
            for (std::size_t k = 1; k < res.error_trace.size(); ++k)
                ok = ok && res.error_trace[k] <= res.error_trace[k - 1] + 1e-9;
            for (Index c = 0; c < res.dictionary.atoms.cols(); ++c)
                ok = ok && std::abs(res.dictionary.atoms.col(c).norm() - 1.0) <= 1e-9;
        }
        if (!ok) failed.push_back("dictionary-learning");
    }

    // Evenly spaced key-frames: sorted, distinct, in range, deterministic.
    {
        Rng rng(split_seed(9008, "accept-frames"));
        bool ok = true;
        for (int i = 0; i < kPropertyCases && ok; ++i) {
            const Index n = 1 + static_cast<Index>(rng.below(200));
            const Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(
                                std::min<Index>(n, 8))));
            const auto a = harness::baseline_uniform_keyframes(n, k);
            const auto b = harness::baseline_uniform_keyframes(n, k);
            ok = ok && a == b && static_cast<Index>(a.size()) == k;
            for (std::size_t j = 0; j < a.size(); ++j) {
                ok = ok && a[j] >= 0 && a[j] < n;
                if (j > 0) ok = ok && a[j] > a[j - 1];
            }
        }
        if (!ok) failed.push_back("uniform-frames");
    }

    // Evaluation: permutation invariance and the confusion/accuracy identity.
    {
        Rng rng(split_seed(9008, "accept-eval"));
        bool ok = true;
        for (int i = 0; i < kPropertyCases && ok; ++i) {
            const int n = 1 + static_cast<int>(rng.below(40));
            const int c = 1 + static_cast<int>(rng.below(5));
            std::vector<int> truth(static_cast<std::size_t>(n)),
                pred(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                truth[static_cast<std::size_t>(j)] = static_cast<int>(rng.below(c));
                pred[static_cast<std::size_t>(j)] = static_cast<int>(rng.below(c));
            }
            const auto perm = Rng(split_seed(9008, "accept-perm", i))
                                  .sample_without_replacement(n, n);
            std::vector<int> truth_p, pred_p;
            for (Index idx : perm) {
                truth_p.push_back(truth[static_cast<std::size_t>(idx)]);
                pred_p.push_back(pred[static_cast<std::size_t>(idx)]);
            }
            const harness::EvalReport a = harness::evaluate(pred, truth, c);
            const harness::EvalReport b = harness::evaluate(pred_p, truth_p, c);
            ok = ok && a.accuracy == b.accuracy && a.confusion == b.confusion;
            long trace = 0, total = 0;
            for (int r = 0; r < c; ++r)
                for (int q = 0; q < c; ++q) {
                    total += a.confusion(r, q);
                    if (r == q) trace += a.confusion(r, q);
                }
            ok = ok && total == n &&
                 std::abs(a.accuracy - static_cast<double>(trace) / n) <= 1e-12;
        }
        if (!ok) failed.push_back("evaluation");
    }

    // Vote resolution: repeat determinism, identical columns break low.
    {
        Rng rng(split_seed(9008, "accept-votes"));
        bool ok = true;
        for (int i = 0; i < kPropertyCases && ok; ++i) {
            const Index c = 2 + static_cast<Index>(rng.below(5));
            Matrix mass = gaussian(c, c, rng).cwiseAbs();
            const auto a = classifier::resolve_votes(mass);
            const auto b = classifier::resolve_votes(mass);
            ok = ok && a.label == b.label && a.partial_votes == b.partial_votes;

            Matrix flat = Matrix::Constant(c, c, 1.0 + rng.real01());
            const auto tied = classifier::resolve_votes(flat);
            ok = ok && tied.label == 0;
            for (int vote : tied.partial_votes) ok = ok && vote == 0;
        }
        if (!ok) failed.push_back("vote-resolution");
    }

    if (!failed.empty()) {
        std::string what = "failing suites:";
        for (const auto& f : failed) what += " " + f;
        return {false, what};
    }
    return {true, fmt("7 invariant suites x %d random cases: projection feasibility, "
                      "coding optimality, pooling partition, monotone learning, frame "
                      "spacing, evaluation symmetry, vote tie-breaks (%.1fs)",
                      kPropertyCases, since(t0))};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&failures](int idx, Outcome o) {
        std::printf("C%d %s  %s\n", idx, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };
    auto guarded = [](auto fn) -> Outcome {
        try {
            return fn();
        } catch (const std::exception& e) {
            return {false, std::string("unexpected exception: ") + e.what()};
        }
    };

    report(1, guarded(check_omp_oracle));
    report(2, guarded(check_joint_solver_bound));
    report(3, guarded(check_ksvd_planted));
    report(4, guarded(check_dimension_law));
    const EndToEnd e2e = run_end_to_end();
    report(5, guarded([&] { return check_recognition(e2e); }));
    report(6, guarded([&] { return check_ablation_direction(e2e); }));
    report(7, guarded(check_determinism_roundtrip));
    report(8, guarded(check_property_suites));

    std::printf("%d/8 checks passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
