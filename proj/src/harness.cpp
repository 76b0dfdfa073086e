#include "itra/harness.hpp"

#include "itra/config_json.hpp"
#include "itra/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace itra::harness {

namespace fs = std::filesystem;

void Dataset::validate() const {
    if (classes.empty()) throw invalid_input("dataset has no classes");
    const Index c = n_classes();
    std::vector<bool> has_train(static_cast<std::size_t>(c), false);
    for (const auto& lv : videos) {
        if (lv.class_id < 0 || lv.class_id >= c)
            throw invalid_input("video class id out of range");
        lv.video.validate();
        if (lv.split == Split::train) has_train[static_cast<std::size_t>(lv.class_id)] = true;
    }
    for (Index j = 0; j < c; ++j)
        if (!has_train[static_cast<std::size_t>(j)])
            throw invalid_input("class '" + classes[static_cast<std::size_t>(j)] +
                                "' has no training videos");
}

namespace {

const char* split_dir(Split s) { return s == Split::train ? "train" : "test"; }

decomposition::VideoTensor load_pgm_video(const fs::path& dir, int class_id) {
    std::vector<fs::path> frame_paths;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pgm")
            frame_paths.push_back(e.path());
    if (frame_paths.empty()) throw invalid_input("no PGM frames in " + dir.string());
    std::sort(frame_paths.begin(), frame_paths.end());

    decomposition::VideoTensor v;
    v.id = dir.filename().string();
    v.class_label = class_id;
    for (const auto& p : frame_paths) {
        Frame f = io::load_pgm(p);
        if (!v.frames.empty() && (f.rows() != v.frames.front().rows() ||
                                  f.cols() != v.frames.front().cols()))
            throw invalid_input("mixed frame sizes in " + dir.string());
        v.frames.push_back(std::move(f));
    }
    return v;
}

}  // namespace

decomposition::VideoTensor load_video_file(const fs::path& path) {
    if (fs::is_directory(path)) {
        decomposition::VideoTensor v = load_pgm_video(path, 0);
        v.class_label.reset();
        return v;
    }
    if (!fs::is_regular_file(path)) throw io_error("video not found: " + path.string());
    decomposition::VideoTensor v;
    v.frames = io::load_video(path);
    v.id = path.stem().string();
    return v;
}

Dataset ingest(const fs::path& root) {
    if (!fs::is_directory(root)) throw io_error("dataset root not found: " + root.string());

    std::set<std::string> names;
    for (Split split : {Split::train, Split::test}) {
        const fs::path dir = root / split_dir(split);
        if (!fs::is_directory(dir)) continue;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_directory()) names.insert(e.path().filename().string());
    }
    if (names.empty()) throw invalid_input("no class directories under " + root.string());

    Dataset ds;
    ds.classes.assign(names.begin(), names.end());
    for (Split split : {Split::train, Split::test}) {
        for (std::size_t ci = 0; ci < ds.classes.size(); ++ci) {
            const fs::path cdir = root / split_dir(split) / ds.classes[ci];
            if (!fs::is_directory(cdir)) continue;
            std::vector<fs::path> entries;
            for (const auto& e : fs::directory_iterator(cdir)) entries.push_back(e.path());
            std::sort(entries.begin(), entries.end());
            for (const auto& p : entries) {
                if (fs::is_directory(p)) {
                    ds.videos.push_back(
                        {load_pgm_video(p, static_cast<int>(ci)), static_cast<int>(ci), split});
                } else if (p.extension() == ".vidf") {
                    decomposition::VideoTensor v;
                    v.frames = io::load_video(p);
                    v.id = p.stem().string();
                    v.class_label = static_cast<int>(ci);
                    ds.videos.push_back({std::move(v), static_cast<int>(ci), split});
                }
            }
        }
    }
    ds.validate();
    return ds;
}

void save_dataset(const fs::path& root, const Dataset& dataset) {
    dataset.validate();
    for (const auto& lv : dataset.videos) {
        if (lv.video.id.empty()) throw invalid_input("cannot save a video without an id");
        const fs::path dir =
            root / split_dir(lv.split) / dataset.classes[static_cast<std::size_t>(lv.class_id)];
        fs::create_directories(dir);
        io::save_video(dir / (lv.video.id + ".vidf"), lv.video.frames);
    }
}

void SynthConfig::validate() const {
    if (classes < 1 || classes > 6)
        throw invalid_input("synthetic classes must be between 1 and 6");
    if (train_per_class < 1 || test_per_class < 0)
        throw invalid_input("need at least one training video per class");
    if (frames < 3) throw invalid_input("synthetic videos need at least three frames");
    if (height < 8 || width < 8) throw invalid_input("synthetic frames must be at least 8x8");
    if (noise_sigma < 0.0) throw invalid_input("noise sigma must be nonnegative");
}

namespace {

constexpr double kBackground = 0.1;

struct Jitter {
    double dx = 0.0;
    double dy = 0.0;
    double amp = 1.0;
    double thick = 1.0;
};

void add_gaussian(Frame& f, double cy, double cx, double sy, double sx, double amp) {
    for (Index y = 0; y < f.rows(); ++y)
        for (Index x = 0; x < f.cols(); ++x) {
            const double dy = (y - cy) / sy, dx = (x - cx) / sx;
            f(y, x) += amp * std::exp(-0.5 * (dy * dy + dx * dx));
        }
}

void add_vbar(Frame& f, double cx, double sigma, double amp) {
    for (Index x = 0; x < f.cols(); ++x) {
        const double d = (x - cx) / sigma;
        const double v = amp * std::exp(-0.5 * d * d);
        if (v > 1e-6) f.col(x).array() += v;
    }
}

void add_hbar(Frame& f, double cy, double sigma, double amp) {
    for (Index y = 0; y < f.rows(); ++y) {
        const double d = (y - cy) / sigma;
        const double v = amp * std::exp(-0.5 * d * d);
        if (v > 1e-6) f.row(y).array() += v;
    }
}

void add_rotated_bar(Frame& f, double theta, double half_len, double sigma, double amp) {
    const double cy = 0.5 * (f.rows() - 1), cx = 0.5 * (f.cols() - 1);
    const double ct = std::cos(theta), st = std::sin(theta);
    for (Index y = 0; y < f.rows(); ++y)
        for (Index x = 0; x < f.cols(); ++x) {
            const double along = (x - cx) * ct + (y - cy) * st;
            const double across = -(x - cx) * st + (y - cy) * ct;
            if (std::abs(along) > half_len) continue;
            f(y, x) += amp * std::exp(-0.5 * (across / sigma) * (across / sigma));
        }
}

void add_checker(Frame& f, Index cell, int parity, double amp) {
    for (Index y = 0; y < f.rows(); ++y)
        for (Index x = 0; x < f.cols(); ++x)
            if (((y / cell + x / cell) & 1) == parity) f(y, x) += amp;
}

// Each archetype plays three acts over the video; fi indexes the frame.
Frame render_archetype(int archetype, Index fi, Index n, Index h, Index w, const Jitter& jit) {
    Frame f = Frame::Constant(h, w, kBackground);
    const Index phase = std::min<Index>(2, (3 * fi) / n);
    const Index p_start = (phase * n) / 3;
    const Index p_end = ((phase + 1) * n) / 3;
    const double u = (fi - p_start + 0.5) / static_cast<double>(p_end - p_start);
    const double pulse = 0.55 + 0.45 * std::cos(2.0 * std::numbers::pi * u);
    const double amp = 0.85 * jit.amp;

    switch (archetype) {
        case 0: {  // bar sweeping right, holding with a pulse, sweeping on
            double cx = 0.5 * w;
            double a = amp;
            if (phase == 0)
                cx = (0.12 + 0.38 * u) * w;
            else if (phase == 1)
                a = amp * pulse;
            else
                cx = (0.50 + 0.35 * u) * w;
            add_vbar(f, cx + jit.dx, 1.3 * jit.thick, a);
            break;
        }
        case 1: {  // bar pulsing up top, falling, widening at the bottom
            double cy = 0.2 * h;
            double a = amp;
            double sigma = 1.3 * jit.thick;
            if (phase == 0)
                a = amp * pulse;
            else if (phase == 1)
                cy = (0.2 + 0.6 * u) * h;
            else {
                cy = 0.8 * h;
                sigma = (1.2 + 1.8 * u) * jit.thick;
            }
            add_hbar(f, cy + jit.dy, sigma, a);
            break;
        }
        case 2: {  // blob growing, shrinking, then swelling large
            double r = 3.0;
            if (phase == 0)
                r = 2.0 + 3.0 * u;
            else if (phase == 1)
                r = 5.0 - 2.5 * u;
            else
                r = 2.5 + 0.18 * std::min(h, w) * u;
            add_gaussian(f, 0.5 * h + jit.dy, 0.5 * w + jit.dx, r * jit.thick, r * jit.thick,
                         0.9 * jit.amp);
            break;
        }
        case 3: {  // bar rotating a quarter turn, holding, rotating back
            double theta = 0.0;
            double a = amp;
            if (phase == 0)
                theta = u * 0.5 * std::numbers::pi;
            else if (phase == 1) {
                theta = 0.5 * std::numbers::pi;
                a = amp * pulse;
            } else
                theta = (1.0 - u) * 0.5 * std::numbers::pi;
            add_rotated_bar(f, theta, 0.38 * std::min(h, w), 1.2 * jit.thick, a);
            break;
        }
        case 4: {  // dot tracing the top edge, dropping, returning along the bottom
            double cy = 0.22 * h, cx = 0.85 * w;
            if (phase == 0)
                cx = (0.15 + 0.70 * u) * w;
            else if (phase == 1)
                cy = (0.22 + 0.56 * u) * h;
            else {
                cy = 0.78 * h;
                cx = (0.85 - 0.70 * u) * w;
            }
            add_gaussian(f, cy + jit.dy, cx + jit.dx, 1.6 * jit.thick, 1.6 * jit.thick,
                         0.95 * jit.amp);
            break;
        }
        case 5: {  // checkerboard flickering at act-specific cell sizes
            Index cell = std::max<Index>(2, h / 4);
            int parity = 0;
            bool on = false;
            if (phase == 0)
                on = (fi / 3) % 2 == 0;
            else if (phase == 1) {
                cell = std::max<Index>(2, h / 8);
                on = (fi / 2) % 2 == 0;
            } else {
                parity = 1;
                on = fi % 2 == 0;
            }
            add_checker(f, cell, parity, (on ? 0.7 : 0.15) * jit.amp);
            break;
        }
        default:
            throw invalid_input("unknown archetype");
    }
    return f;
}

}  // namespace

Dataset synth_gen(const SynthConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Dataset ds;
    // Names sort lexicographically in archetype order so ingesting a saved
    // dataset reproduces the same class ids.
    const char* kNames[6] = {"drift_bar", "fall_bar",  "grow_blob",
                             "spin_bar",  "trace_dot", "wink_grid"};
    for (int c = 0; c < cfg.classes; ++c) ds.classes.emplace_back(kNames[c]);

    std::uint64_t video_index = 0;
    for (Split split : {Split::train, Split::test}) {
        const int per = split == Split::train ? cfg.train_per_class : cfg.test_per_class;
        for (int c = 0; c < cfg.classes; ++c) {
            for (int v = 0; v < per; ++v, ++video_index) {
                Rng rng(split_seed(seed, "synth", video_index));
                Jitter jit;
                jit.dx = 3.0 * rng.real01() - 1.5;
                jit.dy = 3.0 * rng.real01() - 1.5;
                jit.amp = 0.85 + 0.15 * rng.real01();
                jit.thick = 0.9 + 0.25 * rng.real01();

                decomposition::VideoTensor video;
                char name[16];
                std::snprintf(name, sizeof name, "v%03d", v);
                video.id = name;
                video.class_label = c;
                for (Index fi = 0; fi < cfg.frames; ++fi) {
                    Frame f = render_archetype(c, fi, cfg.frames, cfg.height, cfg.width, jit);
                    if (cfg.noise_sigma > 0.0)
                        for (Index y = 0; y < f.rows(); ++y)
                            for (Index x = 0; x < f.cols(); ++x)
                                f(y, x) += cfg.noise_sigma * rng.normal();
                    // Snap to f32 so VIDF round-trips are lossless.
                    for (Index y = 0; y < f.rows(); ++y)
                        for (Index x = 0; x < f.cols(); ++x)
                            f(y, x) = static_cast<double>(
                                static_cast<float>(std::clamp(f(y, x), 0.0, 1.0)));
                    video.frames.push_back(std::move(f));
                }
                ds.videos.push_back({std::move(video), c, split});
            }
        }
    }
    ds.validate();
    return ds;
}

std::vector<Index> baseline_uniform_keyframes(Index n_frames, Index k) {
    if (k < 1) throw invalid_input("k must be >= 1");
    if (n_frames < k) throw invalid_input("fewer frames than requested key-frames");
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
        const Index lo = static_cast<Index>(
            std::llround(static_cast<double>(i) * n_frames / k));
        const Index hi = static_cast<Index>(
            std::llround(static_cast<double>(i + 1) * n_frames / k));
        out.push_back((lo + hi) / 2);
    }
    return out;
}

KmeansResult kmeans(const Matrix& points, Index k, int iters, std::uint64_t seed) {
    const Index n = points.cols();
    if (n < 1) throw invalid_input("no points to cluster");
    if (k < 1 || k > n) throw invalid_input("cluster count must lie in [1, n_points]");
    if (iters < 1) throw invalid_input("need at least one clustering iteration");
    require_finite(points, "cluster points");

    Rng rng(seed);
    const Index d = points.rows();
    Matrix centers(d, k);

    // k-means++: each next center drawn with probability proportional to the
    // squared distance to the nearest chosen one.
    centers.col(0) = points.col(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    Vector d2 =
        (points.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
    for (Index j = 1; j < k; ++j) {
        const double total = d2.sum();
        Index pick = -1;
        if (total > 0.0) {
            const double r = rng.real01() * total;
            double cum = 0.0;
            for (Index i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                cum += d2[i];
                if (cum >= r) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0)
                for (Index i = n; i-- > 0;)
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
        }
        if (pick < 0) pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        centers.col(j) = points.col(pick);
        d2 = d2.cwiseMin(
            (points.colwise() - centers.col(j)).colwise().squaredNorm().transpose());
    }

    auto nearest = [&](Index i) {
        Index best = 0;
        double best_d = (points.col(i) - centers.col(0)).squaredNorm();
        for (Index j = 1; j < k; ++j) {
            const double dj = (points.col(i) - centers.col(j)).squaredNorm();
            if (dj < best_d) {
                best_d = dj;
                best = j;
            }
        }
        return best;
    };

    std::vector<Index> assign(static_cast<std::size_t>(n), 0);
    for (int it = 0; it < iters; ++it) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            const Index a = nearest(i);
            if (it == 0 || a != assign[static_cast<std::size_t>(i)]) changed = true;
            assign[static_cast<std::size_t>(i)] = a;
        }
        if (!changed) break;

        Matrix sums = Matrix::Zero(d, k);
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sums.col(assign[static_cast<std::size_t>(i)]) += points.col(i);
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        std::vector<bool> stolen(static_cast<std::size_t>(n), false);
        for (Index j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] > 0) {
                centers.col(j) = sums.col(j) / counts[static_cast<std::size_t>(j)];
                continue;
            }
            // Empty cluster: restart it at the point farthest from its center.
            Index far = -1;
            double far_d = -1.0;
            for (Index i = 0; i < n; ++i) {
                if (stolen[static_cast<std::size_t>(i)]) continue;
                const double di =
                    (points.col(i) -
                     centers.col(assign[static_cast<std::size_t>(i)]))
                        .squaredNorm();
                if (di > far_d) {
                    far_d = di;
                    far = i;
                }
            }
            centers.col(j) = points.col(far);
            stolen[static_cast<std::size_t>(far)] = true;
            assign[static_cast<std::size_t>(far)] = j;
        }
    }
    for (Index i = 0; i < n; ++i) assign[static_cast<std::size_t>(i)] = nearest(i);
    return {std::move(centers), std::move(assign)};
}

namespace {

Matrix window_embeddings(const decomposition::VideoTensor& video, Index t,
                         const descriptors::PhogConfig& phog) {
    const Index wlen = 2 * t + 1;
    if (video.n_frames() < wlen)
        throw invalid_input("video too short for window clustering: " + video.id);
    const Matrix z = decomposition::phog_matrix(video, phog);
    const Index d = z.rows();
    const Index n_w = z.cols() - wlen + 1;
    Matrix out(d * wlen, n_w);
    for (Index wstart = 0; wstart < n_w; ++wstart)
        for (Index off = 0; off < wlen; ++off)
            out.col(wstart).segment(off * d, d) = z.col(wstart + off);
    return out;
}

}  // namespace

WindowClusters fit_window_clusters(const std::vector<const decomposition::VideoTensor*>& videos,
                                   Index k, Index t, const descriptors::PhogConfig& phog,
                                   std::uint64_t seed) {
    if (videos.empty()) throw invalid_input("no videos to cluster");
    if (t < 0) throw invalid_input("t must be >= 0");
    std::vector<Matrix> embeds;
    Index total = 0;
    for (const auto* v : videos) {
        embeds.push_back(window_embeddings(*v, t, phog));
        total += embeds.back().cols();
    }
    Matrix points(embeds.front().rows(), total);
    Index cursor = 0;
    for (const auto& e : embeds) {
        points.middleCols(cursor, e.cols()) = e;
        cursor += e.cols();
    }
    KmeansResult km = kmeans(points, k, 100, seed);
    return {std::move(km.centers), t, phog};
}

std::vector<Index> cluster_keyframes(const WindowClusters& clusters,
                                     const decomposition::VideoTensor& video) {
    const Matrix embeds = window_embeddings(video, clusters.t, clusters.phog);
    const Index n_w = embeds.cols();
    const Index k = clusters.centers.cols();
    std::vector<bool> used(static_cast<std::size_t>(n_w), false);
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(k));
    for (Index j = 0; j < k; ++j) {
        Index best = -1, best_any = 0;
        double best_d = 0.0, best_any_d = 0.0;
        for (Index w = 0; w < n_w; ++w) {
            const double dw = (embeds.col(w) - clusters.centers.col(j)).squaredNorm();
            if (w == 0 || dw < best_any_d) {
                best_any_d = dw;
                best_any = w;
            }
            if (used[static_cast<std::size_t>(w)]) continue;
            if (best < 0 || dw < best_d) {
                best_d = dw;
                best = w;
            }
        }
        // All windows taken: fall back to the overall nearest (duplicate).
        const Index w = best >= 0 ? best : best_any;
        if (best >= 0) used[static_cast<std::size_t>(w)] = true;
        out.push_back(w + clusters.t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<Index>> baseline_kmeans_keyframes(
    const std::vector<const decomposition::VideoTensor*>& class_videos, Index k, Index t,
    const descriptors::PhogConfig& phog, std::uint64_t seed) {
    WindowClusters clusters = fit_window_clusters(class_videos, k, t, phog, seed);
    std::vector<std::vector<Index>> out;
    out.reserve(class_videos.size());
    for (const auto* v : class_videos) out.push_back(cluster_keyframes(clusters, *v));
    return out;
}

SharedDictionary ablation_shared_dictionary(const Matrix& pooled_cuboids,
                                            const features::BankConfig& cfg,
                                            std::uint64_t seed) {
    cfg.validate();
    if (pooled_cuboids.rows() != cfg.delta)
        throw invalid_input("pooled cuboids have the wrong descriptor dimension");
    const Index n_atoms = cfg.n_atoms();
    if (pooled_cuboids.cols() < n_atoms)
        throw invalid_input("pooled training set has " + std::to_string(pooled_cuboids.cols()) +
                            " cuboids, needs " + std::to_string(n_atoms));
    const Index lambda =
        std::min(features::sparsity_for(cfg.sparsity_fraction, n_atoms), n_atoms);
    solvers::KsvdResult res = solvers::ksvd(pooled_cuboids, n_atoms, lambda, cfg.ksvd_iters,
                                            split_seed(seed, "shared"));
    return {std::move(res.dictionary), lambda};
}

Vector shared_descriptor(const decomposition::KeySequenceSet& ks,
                         const SharedDictionary& shared, bool absolute_pooling) {
    if (ks.sequences.empty()) throw invalid_input("no key-sequences to describe");
    Vector out = Vector::Zero(static_cast<Index>(ks.sequences.size()));
    for (std::size_t j = 0; j < ks.sequences.size(); ++j) {
        const Matrix& cuboids = ks.sequences[j].cuboid_descriptors;
        double acc = 0.0;
        for (Index i = 0; i < cuboids.cols(); ++i) {
            solvers::SparseCode code = solvers::omp(shared.dict, cuboids.col(i), shared.lambda);
            acc += absolute_pooling ? code.coefficients.cwiseAbs().sum()
                                    : code.coefficients.sum();
        }
        out[static_cast<Index>(j)] = acc;
    }
    return out;
}

Vector ablation_inter_only(const decomposition::KeySequenceSet& ks,
                           const features::DictionaryBank& bank,
                           const features::ItraConfig& cfg) {
    if (!(cfg.sparsity_fraction > 0.0) || cfg.sparsity_fraction > 1.0)
        throw invalid_input("sparsity_fraction must be in (0, 1]");
    Matrix phi = features::inter_descriptor(ks, bank, bank.lambda_inter(cfg.sparsity_fraction),
                                            cfg.absolute_pooling);
    if (cfg.normalize_blocks)
        for (Index pos = 0; pos < phi.cols(); ++pos) {
            const double pn = phi.col(pos).norm();
            if (pn > 0.0) phi.col(pos) /= pn;
        }
    Vector flat(phi.size());
    for (Index pos = 0; pos < phi.cols(); ++pos)
        flat.segment(pos * phi.rows(), phi.rows()) = phi.col(pos);
    return flat;
}

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truth,
                    Index n_classes) {
    if (predictions.size() != truth.size())
        throw invalid_input("prediction/truth length mismatch");
    if (predictions.empty()) throw invalid_input("nothing to evaluate");
    if (n_classes < 1) throw invalid_input("need at least one class");

    EvalReport r;
    r.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i], t = truth[i];
        if (p < 0 || p >= n_classes || t < 0 || t >= n_classes)
            throw invalid_input("label out of range at position " + std::to_string(i));
        ++r.confusion(t, p);
    }
    r.accuracy = static_cast<double>(r.confusion.trace()) / static_cast<double>(truth.size());
    r.per_class_recall.resize(static_cast<std::size_t>(n_classes), 0.0);
    for (Index c = 0; c < n_classes; ++c) {
        const int row = r.confusion.row(c).sum();
        if (row > 0)
            r.per_class_recall[static_cast<std::size_t>(c)] =
                static_cast<double>(r.confusion(c, c)) / row;
    }
    return r;
}

void write_report_json(const fs::path& path, const EvalReport& report,
                       const std::vector<std::string>& classes) {
    nlohmann::json j;
    j["accuracy"] = report.accuracy;
    j["per_class_recall"] = report.per_class_recall;
    j["classes"] = classes;
    j["config_hash"] = report.config_hash;
    j["seed"] = report.seed;
    nlohmann::json conf = nlohmann::json::array();
    for (Index r = 0; r < report.confusion.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Index c = 0; c < report.confusion.cols(); ++c) row.push_back(report.confusion(r, c));
        conf.push_back(row);
    }
    j["confusion"] = conf;
    std::ofstream out(path);
    if (!out) throw io_error("cannot write report to " + path.string());
    out << j.dump(2) << '\n';
}

void write_confusion_csv(const fs::path& path, const EvalReport& report,
                         const std::vector<std::string>& classes) {
    if (static_cast<Index>(classes.size()) != report.confusion.rows())
        throw invalid_input("class name count does not match the confusion matrix");
    std::ofstream out(path);
    if (!out) throw io_error("cannot write confusion matrix to " + path.string());
    out << "truth/predicted";
    for (const auto& c : classes) out << ',' << c;
    out << '\n';
    for (Index r = 0; r < report.confusion.rows(); ++r) {
        out << classes[static_cast<std::size_t>(r)];
        for (Index c = 0; c < report.confusion.cols(); ++c) out << ',' << report.confusion(r, c);
        out << '\n';
    }
}

std::string frame_method_name(FrameMethod m) {
    switch (m) {
        case FrameMethod::proposed: return "proposed";
        case FrameMethod::uniform: return "uniform";
        case FrameMethod::window_clusters: return "window_clusters";
    }
    return "unknown";
}

std::string descriptor_method_name(DescriptorMethod m) {
    switch (m) {
        case DescriptorMethod::full: return "full";
        case DescriptorMethod::shared_dictionary: return "shared_dictionary";
        case DescriptorMethod::inter_only: return "inter_only";
    }
    return "unknown";
}

EvalReport run_experiment(const Dataset& dataset, const ExperimentConfig& cfg,
                          std::uint64_t seed) {
    dataset.validate();
    const Index c_total = dataset.n_classes();
    const Index k = cfg.decompose.selection.k;
    const Index t = cfg.decompose.selection.t;

    std::vector<std::vector<std::size_t>> train_by_class(static_cast<std::size_t>(c_total));
    std::vector<std::size_t> test_idx;
    for (std::size_t v = 0; v < dataset.videos.size(); ++v) {
        const auto& lv = dataset.videos[v];
        if (lv.split == Split::train)
            train_by_class[static_cast<std::size_t>(lv.class_id)].push_back(v);
        else
            test_idx.push_back(v);
    }
    if (test_idx.empty()) throw invalid_input("dataset has no test videos");

    auto vseed = [&](std::size_t v) {
        return split_seed(seed, "video", static_cast<std::uint64_t>(v));
    };

    // The joint solve reconstructs each video against its reference class's
    // other training frames; cache per-video PHOG columns to assemble those.
    std::vector<Matrix> train_phog(dataset.videos.size());
    if (cfg.frame_method == FrameMethod::proposed)
        for (const auto& idxs : train_by_class)
            for (auto v : idxs)
                train_phog[v] =
                    decomposition::phog_matrix(dataset.videos[v].video, cfg.decompose.phog);

    auto class_frames_excluding = [&](Index cls,
                                      std::optional<std::size_t> skip) -> Matrix {
        Index cols = 0;
        for (auto v : train_by_class[static_cast<std::size_t>(cls)])
            if (!skip || v != *skip) cols += train_phog[v].cols();
        Matrix out(cfg.decompose.phog.dim(), cols);
        Index cursor = 0;
        for (auto v : train_by_class[static_cast<std::size_t>(cls)]) {
            if (skip && v == *skip) continue;
            out.middleCols(cursor, train_phog[v].cols()) = train_phog[v];
            cursor += train_phog[v].cols();
        }
        return out;
    };

    std::vector<WindowClusters> clusters;
    if (cfg.frame_method == FrameMethod::window_clusters) {
        for (Index c = 0; c < c_total; ++c) {
            std::vector<const decomposition::VideoTensor*> vs;
            for (auto v : train_by_class[static_cast<std::size_t>(c)])
                vs.push_back(&dataset.videos[v].video);
            clusters.push_back(fit_window_clusters(
                vs, k, t, cfg.decompose.phog,
                split_seed(seed, "windows", static_cast<std::uint64_t>(c))));
        }
    }

    auto keyseqs_for = [&](std::size_t v, Index ref) -> decomposition::KeySequenceSet {
        const auto& lv = dataset.videos[v];
        switch (cfg.frame_method) {
            case FrameMethod::proposed: {
                std::optional<std::size_t> skip;
                if (lv.split == Split::train && lv.class_id == static_cast<int>(ref)) skip = v;
                return decomposition::decompose(lv.video, class_frames_excluding(ref, skip),
                                                cfg.decompose, static_cast<int>(ref), vseed(v));
            }
            case FrameMethod::uniform: {
                const auto centers = baseline_uniform_keyframes(lv.video.n_frames(), k);
                return decomposition::describe_keysequences(lv.video, centers, cfg.decompose,
                                                            static_cast<int>(ref), vseed(v));
            }
            case FrameMethod::window_clusters: {
                const auto centers =
                    cluster_keyframes(clusters[static_cast<std::size_t>(ref)], lv.video);
                return decomposition::describe_keysequences(lv.video, centers, cfg.decompose,
                                                            static_cast<int>(ref), vseed(v));
            }
        }
        throw invalid_input("unknown frame method");
    };

    // Training pass: each train video decomposed against its own class.
    std::vector<decomposition::KeySequenceSet> train_ks(dataset.videos.size());
    for (Index c = 0; c < c_total; ++c)
        for (auto v : train_by_class[static_cast<std::size_t>(c)])
            train_ks[v] = keyseqs_for(v, c);

    std::optional<features::DictionaryBank> bank;
    std::optional<SharedDictionary> shared;
    if (cfg.descriptor_method == DescriptorMethod::shared_dictionary) {
        Index total = 0;
        for (const auto& idxs : train_by_class)
            for (auto v : idxs)
                for (const auto& seq : train_ks[v].sequences)
                    total += seq.cuboid_descriptors.cols();
        Matrix pooled(cfg.bank.delta, total);
        Index cursor = 0;
        for (const auto& idxs : train_by_class)
            for (auto v : idxs)
                for (const auto& seq : train_ks[v].sequences) {
                    pooled.middleCols(cursor, seq.cuboid_descriptors.cols()) =
                        seq.cuboid_descriptors;
                    cursor += seq.cuboid_descriptors.cols();
                }
        shared = ablation_shared_dictionary(pooled, cfg.bank, seed);
    } else {
        std::vector<std::vector<Matrix>> train_sets(static_cast<std::size_t>(c_total));
        for (Index c = 0; c < c_total; ++c) {
            train_sets[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(k));
            for (Index pos = 0; pos < k; ++pos) {
                Index total = 0;
                for (auto v : train_by_class[static_cast<std::size_t>(c)])
                    total += train_ks[v]
                                 .sequences[static_cast<std::size_t>(pos)]
                                 .cuboid_descriptors.cols();
                Matrix cell(cfg.bank.delta, total);
                Index cursor = 0;
                for (auto v : train_by_class[static_cast<std::size_t>(c)]) {
                    const Matrix& d =
                        train_ks[v].sequences[static_cast<std::size_t>(pos)].cuboid_descriptors;
                    cell.middleCols(cursor, d.cols()) = d;
                    cursor += d.cols();
                }
                train_sets[static_cast<std::size_t>(c)][static_cast<std::size_t>(pos)] =
                    std::move(cell);
            }
        }
        bank = features::learn_dictionary_bank(train_sets, cfg.bank, seed);
    }

    auto descriptor_for = [&](const decomposition::KeySequenceSet& ks, Index ref) -> Vector {
        switch (cfg.descriptor_method) {
            case DescriptorMethod::full:
                return features::itra(ks, *bank, static_cast<int>(ref), cfg.itra).flat;
            case DescriptorMethod::inter_only:
                return ablation_inter_only(ks, *bank, cfg.itra);
            case DescriptorMethod::shared_dictionary:
                return shared_descriptor(ks, *shared, cfg.itra.absolute_pooling);
        }
        throw invalid_input("unknown descriptor method");
    };

    std::vector<Matrix> by_class(static_cast<std::size_t>(c_total));
    for (Index c = 0; c < c_total; ++c) {
        const auto& idxs = train_by_class[static_cast<std::size_t>(c)];
        std::vector<Vector> descs;
        descs.reserve(idxs.size());
        for (auto v : idxs) descs.push_back(descriptor_for(train_ks[v], c));
        Matrix y(descs.front().size(), static_cast<Index>(descs.size()));
        for (std::size_t i = 0; i < descs.size(); ++i) y.col(static_cast<Index>(i)) = descs[i];
        by_class[static_cast<std::size_t>(c)] = std::move(y);
    }
    classifier::ClassifierModel model = classifier::train_classifier(
        by_class, cfg.classifier_mu, cfg.classifier_sparsity_fraction,
        cfg.classifier_ksvd_iters, seed);

    std::vector<int> predictions, truth;
    predictions.reserve(test_idx.size());
    truth.reserve(test_idx.size());
    for (auto v : test_idx) {
        std::vector<Vector> probes;
        probes.reserve(static_cast<std::size_t>(c_total));
        for (Index ref = 0; ref < c_total; ++ref)
            probes.push_back(descriptor_for(keyseqs_for(v, ref), ref));
        const auto result =
            classifier::classify_descriptors(model, probes, cfg.itra.absolute_pooling);
        predictions.push_back(result.label);
        truth.push_back(dataset.videos[v].class_id);
    }

    EvalReport report = evaluate(predictions, truth, c_total);
    report.seed = seed;
    report.config_hash = config::hash(config::to_json(cfg));
    return report;
}

}  // namespace itra::harness
