#include "itra/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace itra::descriptors {

namespace {

constexpr double kPi = std::numbers::pi;

Index pad_up(Index v, Index multiple) {
    return ((v + multiple - 1) / multiple) * multiple;
}

}  // namespace

Index PhogConfig::dim() const {
    Index d = 0;
    for (int l : levels) d += static_cast<Index>(bins) * (Index(1) << (2 * l));
    return d;
}

void PhogConfig::validate() const {
    if (levels.empty()) throw invalid_input("phog needs at least one pyramid level");
    for (int l : levels)
        if (l < 0 || l > 6) throw invalid_input("phog level out of range");
    if (bins < 2) throw invalid_input("phog needs at least 2 bins");
}

Vector phog(const Frame& frame, const PhogConfig& cfg) {
    cfg.validate();
    if (frame.rows() < 2 || frame.cols() < 2)
        throw invalid_input("phog frame must be at least 2x2");
    require_finite(frame, "phog frame");

    const Index h = frame.rows();
    const Index w = frame.cols();
    const double range = cfg.signed_orientations ? 2.0 * kPi : kPi;
    const double bin_width = range / cfg.bins;

    Vector out = Vector::Zero(cfg.dim());
    Index block_offset = 0;
    std::vector<Index> offsets;
    offsets.reserve(cfg.levels.size());
    for (int l : cfg.levels) {
        offsets.push_back(block_offset);
        block_offset += static_cast<Index>(cfg.bins) * (Index(1) << (2 * l));
    }

    for (Index y = 0; y < h; ++y) {
        const Index ym = y > 0 ? y - 1 : 0;
        const Index yp = y + 1 < h ? y + 1 : h - 1;
        for (Index x = 0; x < w; ++x) {
            const Index xm = x > 0 ? x - 1 : 0;
            const Index xp = x + 1 < w ? x + 1 : w - 1;
            const double gx = 0.5 * (frame(y, xp) - frame(y, xm));
            const double gy = 0.5 * (frame(yp, x) - frame(ym, x));
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            double ang = std::atan2(gy, gx);
            if (cfg.signed_orientations) {
                if (ang < 0.0) ang += 2.0 * kPi;
            } else {
                if (ang < 0.0) ang += kPi;
                if (ang >= kPi) ang -= kPi;
            }
            const int bin = std::min(static_cast<int>(ang / bin_width), cfg.bins - 1);

            for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
                const Index g = Index(1) << cfg.levels[li];
                const Index cy = std::min(y * g / h, g - 1);
                const Index cx = std::min(x * g / w, g - 1);
                out(offsets[li] + ((cy * g + cx) * cfg.bins) + bin) += mag;
            }
        }
    }

    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
        const Index len = static_cast<Index>(cfg.bins) * (Index(1) << (2 * cfg.levels[li]));
        const double sum = out.segment(offsets[li], len).sum();
        if (sum > 0.0) out.segment(offsets[li], len) /= sum;
    }
    return out;
}

std::vector<CuboidSpec> sample_cuboids(Index vol_width, Index vol_height, Index vol_depth,
                                       Index cub_width, Index cub_height, Index cub_depth,
                                       Index count, std::uint64_t seed) {
    if (count < 1) throw invalid_input("cuboid count must be >= 1");
    if (cub_width < 1 || cub_height < 1 || cub_depth < 1)
        throw invalid_input("cuboid dimensions must be >= 1");
    if (cub_width > vol_width || cub_height > vol_height || cub_depth > vol_depth)
        throw invalid_input("cuboid larger than the volume");

    Rng rng(seed);
    std::vector<CuboidSpec> specs;
    specs.reserve(static_cast<std::size_t>(count));
    const std::uint64_t rx = static_cast<std::uint64_t>(vol_width - cub_width) + 1;
    const std::uint64_t ry = static_cast<std::uint64_t>(vol_height - cub_height) + 1;
    const std::uint64_t rt = static_cast<std::uint64_t>(vol_depth - cub_depth) + 1;
    for (Index i = 0; i < count; ++i) {
        CuboidSpec s;
        s.x = static_cast<Index>(rng.below(rx));
        s.y = static_cast<Index>(rng.below(ry));
        s.t0 = static_cast<Index>(rng.below(rt));
        s.width = cub_width;
        s.height = cub_height;
        s.depth = cub_depth;
        specs.push_back(s);
    }
    return specs;
}

Hog3dConfig::Hog3dConfig() : axes(icosahedron_face_axes()) {}

Matrix Hog3dConfig::icosahedron_face_axes() {
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    const double q = 1.0 / p;
    Matrix axes(3, 10);
    axes.col(0) << 1, 1, 1;
    axes.col(1) << 1, 1, -1;
    axes.col(2) << 1, -1, 1;
    axes.col(3) << 1, -1, -1;
    axes.col(4) << 0, q, p;
    axes.col(5) << 0, q, -p;
    axes.col(6) << q, p, 0;
    axes.col(7) << q, -p, 0;
    axes.col(8) << p, 0, q;
    axes.col(9) << p, 0, -q;
    for (Index c = 0; c < axes.cols(); ++c) axes.col(c).normalize();
    return axes;
}

Matrix Hog3dConfig::icosahedron_vertex_axes() {
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    Matrix axes(3, 6);
    axes.col(0) << 0, 1, p;
    axes.col(1) << 0, 1, -p;
    axes.col(2) << 1, p, 0;
    axes.col(3) << 1, -p, 0;
    axes.col(4) << p, 0, 1;
    axes.col(5) << p, 0, -1;
    for (Index c = 0; c < axes.cols(); ++c) axes.col(c).normalize();
    return axes;
}

Index Hog3dConfig::dim() const {
    return axes.cols() * cell_grid[0] * cell_grid[1] * cell_grid[2];
}

void Hog3dConfig::validate() const {
    for (Index g : cell_grid)
        if (g < 1) throw invalid_input("cell grid entries must be >= 1");
    if (axes.rows() != 3 || axes.cols() < 1) throw invalid_input("axes must be 3 x n");
    for (Index c = 0; c < axes.cols(); ++c)
        if (std::abs(axes.col(c).norm() - 1.0) > 1e-9)
            throw invalid_input("orientation axes must be unit vectors");
    if (clip < 0.0) throw invalid_input("clip must be >= 0");
}

Vector hog3d(const std::vector<Frame>& cuboid, const Hog3dConfig& cfg) {
    cfg.validate();
    if (cuboid.size() < 2) throw invalid_input("hog3d needs at least 2 frames");
    const Index h = cuboid.front().rows();
    const Index w = cuboid.front().cols();
    if (h < 1 || w < 1) throw invalid_input("hog3d frames must be non-empty");
    for (const auto& f : cuboid) {
        if (f.rows() != h || f.cols() != w)
            throw invalid_input("hog3d frames must share one size");
        require_finite(f, "hog3d frame");
    }

    const Index d = static_cast<Index>(cuboid.size());
    const Index cx = cfg.cell_grid[0];
    const Index cy = cfg.cell_grid[1];
    const Index ct = cfg.cell_grid[2];
    const Index wp = pad_up(w, cx), hp = pad_up(h, cy), dp = pad_up(d, ct);
    const Index sx = wp / cx, sy = hp / cy, st = dp / ct;
    const Index n_axes = cfg.axes.cols();

    // Edge-replicated view of the padded volume.
    auto at = [&](Index t, Index y, Index x) -> double {
        return cuboid[static_cast<std::size_t>(std::min(t, d - 1))](std::min(y, h - 1),
                                                                    std::min(x, w - 1));
    };

    Vector out = Vector::Zero(cfg.dim());
    for (Index t = 0; t < dp; ++t) {
        const Index tm = t > 0 ? t - 1 : 0;
        const Index tp = t + 1 < dp ? t + 1 : dp - 1;
        const Index ti = t / st;
        for (Index y = 0; y < hp; ++y) {
            const Index ym = y > 0 ? y - 1 : 0;
            const Index yp = y + 1 < hp ? y + 1 : hp - 1;
            const Index yi = y / sy;
            for (Index x = 0; x < wp; ++x) {
                const Index xm = x > 0 ? x - 1 : 0;
                const Index xp = x + 1 < wp ? x + 1 : wp - 1;
                const double gx = 0.5 * (at(t, y, xp) - at(t, y, xm));
                const double gy = 0.5 * (at(t, yp, x) - at(t, ym, x));
                const double gt = 0.5 * (at(tp, y, x) - at(tm, y, x));
                const double mag = std::sqrt(gx * gx + gy * gy + gt * gt);
                if (mag == 0.0) continue;
                Index best_axis = 0;
                double best_dot = -1.0;
                for (Index a = 0; a < n_axes; ++a) {
                    const double dot = std::abs(cfg.axes(0, a) * gx + cfg.axes(1, a) * gy +
                                                cfg.axes(2, a) * gt);
                    if (dot > best_dot) {
                        best_dot = dot;
                        best_axis = a;
                    }
                }
                const Index xi = x / sx;
                out(((ti * cy + yi) * cx + xi) * n_axes + best_axis) += mag;
            }
        }
    }
    if (cfg.clip > 0.0) out = out.cwiseMin(cfg.clip);
    return out;
}

Matrix filter_and_normalize(const Matrix& descs, double threshold, ColumnNorm norm) {
    if (threshold < 0.0) throw invalid_input("filter threshold must be >= 0");
    require_finite(descs, "descriptor matrix");
    std::vector<Index> keep;
    for (Index c = 0; c < descs.cols(); ++c)
        if (descs.col(c).norm() > threshold) keep.push_back(c);
    if (keep.empty()) throw empty_result("every descriptor column was filtered out");

    Matrix out(descs.rows(), static_cast<Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        Vector col = descs.col(keep[k]);
        const double scale =
            norm == ColumnNorm::l2 ? col.norm() : col.cwiseAbs().sum();
        out.col(static_cast<Index>(k)) = col / scale;
    }
    return out;
}

double auto_threshold(const Matrix& descs, double drop_fraction) {
    if (drop_fraction < 0.0 || drop_fraction >= 1.0)
        throw invalid_input("drop fraction must be in [0, 1)");
    if (descs.cols() == 0) return 0.0;
    const auto k = static_cast<std::size_t>(drop_fraction * static_cast<double>(descs.cols()));
    if (k == 0) return 0.0;
    std::vector<double> norms(static_cast<std::size_t>(descs.cols()));
    for (Index c = 0; c < descs.cols(); ++c)
        norms[static_cast<std::size_t>(c)] = descs.col(c).norm();
    std::nth_element(norms.begin(), norms.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     norms.end());
    return norms[k - 1];
}

}  // namespace itra::descriptors
