#include "itra/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace itra::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");
static_assert(std::numeric_limits<double>::is_iec559);
static_assert(std::numeric_limits<float>::is_iec559);

constexpr std::uint32_t kAbsentMeta = 0xFFFFFFFFu;

void write_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw io_error("write failed");
}

void read_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw io_error("unexpected end of stream");
}

void write_u32(std::ostream& out, std::uint32_t v) { write_bytes(out, &v, 4); }

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    read_bytes(in, &v, 4);
    return v;
}

void write_magic(std::ostream& out, const char magic[4]) { write_bytes(out, magic, 4); }

void expect_magic(std::istream& in, const char magic[4], const char* what) {
    char buf[4];
    read_bytes(in, buf, 4);
    if (std::memcmp(buf, magic, 4) != 0)
        throw io_error(std::string("bad magic, expected ") + what);
}

void expect_version(std::istream& in, std::uint32_t want, const char* what) {
    const std::uint32_t v = read_u32(in);
    if (v != want)
        throw io_error(std::string("unsupported ") + what + " version " + std::to_string(v));
}

std::uint32_t checked_u32(Index v, const char* what) {
    if (v < 0 || static_cast<std::uint64_t>(v) > 0xFFFFFFFFull)
        throw invalid_input(std::string(what) + " out of range for serialization");
    return static_cast<std::uint32_t>(v);
}

void write_f64_block(std::ostream& out, const Matrix& m) {
    if (m.size() > 0) write_bytes(out, m.data(), static_cast<std::size_t>(m.size()) * 8);
}

Matrix read_f64_block(std::istream& in, std::uint32_t rows, std::uint32_t cols) {
    Matrix m(rows, cols);
    if (m.size() > 0) read_bytes(in, m.data(), static_cast<std::size_t>(m.size()) * 8);
    return m;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open for writing: " + path.string());
    return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open for reading: " + path.string());
    return f;
}

}  // namespace

void save_matrix(std::ostream& out, const Matrix& m) {
    write_magic(out, "MATX");
    write_u32(out, 1);
    write_u32(out, checked_u32(m.rows(), "rows"));
    write_u32(out, checked_u32(m.cols(), "cols"));
    write_f64_block(out, m);
}

Matrix load_matrix(std::istream& in) {
    expect_magic(in, "MATX", "MATX");
    expect_version(in, 1, "MATX");
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    return read_f64_block(in, rows, cols);
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
    auto f = open_out(path);
    save_matrix(f, m);
}

Matrix load_matrix(const std::filesystem::path& path) {
    auto f = open_in(path);
    return load_matrix(f);
}

void save_dictionary(std::ostream& out, const solvers::Dictionary& d) {
    write_magic(out, "DICT");
    write_u32(out, 1);
    write_u32(out, checked_u32(d.atoms.rows(), "dictionary dim"));
    write_u32(out, checked_u32(d.atoms.cols(), "dictionary atoms"));
    write_f64_block(out, d.atoms);
    if (d.meta) {
        write_u32(out, d.meta->class_id);
        write_u32(out, d.meta->temporal_position);
    } else {
        write_u32(out, kAbsentMeta);
        write_u32(out, kAbsentMeta);
    }
}

solvers::Dictionary load_dictionary(std::istream& in) {
    expect_magic(in, "DICT", "DICT");
    expect_version(in, 1, "DICT");
    const std::uint32_t m = read_u32(in);
    const std::uint32_t n_a = read_u32(in);
    solvers::Dictionary d;
    d.atoms = read_f64_block(in, m, n_a);
    const std::uint32_t cls = read_u32(in);
    const std::uint32_t pos = read_u32(in);
    if (cls != kAbsentMeta || pos != kAbsentMeta)
        d.meta = solvers::DictionaryMeta{cls, pos};
    return d;
}

void save_dictionary(const std::filesystem::path& path, const solvers::Dictionary& d) {
    auto f = open_out(path);
    save_dictionary(f, d);
}

solvers::Dictionary load_dictionary(const std::filesystem::path& path) {
    auto f = open_in(path);
    return load_dictionary(f);
}

void save_video(std::ostream& out, const std::vector<Frame>& frames) {
    if (frames.empty()) throw invalid_input("cannot save an empty video");
    const Index h = frames.front().rows();
    const Index w = frames.front().cols();
    if (h <= 0 || w <= 0) throw invalid_input("frames must be non-empty");
    for (const auto& f : frames)
        if (f.rows() != h || f.cols() != w)
            throw invalid_input("all frames must share one size");
    write_magic(out, "VIDF");
    write_u32(out, 1);
    write_u32(out, checked_u32(static_cast<Index>(frames.size()), "frame count"));
    write_u32(out, checked_u32(h, "height"));
    write_u32(out, checked_u32(w, "width"));
    std::vector<float> buf(static_cast<std::size_t>(h * w));
    for (const auto& f : frames) {
        Eigen::MatrixXf ff = f.cast<float>();
        std::memcpy(buf.data(), ff.data(), buf.size() * 4);
        write_bytes(out, buf.data(), buf.size() * 4);
    }
}

std::vector<Frame> load_video(std::istream& in) {
    expect_magic(in, "VIDF", "VIDF");
    expect_version(in, 1, "VIDF");
    const std::uint32_t n = read_u32(in);
    const std::uint32_t h = read_u32(in);
    const std::uint32_t w = read_u32(in);
    if (n == 0 || h == 0 || w == 0) throw io_error("degenerate video header");
    std::vector<Frame> frames;
    frames.reserve(n);
    Eigen::MatrixXf ff(h, w);
    for (std::uint32_t i = 0; i < n; ++i) {
        read_bytes(in, ff.data(), static_cast<std::size_t>(ff.size()) * 4);
        frames.push_back(ff.cast<double>());
    }
    return frames;
}

void save_video(const std::filesystem::path& path, const std::vector<Frame>& frames) {
    auto f = open_out(path);
    save_video(f, frames);
}

std::vector<Frame> load_video(const std::filesystem::path& path) {
    auto f = open_in(path);
    return load_video(f);
}

void save_pgm(const std::filesystem::path& path, const Frame& frame) {
    if (frame.rows() <= 0 || frame.cols() <= 0) throw invalid_input("empty frame");
    auto f = open_out(path);
    f << "P5\n" << frame.cols() << " " << frame.rows() << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(frame.cols()));
    for (Index y = 0; y < frame.rows(); ++y) {
        for (Index x = 0; x < frame.cols(); ++x) {
            const double v = std::clamp(frame(y, x), 0.0, 1.0);
            row[static_cast<std::size_t>(x)] =
                static_cast<unsigned char>(std::lround(v * 255.0));
        }
        write_bytes(f, row.data(), row.size());
    }
}

Frame load_pgm(const std::filesystem::path& path) {
    auto f = open_in(path);
    std::string magic;
    f >> magic;
    if (magic != "P5") throw io_error("not a P5 PGM: " + path.string());
    // Skip whitespace and '#' comment lines between header tokens.
    auto next_int = [&f, &path]() -> long {
        int c = f.peek();
        while (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#') {
            if (c == '#') {
                std::string line;
                std::getline(f, line);
            } else {
                f.get();
            }
            c = f.peek();
        }
        long v = -1;
        f >> v;
        if (!f || v < 0) throw io_error("bad PGM header: " + path.string());
        return v;
    };
    const long w = next_int();
    const long h = next_int();
    const long maxval = next_int();
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw io_error("unsupported PGM header: " + path.string());
    f.get();  // single whitespace byte before raster
    std::vector<unsigned char> raster(static_cast<std::size_t>(w * h));
    read_bytes(f, raster.data(), raster.size());
    Frame frame(h, w);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x)
            frame(y, x) = raster[static_cast<std::size_t>(y * w + x)] * scale;
    return frame;
}

void save_keysequences(const std::filesystem::path& path, const StoredKeySequences& ks) {
    if (ks.centers.size() != ks.blocks.size())
        throw invalid_input("center/block count mismatch");
    auto f = open_out(path);
    write_magic(f, "KSEQ");
    write_u32(f, 1);
    write_u32(f, checked_u32(static_cast<Index>(ks.blocks.size()), "K"));
    write_u32(f, ks.t);
    for (std::uint32_t c : ks.centers) write_u32(f, c);
    for (const auto& b : ks.blocks) save_matrix(f, b);
}

StoredKeySequences load_keysequences(const std::filesystem::path& path) {
    auto f = open_in(path);
    expect_magic(f, "KSEQ", "KSEQ");
    expect_version(f, 1, "KSEQ");
    const std::uint32_t k = read_u32(f);
    StoredKeySequences ks;
    ks.t = read_u32(f);
    ks.centers.resize(k);
    for (std::uint32_t i = 0; i < k; ++i) ks.centers[i] = read_u32(f);
    ks.blocks.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) ks.blocks.push_back(load_matrix(f));
    return ks;
}

}  // namespace itra::io
