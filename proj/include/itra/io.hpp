#pragma once

#include "itra/solvers.hpp"
#include "itra/types.hpp"

#include <filesystem>
#include <iosfwd>

namespace itra::io {

// All binary formats are little-endian with a 4-byte ASCII magic and a u32
// version. Matrices are stored column-major as f64 unless noted.

// "MATX": u32 version=1, u32 rows, u32 cols, rows*cols f64.
void save_matrix(std::ostream& out, const Matrix& m);
Matrix load_matrix(std::istream& in);
void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

// "DICT": u32 version=1, u32 m, u32 n_a, m*n_a f64, then two u32 meta fields
// (class id, temporal position); 0xFFFFFFFF in both marks absent meta.
void save_dictionary(std::ostream& out, const solvers::Dictionary& d);
solvers::Dictionary load_dictionary(std::istream& in);
void save_dictionary(const std::filesystem::path& path, const solvers::Dictionary& d);
solvers::Dictionary load_dictionary(const std::filesystem::path& path);

// "VIDF": u32 version=1, u32 n_frames, u32 height, u32 width, then
// n_frames*height*width f32 frame-major (each frame column-major). Frames are
// converted to f64 on load.
void save_video(std::ostream& out, const std::vector<Frame>& frames);
std::vector<Frame> load_video(std::istream& in);
void save_video(const std::filesystem::path& path, const std::vector<Frame>& frames);
std::vector<Frame> load_video(const std::filesystem::path& path);

// PGM (P5, maxval 255). Intensities map linearly between [0,1] and [0,255];
// out-of-range values are clamped on save.
void save_pgm(const std::filesystem::path& path, const Frame& frame);
Frame load_pgm(const std::filesystem::path& path);

// "KSEQ": u32 version=1, u32 K, u32 t, K u32 centers, then one MATX block per
// key-sequence (its cuboid-descriptor matrix).
struct StoredKeySequences {
    std::uint32_t t = 0;
    std::vector<std::uint32_t> centers;
    std::vector<Matrix> blocks;
};
void save_keysequences(const std::filesystem::path& path, const StoredKeySequences& ks);
StoredKeySequences load_keysequences(const std::filesystem::path& path);

}  // namespace itra::io
