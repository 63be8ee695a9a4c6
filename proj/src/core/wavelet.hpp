#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "core/image.hpp"

namespace wavereg {

struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }

    static Grid zeros(int rows, int cols) {
        return Grid{rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0)};
    }
};

// Orthonormal 2D Haar pyramid. Odd dimensions are edge-padded to even before
// each level; the pre-pad dimensions are recorded so the inverse can crop.
struct WaveletDecomposition {
    struct Level {
        Grid lh;  // high-pass along y (horizontal features)
        Grid hl;  // high-pass along x (vertical features)
        Grid hh;
        int orig_rows = 0;
        int orig_cols = 0;
    };
    int levels = 0;
    int source_depth = 8;
    std::vector<Level> detail;  // detail[0] is level 1
    Grid ll;                    // deepest approximation
};

WaveletDecomposition dwt_haar(const ImageGrid& img, int levels);
ImageGrid idwt_haar(const WaveletDecomposition& dec);

struct ComplexGrid {
    int rows = 0;
    int cols = 0;
    std::vector<std::complex<double>> v;

    std::complex<double> at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    std::complex<double>& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
};

// Dual-tree complex wavelet decomposition: six oriented complex subbands per
// level (nominal orientations near +-15, +-45, +-75 degrees), plus the four
// row/col tree-combination low-pass grids at the deepest level.
struct ComplexDecomposition {
    int levels = 0;
    int image_width = 0;
    int image_height = 0;
    std::vector<std::array<ComplexGrid, 6>> bands;  // bands[k] is level k+1
    std::array<Grid, 4> lowpass;                    // tree combos aa, ab, ba, bb
};

ComplexDecomposition dtcwt(const ImageGrid& img, int levels);

struct ControlPoint {
    double x = 0.0;  // full-resolution frame
    double y = 0.0;
    double modulus = 0.0;
    int level = 0;
};

// Strict 8-neighborhood maxima of the Haar detail modulus at the given level,
// above the given percentile of all moduli there. Sorted by modulus
// descending, ties by (y, x) ascending.
std::vector<ControlPoint> wavelet_control_points(const ImageGrid& img, int level,
                                                 double threshold_percentile);

// Same maxima logic over the aggregate 6-band DT-CWT magnitude.
std::vector<ControlPoint> dtcwt_control_points(const ImageGrid& img, int level,
                                               double threshold_percentile);

// Center of the image block a level-l coefficient covers.
inline double coefficient_center(int index, int level) {
    return static_cast<double>(index) * (1 << level) + ((1 << level) - 1) / 2.0;
}

// Relative per-level change of detail magnitudes between two decompositions
// of identical structure: sum(| |b| - |a| |) / sum(|a|). The aligned
// comparison is what exposes shift variance; totals cancel it out.
double haar_shift_response(const WaveletDecomposition& a, const WaveletDecomposition& b, int level);
double dtcwt_shift_response(const ComplexDecomposition& a, const ComplexDecomposition& b, int level);

// Bilinear sample of one band's magnitude at full-resolution coordinates.
double sample_band_magnitude(const ComplexGrid& band, int level, double x, double y);

// Inspection output: per-subband PGMs (rescaled to 8 bits) plus a CSV manifest
// of the true coefficient ranges.
void dump_decomposition(const ImageGrid& img, const std::string& type, int levels,
                        const std::string& out_prefix);

void write_control_points_csv(const std::vector<ControlPoint>& points, const std::string& path);

}  // namespace wavereg
