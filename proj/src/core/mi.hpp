#pragma once

#include <vector>

#include "core/image.hpp"
#include "core/transform.hpp"

namespace wavereg {

struct JointHistogram {
    int bins = 0;
    std::vector<double> counts;  // bins x bins, row = a bin, col = b bin
    double total = 0.0;

    double at(int i, int j) const { return counts[static_cast<std::size_t>(i) * bins + j]; }
    std::vector<double> marginal_a() const;
    std::vector<double> marginal_b() const;
};

// Joint intensity histogram over the valid overlap; each image is linearly
// binned over its own observed min-max there.
JointHistogram joint_histogram(const ImageGrid& a, const ImageGrid& b, const Mask* mask, int bins);

// H(A) + H(B) - H(A,B) in nats, with 0 log 0 := 0.
double mutual_information(const ImageGrid& a, const ImageGrid& b, const Mask* mask, int bins);

double entropy_nats(const std::vector<double>& counts, double total);

enum class PyramidMode { none, gaussian, wavelet_ll };

PyramidMode pyramid_mode_from_name(const std::string& name);
const char* pyramid_mode_name(PyramidMode mode);

// level 0 is the original image; each further level halves the dimensions.
std::vector<ImageGrid> build_pyramid(const ImageGrid& img, int levels, PyramidMode mode);

struct MiConfig {
    int bins = 64;
    int levels = 3;                 // ignored when pyramid == none
    PyramidMode pyramid = PyramidMode::none;
    TransformKind model = TransformKind::translation;
    int max_sweeps = 50;
    double tol_translation = 1e-3;  // px
    double tol_rotation = 1e-4;     // rad
    double tol_scale = 1e-4;        // log-scale / shear units
};

struct MiResult {
    TransformModel transform;  // slave -> master
    double mi = 0.0;           // at the finest level
    int sweeps = 0;
    std::vector<double> trace;  // accepted objective values, ascending within each level
};

MiResult register_mi(const ImageGrid& master, const ImageGrid& slave, const MiConfig& cfg);

}  // namespace wavereg
