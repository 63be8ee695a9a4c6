#pragma once

#include <utility>
#include <vector>

#include "core/image.hpp"
#include "core/transform.hpp"

namespace wavereg {

// Uniform-weight isotropic Gaussian mixture over 2D points.
struct PointSet {
    std::vector<Point> points;
    double sigma = 1.0;  // shared kernel bandwidth, pixels
};

// Closed-form integral of (f - g)^2 for the two mixtures.
double gmm_l2_distance(const PointSet& a, const PointSet& b);

enum class PointModel { rigid, affine };

// L2 objective and its analytic gradient for a parameter vector:
// rigid  -> (tx, ty, theta), rotation about the centroid of `a`
// affine -> (m11, m12, m21, m22, tx, ty) about the centroid of `a`
// Exposed for the mandatory finite-difference check.
double pointset_objective(const std::vector<double>& params, PointModel model,
                          const PointSet& a, const PointSet& b, double sigma,
                          std::vector<double>* gradient);

struct AnnealConfig {
    double sigma_hi_frac = 0.25;  // fraction of the joint cloud diagonal
    double sigma_decay = 0.7;
    double sigma_lo = 2.0;     // pixels
    int steps_per_stage = 100;
};

TransformModel register_pointset(const PointSet& a, const PointSet& b, PointModel model,
                                 const AnnealConfig& cfg);

struct ExtractConfig {
    int cp_level = 2;
    double cp_percentile = 95.0;
    int max_points = 150;
    bool use_dtcwt = false;  // modulus maxima over DT-CWT magnitudes instead of Haar
    bool prune = true;
    double min_ncc = 0.7;    // 11x11 neighborhood correlation threshold
};

// Control-point clouds for both images, with optional best-pair NCC pruning of
// the slave cloud. Errors when fewer than 3 points survive on either side.
std::pair<PointSet, PointSet> extract_pointsets(const ImageGrid& master, const ImageGrid& slave,
                                                const ExtractConfig& cfg);

// CSV `x,y` with a header line.
void write_pointset_csv(const PointSet& ps, const std::string& path);
PointSet read_pointset_csv(const std::string& path);

}  // namespace wavereg
