#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/wavelet.hpp"

namespace wavereg {

struct SiftConfig {
    int layers_per_octave = 3;
    double sigma0 = 1.6;
    double contrast_threshold = 0.03;  // on [0,1]-normalized intensities
    double edge_ratio = 10.0;          // Hessian eigenvalue ratio limit
    bool upsample = true;              // start one octave above the input
    int border = 8;                    // keypoints closer to the border are dropped
};

struct Keypoint {
    double x = 0.0;          // subpixel coordinates in the input frame
    double y = 0.0;
    double sigma = 0.0;      // detection scale in input pixels
    double orientation = 0.0;  // radians in [0, 2pi)
    double response = 0.0;   // |DoG| at the refined extremum
    int octave = 0;
    int layer = 0;
};

struct Descriptor {
    std::array<double, 128> values{};
    std::optional<std::array<double, 12>> wavelet_signature;  // 6 orientations x 2 levels
};

struct Match {
    std::size_t source_index = 0;
    std::size_t target_index = 0;
    double distance = 0.0;
    double ratio = 0.0;  // nearest / second-nearest; 0 when no second neighbor exists
};

std::vector<Keypoint> detect_keypoints(const ImageGrid& img, const SiftConfig& cfg);
std::vector<Descriptor> compute_descriptors(const ImageGrid& img,
                                            const std::vector<Keypoint>& kps,
                                            const SiftConfig& cfg);

struct SiftFeatures {
    std::vector<Keypoint> keypoints;
    std::vector<Descriptor> descriptors;
};

// Detection plus description over one shared scale space.
SiftFeatures detect_and_describe(const ImageGrid& img, const SiftConfig& cfg);

// Keep the strongest keep_fraction of keypoints by total oriented DT-CWT
// magnitude at the level nearest log2(sigma). Relative input order survives.
std::vector<Keypoint> enhance_keypoints(const std::vector<Keypoint>& kps,
                                        const ComplexDecomposition& dec, double keep_fraction);

// Mean oriented magnitudes over an 8x8 coefficient-spaced neighborhood at two
// adjacent levels, unit-normalized. Attached in place.
void attach_wavelet_signatures(std::vector<Descriptor>& descs, const std::vector<Keypoint>& kps,
                               const ComplexDecomposition& dec);

// Nearest-neighbor matching on d = alpha*d(values) + (1-alpha)*d(signature),
// Lowe ratio test, then mutual-best filtering.
std::vector<Match> match_descriptors(const std::vector<Descriptor>& a,
                                     const std::vector<Descriptor>& b,
                                     double alpha, double ratio_max);

// CSV surfaces: keypoints+descriptors as
// x,y,sigma,orientation,response,v0..v127[,w0..w11]; matches as
// src_idx,dst_idx,distance,ratio.
void write_features_csv(const std::vector<Keypoint>& kps, const std::vector<Descriptor>& descs,
                        const std::string& path);
void write_matches_csv(const std::vector<Match>& matches, const std::string& path);

}  // namespace wavereg
