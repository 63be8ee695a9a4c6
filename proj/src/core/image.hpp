#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/transform.hpp"

namespace wavereg {

// Intensities are kept real-valued whatever the file depth; quantization
// happens only when a file is written.
struct ImageGrid {
    int width = 0;
    int height = 0;
    int source_depth = 8;  // bits per sample of the origin file (8 or 16)
    std::vector<double> samples;  // row-major, width * height

    double at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
    double range_max() const { return source_depth > 8 ? 65535.0 : 255.0; }
    std::size_t size() const { return samples.size(); }

    static ImageGrid zeros(int width, int height, int source_depth = 8);
};

struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> valid;  // nonzero = valid

    bool at(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { valid[static_cast<std::size_t>(y) * width + x] = v ? 255 : 0; }
    std::size_t count_valid() const;

    static Mask all_valid(int width, int height);
};

ImageGrid load_pgm(const std::string& path);
void save_pgm8(const ImageGrid& img, const std::string& path);  // clamp + round to [0,255]
void save_mask_pgm(const Mask& mask, const std::string& path);  // P5 with 0/255

double interpolate_bilinear(const ImageGrid& img, double x, double y);

struct WarpResult {
    ImageGrid image;
    Mask mask;
};

// Inverse-mapping warp: output pixel p takes img(t^{-1}(p)); the mask marks
// pixels whose preimage fell inside the source.
WarpResult warp(const ImageGrid& img, const TransformModel& t, int out_width, int out_height);

ImageGrid degrade(const ImageGrid& img, int factor);  // block mean, floor(dim/factor)
Mask degrade_mask(const Mask& mask, int factor);      // block valid iff fully valid

struct SyntheticPairSpec {
    TransformModel ground_truth;  // maps slave coordinates to master coordinates (full resolution)
    double noise_sigma = 0.0;     // intensity standard deviation
    double intensity_gamma = 1.0; // monotone remap exponent
    int degrade_factor = 1;
    std::uint64_t seed = 0;
};

struct SyntheticPair {
    ImageGrid master;
    ImageGrid slave;
    Mask slave_mask;
    TransformModel truth;  // slave -> master in the emitted (possibly degraded) frames
};

SyntheticPair make_synthetic_pair(const ImageGrid& img, const SyntheticPairSpec& spec);

// Held-out evaluation grid: n*n source points over the inner 80% of a
// slave-sized frame, destinations mapped by the given transform.
std::vector<Correspondence> checkpoint_grid(const TransformModel& truth,
                                            int slave_width, int slave_height, int n);

// Seeded procedural texture (value-noise octaves plus hard-edged shapes);
// stands in for the unavailable satellite scenes.
ImageGrid make_test_image(int width, int height, std::uint64_t seed);

}  // namespace wavereg
