#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>
#include <string>

#include "core/image.hpp"
#include "core/rng.hpp"

namespace test_helpers {

inline wavereg::ImageGrid random_image(int w, int h, std::uint64_t seed, double lo = 0.0,
                                       double hi = 255.0) {
    wavereg::ImageGrid img = wavereg::ImageGrid::zeros(w, h, 8);
    wavereg::Rng rng(seed);
    for (double& v : img.samples)
        v = rng.uniform(lo, hi);
    return img;
}

inline wavereg::ImageGrid constant_image(int w, int h, double value) {
    wavereg::ImageGrid img = wavereg::ImageGrid::zeros(w, h, 8);
    for (double& v : img.samples)
        v = value;
    return img;
}

// Shaded disc with an anti-aliased rim; intensity shading breaks the point
// symmetry that would otherwise make shift statistics degenerate.
inline wavereg::ImageGrid disc_image(int w, int h, double cx, double cy, double r) {
    wavereg::ImageGrid img = wavereg::ImageGrid::zeros(w, h, 8);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double d = std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
            const double cover = std::min(1.0, std::max(0.0, r + 0.5 - d));
            const double shade = 1.0 + 0.35 * (x - cx) / r + 0.2 * (y - cy) / r;
            img.at(x, y) = 160.0 * cover * shade;
        }
    return img;
}

inline wavereg::ImageGrid shift_zero_fill(const wavereg::ImageGrid& img, int dx, int dy) {
    wavereg::ImageGrid out = wavereg::ImageGrid::zeros(img.width, img.height, img.source_depth);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int sx = x - dx, sy = y - dy;
            if (sx >= 0 && sx < img.width && sy >= 0 && sy < img.height)
                out.at(x, y) = img.at(sx, sy);
        }
    return out;
}

// Unique scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = (std::filesystem::temp_directory_path() /
                 ("wavereg_" + tag + "_" + std::to_string(::getpid())))
                    .string();
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return path_ + "/" + name; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace test_helpers
