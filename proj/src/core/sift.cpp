#include "core/sift.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "core/error.hpp"

namespace wavereg {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

int reflect_idx(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -1 - i;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

ImageGrid gaussian_blur(const ImageGrid& img, double sigma) {
    if (sigma <= 0.0)
        return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.5 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += kernel[static_cast<std::size_t>(k + radius)];
    }
    for (double& v : kernel)
        v /= sum;

    ImageGrid tmp = ImageGrid::zeros(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       img.at(reflect_idx(x + k, img.width), y);
            tmp.at(x, y) = acc;
        }
    ImageGrid out = ImageGrid::zeros(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       tmp.at(x, reflect_idx(y + k, img.height));
            out.at(x, y) = acc;
        }
    return out;
}

ImageGrid upsample2(const ImageGrid& img) {
    ImageGrid out = ImageGrid::zeros(img.width * 2, img.height * 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = interpolate_bilinear(img, std::min(x * 0.5, img.width - 1.0),
                                                std::min(y * 0.5, img.height - 1.0));
    return out;
}

ImageGrid downsample2(const ImageGrid& img) {
    ImageGrid out = ImageGrid::zeros(img.width / 2, img.height / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = img.at(2 * x, 2 * y);
    return out;
}

struct Pyramid {
    struct Octave {
        std::vector<ImageGrid> gauss;  // layers_per_octave + 3
        std::vector<ImageGrid> dog;    // layers_per_octave + 2
    };
    std::vector<Octave> octaves;
    double base_scale = 1.0;  // input pixels per octave-0 pixel (0.5 when upsampled)
    int layers = 3;
    double sigma0 = 1.6;

    double octave_scale(int o) const { return base_scale * (1 << o); }
    // scale relative to the octave's own pixel grid
    double layer_sigma(double layer) const {
        return sigma0 * std::pow(2.0, layer / layers);
    }
};

Pyramid build_pyramid(const ImageGrid& img, const SiftConfig& cfg) {
    require(std::min(img.width, img.height) >= 32, ErrorCode::invalid_argument,
            "image too small for keypoint detection (min dimension 32)");
    require(cfg.layers_per_octave >= 1 && cfg.sigma0 > 0.5, ErrorCode::invalid_argument,
            "invalid scale-space configuration");

    ImageGrid work = ImageGrid::zeros(img.width, img.height);
    const double inv_range = 1.0 / img.range_max();
    for (std::size_t i = 0; i < img.size(); ++i)
        work.samples[i] = img.samples[i] * inv_range;

    double assumed_blur = 0.5;  // nominal camera blur of the input
    if (cfg.upsample) {
        work = upsample2(work);
        assumed_blur = 1.0;
    }

    Pyramid pyr;
    pyr.base_scale = cfg.upsample ? 0.5 : 1.0;
    pyr.layers = cfg.layers_per_octave;
    pyr.sigma0 = cfg.sigma0;

    const int s = cfg.layers_per_octave;
    const double k = std::pow(2.0, 1.0 / s);
    const int min_dim = 2 * cfg.border + 8;
    int n_octaves = 1;
    for (int d = std::min(work.width, work.height) / 2; d >= min_dim; d /= 2)
        ++n_octaves;

    ImageGrid base = gaussian_blur(work, std::sqrt(std::max(
        cfg.sigma0 * cfg.sigma0 - assumed_blur * assumed_blur, 0.01)));

    for (int o = 0; o < n_octaves; ++o) {
        Pyramid::Octave oct;
        oct.gauss.push_back(o == 0 ? std::move(base)
                                   : downsample2(pyr.octaves.back().gauss[static_cast<std::size_t>(s)]));
        double prev_sigma = cfg.sigma0;
        for (int i = 1; i < s + 3; ++i) {
            const double cur_sigma = prev_sigma * k;
            const double delta = std::sqrt(cur_sigma * cur_sigma - prev_sigma * prev_sigma);
            oct.gauss.push_back(gaussian_blur(oct.gauss.back(), delta));
            prev_sigma = cur_sigma;
        }
        for (int i = 0; i < s + 2; ++i) {
            ImageGrid d = ImageGrid::zeros(oct.gauss[0].width, oct.gauss[0].height);
            for (std::size_t p = 0; p < d.size(); ++p)
                d.samples[p] = oct.gauss[static_cast<std::size_t>(i + 1)].samples[p] -
                               oct.gauss[static_cast<std::size_t>(i)].samples[p];
            oct.dog.push_back(std::move(d));
        }
        pyr.octaves.push_back(std::move(oct));
    }
    return pyr;
}

// 3x3 linear solve by Gaussian elimination with partial pivoting.
bool solve3(double A[3][3], double b[3], double x[3]) {
    int piv[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int best = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[piv[r]][col]) > std::abs(A[piv[best]][col]))
                best = r;
        std::swap(piv[col], piv[best]);
        const double p = A[piv[col]][col];
        if (std::abs(p) < 1e-12)
            return false;
        for (int r = col + 1; r < 3; ++r) {
            const double f = A[piv[r]][col] / p;
            for (int c = col; c < 3; ++c)
                A[piv[r]][c] -= f * A[piv[col]][c];
            b[piv[r]] -= f * b[piv[col]];
        }
    }
    for (int row = 2; row >= 0; --row) {
        double acc = b[piv[row]];
        for (int c = row + 1; c < 3; ++c)
            acc -= A[piv[row]][c] * x[c];
        x[row] = acc / A[piv[row]][row];
    }
    return true;
}

struct RawKeypoint {
    double x, y, sigma, response;
    int octave, layer;
    double oct_x, oct_y;       // refined coordinates in octave pixels
    double oct_sigma;          // scale in octave pixels
};

std::vector<RawKeypoint> find_extrema(const Pyramid& pyr, const SiftConfig& cfg,
                                      int image_width, int image_height) {
    const int s = pyr.layers;
    const double pre_threshold = 0.5 * cfg.contrast_threshold;
    const double r = cfg.edge_ratio;
    const double edge_limit = (r + 1.0) * (r + 1.0) / r;

    std::vector<RawKeypoint> found;
    for (int o = 0; o < static_cast<int>(pyr.octaves.size()); ++o) {
        const auto& dog = pyr.octaves[static_cast<std::size_t>(o)].dog;
        const int w = dog[0].width, h = dog[0].height;
        for (int layer = 1; layer <= s; ++layer) {
            const ImageGrid& d0 = dog[static_cast<std::size_t>(layer - 1)];
            const ImageGrid& d1 = dog[static_cast<std::size_t>(layer)];
            const ImageGrid& d2 = dog[static_cast<std::size_t>(layer + 1)];
            for (int y = 1; y < h - 1; ++y) {
                for (int x = 1; x < w - 1; ++x) {
                    const double v = d1.at(x, y);
                    if (std::abs(v) <= pre_threshold)
                        continue;
                    bool is_max = v > 0, is_min = v < 0;
                    for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (is_max &&
                                ((dx || dy) ? (v <= d1.at(x + dx, y + dy)) : false))
                                is_max = false;
                            if (is_min &&
                                ((dx || dy) ? (v >= d1.at(x + dx, y + dy)) : false))
                                is_min = false;
                            if (v <= d0.at(x + dx, y + dy) && is_max) is_max = false;
                            if (v >= d0.at(x + dx, y + dy) && is_min) is_min = false;
                            if (v <= d2.at(x + dx, y + dy) && is_max) is_max = false;
                            if (v >= d2.at(x + dx, y + dy) && is_min) is_min = false;
                        }
                    if (!is_max && !is_min)
                        continue;

                    // Quadratic refinement in (x, y, layer).
                    int cx = x, cy = y, cl = layer;
                    double off[3] = {0, 0, 0};
                    double refined = 0.0;
                    bool ok = false;
                    for (int it = 0; it < 5; ++it) {
                        const ImageGrid& m0 = dog[static_cast<std::size_t>(cl - 1)];
                        const ImageGrid& m1 = dog[static_cast<std::size_t>(cl)];
                        const ImageGrid& m2 = dog[static_cast<std::size_t>(cl + 1)];
                        const double g[3] = {
                            0.5 * (m1.at(cx + 1, cy) - m1.at(cx - 1, cy)),
                            0.5 * (m1.at(cx, cy + 1) - m1.at(cx, cy - 1)),
                            0.5 * (m2.at(cx, cy) - m0.at(cx, cy))};
                        const double c = m1.at(cx, cy);
                        double H[3][3] = {
                            {m1.at(cx + 1, cy) + m1.at(cx - 1, cy) - 2 * c,
                             0.25 * (m1.at(cx + 1, cy + 1) - m1.at(cx - 1, cy + 1) -
                                     m1.at(cx + 1, cy - 1) + m1.at(cx - 1, cy - 1)),
                             0.25 * (m2.at(cx + 1, cy) - m2.at(cx - 1, cy) -
                                     m0.at(cx + 1, cy) + m0.at(cx - 1, cy))},
                            {0, m1.at(cx, cy + 1) + m1.at(cx, cy - 1) - 2 * c,
                             0.25 * (m2.at(cx, cy + 1) - m2.at(cx, cy - 1) -
                                     m0.at(cx, cy + 1) + m0.at(cx, cy - 1))},
                            {0, 0, m2.at(cx, cy) + m0.at(cx, cy) - 2 * c}};
                        H[1][0] = H[0][1];
                        H[2][0] = H[0][2];
                        H[2][1] = H[1][2];
                        double rhs[3] = {-g[0], -g[1], -g[2]};
                        double Hc[3][3];
                        std::copy(&H[0][0], &H[0][0] + 9, &Hc[0][0]);
                        if (!solve3(Hc, rhs, off))
                            break;
                        if (std::abs(off[0]) < 0.5 && std::abs(off[1]) < 0.5 && std::abs(off[2]) < 0.5) {
                            refined = c + 0.5 * (g[0] * off[0] + g[1] * off[1] + g[2] * off[2]);
                            ok = true;
                            break;
                        }
                        cx += static_cast<int>(std::lround(off[0]));
                        cy += static_cast<int>(std::lround(off[1]));
                        cl += static_cast<int>(std::lround(off[2]));
                        if (cx < 1 || cx > w - 2 || cy < 1 || cy > h - 2 || cl < 1 || cl > s)
                            break;
                    }
                    if (!ok || std::abs(refined) < cfg.contrast_threshold)
                        continue;

                    // Eigenvalue-ratio edge rejection on the spatial Hessian.
                    {
                        const ImageGrid& m1 = dog[static_cast<std::size_t>(cl)];
                        const double c = m1.at(cx, cy);
                        const double dxx = m1.at(cx + 1, cy) + m1.at(cx - 1, cy) - 2 * c;
                        const double dyy = m1.at(cx, cy + 1) + m1.at(cx, cy - 1) - 2 * c;
                        const double dxy = 0.25 * (m1.at(cx + 1, cy + 1) - m1.at(cx - 1, cy + 1) -
                                                   m1.at(cx + 1, cy - 1) + m1.at(cx - 1, cy - 1));
                        const double tr = dxx + dyy;
                        const double det = dxx * dyy - dxy * dxy;
                        if (det <= 0.0 || tr * tr / det >= edge_limit)
                            continue;
                    }

                    RawKeypoint kp;
                    kp.octave = o;
                    kp.layer = cl;
                    kp.oct_x = cx + off[0];
                    kp.oct_y = cy + off[1];
                    kp.oct_sigma = pyr.layer_sigma(cl + off[2]);
                    const double sc = pyr.octave_scale(o);
                    kp.x = kp.oct_x * sc;
                    kp.y = kp.oct_y * sc;
                    kp.sigma = kp.oct_sigma * sc;
                    kp.response = std::abs(refined);
                    if (kp.x < cfg.border || kp.x > image_width - 1 - cfg.border ||
                        kp.y < cfg.border || kp.y > image_height - 1 - cfg.border)
                        continue;
                    found.push_back(kp);
                }
            }
        }
    }
    return found;
}

// 36-bin orientation histogram; returns one angle per dominant peak.
std::vector<double> dominant_orientations(const Pyramid& pyr, const RawKeypoint& kp) {
    constexpr int kBins = 36;
    const ImageGrid& img = pyr.octaves[static_cast<std::size_t>(kp.octave)]
                               .gauss[static_cast<std::size_t>(kp.layer)];
    const double sigma_w = 1.5 * kp.oct_sigma;
    const int radius = std::max(1, static_cast<int>(std::lround(3.0 * sigma_w)));
    const int cx = static_cast<int>(std::lround(kp.oct_x));
    const int cy = static_cast<int>(std::lround(kp.oct_y));

    double hist[kBins] = {0};
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            const int x = cx + dx, y = cy + dy;
            if (x < 1 || x > img.width - 2 || y < 1 || y > img.height - 2)
                continue;
            const double gx = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));
            const double gy = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));
            const double mag = std::hypot(gx, gy);
            double ang = std::atan2(gy, gx);
            if (ang < 0)
                ang += kTwoPi;
            const double w = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma_w * sigma_w));
            int bin = static_cast<int>(ang / kTwoPi * kBins) % kBins;
            hist[bin] += w * mag;
        }

    // Two passes of circular binomial smoothing.
    for (int pass = 0; pass < 2; ++pass) {
        double tmp[kBins];
        for (int i = 0; i < kBins; ++i) {
            const double l2 = hist[(i + kBins - 2) % kBins], l1 = hist[(i + kBins - 1) % kBins];
            const double r1 = hist[(i + 1) % kBins], r2 = hist[(i + 2) % kBins];
            tmp[i] = (l2 + r2 + 4.0 * (l1 + r1) + 6.0 * hist[i]) / 16.0;
        }
        std::copy(tmp, tmp + kBins, hist);
    }

    double peak = *std::max_element(hist, hist + kBins);
    std::vector<double> angles;
    if (peak <= 0.0) {
        angles.push_back(0.0);
        return angles;
    }
    for (int i = 0; i < kBins; ++i) {
        const double l = hist[(i + kBins - 1) % kBins], r = hist[(i + 1) % kBins];
        if (hist[i] >= 0.8 * peak && hist[i] > l && hist[i] > r) {
            const double denom = l - 2.0 * hist[i] + r;
            const double off = denom != 0.0 ? 0.5 * (l - r) / denom : 0.0;
            double ang = (i + 0.5 + off) * (kTwoPi / kBins);
            if (ang < 0) ang += kTwoPi;
            if (ang >= kTwoPi) ang -= kTwoPi;
            angles.push_back(ang);
        }
    }
    if (angles.empty())
        angles.push_back(0.0);
    return angles;
}

void sort_keypoints(std::vector<Keypoint>& kps) {
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        return a.orientation < b.orientation;
    });
    kps.erase(std::unique(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
                  return a.x == b.x && a.y == b.y && a.sigma == b.sigma &&
                         a.orientation == b.orientation;
              }),
              kps.end());
}

std::vector<Keypoint> keypoints_from_pyramid(const Pyramid& pyr, const SiftConfig& cfg,
                                             int image_width, int image_height) {
    std::vector<Keypoint> kps;
    for (const RawKeypoint& raw : find_extrema(pyr, cfg, image_width, image_height)) {
        for (double ang : dominant_orientations(pyr, raw)) {
            Keypoint kp;
            kp.x = raw.x;
            kp.y = raw.y;
            kp.sigma = raw.sigma;
            kp.orientation = ang;
            kp.response = raw.response;
            kp.octave = raw.octave;
            kp.layer = raw.layer;
            kps.push_back(kp);
        }
    }
    sort_keypoints(kps);
    return kps;
}

Descriptor describe_one(const Pyramid& pyr, const Keypoint& kp) {
    constexpr int kD = 4;   // spatial grid
    constexpr int kN = 8;   // orientation bins
    const auto& oct = pyr.octaves[static_cast<std::size_t>(kp.octave)];
    const ImageGrid& img = oct.gauss[static_cast<std::size_t>(kp.layer)];

    const double sc = pyr.octave_scale(kp.octave);
    const double ox = kp.x / sc, oy = kp.y / sc;
    const double osigma = kp.sigma / sc;
    require(ox >= 0 && ox <= img.width - 1 && oy >= 0 && oy <= img.height - 1,
            ErrorCode::invalid_argument, "keypoint lies outside the image");

    const double hist_width = 3.0 * osigma;
    const double cos_t = std::cos(kp.orientation), sin_t = std::sin(kp.orientation);
    int radius = static_cast<int>(std::lround(hist_width * std::sqrt(2.0) * (kD + 1) * 0.5));
    radius = std::min(radius, static_cast<int>(std::hypot(img.width, img.height)));

    double hist[kD + 2][kD + 2][kN + 1] = {};
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            const double rx = (cos_t * dx + sin_t * dy) / hist_width;
            const double ry = (-sin_t * dx + cos_t * dy) / hist_width;
            const double rbin = ry + kD / 2.0 - 0.5;
            const double cbin = rx + kD / 2.0 - 0.5;
            if (rbin <= -1 || rbin >= kD || cbin <= -1 || cbin >= kD)
                continue;
            const int x = static_cast<int>(std::lround(ox)) + dx;
            const int y = static_cast<int>(std::lround(oy)) + dy;
            if (x < 1 || x > img.width - 2 || y < 1 || y > img.height - 2)
                continue;
            const double gx = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));
            const double gy = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));
            const double mag = std::hypot(gx, gy);
            double ang = std::atan2(gy, gx) - kp.orientation;
            while (ang < 0) ang += kTwoPi;
            while (ang >= kTwoPi) ang -= kTwoPi;
            const double obin = ang / kTwoPi * kN;
            const double w = std::exp(-(rx * rx + ry * ry) / (0.5 * kD * kD));

            const int r0 = static_cast<int>(std::floor(rbin));
            const int c0 = static_cast<int>(std::floor(cbin));
            const int o0 = static_cast<int>(std::floor(obin));
            const double fr = rbin - r0, fc = cbin - c0, fo = obin - o0;
            const double v = mag * w;
            for (int ir = 0; ir < 2; ++ir)
                for (int ic = 0; ic < 2; ++ic)
                    for (int io = 0; io < 2; ++io) {
                        const int rr = r0 + ir + 1, cc = c0 + ic + 1;
                        if (rr < 0 || rr > kD + 1 || cc < 0 || cc > kD + 1)
                            continue;
                        const double wgt = v * (ir ? fr : 1 - fr) * (ic ? fc : 1 - fc) *
                                           (io ? fo : 1 - fo);
                        hist[rr][cc][(o0 + io) % kN] += wgt;
                    }
        }

    Descriptor d;
    int idx = 0;
    for (int r = 1; r <= kD; ++r)
        for (int c = 1; c <= kD; ++c)
            for (int o = 0; o < kN; ++o)
                d.values[static_cast<std::size_t>(idx++)] = hist[r][c][o];

    auto renorm = [&] {
        double norm = 0.0;
        for (double v : d.values)
            norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            d.values.fill(1.0 / std::sqrt(128.0));
            return;
        }
        for (double& v : d.values)
            v /= norm;
    };
    renorm();
    for (double& v : d.values)
        v = std::min(v, 0.2);
    renorm();
    return d;
}

}  // namespace

std::vector<Keypoint> detect_keypoints(const ImageGrid& img, const SiftConfig& cfg) {
    const Pyramid pyr = build_pyramid(img, cfg);
    return keypoints_from_pyramid(pyr, cfg, img.width, img.height);
}

std::vector<Descriptor> compute_descriptors(const ImageGrid& img, const std::vector<Keypoint>& kps,
                                            const SiftConfig& cfg) {
    const Pyramid pyr = build_pyramid(img, cfg);
    std::vector<Descriptor> out;
    out.reserve(kps.size());
    for (const Keypoint& kp : kps)
        out.push_back(describe_one(pyr, kp));
    return out;
}

SiftFeatures detect_and_describe(const ImageGrid& img, const SiftConfig& cfg) {
    const Pyramid pyr = build_pyramid(img, cfg);
    SiftFeatures f;
    f.keypoints = keypoints_from_pyramid(pyr, cfg, img.width, img.height);
    f.descriptors.reserve(f.keypoints.size());
    for (const Keypoint& kp : f.keypoints)
        f.descriptors.push_back(describe_one(pyr, kp));
    return f;
}

namespace {

double enhancement_score(const Keypoint& kp, const ComplexDecomposition& dec) {
    int level = static_cast<int>(std::lround(std::log2(std::max(kp.sigma, 1.0))));
    level = std::clamp(level, 1, dec.levels);
    double score = 0.0;
    for (const auto& band : dec.bands[static_cast<std::size_t>(level - 1)])
        score += sample_band_magnitude(band, level, kp.x, kp.y);
    return score;
}

}  // namespace

std::vector<Keypoint> enhance_keypoints(const std::vector<Keypoint>& kps,
                                        const ComplexDecomposition& dec, double keep_fraction) {
    require(keep_fraction > 0.0 && keep_fraction <= 1.0, ErrorCode::invalid_argument,
            "keep_fraction must lie in (0, 1]");
    if (kps.empty())
        return {};
    const std::size_t n = kps.size();
    std::size_t keep = static_cast<std::size_t>(
        std::llround(keep_fraction * static_cast<double>(n)));
    keep = std::clamp<std::size_t>(keep, 1, n);
    if (keep == n)
        return kps;

    std::vector<std::size_t> order(n);
    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
        score[i] = enhancement_score(kps[i], dec);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        if (kps[a].response != kps[b].response) return kps[a].response > kps[b].response;
        return a < b;
    });

    std::vector<bool> selected(n, false);
    for (std::size_t i = 0; i < keep; ++i)
        selected[order[i]] = true;
    std::vector<Keypoint> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < n; ++i)
        if (selected[i])
            out.push_back(kps[i]);
    return out;
}

void attach_wavelet_signatures(std::vector<Descriptor>& descs, const std::vector<Keypoint>& kps,
                               const ComplexDecomposition& dec) {
    require(descs.size() == kps.size(), ErrorCode::invalid_argument,
            "descriptor and keypoint lists must align");
    require(dec.levels >= 2, ErrorCode::invalid_argument,
            "signatures need at least 2 decomposition levels");

    for (std::size_t i = 0; i < kps.size(); ++i) {
        const Keypoint& kp = kps[i];
        int l0 = static_cast<int>(std::lround(std::log2(std::max(kp.sigma, 1.0))));
        l0 = std::clamp(l0, 1, dec.levels - 1);

        std::array<double, 12> sig{};
        int out = 0;
        for (int level : {l0, l0 + 1}) {
            const double spacing = static_cast<double>(1 << level);
            for (int b = 0; b < 6; ++b) {
                const auto& band = dec.bands[static_cast<std::size_t>(level - 1)]
                                            [static_cast<std::size_t>(b)];
                double acc = 0.0;
                for (int wy = 0; wy < 8; ++wy)
                    for (int wx = 0; wx < 8; ++wx)
                        acc += sample_band_magnitude(band, level,
                                                     kp.x + (wx - 3.5) * spacing,
                                                     kp.y + (wy - 3.5) * spacing);
                sig[static_cast<std::size_t>(out++)] = acc / 64.0;
            }
        }
        double norm = 0.0;
        for (double v : sig)
            norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-12)
            sig.fill(1.0 / std::sqrt(12.0));
        else
            for (double& v : sig)
                v /= norm;
        descs[i].wavelet_signature = sig;
    }
}

std::vector<Match> match_descriptors(const std::vector<Descriptor>& a,
                                     const std::vector<Descriptor>& b,
                                     double alpha, double ratio_max) {
    require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::invalid_argument, "alpha must lie in [0,1]");
    require(ratio_max > 0.0 && ratio_max < 1.0, ErrorCode::invalid_argument,
            "ratio_max must lie in (0,1)");
    if (alpha < 1.0) {
        for (const auto* set : {&a, &b})
            for (const auto& d : *set)
                require(d.wavelet_signature.has_value(), ErrorCode::invalid_argument,
                        "alpha < 1 requires wavelet signatures on every descriptor");
    }
    if (a.empty() || b.empty())
        return {};

    auto dist = [&](const Descriptor& p, const Descriptor& q) {
        double dv = 0.0;
        for (int k = 0; k < 128; ++k) {
            const double d = p.values[static_cast<std::size_t>(k)] -
                             q.values[static_cast<std::size_t>(k)];
            dv += d * d;
        }
        double d_total = alpha * std::sqrt(dv);
        if (alpha < 1.0) {
            double dw = 0.0;
            for (int k = 0; k < 12; ++k) {
                const double d = (*p.wavelet_signature)[static_cast<std::size_t>(k)] -
                                 (*q.wavelet_signature)[static_cast<std::size_t>(k)];
                dw += d * d;
            }
            d_total += (1.0 - alpha) * std::sqrt(dw);
        }
        return d_total;
    };

    std::vector<std::size_t> best_in_a(b.size(), 0);
    std::vector<double> best_in_a_dist(b.size(), std::numeric_limits<double>::infinity());

    std::vector<Match> kept;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t j1 = 0;
        double d1 = std::numeric_limits<double>::infinity();
        double d2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = dist(a[i], b[j]);
            if (d < d1) {
                d2 = d1;
                d1 = d;
                j1 = j;
            } else if (d < d2) {
                d2 = d;
            }
            if (d < best_in_a_dist[j]) {
                best_in_a_dist[j] = d;
                best_in_a[j] = i;
            }
        }
        double ratio;
        if (b.size() == 1)
            ratio = 0.0;  // no second neighbor: kept unconditionally
        else
            ratio = d2 > 0.0 ? d1 / d2 : 1.0;
        if (ratio < ratio_max)
            kept.push_back({i, j1, d1, ratio});
    }

    std::vector<Match> mutual;
    for (const Match& m : kept)
        if (best_in_a[m.target_index] == m.source_index)
            mutual.push_back(m);
    return mutual;
}

void write_features_csv(const std::vector<Keypoint>& kps, const std::vector<Descriptor>& descs,
                        const std::string& path) {
    require(kps.size() == descs.size(), ErrorCode::invalid_argument,
            "descriptor and keypoint lists must align");
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "x,y,sigma,orientation,response";
    for (int k = 0; k < 128; ++k)
        out << ",v" << k;
    const bool with_sig = !descs.empty() && descs[0].wavelet_signature.has_value();
    if (with_sig)
        for (int k = 0; k < 12; ++k)
            out << ",w" << k;
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < kps.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g",
                      kps[i].x, kps[i].y, kps[i].sigma, kps[i].orientation, kps[i].response);
        out << buf;
        for (double v : descs[i].values) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v);
            out << buf;
        }
        if (with_sig)
            for (double v : *descs[i].wavelet_signature) {
                std::snprintf(buf, sizeof(buf), ",%.17g", v);
                out << buf;
            }
        out << "\n";
    }
    require(out.good(), ErrorCode::io, "write failed for '" + path + "'");
}

void write_matches_csv(const std::vector<Match>& matches, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "src_idx,dst_idx,distance,ratio\n";
    char buf[96];
    for (const Match& m : matches) {
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g\n", m.source_index, m.target_index,
                      m.distance, m.ratio);
        out << buf;
    }
    require(out.good(), ErrorCode::io, "write failed for '" + path + "'");
}

}  // namespace wavereg
