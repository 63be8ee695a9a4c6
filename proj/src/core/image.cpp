#include "core/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace wavereg {

ImageGrid ImageGrid::zeros(int width, int height, int source_depth) {
    require(width >= 1 && height >= 1, ErrorCode::invalid_argument, "image dimensions must be >= 1");
    ImageGrid g;
    g.width = width;
    g.height = height;
    g.source_depth = source_depth;
    g.samples.assign(static_cast<std::size_t>(width) * height, 0.0);
    return g;
}

Mask Mask::all_valid(int width, int height) {
    Mask m;
    m.width = width;
    m.height = height;
    m.valid.assign(static_cast<std::size_t>(width) * height, 255);
    return m;
}

std::size_t Mask::count_valid() const {
    std::size_t n = 0;
    for (auto v : valid)
        if (v) ++n;
    return n;
}

namespace {

// PGM header token reader: skips whitespace and '#' comments.
int next_header_int(std::istream& in, const std::string& path) {
    for (;;) {
        int c = in.peek();
        if (c == EOF)
            raise(ErrorCode::format, path + ": truncated PGM header");
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int value;
    if (!(in >> value))
        raise(ErrorCode::format, path + ": malformed PGM header");
    return value;
}

}  // namespace

ImageGrid load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::io, "cannot open '" + path + "'");

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    require(in.good() && m0 == 'P', ErrorCode::format, path + ": not a PGM file");
    require(m1 == '2' || m1 == '5', ErrorCode::format,
            path + ": unsupported magic number P" + std::string(1, m1) + " (only P2/P5)");
    const bool binary = (m1 == '5');

    const int width = next_header_int(in, path);
    const int height = next_header_int(in, path);
    const int maxval = next_header_int(in, path);
    require(width >= 1 && height >= 1, ErrorCode::format, path + ": invalid dimensions");
    require(maxval >= 1 && maxval <= 65535, ErrorCode::format, path + ": maxval out of range");

    ImageGrid img = ImageGrid::zeros(width, height, maxval > 255 ? 16 : 8);
    const std::size_t n = img.size();

    if (binary) {
        int sep = in.get();  // exactly one whitespace byte after maxval
        require(sep != EOF && std::isspace(sep), ErrorCode::format, path + ": malformed header");
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(n * bytes);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        require(static_cast<std::size_t>(in.gcount()) == raw.size(), ErrorCode::format,
                path + ": sample count mismatch (truncated body)");
        for (std::size_t i = 0; i < n; ++i) {
            unsigned v = bytes == 2 ? (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
            require(v <= static_cast<unsigned>(maxval), ErrorCode::format,
                    path + ": sample exceeds maxval");
            img.samples[i] = static_cast<double>(v);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            long v;
            if (!(in >> v))
                raise(ErrorCode::format, path + ": sample count mismatch (truncated body)");
            require(v >= 0 && v <= maxval, ErrorCode::format, path + ": sample out of range");
            img.samples[i] = static_cast<double>(v);
        }
    }
    return img;
}

void save_pgm8(const ImageGrid& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::round(img.samples[i]);
        raw[i] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(out.good(), ErrorCode::io, "write failed for '" + path + "'");
}

void save_mask_pgm(const Mask& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    std::vector<unsigned char> raw(mask.valid.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = mask.valid[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(out.good(), ErrorCode::io, "write failed for '" + path + "'");
}

double interpolate_bilinear(const ImageGrid& img, double x, double y) {
    require(x >= 0.0 && x <= img.width - 1 && y >= 0.0 && y <= img.height - 1,
            ErrorCode::invalid_argument, "bilinear sample outside image bounds");
    const int x0 = std::min(static_cast<int>(x), img.width - 2 >= 0 ? img.width - 2 : 0);
    const int y0 = std::min(static_cast<int>(y), img.height - 2 >= 0 ? img.height - 2 : 0);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
    const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

WarpResult warp(const ImageGrid& img, const TransformModel& t, int out_width, int out_height) {
    require(out_width >= 1 && out_height >= 1, ErrorCode::invalid_argument,
            "warp output dimensions must be >= 1");
    const TransformModel inv = invert(t);

    WarpResult r;
    r.image = ImageGrid::zeros(out_width, out_height, img.source_depth);
    r.mask.width = out_width;
    r.mask.height = out_height;
    r.mask.valid.assign(static_cast<std::size_t>(out_width) * out_height, 0);

    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            const Point s = apply(inv, {static_cast<double>(x), static_cast<double>(y)});
            if (s.x >= 0.0 && s.x <= img.width - 1 && s.y >= 0.0 && s.y <= img.height - 1) {
                r.image.at(x, y) = interpolate_bilinear(img, s.x, s.y);
                r.mask.set(x, y, true);
            }
        }
    }
    return r;
}

ImageGrid degrade(const ImageGrid& img, int factor) {
    require(factor >= 1, ErrorCode::invalid_argument, "degrade factor must be >= 1");
    if (factor == 1)
        return img;
    const int ow = img.width / factor;
    const int oh = img.height / factor;
    require(ow >= 1 && oh >= 1, ErrorCode::invalid_argument, "degrade factor larger than image");

    ImageGrid out = ImageGrid::zeros(ow, oh, img.source_depth);
    const double inv_area = 1.0 / (static_cast<double>(factor) * factor);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int dy = 0; dy < factor; ++dy)
                for (int dx = 0; dx < factor; ++dx)
                    acc += img.at(x * factor + dx, y * factor + dy);
            out.at(x, y) = acc * inv_area;
        }
    }
    return out;
}

Mask degrade_mask(const Mask& mask, int factor) {
    require(factor >= 1, ErrorCode::invalid_argument, "degrade factor must be >= 1");
    if (factor == 1)
        return mask;
    Mask out;
    out.width = mask.width / factor;
    out.height = mask.height / factor;
    out.valid.assign(static_cast<std::size_t>(out.width) * out.height, 0);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            bool all = true;
            for (int dy = 0; dy < factor && all; ++dy)
                for (int dx = 0; dx < factor; ++dx)
                    if (!mask.at(x * factor + dx, y * factor + dy)) {
                        all = false;
                        break;
                    }
            out.set(x, y, all);
        }
    }
    return out;
}

namespace {

// Conjugate a full-resolution map with the block-center coordinate change of
// a factor-f degrade: T_d(q) = (T(f q + c) - c) / f with c = (f-1)/2.
TransformModel conjugate_with_degrade(const TransformModel& t, int f) {
    if (f == 1)
        return t;
    const double c = (f - 1) / 2.0;
    const double inv_f = 1.0 / f;
    const auto& k = t.coefficients;
    switch (t.kind) {
        case TransformKind::translation:
            return TransformModel::make_translation(k[0] * inv_f, k[1] * inv_f);
        case TransformKind::similarity: {
            const double tx = (k[0] * c - k[1] * c + k[2] - c) * inv_f;
            const double ty = (k[1] * c + k[0] * c + k[3] - c) * inv_f;
            return TransformModel{TransformKind::similarity, {k[0], k[1], tx, ty}};
        }
        case TransformKind::affine: {
            const double tx = (k[0] * c + k[1] * c + k[2] - c) * inv_f;
            const double ty = (k[3] * c + k[4] * c + k[5] - c) * inv_f;
            return TransformModel::make_affine(k[0], k[1], tx, k[3], k[4], ty);
        }
        case TransformKind::polynomial2:
            raise(ErrorCode::unsupported, "polynomial2 ground truth is not supported for degraded pairs");
    }
    raise(ErrorCode::internal, "unknown transform kind");
}

}  // namespace

SyntheticPair make_synthetic_pair(const ImageGrid& img, const SyntheticPairSpec& spec) {
    require(spec.degrade_factor >= 1, ErrorCode::invalid_argument, "degrade_factor must be >= 1");
    require(spec.noise_sigma >= 0.0, ErrorCode::invalid_argument, "noise_sigma must be >= 0");
    require(spec.intensity_gamma > 0.0, ErrorCode::invalid_argument, "intensity_gamma must be > 0");

    // slave(q) = img(truth(q)), so resample through the inverse map.
    WarpResult warped = warp(img, invert(spec.ground_truth), img.width, img.height);

    const double overlap = static_cast<double>(warped.mask.count_valid()) /
                           static_cast<double>(warped.mask.valid.size());
    require(overlap >= 0.5, ErrorCode::invalid_argument,
            "warped overlap below 50% of image area");

    const double range = img.range_max();
    if (spec.intensity_gamma != 1.0) {
        for (double& v : warped.image.samples) {
            const double u = std::clamp(v / range, 0.0, 1.0);
            v = range * std::pow(u, spec.intensity_gamma);
        }
    }
    if (spec.noise_sigma > 0.0) {
        Rng rng(spec.seed, "synth.noise");
        for (double& v : warped.image.samples)
            v += spec.noise_sigma * rng.normal();
    }
    // Pixels with no preimage stay at zero.
    for (std::size_t i = 0; i < warped.image.size(); ++i)
        if (!warped.mask.valid[i])
            warped.image.samples[i] = 0.0;

    SyntheticPair pair;
    pair.master = degrade(img, spec.degrade_factor);
    pair.slave = degrade(warped.image, spec.degrade_factor);
    pair.slave_mask = degrade_mask(warped.mask, spec.degrade_factor);
    pair.truth = conjugate_with_degrade(spec.ground_truth, spec.degrade_factor);
    return pair;
}

std::vector<Correspondence> checkpoint_grid(const TransformModel& truth,
                                            int slave_width, int slave_height, int n) {
    require(n >= 2, ErrorCode::invalid_argument, "checkpoint grid needs n >= 2");
    std::vector<Correspondence> checks;
    checks.reserve(static_cast<std::size_t>(n) * n);
    const double mx = 0.1 * (slave_width - 1);
    const double my = 0.1 * (slave_height - 1);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            Point src{mx + (slave_width - 1 - 2 * mx) * i / (n - 1.0),
                      my + (slave_height - 1 - 2 * my) * j / (n - 1.0)};
            checks.push_back({src, apply(truth, src), 1.0});
        }
    }
    return checks;
}

ImageGrid make_test_image(int width, int height, std::uint64_t seed) {
    require(width >= 8 && height >= 8, ErrorCode::invalid_argument, "test image too small");
    ImageGrid img = ImageGrid::zeros(width, height, 8);

    // Value-noise octaves: bilinearly upsampled random lattices, coarse ones
    // weighted more, give the overall terrain-like texture.
    double amp = 1.0;
    for (int spacing : {64, 32, 16, 8, 4}) {
        Rng rng(seed, "texture.lattice", static_cast<std::uint64_t>(spacing));
        const int lw = width / spacing + 2;
        const int lh = height / spacing + 2;
        std::vector<double> lattice(static_cast<std::size_t>(lw) * lh);
        for (double& v : lattice)
            v = rng.uniform01();
        for (int y = 0; y < height; ++y) {
            const double gy = static_cast<double>(y) / spacing;
            const int y0 = static_cast<int>(gy);
            const double fy = gy - y0;
            for (int x = 0; x < width; ++x) {
                const double gx = static_cast<double>(x) / spacing;
                const int x0 = static_cast<int>(gx);
                const double fx = gx - x0;
                const double* row0 = &lattice[static_cast<std::size_t>(y0) * lw];
                const double* row1 = row0 + lw;
                const double top = row0[x0] * (1 - fx) + row0[x0 + 1] * fx;
                const double bot = row1[x0] * (1 - fx) + row1[x0 + 1] * fx;
                img.at(x, y) += amp * (top * (1 - fy) + bot * fy);
            }
        }
        amp *= 0.55;
    }

    // Hard-edged discs and rectangles provide corners and blobs for the
    // feature detectors.
    Rng shapes(seed, "texture.shapes");
    const int n_shapes = 14;
    for (int s = 0; s < n_shapes; ++s) {
        const bool disc = shapes.uniform01() < 0.5;
        const double cx = shapes.uniform(0.1, 0.9) * width;
        const double cy = shapes.uniform(0.1, 0.9) * height;
        const double r = shapes.uniform(0.02, 0.07) * std::min(width, height);
        const double level = shapes.uniform(-1.2, 1.2);
        const int x_lo = std::max(0, static_cast<int>(cx - r - 1));
        const int x_hi = std::min(width - 1, static_cast<int>(cx + r + 1));
        const int y_lo = std::max(0, static_cast<int>(cy - r - 1));
        const int y_hi = std::min(height - 1, static_cast<int>(cy + r + 1));
        for (int y = y_lo; y <= y_hi; ++y)
            for (int x = x_lo; x <= x_hi; ++x) {
                const bool inside = disc
                    ? (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r
                    : std::abs(x - cx) <= r * 0.9 && std::abs(y - cy) <= r * 0.9;
                if (inside)
                    img.at(x, y) += level;
            }
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : img.samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    for (double& v : img.samples)
        v = (v - lo) * scale;
    return img;
}

}  // namespace wavereg
