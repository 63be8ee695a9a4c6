#include "core/mi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/wavelet.hpp"

namespace wavereg {

std::vector<double> JointHistogram::marginal_a() const {
    std::vector<double> m(static_cast<std::size_t>(bins), 0.0);
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j)
            m[static_cast<std::size_t>(i)] += at(i, j);
    return m;
}

std::vector<double> JointHistogram::marginal_b() const {
    std::vector<double> m(static_cast<std::size_t>(bins), 0.0);
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j)
            m[static_cast<std::size_t>(j)] += at(i, j);
    return m;
}

namespace {

struct BinRange {
    double lo = 0.0;
    double inv_width = 0.0;  // bins / (hi - lo), or 0 for constant images
};

int bin_of(double v, const BinRange& r, int bins) {
    if (r.inv_width == 0.0)
        return 0;
    const int b = static_cast<int>((v - r.lo) * r.inv_width);
    return std::clamp(b, 0, bins - 1);
}

}  // namespace

JointHistogram joint_histogram(const ImageGrid& a, const ImageGrid& b, const Mask* mask, int bins) {
    require(a.width == b.width && a.height == b.height, ErrorCode::invalid_argument,
            "images must have identical dimensions");
    require(bins >= 2, ErrorCode::invalid_argument, "need at least 2 histogram bins");
    if (mask)
        require(mask->width == a.width && mask->height == a.height, ErrorCode::invalid_argument,
                "mask dimensions must match the images");

    double alo = std::numeric_limits<double>::infinity(), ahi = -alo;
    double blo = alo, bhi = -alo;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask && !mask->valid[i])
            continue;
        alo = std::min(alo, a.samples[i]);
        ahi = std::max(ahi, a.samples[i]);
        blo = std::min(blo, b.samples[i]);
        bhi = std::max(bhi, b.samples[i]);
        ++n;
    }
    require(n > 0, ErrorCode::invalid_argument, "empty overlap");

    BinRange ra{alo, ahi > alo ? bins / (ahi - alo) : 0.0};
    BinRange rb{blo, bhi > blo ? bins / (bhi - blo) : 0.0};

    JointHistogram h;
    h.bins = bins;
    h.counts.assign(static_cast<std::size_t>(bins) * bins, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask && !mask->valid[i])
            continue;
        h.counts[static_cast<std::size_t>(bin_of(a.samples[i], ra, bins)) * bins +
                 bin_of(b.samples[i], rb, bins)] += 1.0;
    }
    h.total = static_cast<double>(n);
    return h;
}

double entropy_nats(const std::vector<double>& counts, double total) {
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log(p);
        }
    return h;
}

double mutual_information(const ImageGrid& a, const ImageGrid& b, const Mask* mask, int bins) {
    const JointHistogram h = joint_histogram(a, b, mask, bins);
    return entropy_nats(h.marginal_a(), h.total) + entropy_nats(h.marginal_b(), h.total) -
           entropy_nats(h.counts, h.total);
}

PyramidMode pyramid_mode_from_name(const std::string& name) {
    if (name == "none") return PyramidMode::none;
    if (name == "gaussian") return PyramidMode::gaussian;
    if (name == "wavelet_ll") return PyramidMode::wavelet_ll;
    raise(ErrorCode::invalid_argument,
          "unknown pyramid mode '" + name + "' (none|gaussian|wavelet_ll)");
}

const char* pyramid_mode_name(PyramidMode mode) {
    switch (mode) {
        case PyramidMode::none: return "none";
        case PyramidMode::gaussian: return "gaussian";
        case PyramidMode::wavelet_ll: return "wavelet_ll";
    }
    raise(ErrorCode::internal, "unknown pyramid mode");
}

namespace {

int reflect_idx(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -1 - i;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

ImageGrid gaussian_blur(const ImageGrid& img, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += kernel[static_cast<std::size_t>(k + radius)];
    }
    for (double& v : kernel)
        v /= sum;

    ImageGrid tmp = ImageGrid::zeros(img.width, img.height, img.source_depth);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       img.at(reflect_idx(x + k, img.width), y);
            tmp.at(x, y) = acc;
        }
    ImageGrid out = ImageGrid::zeros(img.width, img.height, img.source_depth);
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

}  // namespace

std::vector<ImageGrid> build_pyramid(const ImageGrid& img, int levels, PyramidMode mode) {
    require(levels >= 1, ErrorCode::invalid_argument, "pyramid needs at least one level");
    std::vector<ImageGrid> pyr;
    pyr.push_back(img);
    if (mode == PyramidMode::none)
        return pyr;  // single level regardless of the requested count
    for (int l = 1; l < levels; ++l) {
        const ImageGrid& prev = pyr.back();
        require(prev.width >= 4 && prev.height >= 4, ErrorCode::invalid_argument,
                "too many pyramid levels for image size");
        if (mode == PyramidMode::gaussian) {
            const ImageGrid blurred = gaussian_blur(prev, 1.0);
            ImageGrid next = ImageGrid::zeros(prev.width / 2, prev.height / 2, prev.source_depth);
            for (int y = 0; y < next.height; ++y)
                for (int x = 0; x < next.width; ++x)
                    next.at(x, y) = blurred.at(2 * x, 2 * y);
            pyr.push_back(std::move(next));
        } else {
            // Haar LL rescaled by 1/2 restores the intensity range (2x2 mean).
            const WaveletDecomposition dec = dwt_haar(prev, 1);
            ImageGrid next = ImageGrid::zeros(dec.ll.cols, dec.ll.rows, prev.source_depth);
            for (std::size_t i = 0; i < dec.ll.v.size(); ++i)
                next.samples[i] = 0.5 * dec.ll.v[i];
            pyr.push_back(std::move(next));
        }
    }
    return pyr;
}

// ---------------------------------------------------------------------------
// Coordinate-descent MI maximization

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct MiParams {
    TransformKind model;
    // tx, ty, theta, log sx, log sy, shear (trailing entries unused by
    // simpler models)
    double p[6] = {0, 0, 0, 0, 0, 0};

    int count() const {
        switch (model) {
            case TransformKind::translation: return 2;
            case TransformKind::similarity: return 4;
            case TransformKind::affine: return 6;
            default: return 0;
        }
    }
};

// T(q) = M (q - c) + c + t, mapping slave to master coordinates.
TransformModel to_transform(const MiParams& mp, Point c) {
    const double tx = mp.p[0], ty = mp.p[1];
    switch (mp.model) {
        case TransformKind::translation:
            return TransformModel::make_translation(tx, ty);
        case TransformKind::similarity:
            return TransformModel::make_similarity_about(c, std::exp(mp.p[3]), mp.p[2], tx, ty);
        case TransformKind::affine: {
            const double ct = std::cos(mp.p[2]), st = std::sin(mp.p[2]);
            const double sx = std::exp(mp.p[3]), sy = std::exp(mp.p[4]), sh = mp.p[5];
            // M = R(theta) * [[sx, sh], [0, sy]]
            const double m11 = ct * sx, m12 = ct * sh - st * sy;
            const double m21 = st * sx, m22 = st * sh + ct * sy;
            return TransformModel::make_affine(
                m11, m12, c.x - (m11 * c.x + m12 * c.y) + tx,
                m21, m22, c.y - (m21 * c.x + m22 * c.y) + ty);
        }
        default:
            raise(ErrorCode::invalid_argument,
                  "MI registration supports translation|similarity|affine models");
    }
}

// MI of master vs slave warped by T, over the valid overlap; -inf when the
// overlap is empty.
double mi_objective(const ImageGrid& master, const ImageGrid& slave,
                    const TransformModel& t, int bins,
                    std::vector<double>& scratch_a, std::vector<double>& scratch_b) {
    const TransformModel inv = invert(t);
    scratch_a.clear();
    scratch_b.clear();
    for (int y = 0; y < master.height; ++y)
        for (int x = 0; x < master.width; ++x) {
            const Point q = apply(inv, {static_cast<double>(x), static_cast<double>(y)});
            if (q.x < 0.0 || q.x > slave.width - 1 || q.y < 0.0 || q.y > slave.height - 1)
                continue;
            scratch_a.push_back(master.at(x, y));
            scratch_b.push_back(interpolate_bilinear(slave, q.x, q.y));
        }
    if (scratch_a.empty())
        return kNegInf;

    double alo = scratch_a[0], ahi = scratch_a[0], blo = scratch_b[0], bhi = scratch_b[0];
    for (double v : scratch_a) { alo = std::min(alo, v); ahi = std::max(ahi, v); }
    for (double v : scratch_b) { blo = std::min(blo, v); bhi = std::max(bhi, v); }
    BinRange ra{alo, ahi > alo ? bins / (ahi - alo) : 0.0};
    BinRange rb{blo, bhi > blo ? bins / (bhi - blo) : 0.0};

    std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
    std::vector<double> ma(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> mb(static_cast<std::size_t>(bins), 0.0);
    for (std::size_t i = 0; i < scratch_a.size(); ++i) {
        const int ia = bin_of(scratch_a[i], ra, bins);
        const int ib = bin_of(scratch_b[i], rb, bins);
        joint[static_cast<std::size_t>(ia) * bins + ib] += 1.0;
        ma[static_cast<std::size_t>(ia)] += 1.0;
        mb[static_cast<std::size_t>(ib)] += 1.0;
    }
    const double total = static_cast<double>(scratch_a.size());
    return entropy_nats(ma, total) + entropy_nats(mb, total) - entropy_nats(joint, total);
}

struct LineResult {
    double x;
    double f;
};

// Bracket then golden-section maximization along one parameter.
template <typename F>
LineResult line_maximize(F f, double x0, double f0, double step, double xtol) {
    double fp = f(x0 + step);
    double fm = f(x0 - step);
    if (fp <= f0 && fm <= f0) {
        // Narrow peak? One refinement attempt with a quarter step.
        step *= 0.25;
        if (step < xtol * 0.5)
            return {x0, f0};
        fp = f(x0 + step);
        fm = f(x0 - step);
        if (fp <= f0 && fm <= f0)
            return {x0, f0};
    }

    double dir = fp > fm ? 1.0 : -1.0;
    double a = x0, fa = f0;
    double b = x0 + dir * step, fb = dir > 0 ? fp : fm;
    double c, fc;
    for (;;) {
        step *= 2.0;
        c = b + dir * step;
        fc = f(c);
        if (fc <= fb)
            break;
        a = b; fa = fb;
        b = c; fb = fc;
        if (std::abs(c - x0) > 1e6)
            break;  // runaway; keep the best seen
    }
    (void)fa;

    // Golden-section on [a, c] with interior maximum near b.
    const double gr = 0.61803398874989484820;
    double lo = std::min(a, c), hi = std::max(a, c);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > xtol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo); f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo); f1 = f(x1);
        }
    }
    double xb = 0.5 * (lo + hi);
    double fxb = f(xb);
    // Never accept a point worse than the bracket's best interior sample.
    if (fb > fxb && std::abs(b - x0) > 0) { xb = b; fxb = fb; }
    if (fxb > f0)
        return {xb, fxb};
    return {x0, f0};
}

}  // namespace

MiResult register_mi(const ImageGrid& master, const ImageGrid& slave, const MiConfig& cfg) {
    require(cfg.model == TransformKind::translation || cfg.model == TransformKind::similarity ||
            cfg.model == TransformKind::affine, ErrorCode::invalid_argument,
            "MI registration supports translation|similarity|affine models");
    require(cfg.bins >= 2, ErrorCode::invalid_argument, "need at least 2 histogram bins");

    const int levels = cfg.pyramid == PyramidMode::none ? 1 : cfg.levels;
    const std::vector<ImageGrid> pyr_master = build_pyramid(master, levels, cfg.pyramid);
    const std::vector<ImageGrid> pyr_slave = build_pyramid(slave, levels, cfg.pyramid);

    MiParams params;
    params.model = cfg.model;
    const int n_params = params.count();

    MiResult result;
    std::vector<double> scratch_a, scratch_b;

    for (int level = static_cast<int>(pyr_master.size()) - 1; level >= 0; --level) {
        const ImageGrid& m = pyr_master[static_cast<std::size_t>(level)];
        const ImageGrid& s = pyr_slave[static_cast<std::size_t>(level)];
        const Point center{(s.width - 1) / 2.0, (s.height - 1) / 2.0};

        if (level < static_cast<int>(pyr_master.size()) - 1) {
            params.p[0] *= 2.0;  // translations live in pixel units
            params.p[1] *= 2.0;
        }

        auto eval = [&](const MiParams& mp) {
            return mi_objective(m, s, to_transform(mp, center), cfg.bins, scratch_a, scratch_b);
        };

        double current = eval(params);
        require(current != kNegInf, ErrorCode::registration_failure,
                "empty overlap at pyramid level " + std::to_string(level));
        const double level_start = current;
        result.trace.push_back(current);

        double steps[6] = {2.0, 2.0, 0.02, 0.02, 0.02, 0.01};
        const double tols[6] = {cfg.tol_translation, cfg.tol_translation, cfg.tol_rotation,
                                cfg.tol_scale, cfg.tol_scale, cfg.tol_scale};

        for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
            double max_rel_update = 0.0;
            bool improved = false;
            for (int k = 0; k < n_params; ++k) {
                auto f1 = [&](double v) {
                    MiParams trial = params;
                    trial.p[k] = v;
                    return eval(trial);
                };
                const LineResult lr = line_maximize(f1, params.p[k], current, steps[k], tols[k]);
                if (lr.f > current) {
                    max_rel_update = std::max(max_rel_update, std::abs(lr.x - params.p[k]) / tols[k]);
                    params.p[k] = lr.x;
                    current = lr.f;
                    result.trace.push_back(current);
                    improved = true;
                }
            }
            ++result.sweeps;
            if (max_rel_update < 1.0) {
                if (!improved) {
                    bool all_small = true;
                    for (int k = 0; k < n_params; ++k) {
                        steps[k] *= 0.25;
                        if (steps[k] > tols[k])
                            all_small = false;
                    }
                    if (all_small)
                        break;
                } else {
                    break;  // converged: every accepted update below tolerance
                }
            }
        }

        require(current >= level_start - 1e-9, ErrorCode::registration_failure,
                "MI decreased within a pyramid level (optimization diverged)");
        if (level == 0)
            result.mi = current;
    }

    const ImageGrid& s0 = pyr_slave[0];
    result.transform = to_transform(params, {(s0.width - 1) / 2.0, (s0.height - 1) / 2.0});
    return result;
}

}  // namespace wavereg
