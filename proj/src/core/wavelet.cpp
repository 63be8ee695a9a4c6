#include "core/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "core/error.hpp"

namespace wavereg {

namespace {

// ---------------------------------------------------------------------------
// Filter tables.
//
// Level-1 dual-tree pair: Le Gall-Tabatabai 5/3 biorthogonal analysis filters
// (the JPEG 2000 reversible pair; exact rationals). The one-sample offset
// between the two trees comes from the decimation phase, not the filters.
const double kLeGallLowpass[5] = {-0.125, 0.25, 0.75, 0.25, -0.125};
const double kLeGallHighpass[3] = {-0.5, 1.0, -0.5};

// Levels >= 2: Kingsbury 14-tap Q-shift low-pass (the qshift_b set of
// "Complex wavelets for shift invariant analysis and filtering of signals",
// Appl. Comput. Harmon. Anal. 10(3), 2001). Tree B uses the time reverse.
const double kQshiftLowpass[14] = {
    0.00325314, -0.00388321, 0.03466035, -0.03887280, -0.11720389, 0.27529538,
    0.75614564, 0.56881042, 0.01186609, -0.10671180, 0.02382538, 0.01702522,
    -0.00543948, -0.00455690};

struct FilterPair {
    std::vector<double> lo;
    std::vector<double> hi;
    int lo_center = 0;
    int hi_center = 0;
};

// Remove the DC leak the truncated published table carries (~1e-6); oriented
// subbands of a constant image must vanish.
std::vector<double> zero_mean(std::vector<double> f) {
    const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
    for (double& v : f)
        v -= mean;
    return f;
}

FilterPair level1_pair() {
    FilterPair p;
    p.lo.assign(std::begin(kLeGallLowpass), std::end(kLeGallLowpass));
    p.hi.assign(std::begin(kLeGallHighpass), std::end(kLeGallHighpass));
    p.lo_center = 2;
    p.hi_center = 1;
    return p;
}

FilterPair qshift_pair(bool tree_b) {
    const int n = 14;
    std::vector<double> lo(n), hi(n);
    for (int i = 0; i < n; ++i)
        lo[i] = tree_b ? kQshiftLowpass[n - 1 - i] : kQshiftLowpass[i];
    // Alternating flip of the opposite tree's low-pass gives the high-pass.
    for (int i = 0; i < n; ++i)
        hi[i] = ((i & 1) ? -1.0 : 1.0) * lo[n - 1 - i];
    FilterPair p;
    p.lo = std::move(lo);
    p.hi = zero_mean(std::move(hi));
    p.lo_center = n / 2 - 1;
    p.hi_center = n / 2 - 1;
    return p;
}

// Half-sample symmetric index: ... x1 x0 | x0 x1 ... xn-1 | xn-1 ...
int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0)
            i = -1 - i;
        if (i >= n)
            i = 2 * n - 1 - i;
    }
    return i;
}

Grid grid_from_image(const ImageGrid& img) {
    Grid g;
    g.rows = img.height;
    g.cols = img.width;
    g.v = img.samples;
    return g;
}

Grid pad_to_even(const Grid& g) {
    const int R = g.rows + (g.rows & 1);
    const int C = g.cols + (g.cols & 1);
    if (R == g.rows && C == g.cols)
        return g;
    Grid out = Grid::zeros(R, C);
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            out.at(r, c) = g.at(std::min(r, g.rows - 1), std::min(c, g.cols - 1));
    return out;
}

// Undecimated correlation along x with symmetric extension.
Grid filter_cols(const Grid& g, const std::vector<double>& f, int center) {
    Grid out = Grid::zeros(g.rows, g.cols);
    const int n = static_cast<int>(f.size());
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += f[k] * g.at(r, reflect(c + k - center, g.cols));
            out.at(r, c) = acc;
        }
    return out;
}

Grid filter_rows(const Grid& g, const std::vector<double>& f, int center) {
    Grid out = Grid::zeros(g.rows, g.cols);
    const int n = static_cast<int>(f.size());
    for (int c = 0; c < g.cols; ++c)
        for (int r = 0; r < g.rows; ++r) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += f[k] * g.at(reflect(r + k - center, g.rows), c);
            out.at(r, c) = acc;
        }
    return out;
}

Grid decimate2(const Grid& g, int row_phase, int col_phase) {
    Grid out = Grid::zeros((g.rows - row_phase + 1) / 2, (g.cols - col_phase + 1) / 2);
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c)
            out.at(r, c) = g.at(2 * r + row_phase, 2 * c + col_phase);
    return out;
}

Grid decimate_cols(const Grid& g) {
    Grid out = Grid::zeros(g.rows, (g.cols + 1) / 2);
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c)
            out.at(r, c) = g.at(r, 2 * c);
    return out;
}

Grid decimate_rows(const Grid& g) {
    Grid out = Grid::zeros((g.rows + 1) / 2, g.cols);
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c)
            out.at(r, c) = g.at(2 * r, c);
    return out;
}

void check_depth(int w, int h, int levels) {
    require(levels >= 1, ErrorCode::invalid_argument, "levels must be >= 1");
    int cw = w, ch = h;
    for (int l = 0; l < levels; ++l) {
        require(std::min(cw, ch) >= 2, ErrorCode::invalid_argument,
                "requested depth too deep for image size");
        cw = (cw + 1) / 2;
        ch = (ch + 1) / 2;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Haar

WaveletDecomposition dwt_haar(const ImageGrid& img, int levels) {
    check_depth(img.width, img.height, levels);

    WaveletDecomposition dec;
    dec.levels = levels;
    dec.source_depth = img.source_depth;

    Grid cur = grid_from_image(img);
    for (int l = 0; l < levels; ++l) {
        WaveletDecomposition::Level lvl;
        lvl.orig_rows = cur.rows;
        lvl.orig_cols = cur.cols;
        const Grid padded = pad_to_even(cur);
        const int R = padded.rows / 2, C = padded.cols / 2;
        Grid ll = Grid::zeros(R, C);
        lvl.lh = Grid::zeros(R, C);
        lvl.hl = Grid::zeros(R, C);
        lvl.hh = Grid::zeros(R, C);
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < C; ++c) {
                const double a = padded.at(2 * r, 2 * c);
                const double b = padded.at(2 * r, 2 * c + 1);
                const double cc = padded.at(2 * r + 1, 2 * c);
                const double d = padded.at(2 * r + 1, 2 * c + 1);
                ll.at(r, c) = 0.5 * (a + b + cc + d);
                lvl.hl.at(r, c) = 0.5 * (a - b + cc - d);
                lvl.lh.at(r, c) = 0.5 * (a + b - cc - d);
                lvl.hh.at(r, c) = 0.5 * (a - b - cc + d);
            }
        dec.detail.push_back(std::move(lvl));
        cur = std::move(ll);
    }
    dec.ll = std::move(cur);
    return dec;
}

ImageGrid idwt_haar(const WaveletDecomposition& dec) {
    require(dec.levels >= 1 && static_cast<int>(dec.detail.size()) == dec.levels,
            ErrorCode::invalid_argument, "decomposition level count mismatch");

    Grid cur = dec.ll;
    for (int l = dec.levels - 1; l >= 0; --l) {
        const auto& lvl = dec.detail[static_cast<std::size_t>(l)];
        require(lvl.lh.rows == cur.rows && lvl.lh.cols == cur.cols &&
                lvl.hl.rows == cur.rows && lvl.hl.cols == cur.cols &&
                lvl.hh.rows == cur.rows && lvl.hh.cols == cur.cols,
                ErrorCode::invalid_argument, "inconsistent subband dimensions");
        require(lvl.orig_rows > 2 * cur.rows - 2 && lvl.orig_rows <= 2 * cur.rows &&
                lvl.orig_cols > 2 * cur.cols - 2 && lvl.orig_cols <= 2 * cur.cols,
                ErrorCode::invalid_argument, "inconsistent subband dimensions");

        Grid up = Grid::zeros(2 * cur.rows, 2 * cur.cols);
        for (int r = 0; r < cur.rows; ++r)
            for (int c = 0; c < cur.cols; ++c) {
                const double ll = cur.at(r, c);
                const double hl = lvl.hl.at(r, c);
                const double lh = lvl.lh.at(r, c);
                const double hh = lvl.hh.at(r, c);
                up.at(2 * r, 2 * c) = 0.5 * (ll + hl + lh + hh);
                up.at(2 * r, 2 * c + 1) = 0.5 * (ll - hl + lh - hh);
                up.at(2 * r + 1, 2 * c) = 0.5 * (ll + hl - lh - hh);
                up.at(2 * r + 1, 2 * c + 1) = 0.5 * (ll - hl - lh + hh);
            }
        if (up.rows != lvl.orig_rows || up.cols != lvl.orig_cols) {
            Grid crop = Grid::zeros(lvl.orig_rows, lvl.orig_cols);
            for (int r = 0; r < crop.rows; ++r)
                for (int c = 0; c < crop.cols; ++c)
                    crop.at(r, c) = up.at(r, c);
            cur = std::move(crop);
        } else {
            cur = std::move(up);
        }
    }

    ImageGrid out = ImageGrid::zeros(cur.cols, cur.rows, dec.source_depth);
    out.samples = std::move(cur.v);
    return out;
}

// ---------------------------------------------------------------------------
// DT-CWT

ComplexDecomposition dtcwt(const ImageGrid& img, int levels) {
    check_depth(img.width, img.height, levels);

    ComplexDecomposition dec;
    dec.levels = levels;
    dec.image_width = img.width;
    dec.image_height = img.height;

    // Level 1: undecimated 5/3 filtering; polyphase quads realize the
    // one-sample-delayed second tree.
    const FilterPair f1 = level1_pair();
    const Grid x = pad_to_even(grid_from_image(img));
    const Grid lo_x = filter_cols(x, f1.lo, f1.lo_center);
    const Grid hi_x = filter_cols(x, f1.hi, f1.hi_center);
    const Grid p_ll = filter_rows(lo_x, f1.lo, f1.lo_center);
    const Grid p_hl = filter_rows(hi_x, f1.lo, f1.lo_center);   // high along x
    const Grid p_lh = filter_rows(lo_x, f1.hi, f1.hi_center);   // high along y
    const Grid p_hh = filter_rows(hi_x, f1.hi, f1.hi_center);

    // Tree combo grids indexed by (y-tree, x-tree); index = 2*ty + tx.
    std::array<std::array<Grid, 4>, 3> detail_combos;  // [type][combo], type: 0=LH 1=HH 2=HL
    std::array<Grid, 4> ll_combos;
    for (int ty = 0; ty < 2; ++ty)
        for (int tx = 0; tx < 2; ++tx) {
            const int combo = 2 * ty + tx;
            detail_combos[0][combo] = decimate2(p_lh, ty, tx);
            detail_combos[1][combo] = decimate2(p_hh, ty, tx);
            detail_combos[2][combo] = decimate2(p_hl, ty, tx);
            ll_combos[combo] = decimate2(p_ll, ty, tx);
        }

    const FilterPair tree_filters[2] = {qshift_pair(false), qshift_pair(true)};

    for (int level = 1; level <= levels; ++level) {
        if (level >= 2) {
            for (int ty = 0; ty < 2; ++ty)
                for (int tx = 0; tx < 2; ++tx) {
                    const int combo = 2 * ty + tx;
                    const Grid in = pad_to_even(ll_combos[combo]);
                    const FilterPair& fx = tree_filters[tx];
                    const FilterPair& fy = tree_filters[ty];
                    const Grid lo = decimate_cols(filter_cols(in, fx.lo, fx.lo_center));
                    const Grid hi = decimate_cols(filter_cols(in, fx.hi, fx.hi_center));
                    detail_combos[0][combo] = decimate_rows(filter_rows(lo, fy.hi, fy.hi_center));
                    detail_combos[1][combo] = decimate_rows(filter_rows(hi, fy.hi, fy.hi_center));
                    detail_combos[2][combo] = decimate_rows(filter_rows(hi, fy.lo, fy.lo_center));
                    ll_combos[combo] = decimate_rows(filter_rows(lo, fy.lo, fy.lo_center));
                }
        }

        std::array<ComplexGrid, 6> bands;
        for (int type = 0; type < 3; ++type) {
            const Grid& s00 = detail_combos[type][0];
            const Grid& s01 = detail_combos[type][1];
            const Grid& s10 = detail_combos[type][2];
            const Grid& s11 = detail_combos[type][3];
            ComplexGrid z1, z2;
            z1.rows = z2.rows = s00.rows;
            z1.cols = z2.cols = s00.cols;
            z1.v.resize(s00.v.size());
            z2.v.resize(s00.v.size());
            for (std::size_t i = 0; i < s00.v.size(); ++i) {
                z1.v[i] = {0.5 * (s00.v[i] - s11.v[i]), 0.5 * (s01.v[i] + s10.v[i])};
                z2.v[i] = {0.5 * (s00.v[i] + s11.v[i]), 0.5 * (s10.v[i] - s01.v[i])};
            }
            bands[static_cast<std::size_t>(2 * type)] = std::move(z1);
            bands[static_cast<std::size_t>(2 * type + 1)] = std::move(z2);
        }
        dec.bands.push_back(std::move(bands));
    }

    dec.lowpass = std::move(ll_combos);
    return dec;
}

// ---------------------------------------------------------------------------
// Modulus maxima

namespace {

std::vector<ControlPoint> modulus_maxima(const Grid& modulus, int level, double percentile) {
    require(percentile > 0.0 && percentile < 100.0, ErrorCode::invalid_argument,
            "threshold percentile must lie in (0, 100)");

    std::vector<double> sorted = modulus.v;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    const double threshold = sorted[rank - 1];

    std::vector<ControlPoint> points;
    for (int r = 0; r < modulus.rows; ++r)
        for (int c = 0; c < modulus.cols; ++c) {
            const double m = modulus.at(r, c);
            if (!(m > threshold))
                continue;
            bool is_max = true;
            for (int dr = -1; dr <= 1 && is_max; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0)
                        continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= modulus.rows || cc < 0 || cc >= modulus.cols)
                        continue;
                    if (!(m > modulus.at(rr, cc))) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max)
                points.push_back({coefficient_center(c, level), coefficient_center(r, level), m, level});
        }

    std::sort(points.begin(), points.end(), [](const ControlPoint& a, const ControlPoint& b) {
        if (a.modulus != b.modulus)
            return a.modulus > b.modulus;
        if (a.y != b.y)
            return a.y < b.y;
        return a.x < b.x;
    });
    return points;
}

}  // namespace

std::vector<ControlPoint> wavelet_control_points(const ImageGrid& img, int level,
                                                 double threshold_percentile) {
    const WaveletDecomposition dec = dwt_haar(img, level);
    const auto& lvl = dec.detail.back();
    Grid modulus = Grid::zeros(lvl.lh.rows, lvl.lh.cols);
    for (std::size_t i = 0; i < modulus.v.size(); ++i)
        modulus.v[i] = std::sqrt(lvl.lh.v[i] * lvl.lh.v[i] + lvl.hl.v[i] * lvl.hl.v[i] +
                                 lvl.hh.v[i] * lvl.hh.v[i]);
    return modulus_maxima(modulus, level, threshold_percentile);
}

std::vector<ControlPoint> dtcwt_control_points(const ImageGrid& img, int level,
                                               double threshold_percentile) {
    const ComplexDecomposition dec = dtcwt(img, level);
    const auto& bands = dec.bands.back();
    Grid modulus = Grid::zeros(bands[0].rows, bands[0].cols);
    for (const auto& band : bands)
        for (std::size_t i = 0; i < modulus.v.size(); ++i)
            modulus.v[i] += std::abs(band.v[i]);
    return modulus_maxima(modulus, level, threshold_percentile);
}

// ---------------------------------------------------------------------------
// Aggregates and sampling

double haar_shift_response(const WaveletDecomposition& a, const WaveletDecomposition& b, int level) {
    require(level >= 1 && level <= a.levels && level <= b.levels, ErrorCode::invalid_argument,
            "level out of range");
    const auto& la = a.detail[static_cast<std::size_t>(level - 1)];
    const auto& lb = b.detail[static_cast<std::size_t>(level - 1)];
    double num = 0.0, den = 0.0;
    auto add = [&](const Grid& ga, const Grid& gb) {
        require(ga.v.size() == gb.v.size(), ErrorCode::invalid_argument,
                "decompositions have different structure");
        for (std::size_t i = 0; i < ga.v.size(); ++i) {
            num += std::abs(std::abs(gb.v[i]) - std::abs(ga.v[i]));
            den += std::abs(ga.v[i]);
        }
    };
    add(la.lh, lb.lh);
    add(la.hl, lb.hl);
    add(la.hh, lb.hh);
    require(den > 0.0, ErrorCode::invalid_argument, "reference level has zero detail magnitude");
    return num / den;
}

double dtcwt_shift_response(const ComplexDecomposition& a, const ComplexDecomposition& b, int level) {
    require(level >= 1 && level <= a.levels && level <= b.levels, ErrorCode::invalid_argument,
            "level out of range");
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 6; ++k) {
        const auto& ga = a.bands[static_cast<std::size_t>(level - 1)][static_cast<std::size_t>(k)];
        const auto& gb = b.bands[static_cast<std::size_t>(level - 1)][static_cast<std::size_t>(k)];
        require(ga.v.size() == gb.v.size(), ErrorCode::invalid_argument,
                "decompositions have different structure");
        for (std::size_t i = 0; i < ga.v.size(); ++i) {
            num += std::abs(std::abs(gb.v[i]) - std::abs(ga.v[i]));
            den += std::abs(ga.v[i]);
        }
    }
    require(den > 0.0, ErrorCode::invalid_argument, "reference level has zero detail magnitude");
    return num / den;
}

double sample_band_magnitude(const ComplexGrid& band, int level, double x, double y) {
    const double off = ((1 << level) - 1) / 2.0;
    const double scale = 1.0 / (1 << level);
    double cx = (x - off) * scale;
    double cy = (y - off) * scale;
    cx = std::clamp(cx, 0.0, static_cast<double>(band.cols - 1));
    cy = std::clamp(cy, 0.0, static_cast<double>(band.rows - 1));
    const int x0 = std::min(static_cast<int>(cx), std::max(band.cols - 2, 0));
    const int y0 = std::min(static_cast<int>(cy), std::max(band.rows - 2, 0));
    const int x1 = std::min(x0 + 1, band.cols - 1);
    const int y1 = std::min(y0 + 1, band.rows - 1);
    const double fx = cx - x0, fy = cy - y0;
    const double top = std::abs(band.at(y0, x0)) * (1 - fx) + std::abs(band.at(y0, x1)) * fx;
    const double bot = std::abs(band.at(y1, x0)) * (1 - fx) + std::abs(band.at(y1, x1)) * fx;
    return top * (1 - fy) + bot * fy;
}

// ---------------------------------------------------------------------------
// Inspection output

namespace {

void write_grid_pgm(const Grid& g, const std::string& path, double lo, double hi) {
    ImageGrid img = ImageGrid::zeros(g.cols, g.rows, 8);
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    for (std::size_t i = 0; i < g.v.size(); ++i)
        img.samples[i] = (g.v[i] - lo) * scale;
    save_pgm8(img, path);
}

struct ManifestRow {
    std::string file;
    int level;
    std::string band;
    int rows, cols;
    double min, max;
};

void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "file,level,band,rows,cols,min,max\n";
    for (const auto& r : rows) {
        char buf[64];
        out << r.file << "," << r.level << "," << r.band << "," << r.rows << "," << r.cols;
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", r.min, r.max);
        out << buf;
    }
    require(out.good(), ErrorCode::io, "write failed for '" + path + "'");
}

std::pair<double, double> grid_range(const Grid& g) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : g.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

}  // namespace

void dump_decomposition(const ImageGrid& img, const std::string& type, int levels,
                        const std::string& out_prefix) {
    std::vector<ManifestRow> manifest;
    auto emit = [&](const Grid& g, int level, const std::string& band) {
        const auto [lo, hi] = grid_range(g);
        const std::string file = out_prefix + "_l" + std::to_string(level) + "_" + band + ".pgm";
        write_grid_pgm(g, file, lo, hi);
        manifest.push_back({file, level, band, g.rows, g.cols, lo, hi});
    };

    if (type == "haar") {
        const WaveletDecomposition dec = dwt_haar(img, levels);
        for (int l = 1; l <= dec.levels; ++l) {
            const auto& lvl = dec.detail[static_cast<std::size_t>(l - 1)];
            emit(lvl.lh, l, "lh");
            emit(lvl.hl, l, "hl");
            emit(lvl.hh, l, "hh");
        }
        emit(dec.ll, dec.levels, "ll");
    } else if (type == "dtcwt") {
        const ComplexDecomposition dec = dtcwt(img, levels);
        static const char* band_names[6] = {"lh_a", "lh_b", "hh_a", "hh_b", "hl_a", "hl_b"};
        for (int l = 1; l <= dec.levels; ++l) {
            const auto& bands = dec.bands[static_cast<std::size_t>(l - 1)];
            for (int b = 0; b < 6; ++b) {
                Grid mag = Grid::zeros(bands[b].rows, bands[b].cols);
                for (std::size_t i = 0; i < mag.v.size(); ++i)
                    mag.v[i] = std::abs(bands[static_cast<std::size_t>(b)].v[i]);
                emit(mag, l, std::string(band_names[b]) + "_mag");
            }
        }
        static const char* combos[4] = {"aa", "ab", "ba", "bb"};
        for (int c = 0; c < 4; ++c)
            emit(dec.lowpass[static_cast<std::size_t>(c)], dec.levels,
                 std::string("lowpass_") + combos[c]);
    } else {
        raise(ErrorCode::invalid_argument, "unknown decomposition type '" + type + "' (haar|dtcwt)");
    }

    write_manifest(manifest, out_prefix + "_manifest.csv");
}

void write_control_points_csv(const std::vector<ControlPoint>& points, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "x,y,level,modulus\n";
    char buf[128];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%.17g\n", p.x, p.y, p.level, p.modulus);
        out << buf;
    }
    require(out.good(), ErrorCode::io, "write failed for '" + path + "'");
}

}  // namespace wavereg
