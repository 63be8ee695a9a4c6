#include "core/pointset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "core/error.hpp"
#include "core/wavelet.hpp"

namespace wavereg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gaussian product integral: int N(x;p,s^2 I) N(x;q,s^2 I) dx = N(p-q; 0, 2 s^2 I)
double cross_sum(const std::vector<Point>& a, const std::vector<Point>& b, double sigma) {
    const double inv4s2 = 1.0 / (4.0 * sigma * sigma);
    double acc = 0.0;
    for (const auto& p : a)
        for (const auto& q : b) {
            const double dx = p.x - q.x;
            const double dy = p.y - q.y;
            acc += std::exp(-(dx * dx + dy * dy) * inv4s2);
        }
    return acc / (4.0 * kPi * sigma * sigma);
}

}  // namespace

double gmm_l2_distance(const PointSet& a, const PointSet& b) {
    require(!a.points.empty() && !b.points.empty(), ErrorCode::invalid_argument,
            "point sets must be nonempty");
    require(a.sigma > 0.0 && a.sigma == b.sigma, ErrorCode::invalid_argument,
            "point sets need the same positive bandwidth");
    const double n = static_cast<double>(a.points.size());
    const double m = static_cast<double>(b.points.size());
    const double s = a.sigma;
    return cross_sum(a.points, a.points, s) / (n * n) +
           cross_sum(b.points, b.points, s) / (m * m) -
           2.0 * cross_sum(a.points, b.points, s) / (n * m);
}

namespace {

std::size_t param_count(PointModel model) {
    return model == PointModel::rigid ? 3 : 6;
}

Point centroid(const std::vector<Point>& pts) {
    Point c{0, 0};
    for (const auto& p : pts) {
        c.x += p.x;
        c.y += p.y;
    }
    c.x /= static_cast<double>(pts.size());
    c.y /= static_cast<double>(pts.size());
    return c;
}

// Transformed point and its parameter Jacobian, both about the centroid `c`.
void transform_points(const std::vector<double>& params, PointModel model, Point c,
                      const std::vector<Point>& a, std::vector<Point>& out) {
    out.resize(a.size());
    if (model == PointModel::rigid) {
        const double ct = std::cos(params[2]), st = std::sin(params[2]);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double rx = a[i].x - c.x, ry = a[i].y - c.y;
            out[i] = {ct * rx - st * ry + c.x + params[0],
                      st * rx + ct * ry + c.y + params[1]};
        }
    } else {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double rx = a[i].x - c.x, ry = a[i].y - c.y;
            out[i] = {params[0] * rx + params[1] * ry + c.x + params[4],
                      params[2] * rx + params[3] * ry + c.y + params[5]};
        }
    }
}

}  // namespace

double pointset_objective(const std::vector<double>& params, PointModel model,
                          const PointSet& a, const PointSet& b, double sigma,
                          std::vector<double>* gradient) {
    require(params.size() == param_count(model), ErrorCode::invalid_argument,
            "parameter vector size mismatch");
    const std::size_t n = a.points.size();
    const std::size_t m = b.points.size();
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    const Point c = centroid(a.points);

    static thread_local std::vector<Point> y;
    transform_points(params, model, c, a.points, y);

    const double inv4s2 = 1.0 / (4.0 * sigma * sigma);
    const double norm = 1.0 / (4.0 * kPi * sigma * sigma);

    // Objective pieces plus dL/dy accumulated in one pass.
    std::vector<Point> dy(n, Point{0, 0});
    double yy = 0.0, yb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = y[i].x - y[j].x;
            const double dyv = y[i].y - y[j].y;
            const double k = std::exp(-(dx * dx + dyv * dyv) * inv4s2) * norm;
            yy += k;
            const double w = -k / (sigma * sigma) / (dn * dn);
            dy[i].x += w * dx;
            dy[i].y += w * dyv;
        }
        for (std::size_t j = 0; j < m; ++j) {
            const double dx = y[i].x - b.points[j].x;
            const double dyv = y[i].y - b.points[j].y;
            const double k = std::exp(-(dx * dx + dyv * dyv) * inv4s2) * norm;
            yb += k;
            const double w = k / (sigma * sigma) / (dn * dm);
            dy[i].x += w * dx;
            dy[i].y += w * dyv;
        }
    }
    const double bb = cross_sum(b.points, b.points, sigma) / (dm * dm);
    const double value = yy / (dn * dn) + bb - 2.0 * yb / (dn * dm);

    if (gradient) {
        gradient->assign(params.size(), 0.0);
        if (model == PointModel::rigid) {
            const double ct = std::cos(params[2]), st = std::sin(params[2]);
            for (std::size_t i = 0; i < n; ++i) {
                const double rx = a.points[i].x - c.x, ry = a.points[i].y - c.y;
                (*gradient)[0] += dy[i].x;
                (*gradient)[1] += dy[i].y;
                (*gradient)[2] += dy[i].x * (-st * rx - ct * ry) + dy[i].y * (ct * rx - st * ry);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double rx = a.points[i].x - c.x, ry = a.points[i].y - c.y;
                (*gradient)[0] += dy[i].x * rx;
                (*gradient)[1] += dy[i].x * ry;
                (*gradient)[2] += dy[i].y * rx;
                (*gradient)[3] += dy[i].y * ry;
                (*gradient)[4] += dy[i].x;
                (*gradient)[5] += dy[i].y;
            }
        }
    }
    return value;
}

TransformModel register_pointset(const PointSet& a, const PointSet& b, PointModel model,
                                 const AnnealConfig& cfg) {
    require(a.points.size() >= 3 && b.points.size() >= 3, ErrorCode::invalid_argument,
            "point-set registration needs at least 3 points per side");
    require(cfg.sigma_lo > 0.0 && cfg.sigma_decay > 0.0 && cfg.sigma_decay < 1.0,
            ErrorCode::invalid_argument, "invalid annealing configuration");

    if (model == PointModel::affine) {
        // Collinear source points leave the affine fit unconstrained.
        const Point c = centroid(a.points);
        double sxx = 0, sxy = 0, syy = 0;
        for (const auto& p : a.points) {
            sxx += (p.x - c.x) * (p.x - c.x);
            sxy += (p.x - c.x) * (p.y - c.y);
            syy += (p.y - c.y) * (p.y - c.y);
        }
        const double tr = sxx + syy;
        const double det = sxx * syy - sxy * sxy;
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        const double lam_min = tr / 2.0 - disc;
        require(lam_min > 1e-9 * std::max(tr, 1e-300), ErrorCode::degenerate,
                "source points are collinear; affine model is degenerate");
    }

    // Bounding-box diagonal of the joint cloud sets the annealing start.
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto* set : {&a, &b})
        for (const auto& p : set->points) {
            xlo = std::min(xlo, p.x); xhi = std::max(xhi, p.x);
            ylo = std::min(ylo, p.y); yhi = std::max(yhi, p.y);
        }
    const double diag = std::hypot(xhi - xlo, yhi - ylo);
    double sigma = std::max(cfg.sigma_hi_frac * diag, cfg.sigma_lo);

    // Rotation/matrix entries are preconditioned by the rms point radius so a
    // unit step means comparable point motion across parameters.
    const Point c = centroid(a.points);
    double r2 = 0.0;
    for (const auto& p : a.points)
        r2 += (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
    r2 = std::max(r2 / static_cast<double>(a.points.size()), 1.0);

    std::vector<double> params = model == PointModel::rigid
        ? std::vector<double>{0, 0, 0}
        : std::vector<double>{1, 0, 0, 1, 0, 0};
    std::vector<double> precond(params.size(), 1.0);
    if (model == PointModel::rigid) {
        precond[2] = 1.0 / r2;
    } else {
        precond[0] = precond[1] = precond[2] = precond[3] = 1.0 / r2;
    }

    std::vector<double> grad, trial;
    for (;;) {
        double step = 1.0;
        double f = pointset_objective(params, model, a, b, sigma, &grad);
        for (int it = 0; it < cfg.steps_per_stage; ++it) {
            double dot = 0.0;
            for (std::size_t k = 0; k < params.size(); ++k)
                dot += grad[k] * precond[k] * grad[k];
            if (dot < 1e-30)
                break;

            bool accepted = false;
            for (int bt = 0; bt < 30; ++bt) {
                trial = params;
                for (std::size_t k = 0; k < params.size(); ++k)
                    trial[k] -= step * precond[k] * grad[k];
                const double ft = pointset_objective(trial, model, a, b, sigma, nullptr);
                if (ft <= f - 1e-4 * step * dot) {
                    accepted = true;
                    params = trial;
                    f = pointset_objective(params, model, a, b, sigma, &grad);
                    step = std::min(step * 1.5, 1e6);
                    break;
                }
                step *= 0.5;
            }
            if (!accepted)
                break;
        }
        if (sigma <= cfg.sigma_lo)
            break;
        sigma = std::max(sigma * cfg.sigma_decay, cfg.sigma_lo);
    }

    if (model == PointModel::rigid) {
        const double ct = std::cos(params[2]), st = std::sin(params[2]);
        return TransformModel{TransformKind::similarity,
                              {ct, st,
                               c.x - (ct * c.x - st * c.y) + params[0],
                               c.y - (st * c.x + ct * c.y) + params[1]}};
    }
    return TransformModel::make_affine(
        params[0], params[1], c.x - (params[0] * c.x + params[1] * c.y) + params[4],
        params[2], params[3], c.y - (params[2] * c.x + params[3] * c.y) + params[5]);
}

namespace {

// Pearson correlation of 11x11 neighborhoods; windows are shifted to stay
// inside the image. Returns -1 for constant patches.
double patch_ncc(const ImageGrid& a, Point pa, const ImageGrid& b, Point pb) {
    constexpr int half = 5, win = 11, count = win * win;
    const int ax = std::clamp(static_cast<int>(std::lround(pa.x)) - half, 0, a.width - win);
    const int ay = std::clamp(static_cast<int>(std::lround(pa.y)) - half, 0, a.height - win);
    const int bx = std::clamp(static_cast<int>(std::lround(pb.x)) - half, 0, b.width - win);
    const int by = std::clamp(static_cast<int>(std::lround(pb.y)) - half, 0, b.height - win);

    double sa = 0, sb = 0;
    for (int r = 0; r < win; ++r)
        for (int cidx = 0; cidx < win; ++cidx) {
            sa += a.at(ax + cidx, ay + r);
            sb += b.at(bx + cidx, by + r);
        }
    const double ma = sa / count, mb = sb / count;
    double saa = 0, sbb = 0, sab = 0;
    for (int r = 0; r < win; ++r)
        for (int cidx = 0; cidx < win; ++cidx) {
            const double da = a.at(ax + cidx, ay + r) - ma;
            const double db = b.at(bx + cidx, by + r) - mb;
            saa += da * da;
            sbb += db * db;
            sab += da * db;
        }
    if (saa <= 0.0 || sbb <= 0.0)
        return -1.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

std::pair<PointSet, PointSet> extract_pointsets(const ImageGrid& master, const ImageGrid& slave,
                                                const ExtractConfig& cfg) {
    require(cfg.max_points >= 3, ErrorCode::invalid_argument, "max_points must be >= 3");

    auto detect = [&](const ImageGrid& img) {
        auto cps = cfg.use_dtcwt ? dtcwt_control_points(img, cfg.cp_level, cfg.cp_percentile)
                                 : wavelet_control_points(img, cfg.cp_level, cfg.cp_percentile);
        if (static_cast<int>(cps.size()) > cfg.max_points)
            cps.resize(static_cast<std::size_t>(cfg.max_points));
        return cps;
    };
    const auto cps_m = detect(master);
    const auto cps_s = detect(slave);
    require(cps_m.size() >= 3, ErrorCode::registration_failure,
            "too few control points on the master image");
    require(cps_s.size() >= 3, ErrorCode::registration_failure,
            "too few control points on the slave image");

    PointSet set_m, set_s;
    set_m.sigma = set_s.sigma = 1.0;
    for (const auto& p : cps_m)
        set_m.points.push_back({p.x, p.y});

    if (!cfg.prune) {
        for (const auto& p : cps_s)
            set_s.points.push_back({p.x, p.y});
        return {set_m, set_s};
    }

    struct PairScore {
        double ncc;
        std::size_t mi, si;
    };
    std::vector<PairScore> scores;
    for (std::size_t si = 0; si < cps_s.size(); ++si)
        for (std::size_t mi = 0; mi < cps_m.size(); ++mi) {
            const double v = patch_ncc(slave, {cps_s[si].x, cps_s[si].y},
                                       master, {cps_m[mi].x, cps_m[mi].y});
            if (v >= cfg.min_ncc)
                scores.push_back({v, mi, si});
        }
    std::sort(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
        if (a.ncc != b.ncc) return a.ncc > b.ncc;
        if (a.mi != b.mi) return a.mi < b.mi;
        return a.si < b.si;
    });

    std::vector<bool> used_m(cps_m.size(), false), used_s(cps_s.size(), false);
    std::vector<std::size_t> kept;
    for (const auto& sc : scores) {
        if (used_m[sc.mi] || used_s[sc.si])
            continue;
        used_m[sc.mi] = used_s[sc.si] = true;
        kept.push_back(sc.si);
    }
    std::sort(kept.begin(), kept.end());
    for (std::size_t si : kept)
        set_s.points.push_back({cps_s[si].x, cps_s[si].y});

    require(set_s.points.size() >= 3, ErrorCode::registration_failure,
            "fewer than 3 slave control points survived NCC pruning");
    return {set_m, set_s};
}

void write_pointset_csv(const PointSet& ps, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "x,y\n";
    char buf[80];
    for (const auto& p : ps.points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.x, p.y);
        out << buf;
    }
    require(out.good(), ErrorCode::io, "write failed for '" + path + "'");
}

PointSet read_pointset_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::io, "cannot open '" + path + "'");
    PointSet ps;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (first && line.find("x,y") == 0) {
            first = false;
            continue;
        }
        first = false;
        std::istringstream ls(line);
        double x, y;
        char comma;
        require(static_cast<bool>(ls >> x >> comma >> y) && comma == ',', ErrorCode::format,
                path + ": malformed point line '" + line + "'");
        ps.points.push_back({x, y});
    }
    require(!ps.points.empty(), ErrorCode::format, path + ": no points");
    return ps;
}

}  // namespace wavereg
