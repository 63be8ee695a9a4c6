#include "core/transform.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace wavereg {

std::size_t coefficient_count(TransformKind kind) {
    switch (kind) {
        case TransformKind::translation: return 2;
        case TransformKind::similarity: return 4;
        case TransformKind::affine: return 6;
        case TransformKind::polynomial2: return 12;
    }
    raise(ErrorCode::internal, "unknown transform kind");
}

std::size_t min_correspondences(TransformKind kind) {
    switch (kind) {
        case TransformKind::translation: return 1;
        case TransformKind::similarity: return 2;
        case TransformKind::affine: return 3;
        case TransformKind::polynomial2: return 6;
    }
    raise(ErrorCode::internal, "unknown transform kind");
}

const char* kind_name(TransformKind kind) {
    switch (kind) {
        case TransformKind::translation: return "translation";
        case TransformKind::similarity: return "similarity";
        case TransformKind::affine: return "affine";
        case TransformKind::polynomial2: return "polynomial2";
    }
    raise(ErrorCode::internal, "unknown transform kind");
}

TransformKind kind_from_name(const std::string& name) {
    if (name == "translation") return TransformKind::translation;
    if (name == "similarity") return TransformKind::similarity;
    if (name == "affine") return TransformKind::affine;
    if (name == "polynomial2") return TransformKind::polynomial2;
    raise(ErrorCode::invalid_argument, "unknown transform kind '" + name +
          "' (expected translation|similarity|affine|polynomial2)");
}

TransformModel TransformModel::identity(TransformKind kind) {
    TransformModel t;
    t.kind = kind;
    switch (kind) {
        case TransformKind::translation: t.coefficients = {0, 0}; break;
        case TransformKind::similarity: t.coefficients = {1, 0, 0, 0}; break;
        case TransformKind::affine: t.coefficients = {1, 0, 0, 0, 1, 0}; break;
        case TransformKind::polynomial2:
            t.coefficients = {0, 1, 0, 0, 0, 0,
                              0, 0, 1, 0, 0, 0};
            break;
    }
    return t;
}

TransformModel TransformModel::make_translation(double tx, double ty) {
    return TransformModel{TransformKind::translation, {tx, ty}};
}

TransformModel TransformModel::make_similarity(double scale, double angle_rad,
                                               double tx, double ty) {
    const double a = scale * std::cos(angle_rad);
    const double b = scale * std::sin(angle_rad);
    return TransformModel{TransformKind::similarity, {a, b, tx, ty}};
}

TransformModel TransformModel::make_affine(double a11, double a12, double tx,
                                           double a21, double a22, double ty) {
    return TransformModel{TransformKind::affine, {a11, a12, tx, a21, a22, ty}};
}

TransformModel TransformModel::make_similarity_about(Point c, double scale, double angle_rad,
                                                     double tx, double ty) {
    // p' = s R (p - c) + c + t
    const double a = scale * std::cos(angle_rad);
    const double b = scale * std::sin(angle_rad);
    const double ox = c.x - (a * c.x - b * c.y) + tx;
    const double oy = c.y - (b * c.x + a * c.y) + ty;
    return TransformModel{TransformKind::similarity, {a, b, ox, oy}};
}

Point apply(const TransformModel& t, Point p) {
    const auto& c = t.coefficients;
    switch (t.kind) {
        case TransformKind::translation:
            return {p.x + c[0], p.y + c[1]};
        case TransformKind::similarity:
            return {c[0] * p.x - c[1] * p.y + c[2],
                    c[1] * p.x + c[0] * p.y + c[3]};
        case TransformKind::affine:
            return {c[0] * p.x + c[1] * p.y + c[2],
                    c[3] * p.x + c[4] * p.y + c[5]};
        case TransformKind::polynomial2: {
            const double basis[6] = {1.0, p.x, p.y, p.x * p.x, p.x * p.y, p.y * p.y};
            double out[2] = {0.0, 0.0};
            for (int axis = 0; axis < 2; ++axis)
                for (int k = 0; k < 6; ++k)
                    out[axis] += c[6 * axis + k] * basis[k];
            return {out[0], out[1]};
        }
    }
    raise(ErrorCode::internal, "unknown transform kind");
}

TransformModel invert(const TransformModel& t) {
    const auto& c = t.coefficients;
    switch (t.kind) {
        case TransformKind::translation:
            return TransformModel::make_translation(-c[0], -c[1]);
        case TransformKind::similarity: {
            const double det = c[0] * c[0] + c[1] * c[1];
            require(det != 0.0, ErrorCode::degenerate, "similarity with zero scale is not invertible");
            const double a = c[0] / det;
            const double b = -c[1] / det;
            return TransformModel{TransformKind::similarity,
                                  {a, b, -(a * c[2] - b * c[3]), -(b * c[2] + a * c[3])}};
        }
        case TransformKind::affine: {
            const double det = c[0] * c[4] - c[1] * c[3];
            require(det != 0.0, ErrorCode::degenerate, "affine with zero determinant is not invertible");
            const double i11 = c[4] / det, i12 = -c[1] / det;
            const double i21 = -c[3] / det, i22 = c[0] / det;
            return TransformModel::make_affine(i11, i12, -(i11 * c[2] + i12 * c[5]),
                                               i21, i22, -(i21 * c[2] + i22 * c[5]));
        }
        case TransformKind::polynomial2:
            raise(ErrorCode::unsupported, "polynomial2 transforms are not closed under inversion");
    }
    raise(ErrorCode::internal, "unknown transform kind");
}

namespace {

// Row count per correspondence is always 2 (one equation per output axis).
void fill_rows(TransformKind kind, const Correspondence& p, double sw,
               Eigen::MatrixXd& A, Eigen::VectorXd& rhs, Eigen::Index row) {
    const double x = p.src.x, y = p.src.y;
    switch (kind) {
        case TransformKind::translation:
            A(row, 0) = sw;
            A(row + 1, 1) = sw;
            break;
        case TransformKind::similarity:
            A(row, 0) = sw * x;  A(row, 1) = sw * -y; A(row, 2) = sw;
            A(row + 1, 0) = sw * y; A(row + 1, 1) = sw * x; A(row + 1, 3) = sw;
            break;
        case TransformKind::affine:
            A(row, 0) = sw * x; A(row, 1) = sw * y; A(row, 2) = sw;
            A(row + 1, 3) = sw * x; A(row + 1, 4) = sw * y; A(row + 1, 5) = sw;
            break;
        case TransformKind::polynomial2: {
            const double basis[6] = {1.0, x, y, x * x, x * y, y * y};
            for (int k = 0; k < 6; ++k) {
                A(row, k) = sw * basis[k];
                A(row + 1, 6 + k) = sw * basis[k];
            }
            break;
        }
    }
    double dx = p.dst.x, dy = p.dst.y;
    if (kind == TransformKind::translation) {
        dx -= x;
        dy -= y;
    }
    rhs(row) = sw * dx;
    rhs(row + 1) = sw * dy;
}

}  // namespace

TransformModel fit_least_squares(std::span<const Correspondence> pairs, TransformKind kind) {
    const std::size_t n_coef = coefficient_count(kind);
    require(pairs.size() >= min_correspondences(kind), ErrorCode::invalid_argument,
            "not enough correspondences for " + std::string(kind_name(kind)));

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(pairs.size()),
                                              static_cast<Eigen::Index>(n_coef));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(A.rows());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        require(pairs[i].weight >= 0.0, ErrorCode::invalid_argument, "negative correspondence weight");
        fill_rows(kind, pairs[i], std::sqrt(pairs[i].weight), A, rhs, 2 * static_cast<Eigen::Index>(i));
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    require(qr.rank() == A.cols(), ErrorCode::degenerate,
            "rank-deficient correspondence configuration for " + std::string(kind_name(kind)));
    Eigen::VectorXd sol = qr.solve(rhs);

    TransformModel t;
    t.kind = kind;
    t.coefficients.assign(sol.data(), sol.data() + sol.size());
    return t;
}

RansacResult ransac_fit(std::span<const Correspondence> pairs, TransformKind kind,
                        double inlier_tol_px, int iterations, std::uint64_t seed) {
    const std::size_t n = pairs.size();
    const std::size_t k = min_correspondences(kind);
    require(n >= k, ErrorCode::invalid_argument, "not enough correspondences for RANSAC");
    require(inlier_tol_px > 0.0, ErrorCode::invalid_argument, "inlier tolerance must be positive");
    require(iterations > 0, ErrorCode::invalid_argument, "iteration count must be positive");

    std::vector<std::size_t> best_inliers;
    double best_rmse = std::numeric_limits<double>::infinity();

    std::vector<Correspondence> sample(k);
    std::vector<std::size_t> idx(k);
    for (int iter = 0; iter < iterations; ++iter) {
        // Per-iteration stream: results do not depend on evaluation order.
        Rng rng(seed, "ransac", static_cast<std::uint64_t>(iter));
        for (std::size_t j = 0; j < k; ++j) {
            bool fresh;
            do {
                idx[j] = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
                fresh = true;
                for (std::size_t m = 0; m < j; ++m)
                    if (idx[m] == idx[j]) fresh = false;
            } while (!fresh);
            sample[j] = pairs[idx[j]];
        }

        TransformModel candidate;
        try {
            candidate = fit_least_squares(sample, kind);
        } catch (const Error&) {
            continue;  // degenerate minimal sample
        }

        std::vector<std::size_t> inliers;
        double sq_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double err = distance(apply(candidate, pairs[i].src), pairs[i].dst);
            if (err <= inlier_tol_px) {
                inliers.push_back(i);
                sq_sum += err * err;
            }
        }
        if (inliers.size() < k)
            continue;
        const double rmse = std::sqrt(sq_sum / static_cast<double>(inliers.size()));
        if (inliers.size() > best_inliers.size() ||
            (inliers.size() == best_inliers.size() && rmse < best_rmse)) {
            best_inliers = std::move(inliers);
            best_rmse = rmse;
        }
    }

    require(!best_inliers.empty(), ErrorCode::registration_failure,
            "RANSAC found no model with enough inliers");

    std::vector<Correspondence> consensus;
    consensus.reserve(best_inliers.size());
    for (std::size_t i : best_inliers)
        consensus.push_back(pairs[i]);
    return RansacResult{fit_least_squares(consensus, kind), std::move(best_inliers)};
}

namespace {

std::size_t row_width(TransformKind kind) {
    switch (kind) {
        case TransformKind::translation: return 2;
        case TransformKind::similarity: return 4;
        case TransformKind::affine: return 3;
        case TransformKind::polynomial2: return 6;
    }
    raise(ErrorCode::internal, "unknown transform kind");
}

}  // namespace

std::string transform_to_string(const TransformModel& t) {
    require(t.coefficients.size() == coefficient_count(t.kind), ErrorCode::invalid_argument,
            "coefficient count does not match transform kind");
    std::string out = kind_name(t.kind);
    out += '\n';
    const std::size_t width = row_width(t.kind);
    char buf[64];
    for (std::size_t i = 0; i < t.coefficients.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", t.coefficients[i]);
        out += buf;
        out += ((i + 1) % width == 0) ? '\n' : ' ';
    }
    return out;
}

TransformModel transform_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string name;
    require(static_cast<bool>(in >> name), ErrorCode::format, "empty transform text");
    TransformModel t;
    t.kind = kind_from_name(name);
    const std::size_t n = coefficient_count(t.kind);
    t.coefficients.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        require(static_cast<bool>(in >> t.coefficients[i]), ErrorCode::format,
                "transform text ends before coefficient " + std::to_string(i + 1));
    std::string extra;
    require(!(in >> extra), ErrorCode::format, "trailing data after transform coefficients");
    return t;
}

void write_transform(const TransformModel& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
    out << transform_to_string(t);
    require(out.good(), ErrorCode::io, "write failed for '" + path + "'");
}

TransformModel read_transform(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return transform_from_string(ss.str());
}

}  // namespace wavereg
