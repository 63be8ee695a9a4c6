#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace wavereg {

enum class TransformKind {
    translation,   // [tx, ty]
    similarity,    // [a, b, tx, ty] with x' = a*x - b*y + tx, y' = b*x + a*y + ty
    affine,        // [a11, a12, tx, a21, a22, ty] (rows of the augmented matrix)
    polynomial2,   // 6 per axis over the basis (1, x, y, x^2, x*y, y^2); x' row then y' row
};

struct TransformModel {
    TransformKind kind = TransformKind::translation;
    std::vector<double> coefficients;

    static TransformModel identity(TransformKind kind);
    static TransformModel make_translation(double tx, double ty);
    // scale/rotation about the origin followed by translation
    static TransformModel make_similarity(double scale, double angle_rad, double tx, double ty);
    static TransformModel make_affine(double a11, double a12, double tx,
                                      double a21, double a22, double ty);
    // similarity about an arbitrary center point
    static TransformModel make_similarity_about(Point center, double scale, double angle_rad,
                                                double tx, double ty);
};

std::size_t coefficient_count(TransformKind kind);
std::size_t min_correspondences(TransformKind kind);
const char* kind_name(TransformKind kind);
TransformKind kind_from_name(const std::string& name);

Point apply(const TransformModel& t, Point p);
TransformModel invert(const TransformModel& t);  // unsupported for polynomial2

struct Correspondence {
    Point src;
    Point dst;
    double weight = 1.0;
};

TransformModel fit_least_squares(std::span<const Correspondence> pairs, TransformKind kind);

struct RansacResult {
    TransformModel model;
    std::vector<std::size_t> inliers;
};

RansacResult ransac_fit(std::span<const Correspondence> pairs, TransformKind kind,
                        double inlier_tol_px, int iterations, std::uint64_t seed);

// Text format, bit-exact round trip: first line the kind name, then the
// coefficient rows as %.17g decimal literals.
void write_transform(const TransformModel& t, const std::string& path);
TransformModel read_transform(const std::string& path);
std::string transform_to_string(const TransformModel& t);
TransformModel transform_from_string(const std::string& text);

}  // namespace wavereg
