#include "core/metrics.hpp"

#include <cmath>

#include "core/error.hpp"

namespace wavereg {

double nccc(const ImageGrid& a, const ImageGrid& b, const Mask* mask) {
    require(a.width == b.width && a.height == b.height, ErrorCode::invalid_argument,
            "images must have identical dimensions");
    if (mask)
        require(mask->width == a.width && mask->height == a.height, ErrorCode::invalid_argument,
                "mask dimensions must match the images");

    double sum_a = 0.0, sum_b = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask && !mask->valid[i])
            continue;
        sum_a += a.samples[i];
        sum_b += b.samples[i];
        ++n;
    }
    require(n > 0, ErrorCode::invalid_argument, "empty overlap");

    const double mean_a = sum_a / static_cast<double>(n);
    const double mean_b = sum_b / static_cast<double>(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask && !mask->valid[i])
            continue;
        const double da = a.samples[i] - mean_a;
        const double db = b.samples[i] - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    require(saa > 0.0 || sbb > 0.0, ErrorCode::invalid_argument,
            "NCCC undefined: both images constant over the overlap");
    if (saa == 0.0 || sbb == 0.0)
        return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double rmse_checkpoints(const TransformModel& t, std::span<const Correspondence> checks) {
    require(!checks.empty(), ErrorCode::invalid_argument, "empty checkpoint list");
    double acc = 0.0;
    for (const auto& c : checks) {
        const Point p = apply(t, c.src);
        const double dx = p.x - c.dst.x;
        const double dy = p.y - c.dst.y;
        acc += dx * dx + dy * dy;
    }
    return std::sqrt(acc / static_cast<double>(checks.size()));
}

RuntimeClass runtime_class(double seconds) {
    require(seconds >= 0.0, ErrorCode::invalid_argument, "negative runtime");
    if (seconds < 30.0)
        return RuntimeClass::low;
    if (seconds <= 60.0)
        return RuntimeClass::medium;
    return RuntimeClass::high;
}

const char* runtime_class_name(RuntimeClass c) {
    switch (c) {
        case RuntimeClass::low: return "low";
        case RuntimeClass::medium: return "medium";
        case RuntimeClass::high: return "high";
    }
    raise(ErrorCode::internal, "unknown runtime class");
}

}  // namespace wavereg
