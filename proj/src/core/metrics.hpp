#pragma once

#include <span>
#include <string>

#include "core/image.hpp"
#include "core/transform.hpp"

namespace wavereg {

// Pearson correlation of the overlap intensities. The mask may be null
// (full overlap). Errors if both images are constant over the overlap;
// returns 0 when exactly one is.
double nccc(const ImageGrid& a, const ImageGrid& b, const Mask* mask);

// Displayed value per the [0,1] reporting convention; raw value kept in CSVs.
inline double nccc_display(double raw) { return raw < 0.0 ? 0.0 : raw; }

// sqrt(mean ||T(src) - dst||^2) over held-out checkpoints.
double rmse_checkpoints(const TransformModel& t, std::span<const Correspondence> checks);

enum class RuntimeClass { low, medium, high };

RuntimeClass runtime_class(double seconds);
const char* runtime_class_name(RuntimeClass c);

}  // namespace wavereg
