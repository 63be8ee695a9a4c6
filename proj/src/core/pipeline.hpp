#pragma once

#include <cstdint>
#include <string>

#include "core/config.hpp"
#include "core/image.hpp"
#include "core/transform.hpp"

namespace wavereg {

enum class Method { sift, mi, pointset };
enum class Enhancement { none, dwt, dtcwt };

Method method_from_name(const std::string& name);
Enhancement enhancement_from_name(const std::string& name);
const char* method_name(Method m);
const char* enhancement_name(Enhancement e);

// Errors unless the pairing is one of: mi + none|dwt, sift + none|dtcwt,
// pointset + none|dtcwt.
void validate_method_enhancement(Method method, Enhancement enhancement);

struct RegistrationOutcome {
    TransformModel transform;  // slave -> master
    double seconds = 0.0;      // wall clock of the registration call
};

// End-to-end registration dispatch shared by the CLI, the C API and the
// benchmark runner. `model_name` accepts the transform kinds, plus "rigid"
// for the point-set method.
RegistrationOutcome run_registration(const ImageGrid& master, const ImageGrid& slave,
                                     Method method, Enhancement enhancement,
                                     const std::string& model_name, const Config& cfg,
                                     std::uint64_t seed);

}  // namespace wavereg
