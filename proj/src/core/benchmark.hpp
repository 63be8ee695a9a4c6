#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/pipeline.hpp"

namespace wavereg {

struct RegistrationReport {
    std::string pair;
    Method method = Method::sift;
    Enhancement enhancement = Enhancement::none;
    std::string model;
    int trial = 0;
    std::uint64_t seed = 0;
    double nccc_raw = 0.0;   // NaN when unavailable
    double rmse_px = 0.0;    // NaN when unavailable
    double runtime_s = 0.0;
    std::string runtime_class;
    bool ok = false;
    std::string notes;
};

struct BenchmarkCell {
    Method method = Method::sift;
    Enhancement enhancement = Enhancement::none;
    std::string model = "affine";
};

struct BenchmarkSuite {
    std::vector<std::string> images;  // file paths or synth:WxH:SEED specs
    int trials = 5;
    std::uint64_t seed = 0;
    TransformKind truth_kind = TransformKind::similarity;
    double max_rotation_deg = 10.0;
    double scale_min = 0.9;
    double scale_max = 1.15;
    double max_translation = 8.0;
    double shear_max = 0.0;  // only used by affine truths
    double noise_sigma_frac = 0.02;  // fraction of the intensity range
    double gamma = 1.0;
    int degrade = 2;
    int checkpoints = 5;
    std::vector<BenchmarkCell> cells;
    Config config;
    std::string base_dir;  // directory of the suite file, for relative paths
};

// Flat key=value file with repeated [cell] sections; diagnostics carry line
// numbers. `option.<key>` lines override registration config values.
BenchmarkSuite parse_suite(const std::string& path);

// Runs every (image, cell, trial) combination, writes the report CSV (rows
// plus a `# summary` comment block) and returns the rows. Individual run
// failures become error rows; they never abort the suite.
std::vector<RegistrationReport> run_benchmark(const BenchmarkSuite& suite,
                                              const std::string& out_csv, int jobs);

// Loads a suite base image: a plain PGM path or a synth:WxH:SEED spec.
ImageGrid load_base_image(const std::string& spec, const std::string& base_dir);

}  // namespace wavereg
