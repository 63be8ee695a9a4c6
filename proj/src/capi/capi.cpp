#include "wavereg.h"

#include <cstring>
#include <new>
#include <string>

#include "core/benchmark.hpp"
#include "core/config.hpp"
#include "core/error.hpp"
#include "core/image.hpp"
#include "core/metrics.hpp"
#include "core/mi.hpp"
#include "core/pipeline.hpp"
#include "core/transform.hpp"
#include "core/wavelet.hpp"

using namespace wavereg;

struct wr_image {
    ImageGrid grid;
};
struct wr_transform {
    TransformModel model;
};
struct wr_config {
    Config config;
};

namespace {

thread_local std::string g_last_error;

wr_status code_of(const Error& e) {
    switch (e.code()) {
        case ErrorCode::invalid_argument: return WR_ERR_INVALID_ARGUMENT;
        case ErrorCode::io: return WR_ERR_IO;
        case ErrorCode::format: return WR_ERR_FORMAT;
        case ErrorCode::degenerate: return WR_ERR_DEGENERATE;
        case ErrorCode::registration_failure: return WR_ERR_REGISTRATION;
        case ErrorCode::unsupported: return WR_ERR_UNSUPPORTED;
        case ErrorCode::internal: return WR_ERR_INTERNAL;
    }
    return WR_ERR_INTERNAL;
}

// Every API entry funnels through here so exceptions never cross the ABI.
template <typename F>
wr_status guarded(F&& f) {
    try {
        f();
        return WR_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return code_of(e);
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return WR_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return WR_ERR_INTERNAL;
    }
}

wr_status fail_arg(const char* message) {
    g_last_error = message;
    return WR_ERR_INVALID_ARGUMENT;
}

Mask mask_from_image(const ImageGrid& img) {
    Mask m;
    m.width = img.width;
    m.height = img.height;
    m.valid.resize(img.size());
    for (std::size_t i = 0; i < img.size(); ++i)
        m.valid[i] = img.samples[i] != 0.0 ? 255 : 0;
    return m;
}

wr_image* image_from_mask(const Mask& mask) {
    auto* out = new wr_image;
    out->grid = ImageGrid::zeros(mask.width, mask.height, 8);
    for (std::size_t i = 0; i < mask.valid.size(); ++i)
        out->grid.samples[i] = mask.valid[i] ? 255.0 : 0.0;
    return out;
}

}  // namespace

extern "C" {

const char* wr_version(void) {
    return "1.0.0";
}

const char* wr_status_name(wr_status status) {
    switch (status) {
        case WR_OK: return "ok";
        case WR_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case WR_ERR_IO: return "io";
        case WR_ERR_FORMAT: return "format";
        case WR_ERR_DEGENERATE: return "degenerate";
        case WR_ERR_REGISTRATION: return "registration_failure";
        case WR_ERR_UNSUPPORTED: return "unsupported";
        case WR_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* wr_last_error(void) {
    return g_last_error.c_str();
}

/* ---- images ---- */

wr_status wr_image_load_pgm(const char* path, wr_image** out) {
    if (!path || !out) return fail_arg("null argument");
    return guarded([&] { *out = new wr_image{load_pgm(path)}; });
}

wr_status wr_image_create(int width, int height, int source_depth, const double* samples,
                          wr_image** out) {
    if (!out) return fail_arg("null output pointer");
    return guarded([&] {
        require(source_depth == 8 || source_depth == 16, ErrorCode::invalid_argument,
                "source_depth must be 8 or 16");
        auto img = ImageGrid::zeros(width, height, source_depth);
        if (samples)
            std::copy(samples, samples + img.size(), img.samples.begin());
        *out = new wr_image{std::move(img)};
    });
}

wr_status wr_image_test_pattern(int width, int height, uint64_t seed, wr_image** out) {
    if (!out) return fail_arg("null output pointer");
    return guarded([&] { *out = new wr_image{make_test_image(width, height, seed)}; });
}

wr_status wr_image_save_pgm8(const wr_image* img, const char* path) {
    if (!img || !path) return fail_arg("null argument");
    return guarded([&] { save_pgm8(img->grid, path); });
}

int wr_image_width(const wr_image* img) { return img ? img->grid.width : 0; }
int wr_image_height(const wr_image* img) { return img ? img->grid.height : 0; }
int wr_image_depth(const wr_image* img) { return img ? img->grid.source_depth : 0; }

wr_status wr_image_samples(const wr_image* img, double* out) {
    if (!img || !out) return fail_arg("null argument");
    std::copy(img->grid.samples.begin(), img->grid.samples.end(), out);
    return WR_OK;
}

void wr_image_free(wr_image* img) { delete img; }

/* ---- transforms ---- */

wr_status wr_transform_create(const char* kind, const double* coeffs, size_t count,
                              wr_transform** out) {
    if (!kind || !coeffs || !out) return fail_arg("null argument");
    return guarded([&] {
        const TransformKind k = kind_from_name(kind);
        require(count == coefficient_count(k), ErrorCode::invalid_argument,
                std::string("kind '") + kind + "' needs " +
                std::to_string(coefficient_count(k)) + " coefficients, got " +
                std::to_string(count));
        *out = new wr_transform{TransformModel{k, std::vector<double>(coeffs, coeffs + count)}};
    });
}

wr_status wr_transform_identity(const char* kind, wr_transform** out) {
    if (!kind || !out) return fail_arg("null argument");
    return guarded([&] {
        *out = new wr_transform{TransformModel::identity(kind_from_name(kind))};
    });
}

wr_status wr_transform_read(const char* path, wr_transform** out) {
    if (!path || !out) return fail_arg("null argument");
    return guarded([&] { *out = new wr_transform{read_transform(path)}; });
}

wr_status wr_transform_write(const wr_transform* t, const char* path) {
    if (!t || !path) return fail_arg("null argument");
    return guarded([&] { write_transform(t->model, path); });
}

const char* wr_transform_kind(const wr_transform* t) {
    return t ? kind_name(t->model.kind) : "";
}

size_t wr_transform_coefficient_count(const wr_transform* t) {
    return t ? t->model.coefficients.size() : 0;
}

wr_status wr_transform_coefficients(const wr_transform* t, double* out) {
    if (!t || !out) return fail_arg("null argument");
    std::copy(t->model.coefficients.begin(), t->model.coefficients.end(), out);
    return WR_OK;
}

wr_status wr_transform_apply(const wr_transform* t, double x, double y,
                             double* out_x, double* out_y) {
    if (!t || !out_x || !out_y) return fail_arg("null argument");
    return guarded([&] {
        const Point p = apply(t->model, {x, y});
        *out_x = p.x;
        *out_y = p.y;
    });
}

wr_status wr_transform_invert(const wr_transform* t, wr_transform** out) {
    if (!t || !out) return fail_arg("null argument");
    return guarded([&] { *out = new wr_transform{invert(t->model)}; });
}

void wr_transform_free(wr_transform* t) { delete t; }

/* ---- configuration ---- */

wr_status wr_config_create(wr_config** out) {
    if (!out) return fail_arg("null output pointer");
    return guarded([&] { *out = new wr_config{}; });
}

wr_status wr_config_set(wr_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail_arg("null argument");
    return guarded([&] { cfg->config.set(key, value); });
}

wr_status wr_config_load_file(wr_config* cfg, const char* path) {
    if (!cfg || !path) return fail_arg("null argument");
    return guarded([&] { cfg->config.load_file(path); });
}

void wr_config_free(wr_config* cfg) { delete cfg; }

/* ---- registration ---- */

wr_status wr_register(const wr_image* master, const wr_image* slave, const char* method,
                      const char* enhancement, const char* model, const wr_config* cfg,
                      uint64_t seed, wr_transform** out_transform, wr_run_stats* out_stats) {
    if (!master || !slave || !method || !enhancement || !model || !out_transform)
        return fail_arg("null argument");
    return guarded([&] {
        const Config defaults;
        const Config& config = cfg ? cfg->config : defaults;
        const RegistrationOutcome outcome =
            run_registration(master->grid, slave->grid, method_from_name(method),
                             enhancement_from_name(enhancement), model, config, seed);
        if (out_stats) {
            out_stats->nccc_raw = std::numeric_limits<double>::quiet_NaN();
            out_stats->runtime_seconds = outcome.seconds;
            std::snprintf(out_stats->runtime_class, sizeof(out_stats->runtime_class), "%s",
                          runtime_class_name(runtime_class(outcome.seconds)));
            try {
                const WarpResult warped = warp(slave->grid, outcome.transform,
                                               master->grid.width, master->grid.height);
                out_stats->nccc_raw = nccc(master->grid, warped.image, &warped.mask);
            } catch (const Error&) {
                // NCCC stays NaN (e.g. polynomial2 output cannot be warped).
            }
        }
        *out_transform = new wr_transform{outcome.transform};
    });
}

/* ---- synthetic pairs ---- */

wr_status wr_make_synthetic_pair(const wr_image* base, const wr_synth_spec* spec,
                                 wr_image** out_master, wr_image** out_slave,
                                 wr_image** out_slave_mask, wr_transform** out_truth) {
    if (!base || !spec || !spec->truth_kind || !spec->truth_params)
        return fail_arg("null argument");
    return guarded([&] {
        const TransformKind k = kind_from_name(spec->truth_kind);
        require(spec->truth_param_count == coefficient_count(k), ErrorCode::invalid_argument,
                std::string("truth kind '") + spec->truth_kind + "' needs " +
                std::to_string(coefficient_count(k)) + " coefficients, got " +
                std::to_string(spec->truth_param_count));
        SyntheticPairSpec s;
        s.ground_truth = TransformModel{
            k, std::vector<double>(spec->truth_params,
                                   spec->truth_params + spec->truth_param_count)};
        s.noise_sigma = spec->noise_sigma;
        s.intensity_gamma = spec->intensity_gamma;
        s.degrade_factor = spec->degrade_factor;
        s.seed = spec->seed;
        SyntheticPair pair = make_synthetic_pair(base->grid, s);
        if (out_master) *out_master = new wr_image{std::move(pair.master)};
        if (out_slave) *out_slave = new wr_image{std::move(pair.slave)};
        if (out_slave_mask) *out_slave_mask = image_from_mask(pair.slave_mask);
        if (out_truth) *out_truth = new wr_transform{std::move(pair.truth)};
    });
}

wr_status wr_checkpoint_grid(const wr_transform* truth, int slave_width, int slave_height,
                             int n, double* out_xyuv) {
    if (!truth || !out_xyuv) return fail_arg("null argument");
    return guarded([&] {
        const auto checks = checkpoint_grid(truth->model, slave_width, slave_height, n);
        for (std::size_t i = 0; i < checks.size(); ++i) {
            out_xyuv[4 * i + 0] = checks[i].src.x;
            out_xyuv[4 * i + 1] = checks[i].src.y;
            out_xyuv[4 * i + 2] = checks[i].dst.x;
            out_xyuv[4 * i + 3] = checks[i].dst.y;
        }
    });
}

/* ---- metrics ---- */

wr_status wr_nccc(const wr_image* a, const wr_image* b, const wr_image* mask, double* out) {
    if (!a || !b || !out) return fail_arg("null argument");
    return guarded([&] {
        if (mask) {
            const Mask m = mask_from_image(mask->grid);
            *out = nccc(a->grid, b->grid, &m);
        } else {
            *out = nccc(a->grid, b->grid, nullptr);
        }
    });
}

wr_status wr_mutual_information(const wr_image* a, const wr_image* b, const wr_image* mask,
                                int bins, double* out) {
    if (!a || !b || !out) return fail_arg("null argument");
    return guarded([&] {
        if (mask) {
            const Mask m = mask_from_image(mask->grid);
            *out = mutual_information(a->grid, b->grid, &m, bins);
        } else {
            *out = mutual_information(a->grid, b->grid, nullptr, bins);
        }
    });
}

wr_status wr_warp(const wr_image* img, const wr_transform* t, int out_width, int out_height,
                  wr_image** out_image, wr_image** out_mask) {
    if (!img || !t || !out_image) return fail_arg("null argument");
    return guarded([&] {
        WarpResult r = warp(img->grid, t->model, out_width, out_height);
        *out_image = new wr_image{std::move(r.image)};
        if (out_mask)
            *out_mask = image_from_mask(r.mask);
    });
}

wr_status wr_rmse_checkpoints(const wr_transform* t, const double* xyuv, size_t count,
                              double* out) {
    if (!t || !xyuv || !out) return fail_arg("null argument");
    return guarded([&] {
        std::vector<Correspondence> checks(count);
        for (std::size_t i = 0; i < count; ++i)
            checks[i] = {{xyuv[4 * i], xyuv[4 * i + 1]}, {xyuv[4 * i + 2], xyuv[4 * i + 3]}, 1.0};
        *out = rmse_checkpoints(t->model, checks);
    });
}

const char* wr_runtime_class(double seconds) {
    if (seconds < 0.0)
        return nullptr;
    return runtime_class_name(runtime_class(seconds));
}

/* ---- wavelet inspection ---- */

wr_status wr_wavelet_decompose_dump(const wr_image* img, const char* type, int levels,
                                    const char* out_prefix) {
    if (!img || !type || !out_prefix) return fail_arg("null argument");
    return guarded([&] { dump_decomposition(img->grid, type, levels, out_prefix); });
}

wr_status wr_wavelet_control_points_csv(const wr_image* img, const char* type, int level,
                                        double percentile, const char* out_csv) {
    if (!img || !type || !out_csv) return fail_arg("null argument");
    return guarded([&] {
        std::vector<ControlPoint> points;
        if (std::strcmp(type, "haar") == 0)
            points = wavelet_control_points(img->grid, level, percentile);
        else if (std::strcmp(type, "dtcwt") == 0)
            points = dtcwt_control_points(img->grid, level, percentile);
        else
            raise(ErrorCode::invalid_argument,
                  std::string("unknown control-point type '") + type + "' (haar|dtcwt)");
        write_control_points_csv(points, out_csv);
    });
}

/* ---- benchmark ---- */

wr_status wr_benchmark_run(const char* suite_path, const char* out_csv, int jobs,
                           size_t* out_rows) {
    if (!suite_path || !out_csv) return fail_arg("null argument");
    return guarded([&] {
        const BenchmarkSuite suite = parse_suite(suite_path);
        const auto rows = run_benchmark(suite, out_csv, jobs);
        if (out_rows)
            *out_rows = rows.size();
    });
}

}  // extern "C"
