/*
 * wavereg — image registration by SIFT features, mutual information, and
 * Gaussian-mixture point sets, each with an optional wavelet enhancement
 * stage, plus a synthetic benchmark harness.
 *
 * C API over the C++ core. All functions returning wr_status report failure
 * details through wr_last_error(); handles are opaque and freed with the
 * matching *_free call. Passing NULL where a handle is required is an error.
 */
#ifndef WAVEREG_H
#define WAVEREG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wr_status {
    WR_OK = 0,
    WR_ERR_INVALID_ARGUMENT = 1,
    WR_ERR_IO = 2,
    WR_ERR_FORMAT = 3,
    WR_ERR_DEGENERATE = 4,
    WR_ERR_REGISTRATION = 5,
    WR_ERR_UNSUPPORTED = 6,
    WR_ERR_INTERNAL = 7
} wr_status;

typedef struct wr_image wr_image;         /* 2D intensity raster */
typedef struct wr_transform wr_transform; /* coordinate mapping, source -> target */
typedef struct wr_config wr_config;       /* key=value tunables over defaults */

const char* wr_version(void);
const char* wr_status_name(wr_status status);
/* Message for the most recent failing call on this thread. */
const char* wr_last_error(void);

/* ---- images ------------------------------------------------------------ */

wr_status wr_image_load_pgm(const char* path, wr_image** out);
wr_status wr_image_create(int width, int height, int source_depth,
                          const double* samples /* row-major, may be NULL for zeros */,
                          wr_image** out);
/* Seeded procedural texture used by the benchmark when no data is at hand. */
wr_status wr_image_test_pattern(int width, int height, uint64_t seed, wr_image** out);
wr_status wr_image_save_pgm8(const wr_image* img, const char* path);
int wr_image_width(const wr_image* img);
int wr_image_height(const wr_image* img);
int wr_image_depth(const wr_image* img);
/* Copies width*height samples into caller storage. */
wr_status wr_image_samples(const wr_image* img, double* out);
void wr_image_free(wr_image* img);

/* ---- transforms ---------------------------------------------------------

   Kinds: translation (2 coefficients), similarity (4: a, b, tx, ty with
   x' = a x - b y + tx, y' = b x + a y + ty), affine (6, rows of the
   augmented matrix), polynomial2 (12: per-axis coefficients over
   1, x, y, x^2, x y, y^2). Text files round-trip bit exactly. */

wr_status wr_transform_create(const char* kind, const double* coeffs, size_t count,
                              wr_transform** out);
wr_status wr_transform_identity(const char* kind, wr_transform** out);
wr_status wr_transform_read(const char* path, wr_transform** out);
wr_status wr_transform_write(const wr_transform* t, const char* path);
const char* wr_transform_kind(const wr_transform* t);
size_t wr_transform_coefficient_count(const wr_transform* t);
wr_status wr_transform_coefficients(const wr_transform* t, double* out);
wr_status wr_transform_apply(const wr_transform* t, double x, double y,
                             double* out_x, double* out_y);
/* Unsupported for polynomial2. */
wr_status wr_transform_invert(const wr_transform* t, wr_transform** out);
void wr_transform_free(wr_transform* t);

/* ---- configuration ------------------------------------------------------ */

wr_status wr_config_create(wr_config** out);
/* Unknown keys are an error; see the README for the key list. */
wr_status wr_config_set(wr_config* cfg, const char* key, const char* value);
wr_status wr_config_load_file(wr_config* cfg, const char* path);
void wr_config_free(wr_config* cfg);

/* ---- registration -------------------------------------------------------

   method: sift | mi | pointset
   enhancement: none | dwt (mi only) | dtcwt (sift, pointset)
   model: translation | similarity | affine | polynomial2 (sift);
          translation | similarity | affine (mi); rigid | affine (pointset).
   The returned transform maps slave coordinates to master coordinates. */

typedef struct wr_run_stats {
    double nccc_raw;        /* Pearson over the re-warped overlap; NaN if unavailable */
    double runtime_seconds;
    char runtime_class[8];  /* "low" | "medium" | "high" */
} wr_run_stats;

wr_status wr_register(const wr_image* master, const wr_image* slave,
                      const char* method, const char* enhancement, const char* model,
                      const wr_config* cfg /* NULL for defaults */, uint64_t seed,
                      wr_transform** out_transform, wr_run_stats* out_stats /* optional */);

/* ---- synthetic pairs ----------------------------------------------------- */

typedef struct wr_synth_spec {
    const char* truth_kind;     /* translation | similarity | affine */
    const double* truth_params; /* coefficient vector for the kind */
    size_t truth_param_count;
    double noise_sigma;     /* intensity standard deviation, >= 0 */
    double intensity_gamma; /* monotone remap exponent, > 0 */
    int degrade_factor;     /* block-mean downsampling, >= 1 */
    uint64_t seed;
} wr_synth_spec;

/* Outputs may be NULL when not wanted. The returned truth maps slave to
   master in the emitted (possibly degraded) frames. */
wr_status wr_make_synthetic_pair(const wr_image* base, const wr_synth_spec* spec,
                                 wr_image** out_master, wr_image** out_slave,
                                 wr_image** out_slave_mask, wr_transform** out_truth);

/* Fills n*n rows of (x, y, u, v): grid sources and their mapped targets. */
wr_status wr_checkpoint_grid(const wr_transform* truth, int slave_width, int slave_height,
                             int n, double* out_xyuv);

/* ---- metrics and resampling ---------------------------------------------- */

/* mask: 0 = excluded, nonzero = included; NULL for the full frame. */
wr_status wr_nccc(const wr_image* a, const wr_image* b, const wr_image* mask, double* out);
wr_status wr_mutual_information(const wr_image* a, const wr_image* b, const wr_image* mask,
                                int bins, double* out);
wr_status wr_warp(const wr_image* img, const wr_transform* t, int out_width, int out_height,
                  wr_image** out_image, wr_image** out_mask);
wr_status wr_rmse_checkpoints(const wr_transform* t, const double* xyuv, size_t count,
                              double* out);
/* "low" (< 30 s), "medium" (30-60 s), "high" (> 60 s); NULL on negative input. */
const char* wr_runtime_class(double seconds);

/* ---- wavelet inspection --------------------------------------------------

   type: haar | dtcwt. Decompose writes per-subband PGMs rescaled to 8 bits
   plus <prefix>_manifest.csv with the true coefficient ranges. Control
   points go to CSV as x,y,level,modulus. */

wr_status wr_wavelet_decompose_dump(const wr_image* img, const char* type, int levels,
                                    const char* out_prefix);
wr_status wr_wavelet_control_points_csv(const wr_image* img, const char* type, int level,
                                        double percentile, const char* out_csv);

/* ---- benchmark ----------------------------------------------------------- */

/* Runs the suite file and writes the report CSV; returns the row count
   through out_rows when non-NULL. */
wr_status wr_benchmark_run(const char* suite_path, const char* out_csv, int jobs,
                           size_t* out_rows);

#ifdef __cplusplus
}
#endif

#endif /* WAVEREG_H */
