// wavereg command-line tool. Everything goes through the public C API in
// wavereg.h; exit codes: 0 success, 1 usage/input error, 2 registration or
// other algorithmic failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "wavereg.h"

namespace {

int exit_code_for(wr_status status) {
    switch (status) {
        case WR_OK:
            return 0;
        case WR_ERR_REGISTRATION:
        case WR_ERR_DEGENERATE:
        case WR_ERR_INTERNAL:
            return 2;
        default:
            return 1;
    }
}

int report_failure(const char* what, wr_status status) {
    std::cerr << "error: " << what << ": " << wr_last_error() << "\n";
    return exit_code_for(status);
}

struct ImageHandle {
    wr_image* p = nullptr;
    ~ImageHandle() { wr_image_free(p); }
};
struct TransformHandle {
    wr_transform* p = nullptr;
    ~TransformHandle() { wr_transform_free(p); }
};
struct ConfigHandle {
    wr_config* p = nullptr;
    ~ConfigHandle() { wr_config_free(p); }
};

// --config file plus repeated --set key=value overrides.
int build_config(const std::string& config_path, const std::vector<std::string>& sets,
                 ConfigHandle& out) {
    wr_status st = wr_config_create(&out.p);
    if (st != WR_OK)
        return report_failure("config", st);
    if (!config_path.empty()) {
        st = wr_config_load_file(out.p, config_path.c_str());
        if (st != WR_OK)
            return report_failure("config", st);
    }
    for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
            return 1;
        }
        st = wr_config_set(out.p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        if (st != WR_OK)
            return report_failure("config", st);
    }
    return 0;
}

std::vector<double> parse_params_csv(const std::string& csv, bool& ok) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    ok = true;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                ok = false;
        } catch (...) {
            ok = false;
        }
    }
    return out;
}

int run_register(const std::string& method, const std::string& enhance,
                 const std::string& master_path, const std::string& slave_path,
                 const std::string& model, const std::string& out_path,
                 const std::string& report_path, const std::string& config_path,
                 const std::vector<std::string>& sets, uint64_t seed) {
    ConfigHandle cfg;
    if (int rc = build_config(config_path, sets, cfg))
        return rc;

    ImageHandle master, slave;
    wr_status st = wr_image_load_pgm(master_path.c_str(), &master.p);
    if (st != WR_OK)
        return report_failure("master image", st);
    st = wr_image_load_pgm(slave_path.c_str(), &slave.p);
    if (st != WR_OK)
        return report_failure("slave image", st);

    TransformHandle t;
    wr_run_stats stats{};
    st = wr_register(master.p, slave.p, method.c_str(), enhance.c_str(), model.c_str(), cfg.p,
                     seed, &t.p, &stats);
    if (st != WR_OK)
        return report_failure("register", st);

    st = wr_transform_write(t.p, out_path.c_str());
    if (st != WR_OK)
        return report_failure("write transform", st);

    if (!report_path.empty()) {
        std::ofstream rep(report_path, std::ios::binary);
        if (!rep.good()) {
            std::cerr << "error: cannot open report file '" << report_path << "'\n";
            return 1;
        }
        rep << "pair,method,enhancement,model,trial,seed,nccc_raw,nccc_display,rmse_px,"
               "runtime_s,runtime_class,status,notes\n";
        char line[512];
        const double shown = stats.nccc_raw < 0 ? 0.0 : stats.nccc_raw;
        std::snprintf(line, sizeof(line), "%s,%s,%s,%s,0,%llu,%.6f,%.6f,nan,%.6f,%s,ok,%s\n",
                      std::filesystem::path(master_path).filename().string().c_str(),
                      method.c_str(), enhance.c_str(), model.c_str(),
                      static_cast<unsigned long long>(seed), stats.nccc_raw, shown,
                      stats.runtime_seconds, stats.runtime_class, "no_ground_truth");
        rep << line;
    }

    std::printf("registered %s -> %s (%s/%s, model %s): nccc=%.4f runtime=%.3fs [%s]\n",
                slave_path.c_str(), master_path.c_str(), method.c_str(), enhance.c_str(),
                model.c_str(), stats.nccc_raw, stats.runtime_seconds, stats.runtime_class);
    return 0;
}

int run_synth(const std::string& input, const std::string& truth_kind, const std::string& params,
              double noise_sigma, double gamma, int degrade, uint64_t seed,
              const std::string& out_dir, int checkpoints) {
    bool ok = false;
    const std::vector<double> coeffs = parse_params_csv(params, ok);
    if (!ok) {
        std::cerr << "error: --params expects a comma-separated list of numbers\n";
        return 1;
    }

    ImageHandle base;
    wr_status st = wr_image_load_pgm(input.c_str(), &base.p);
    if (st != WR_OK)
        return report_failure("input image", st);

    wr_synth_spec spec{};
    spec.truth_kind = truth_kind.c_str();
    spec.truth_params = coeffs.data();
    spec.truth_param_count = coeffs.size();
    spec.noise_sigma = noise_sigma;
    spec.intensity_gamma = gamma;
    spec.degrade_factor = degrade;
    spec.seed = seed;

    ImageHandle master, slave, mask;
    TransformHandle truth;
    st = wr_make_synthetic_pair(base.p, &spec, &master.p, &slave.p, &mask.p, &truth.p);
    if (st != WR_OK)
        return report_failure("synthetic pair", st);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::string prefix = out_dir + "/";
    if ((st = wr_image_save_pgm8(master.p, (prefix + "master.pgm").c_str())) != WR_OK)
        return report_failure("write master.pgm", st);
    if ((st = wr_image_save_pgm8(slave.p, (prefix + "slave.pgm").c_str())) != WR_OK)
        return report_failure("write slave.pgm", st);
    if ((st = wr_image_save_pgm8(mask.p, (prefix + "slave_mask.pgm").c_str())) != WR_OK)
        return report_failure("write slave_mask.pgm", st);
    if ((st = wr_transform_write(truth.p, (prefix + "truth.txt").c_str())) != WR_OK)
        return report_failure("write truth.txt", st);

    std::vector<double> grid(static_cast<size_t>(checkpoints) * checkpoints * 4);
    st = wr_checkpoint_grid(truth.p, wr_image_width(slave.p), wr_image_height(slave.p),
                            checkpoints, grid.data());
    if (st != WR_OK)
        return report_failure("checkpoint grid", st);
    std::ofstream cp(prefix + "checkpoints.csv", std::ios::binary);
    if (!cp.good()) {
        std::cerr << "error: cannot open '" << prefix << "checkpoints.csv'\n";
        return 1;
    }
    cp << "x,y,u,v\n";
    char line[256];
    for (int i = 0; i < checkpoints * checkpoints; ++i) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", grid[4 * i], grid[4 * i + 1],
                      grid[4 * i + 2], grid[4 * i + 3]);
        cp << line;
    }
    std::printf("synthetic pair written to %s (master.pgm, slave.pgm, slave_mask.pgm, "
                "truth.txt, checkpoints.csv)\n", out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavereg: wavelet-enhanced image registration toolkit"};
    app.require_subcommand(1);

    // register
    std::string method, enhance = "none", master_path, slave_path, model = "affine";
    std::string out_path, report_path, config_path;
    std::vector<std::string> sets;
    uint64_t seed = 0;
    auto* reg = app.add_subcommand("register", "Register a slave image onto a master image");
    reg->add_option("--method", method, "Registration method: sift|mi|pointset")->required();
    reg->add_option("--enhance", enhance, "Wavelet enhancement: none|dwt|dtcwt (default none)");
    reg->add_option("--master", master_path, "Master (reference) PGM image")->required();
    reg->add_option("--slave", slave_path, "Slave (moving) PGM image")->required();
    reg->add_option("--model", model, "Transform model (default affine)");
    reg->add_option("--out", out_path, "Output transform text file")->required();
    reg->add_option("--report", report_path, "Optional single-row report CSV");
    reg->add_option("--config", config_path, "key = value config file");
    reg->add_option("--set", sets, "Config override key=value (repeatable)");
    reg->add_option("--seed", seed, "Seed for all randomized steps (default 0)");

    // synth
    std::string synth_input, truth_kind, truth_params, synth_out_dir;
    double noise_sigma = 0.0, gamma = 1.0;
    int degrade = 1, checkpoints = 5;
    uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic master/slave pair");
    synth->add_option("--input", synth_input, "Base PGM image")->required();
    synth->add_option("--truth", truth_kind, "Ground-truth kind: translation|similarity|affine")
        ->required();
    synth->add_option("--params", truth_params, "Comma-separated truth coefficients")->required();
    synth->add_option("--noise-sigma", noise_sigma, "Gaussian noise std-dev (default 0)");
    synth->add_option("--gamma", gamma, "Intensity remap exponent (default 1)");
    synth->add_option("--degrade", degrade, "Block-mean downsampling factor (default 1)");
    synth->add_option("--seed", synth_seed, "Noise seed (default 0)");
    synth->add_option("--checkpoints", checkpoints, "Checkpoint grid size n for n*n (default 5)");
    synth->add_option("--out-dir", synth_out_dir, "Output directory")->required();

    // benchmark
    std::string suite_path, bench_out;
    int jobs = 1;
    auto* bench = app.add_subcommand("benchmark", "Run a benchmark suite and write the report CSV");
    bench->add_option("--suite", suite_path, "Suite configuration file")->required();
    bench->add_option("--out", bench_out, "Output CSV path")->required();
    bench->add_option("--jobs", jobs, "Parallel registration jobs (default 1)");

    // wavelet
    auto* wav = app.add_subcommand("wavelet", "Wavelet decomposition inspection tools");
    wav->require_subcommand(1);
    std::string wtype = "haar", winput, wprefix, wout;
    int wlevels = 1, wlevel = 2;
    double wpercentile = 95.0;
    auto* dec = wav->add_subcommand("decompose", "Write subband PGMs plus a range manifest");
    dec->add_option("--type", wtype, "haar|dtcwt (default haar)");
    dec->add_option("--levels", wlevels, "Decomposition depth")->required();
    dec->add_option("--input", winput, "Input PGM image")->required();
    dec->add_option("--out-prefix", wprefix, "Output path prefix")->required();
    auto* cpts = wav->add_subcommand("controlpoints", "Write modulus-maxima control points CSV");
    cpts->add_option("--type", wtype, "haar|dtcwt (default haar)");
    cpts->add_option("--level", wlevel, "Detection level (default 2)");
    cpts->add_option("--percentile", wpercentile, "Modulus threshold percentile (default 95)");
    cpts->add_option("--input", winput, "Input PGM image")->required();
    cpts->add_option("--out", wout, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage problems are exit 1, --help is 0
    }

    if (reg->parsed())
        return run_register(method, enhance, master_path, slave_path, model, out_path,
                            report_path, config_path, sets, seed);

    if (synth->parsed())
        return run_synth(synth_input, truth_kind, truth_params, noise_sigma, gamma, degrade,
                         synth_seed, synth_out_dir, checkpoints);

    if (bench->parsed()) {
        size_t rows = 0;
        const wr_status st = wr_benchmark_run(suite_path.c_str(), bench_out.c_str(), jobs, &rows);
        if (st != WR_OK)
            return report_failure("benchmark", st);
        std::printf("benchmark complete: %zu rows -> %s\n", rows, bench_out.c_str());
        return 0;
    }

    if (wav->parsed()) {
        ImageHandle img;
        wr_status st = wr_image_load_pgm(winput.c_str(), &img.p);
        if (st != WR_OK)
            return report_failure("input image", st);
        if (dec->parsed()) {
            st = wr_wavelet_decompose_dump(img.p, wtype.c_str(), wlevels, wprefix.c_str());
            if (st != WR_OK)
                return report_failure("decompose", st);
            std::printf("subbands written with prefix %s\n", wprefix.c_str());
            return 0;
        }
        st = wr_wavelet_control_points_csv(img.p, wtype.c_str(), wlevel, wpercentile,
                                           wout.c_str());
        if (st != WR_OK)
            return report_failure("controlpoints", st);
        std::printf("control points written to %s\n", wout.c_str());
        return 0;
    }
    return 1;
}
