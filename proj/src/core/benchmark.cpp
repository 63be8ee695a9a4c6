#include "core/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"

namespace wavereg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string dirname_of(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

double parse_double(const std::string& v, const std::string& where) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    require(end && *end == '\0' && end != v.c_str(), ErrorCode::format,
            where + ": not a number: '" + v + "'");
    return d;
}

long parse_long(const std::string& v, const std::string& where) {
    char* end = nullptr;
    const long n = std::strtol(v.c_str(), &end, 10);
    require(end && *end == '\0' && end != v.c_str(), ErrorCode::format,
            where + ": not an integer: '" + v + "'");
    return n;
}

}  // namespace

ImageGrid load_base_image(const std::string& spec, const std::string& base_dir) {
    if (spec.rfind("synth:", 0) == 0) {
        unsigned w = 0, h = 0;
        unsigned long long seed = 0;
        require(std::sscanf(spec.c_str(), "synth:%ux%u:%llu", &w, &h, &seed) == 3,
                ErrorCode::format, "bad synthetic image spec '" + spec + "' (synth:WxH:SEED)");
        return make_test_image(static_cast<int>(w), static_cast<int>(h), seed);
    }
    const std::string path = (!spec.empty() && spec[0] == '/') ? spec : base_dir + "/" + spec;
    return load_pgm(path);
}

BenchmarkSuite parse_suite(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::io, "cannot open suite file '" + path + "'");

    BenchmarkSuite suite;
    suite.base_dir = dirname_of(path);

    BenchmarkCell cell;
    bool in_cell = false;
    bool cell_has_method = false, cell_has_enh = false;

    auto finish_cell = [&](int line_no) {
        if (!in_cell)
            return;
        require(cell_has_method && cell_has_enh, ErrorCode::format,
                path + ":" + std::to_string(line_no) + ": [cell] needs method and enhancement");
        validate_method_enhancement(cell.method, cell.enhancement);
        suite.cells.push_back(cell);
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = path + ":" + std::to_string(line_no);
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        if (line == "[cell]") {
            finish_cell(line_no);
            in_cell = true;
            cell = BenchmarkCell{};
            cell_has_method = cell_has_enh = false;
            continue;
        }

        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::format, where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (in_cell) {
            if (key == "method") {
                cell.method = method_from_name(value);
                cell_has_method = true;
            } else if (key == "enhancement") {
                cell.enhancement = enhancement_from_name(value);
                cell_has_enh = true;
            } else if (key == "model") {
                cell.model = value;
            } else {
                raise(ErrorCode::format, where + ": unknown cell key '" + key + "'");
            }
            continue;
        }

        if (key == "image") suite.images.push_back(value);
        else if (key == "trials") suite.trials = static_cast<int>(parse_long(value, where));
        else if (key == "seed") suite.seed = static_cast<std::uint64_t>(parse_long(value, where));
        else if (key == "truth") suite.truth_kind = kind_from_name(value);
        else if (key == "max_rotation_deg") suite.max_rotation_deg = parse_double(value, where);
        else if (key == "scale_min") suite.scale_min = parse_double(value, where);
        else if (key == "scale_max") suite.scale_max = parse_double(value, where);
        else if (key == "max_translation") suite.max_translation = parse_double(value, where);
        else if (key == "shear_max") suite.shear_max = parse_double(value, where);
        else if (key == "noise_sigma_frac") suite.noise_sigma_frac = parse_double(value, where);
        else if (key == "gamma") suite.gamma = parse_double(value, where);
        else if (key == "degrade") suite.degrade = static_cast<int>(parse_long(value, where));
        else if (key == "checkpoints") suite.checkpoints = static_cast<int>(parse_long(value, where));
        else if (key.rfind("option.", 0) == 0) {
            try {
                suite.config.set(key.substr(7), value);
            } catch (const Error& e) {
                raise(ErrorCode::format, where + ": " + e.what());
            }
        } else {
            raise(ErrorCode::format, where + ": unknown suite key '" + key + "'");
        }
    }
    finish_cell(line_no);

    require(!suite.images.empty(), ErrorCode::format, path + ": suite lists no images");
    require(!suite.cells.empty(), ErrorCode::format, path + ": suite lists no [cell] sections");
    require(suite.trials >= 1, ErrorCode::format, path + ": trials must be >= 1");
    require(suite.truth_kind != TransformKind::polynomial2, ErrorCode::format,
            path + ": polynomial2 ground truth is not invertible; use translation|similarity|affine");
    return suite;
}

namespace {

TransformModel random_truth(const BenchmarkSuite& suite, const ImageGrid& img,
                            std::size_t image_idx, int trial) {
    Rng rng(suite.seed, "truth", image_idx, static_cast<std::uint64_t>(trial));
    const double tx = rng.uniform(-suite.max_translation, suite.max_translation);
    const double ty = rng.uniform(-suite.max_translation, suite.max_translation);
    if (suite.truth_kind == TransformKind::translation)
        return TransformModel::make_translation(tx, ty);

    const double rot = rng.uniform(-suite.max_rotation_deg, suite.max_rotation_deg) *
                       (3.14159265358979323846 / 180.0);
    const double scale = rng.uniform(suite.scale_min, suite.scale_max);
    const Point c{(img.width - 1) / 2.0, (img.height - 1) / 2.0};
    if (suite.truth_kind == TransformKind::similarity)
        return TransformModel::make_similarity_about(c, scale, rot, tx, ty);

    const double sh = rng.uniform(-suite.shear_max, suite.shear_max);
    const double a = scale * std::cos(rot), b = scale * std::sin(rot);
    // M = s R(rot) * [[1, sh], [0, 1]] applied about the image center.
    const double m11 = a, m12 = a * sh - b;
    const double m21 = b, m22 = b * sh + a;
    return TransformModel::make_affine(m11, m12, c.x - (m11 * c.x + m12 * c.y) + tx,
                                       m21, m22, c.y - (m21 * c.x + m22 * c.y) + ty);
}

std::string sanitize_note(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r')
            c = ';';
    return s;
}

std::string fmt(double v) {
    if (std::isnan(v))
        return "nan";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

double median_of(std::vector<double> v) {
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<RegistrationReport> run_benchmark(const BenchmarkSuite& suite,
                                              const std::string& out_csv, int jobs) {
    // Synthetic pairs are shared across cells so every method sees the same data.
    struct PairData {
        SyntheticPair pair;
        std::vector<Correspondence> checks;
    };
    std::vector<std::vector<PairData>> pairs(suite.images.size());
    for (std::size_t i = 0; i < suite.images.size(); ++i) {
        const ImageGrid base = load_base_image(suite.images[i], suite.base_dir);
        for (int t = 0; t < suite.trials; ++t) {
            SyntheticPairSpec spec;
            spec.ground_truth = random_truth(suite, base, i, t);
            spec.noise_sigma = suite.noise_sigma_frac * base.range_max();
            spec.intensity_gamma = suite.gamma;
            spec.degrade_factor = suite.degrade;
            spec.seed = derive_seed(suite.seed, "synth", i, static_cast<std::uint64_t>(t));
            PairData pd;
            pd.pair = make_synthetic_pair(base, spec);
            pd.checks = checkpoint_grid(pd.pair.truth, pd.pair.slave.width,
                                        pd.pair.slave.height, suite.checkpoints);
            pairs[i].push_back(std::move(pd));
        }
    }

    struct Task {
        std::size_t image_idx;
        std::size_t cell_idx;
        int trial;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < suite.images.size(); ++i)
        for (std::size_t ci = 0; ci < suite.cells.size(); ++ci)
            for (int t = 0; t < suite.trials; ++t)
                tasks.push_back({i, ci, t});

    std::vector<RegistrationReport> rows(tasks.size());
    std::atomic<std::size_t> next{0};

    auto execute = [&](const Task& task) {
        const BenchmarkCell& cell = suite.cells[task.cell_idx];
        const PairData& pd = pairs[task.image_idx][static_cast<std::size_t>(task.trial)];

        RegistrationReport rep;
        rep.pair = "p" + std::to_string(task.image_idx);
        rep.method = cell.method;
        rep.enhancement = cell.enhancement;
        rep.model = cell.model;
        rep.trial = task.trial;
        rep.seed = derive_seed(suite.seed, "run", task.cell_idx,
                               task.image_idx * 100003ull + static_cast<std::uint64_t>(task.trial));
        rep.nccc_raw = std::numeric_limits<double>::quiet_NaN();
        rep.rmse_px = std::numeric_limits<double>::quiet_NaN();
        if (cell.method == Method::pointset && cell.enhancement == Enhancement::dtcwt)
            rep.notes = "contourlet_substituted_by_dtcwt";

        try {
            const RegistrationOutcome out = run_registration(
                pd.pair.master, pd.pair.slave, cell.method, cell.enhancement, cell.model,
                suite.config, rep.seed);
            rep.runtime_s = out.seconds;
            rep.runtime_class = runtime_class_name(runtime_class(out.seconds));
            rep.rmse_px = rmse_checkpoints(out.transform, pd.checks);
            try {
                const WarpResult warped = warp(pd.pair.slave, out.transform,
                                               pd.pair.master.width, pd.pair.master.height);
                rep.nccc_raw = nccc(pd.pair.master, warped.image, &warped.mask);
            } catch (const Error& e) {
                rep.notes += (rep.notes.empty() ? "" : ";") + sanitize_note(
                    std::string("nccc_unavailable: ") + e.what());
            }
            rep.ok = true;
        } catch (const std::exception& e) {
            rep.ok = false;
            rep.runtime_class = "low";
            rep.notes += (rep.notes.empty() ? "" : ";") + sanitize_note(e.what());
        }
        return rep;
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (std::size_t k = 0; k < tasks.size(); ++k)
            rows[k] = execute(tasks[k]);
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t k = next.fetch_add(1);
                    if (k >= tasks.size())
                        break;
                    rows[k] = execute(tasks[k]);
                }
            });
        for (auto& th : pool)
            th.join();
    }

    std::sort(rows.begin(), rows.end(), [](const RegistrationReport& a, const RegistrationReport& b) {
        if (a.pair != b.pair) return a.pair < b.pair;
        const int ma = static_cast<int>(a.method), mb = static_cast<int>(b.method);
        if (ma != mb) return ma < mb;
        const int ea = static_cast<int>(a.enhancement), eb = static_cast<int>(b.enhancement);
        if (ea != eb) return ea < eb;
        return a.trial < b.trial;
    });

    std::ofstream out(out_csv, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open '" + out_csv + "' for writing");
    out << "pair,method,enhancement,model,trial,seed,nccc_raw,nccc_display,rmse_px,"
           "runtime_s,runtime_class,status,notes\n";
    for (const auto& r : rows) {
        out << r.pair << ',' << method_name(r.method) << ',' << enhancement_name(r.enhancement)
            << ',' << r.model << ',' << r.trial << ',' << r.seed << ',' << fmt(r.nccc_raw) << ','
            << fmt(std::isnan(r.nccc_raw) ? r.nccc_raw : nccc_display(r.nccc_raw)) << ','
            << fmt(r.rmse_px) << ',' << fmt(r.runtime_s) << ',' << r.runtime_class << ','
            << (r.ok ? "ok" : "error") << ',' << r.notes << '\n';
    }

    // Summary: medians per cell; failed rows count as nccc 0 / rmse inf.
    out << "# summary\n";
    out << "# failed rows enter the medians as nccc=0 and rmse=inf\n";
    struct CellKey {
        std::string pair;
        Method method;
        Enhancement enhancement;
        bool operator<(const CellKey& o) const {
            if (pair != o.pair) return pair < o.pair;
            if (method != o.method) return method < o.method;
            return enhancement < o.enhancement;
        }
    };
    std::map<CellKey, std::pair<std::vector<double>, std::vector<double>>> cells;
    std::map<CellKey, int> failures;
    std::map<CellKey, std::string> models;
    for (const auto& r : rows) {
        const CellKey key{r.pair, r.method, r.enhancement};
        auto& [nccs, rmses] = cells[key];
        nccs.push_back(r.ok && !std::isnan(r.nccc_raw) ? r.nccc_raw : 0.0);
        rmses.push_back(r.ok && !std::isnan(r.rmse_px)
                            ? r.rmse_px
                            : std::numeric_limits<double>::infinity());
        failures[key] += r.ok ? 0 : 1;
        models[key] = r.model;
    }
    std::map<CellKey, std::pair<double, double>> medians;
    for (const auto& [key, data] : cells) {
        const double mn = median_of(data.first);
        const double mr = median_of(data.second);
        medians[key] = {mn, mr};
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "# cell pair=%s method=%s enhancement=%s model=%s: median_nccc=%.6f "
                      "median_rmse=%.6f failures=%d/%d\n",
                      key.pair.c_str(), method_name(key.method), enhancement_name(key.enhancement),
                      models[key].c_str(), mn, mr, failures[key], suite.trials);
        out << buf;
    }
    for (const auto& [key, med] : medians) {
        if (key.enhancement == Enhancement::none)
            continue;
        const CellKey base_key{key.pair, key.method, Enhancement::none};
        const auto it = medians.find(base_key);
        if (it == medians.end())
            continue;
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "# delta pair=%s method=%s enhancement=%s: nccc_delta=%+.6f rmse_delta=%+.6f\n",
                      key.pair.c_str(), method_name(key.method), enhancement_name(key.enhancement),
                      med.first - it->second.first, it->second.second - med.second);
        out << buf;
    }
    require(out.good(), ErrorCode::io, "write failed for '" + out_csv + "'");
    return rows;
}

}  // namespace wavereg
