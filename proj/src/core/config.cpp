#include "core/config.hpp"

#include <cstdlib>
#include <fstream>

#include "core/error.hpp"

namespace wavereg {

namespace {

const std::map<std::string, std::string>& default_values() {
    static const std::map<std::string, std::string> defaults = {
        // wavelet
        {"wavelet.levels", "3"},
        {"wavelet.cp_level", "2"},
        {"wavelet.cp_percentile", "95"},
        // SIFT detection / description / enhancement
        {"sift.layers_per_octave", "3"},
        {"sift.sigma0", "1.6"},
        {"sift.contrast_threshold", "0.03"},
        {"sift.edge_ratio", "10"},
        {"sift.upsample", "true"},
        {"sift.border", "8"},
        {"sift.ratio_max", "0.8"},
        {"sift.alpha", "0.7"},
        {"sift.keep_fraction", "0.6"},
        // mutual information
        {"mi.bins", "64"},
        {"mi.levels", "3"},
        {"mi.pyramid", "none"},
        {"mi.max_sweeps", "50"},
        {"mi.tol_translation", "1e-3"},
        {"mi.tol_rotation", "1e-4"},
        {"mi.tol_scale", "1e-4"},
        // point set
        {"pointset.sigma_hi_frac", "0.25"},
        {"pointset.sigma_decay", "0.7"},
        {"pointset.sigma_lo", "2"},
        {"pointset.steps_per_stage", "100"},
        {"pointset.max_points", "150"},
        {"pointset.min_ncc", "0.7"},
        {"pointset.prune", "true"},
        // robust fitting
        {"ransac.tol_px", "2"},
        {"ransac.iterations", "500"},
    };
    return defaults;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config() : values_(default_values()) {}

bool Config::is_known(const std::string& key) const {
    return default_values().count(key) != 0;
}

void Config::set(const std::string& key, const std::string& value) {
    require(is_known(key), ErrorCode::invalid_argument, "unknown config key '" + key + "'");
    values_[key] = value;
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::io, "cannot open config file '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::format,
                path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require(is_known(key), ErrorCode::invalid_argument,
                path + ":" + std::to_string(line_no) + ": unknown config key '" + key + "'");
        values_[key] = value;
    }
}

const std::string& Config::raw(const std::string& key) const {
    const auto it = values_.find(key);
    require(it != values_.end(), ErrorCode::invalid_argument, "unknown config key '" + key + "'");
    return it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string& v = raw(key);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    require(end && *end == '\0' && end != v.c_str(), ErrorCode::format,
            "config key '" + key + "' is not a number: '" + v + "'");
    return d;
}

int Config::get_int(const std::string& key) const {
    const std::string& v = raw(key);
    char* end = nullptr;
    const long n = std::strtol(v.c_str(), &end, 10);
    require(end && *end == '\0' && end != v.c_str(), ErrorCode::format,
            "config key '" + key + "' is not an integer: '" + v + "'");
    return static_cast<int>(n);
}

bool Config::get_bool(const std::string& key) const {
    const std::string& v = raw(key);
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    raise(ErrorCode::format, "config key '" + key + "' is not a boolean: '" + v + "'");
}

std::string Config::get_string(const std::string& key) const {
    return raw(key);
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        out.push_back(k);
    return out;
}

}  // namespace wavereg
