#include "core/pipeline.hpp"

#include <chrono>

#include "core/error.hpp"
#include "core/mi.hpp"
#include "core/pointset.hpp"
#include "core/sift.hpp"
#include "core/wavelet.hpp"

namespace wavereg {

Method method_from_name(const std::string& name) {
    if (name == "sift") return Method::sift;
    if (name == "mi") return Method::mi;
    if (name == "pointset") return Method::pointset;
    raise(ErrorCode::invalid_argument, "unknown method '" + name + "' (sift|mi|pointset)");
}

Enhancement enhancement_from_name(const std::string& name) {
    if (name == "none") return Enhancement::none;
    if (name == "dwt") return Enhancement::dwt;
    if (name == "dtcwt") return Enhancement::dtcwt;
    raise(ErrorCode::invalid_argument, "unknown enhancement '" + name + "' (none|dwt|dtcwt)");
}

const char* method_name(Method m) {
    switch (m) {
        case Method::sift: return "sift";
        case Method::mi: return "mi";
        case Method::pointset: return "pointset";
    }
    raise(ErrorCode::internal, "unknown method");
}

const char* enhancement_name(Enhancement e) {
    switch (e) {
        case Enhancement::none: return "none";
        case Enhancement::dwt: return "dwt";
        case Enhancement::dtcwt: return "dtcwt";
    }
    raise(ErrorCode::internal, "unknown enhancement");
}

void validate_method_enhancement(Method method, Enhancement enhancement) {
    switch (method) {
        case Method::mi:
            require(enhancement == Enhancement::none || enhancement == Enhancement::dwt,
                    ErrorCode::invalid_argument, "method mi accepts enhancement none|dwt");
            return;
        case Method::sift:
            require(enhancement == Enhancement::none || enhancement == Enhancement::dtcwt,
                    ErrorCode::invalid_argument, "method sift accepts enhancement none|dtcwt");
            return;
        case Method::pointset:
            require(enhancement == Enhancement::none || enhancement == Enhancement::dtcwt,
                    ErrorCode::invalid_argument, "method pointset accepts enhancement none|dtcwt");
            return;
    }
    raise(ErrorCode::internal, "unknown method");
}

namespace {

SiftConfig sift_config(const Config& cfg) {
    SiftConfig sc;
    sc.layers_per_octave = cfg.get_int("sift.layers_per_octave");
    sc.sigma0 = cfg.get_double("sift.sigma0");
    sc.contrast_threshold = cfg.get_double("sift.contrast_threshold");
    sc.edge_ratio = cfg.get_double("sift.edge_ratio");
    sc.upsample = cfg.get_bool("sift.upsample");
    sc.border = cfg.get_int("sift.border");
    return sc;
}

TransformModel register_sift(const ImageGrid& master, const ImageGrid& slave,
                             Enhancement enhancement, TransformKind kind, const Config& cfg,
                             std::uint64_t seed) {
    const SiftConfig sc = sift_config(cfg);
    const double ratio_max = cfg.get_double("sift.ratio_max");

    std::vector<Keypoint> kps_s, kps_m;
    std::vector<Descriptor> ds, dm;
    double alpha = 1.0;

    if (enhancement == Enhancement::dtcwt) {
        const int levels = cfg.get_int("wavelet.levels");
        const double keep = cfg.get_double("sift.keep_fraction");
        alpha = cfg.get_double("sift.alpha");

        const ComplexDecomposition dec_s = dtcwt(slave, levels);
        const ComplexDecomposition dec_m = dtcwt(master, levels);
        kps_s = enhance_keypoints(detect_keypoints(slave, sc), dec_s, keep);
        kps_m = enhance_keypoints(detect_keypoints(master, sc), dec_m, keep);
        ds = compute_descriptors(slave, kps_s, sc);
        dm = compute_descriptors(master, kps_m, sc);
        attach_wavelet_signatures(ds, kps_s, dec_s);
        attach_wavelet_signatures(dm, kps_m, dec_m);
    } else {
        SiftFeatures fs = detect_and_describe(slave, sc);
        SiftFeatures fm = detect_and_describe(master, sc);
        kps_s = std::move(fs.keypoints);
        ds = std::move(fs.descriptors);
        kps_m = std::move(fm.keypoints);
        dm = std::move(fm.descriptors);
    }

    const std::vector<Match> matches = match_descriptors(ds, dm, alpha, ratio_max);
    require(matches.size() >= min_correspondences(kind), ErrorCode::registration_failure,
            "too few descriptor matches (" + std::to_string(matches.size()) + ") for " +
            kind_name(kind));

    std::vector<Correspondence> pairs;
    pairs.reserve(matches.size());
    for (const Match& m : matches)
        pairs.push_back({{kps_s[m.source_index].x, kps_s[m.source_index].y},
                         {kps_m[m.target_index].x, kps_m[m.target_index].y},
                         1.0});
    return ransac_fit(pairs, kind, cfg.get_double("ransac.tol_px"),
                      cfg.get_int("ransac.iterations"), seed)
        .model;
}

TransformModel register_mi_path(const ImageGrid& master, const ImageGrid& slave,
                                Enhancement enhancement, TransformKind kind, const Config& cfg) {
    MiConfig mc;
    mc.bins = cfg.get_int("mi.bins");
    mc.levels = cfg.get_int("mi.levels");
    mc.model = kind;
    mc.max_sweeps = cfg.get_int("mi.max_sweeps");
    mc.tol_translation = cfg.get_double("mi.tol_translation");
    mc.tol_rotation = cfg.get_double("mi.tol_rotation");
    mc.tol_scale = cfg.get_double("mi.tol_scale");

    const PyramidMode configured = pyramid_mode_from_name(cfg.get_string("mi.pyramid"));
    if (enhancement == Enhancement::dwt) {
        mc.pyramid = PyramidMode::wavelet_ll;
    } else {
        require(configured != PyramidMode::wavelet_ll, ErrorCode::invalid_argument,
                "mi.pyramid=wavelet_ll is the dwt enhancement; pass enhancement dwt instead");
        mc.pyramid = configured;
    }
    return register_mi(master, slave, mc).transform;
}

TransformModel register_pointset_path(const ImageGrid& master, const ImageGrid& slave,
                                      Enhancement enhancement, const std::string& model_name,
                                      const Config& cfg) {
    PointModel model;
    if (model_name == "rigid")
        model = PointModel::rigid;
    else if (model_name == "affine")
        model = PointModel::affine;
    else
        raise(ErrorCode::invalid_argument,
              "pointset method supports models rigid|affine, got '" + model_name + "'");

    ExtractConfig ec;
    ec.cp_level = cfg.get_int("wavelet.cp_level");
    ec.cp_percentile = cfg.get_double("wavelet.cp_percentile");
    ec.max_points = cfg.get_int("pointset.max_points");
    ec.use_dtcwt = enhancement == Enhancement::dtcwt;
    ec.prune = cfg.get_bool("pointset.prune");
    ec.min_ncc = cfg.get_double("pointset.min_ncc");
    const auto [set_master, set_slave] = extract_pointsets(master, slave, ec);

    AnnealConfig ac;
    ac.sigma_hi_frac = cfg.get_double("pointset.sigma_hi_frac");
    ac.sigma_decay = cfg.get_double("pointset.sigma_decay");
    ac.sigma_lo = cfg.get_double("pointset.sigma_lo");
    ac.steps_per_stage = cfg.get_int("pointset.steps_per_stage");
    // Slave points move onto the master cloud: the fit maps slave -> master.
    return register_pointset(set_slave, set_master, model, ac);
}

}  // namespace

RegistrationOutcome run_registration(const ImageGrid& master, const ImageGrid& slave,
                                     Method method, Enhancement enhancement,
                                     const std::string& model_name, const Config& cfg,
                                     std::uint64_t seed) {
    validate_method_enhancement(method, enhancement);

    const auto t0 = std::chrono::steady_clock::now();
    RegistrationOutcome out;
    switch (method) {
        case Method::sift:
            out.transform = register_sift(master, slave, enhancement,
                                          kind_from_name(model_name), cfg, seed);
            break;
        case Method::mi:
            out.transform = register_mi_path(master, slave, enhancement,
                                             kind_from_name(model_name), cfg);
            break;
        case Method::pointset:
            out.transform = register_pointset_path(master, slave, enhancement, model_name, cfg);
            break;
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace wavereg
