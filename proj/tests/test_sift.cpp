#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/sift.hpp"
#include "helpers.hpp"

using namespace wavereg;
using test_helpers::constant_image;

namespace {

ImageGrid gaussian_blob(int w, int h, double cx, double cy, double std_px, double amp = 220.0) {
    ImageGrid img = ImageGrid::zeros(w, h, 8);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            img.at(x, y) = amp * std::exp(-0.5 * r2 / (std_px * std_px));
        }
    return img;
}

// Independent dense DoG oracle: direct large-kernel Gaussian filtering at a
// fixed scale ladder, then a full scan of the difference volume.
struct DogOracle {
    double x, y, sigma;
};

ImageGrid direct_blur(const ImageGrid& img, double sigma) {
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[static_cast<std::size_t>(i + radius)];
    }
    for (double& v : k)
        v /= sum;
    ImageGrid tmp = ImageGrid::zeros(img.width, img.height, 8);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xx = std::clamp(x + i, 0, img.width - 1);
                acc += k[static_cast<std::size_t>(i + radius)] * img.at(xx, y);
            }
            tmp.at(x, y) = acc;
        }
    ImageGrid out = ImageGrid::zeros(img.width, img.height, 8);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yy = std::clamp(y + i, 0, img.height - 1);
                acc += k[static_cast<std::size_t>(i + radius)] * tmp.at(x, yy);
            }
            out.at(x, y) = acc;
        }
    return out;
}

DogOracle dog_oracle(const ImageGrid& img) {
    const double k = std::pow(2.0, 1.0 / 3.0);
    std::vector<double> sigmas;
    for (double s = 1.6; s < 14.0; s *= k)
        sigmas.push_back(s);
    DogOracle best{0, 0, 0};
    double best_mag = -1.0;
    ImageGrid prev = direct_blur(img, sigmas[0]);
    for (std::size_t i = 1; i < sigmas.size(); ++i) {
        const ImageGrid cur = direct_blur(img, sigmas[i]);
        for (int y = 8; y < img.height - 8; ++y)
            for (int x = 8; x < img.width - 8; ++x) {
                const double d = std::fabs(cur.at(x, y) - prev.at(x, y));
                if (d > best_mag) {
                    best_mag = d;
                    best = {static_cast<double>(x), static_cast<double>(y), sigmas[i - 1]};
                }
            }
        prev = cur;
    }
    return best;
}

ImageGrid rotate90(const ImageGrid& img) {
    ImageGrid out = ImageGrid::zeros(img.height, img.width, img.source_depth);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = img.at(y, img.height - 1 - x);
    return out;
}

}  // namespace

TEST_CASE("detect_keypoints: constant image yields nothing; determinism") {
    const SiftConfig cfg;
    CHECK(detect_keypoints(constant_image(64, 64, 100.0), cfg).empty());

    const ImageGrid img = make_test_image(128, 128, 77);
    const auto a = detect_keypoints(img, cfg);
    const auto b = detect_keypoints(img, cfg);
    REQUIRE(a.size() == b.size());
    REQUIRE(!a.empty());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].sigma == b[i].sigma);
        CHECK(a[i].orientation == b[i].orientation);
    }
    // deterministic ordering: response desc with (y, x, sigma) tie-breaks
    for (std::size_t i = 1; i < a.size(); ++i)
        CHECK(a[i - 1].response >= a[i].response);
    // border discard
    for (const auto& kp : a) {
        CHECK(kp.x >= cfg.border);
        CHECK(kp.x <= 127 - cfg.border);
        CHECK(kp.y >= cfg.border);
        CHECK(kp.y <= 127 - cfg.border);
        CHECK(kp.sigma > 0.0);
    }
}

TEST_CASE("detect_keypoints: centered Gaussian blob found at the right scale") {
    const ImageGrid img = gaussian_blob(128, 128, 63.5, 63.5, 4.0);
    const auto kps = detect_keypoints(img, SiftConfig{});
    REQUIRE(!kps.empty());

    const DogOracle oracle = dog_oracle(img);
    // the oracle's own sanity: strongest DoG response sits at the blob center
    CHECK(std::fabs(oracle.x - 63.5) <= 2.0);
    CHECK(std::fabs(oracle.y - 63.5) <= 2.0);

    bool found = false;
    for (const auto& kp : kps)
        if (std::hypot(kp.x - oracle.x, kp.y - oracle.y) <= 2.0 && kp.sigma <= 4.0 * 1.5 &&
            kp.sigma >= 4.0 / 1.5)
            found = true;
    CHECK(found);
}

TEST_CASE("detect_keypoints: no keypoints on a straight step edge interior") {
    ImageGrid img = ImageGrid::zeros(128, 128, 8);
    for (int y = 0; y < 128; ++y)
        for (int x = 64; x < 128; ++x)
            img.at(x, y) = 200.0;
    const auto kps = detect_keypoints(img, SiftConfig{});
    for (const auto& kp : kps)
        CHECK(!(std::fabs(kp.x - 63.5) < 6.0 && kp.y >= 8.0 && kp.y <= 119.0));
}

TEST_CASE("compute_descriptors: unit norm and clamp bound") {
    const ImageGrid img = make_test_image(128, 128, 5);
    const SiftFeatures f = detect_and_describe(img, SiftConfig{});
    REQUIRE(!f.descriptors.empty());
    for (const auto& d : f.descriptors) {
        double norm = 0.0;
        for (double v : d.values)
            norm += v * v;
        CHECK(std::fabs(std::sqrt(norm) - 1.0) < 1e-6);
    }
}

TEST_CASE("compute_descriptors: invariant to a 2x intensity gain") {
    const ImageGrid img = make_test_image(128, 128, 6);
    ImageGrid bright = img;
    for (double& v : bright.samples)
        v *= 2.0;
    // detect on the original; describe the same keypoints in both images
    const SiftConfig cfg;
    const auto kps = detect_keypoints(img, cfg);
    REQUIRE(kps.size() >= 5);
    const std::vector<Keypoint> subset(kps.begin(), kps.begin() + 5);
    const auto d0 = compute_descriptors(img, subset, cfg);
    const auto d1 = compute_descriptors(bright, subset, cfg);
    for (std::size_t i = 0; i < subset.size(); ++i)
        for (int k = 0; k < 128; ++k)
            CHECK(std::fabs(d0[i].values[static_cast<std::size_t>(k)] -
                            d1[i].values[static_cast<std::size_t>(k)]) < 1e-3);
}

TEST_CASE("compute_descriptors: stable under exact 90-degree rotation") {
    const ImageGrid img = make_test_image(128, 128, 7);
    const SiftConfig cfg;
    const auto kps = detect_keypoints(img, cfg);
    REQUIRE(!kps.empty());
    // pick a strong keypoint away from the border
    const Keypoint kp = kps.front();

    const ImageGrid rot = rotate90(img);
    Keypoint kp_rot = kp;
    kp_rot.x = img.height - 1 - kp.y;
    kp_rot.y = kp.x;
    kp_rot.orientation = std::fmod(kp.orientation + M_PI / 2.0, 2.0 * M_PI);

    const auto d0 = compute_descriptors(img, {kp}, cfg);
    const auto d1 = compute_descriptors(rot, {kp_rot}, cfg);
    double mad = 0.0;
    for (int k = 0; k < 128; ++k)
        mad += std::fabs(d0[0].values[static_cast<std::size_t>(k)] -
                         d1[0].values[static_cast<std::size_t>(k)]);
    CHECK(mad / 128.0 < 0.05);
}

TEST_CASE("repeatability under 15 deg rotation + 1.2x scale") {
    const ImageGrid img = make_test_image(200, 200, 99);
    const TransformModel truth = TransformModel::make_similarity_about(
        {99.5, 99.5}, 1.2, 15.0 * M_PI / 180.0, 0.0, 0.0);
    const WarpResult slave = warp(img, invert(truth), 200, 200);

    const SiftConfig cfg;
    const auto kp_master = detect_keypoints(img, cfg);
    const auto kp_slave = detect_keypoints(slave.image, cfg);
    REQUIRE(kp_master.size() >= 20);
    REQUIRE(!kp_slave.empty());

    const TransformModel to_slave = invert(truth);
    int mappable = 0, matched = 0;
    for (const auto& kp : kp_master) {
        const Point q = apply(to_slave, {kp.x, kp.y});
        if (q.x < 10 || q.x > 189 || q.y < 10 || q.y > 189)
            continue;
        ++mappable;
        double best = 1e9;
        for (const auto& cand : kp_slave)
            best = std::min(best, std::hypot(cand.x - q.x, cand.y - q.y));
        if (best <= 2.0)
            ++matched;
    }
    REQUIRE(mappable >= 10);
    MESSAGE("repeatability: ", matched, "/", mappable);
    CHECK(static_cast<double>(matched) >= 0.5 * static_cast<double>(mappable));
}

TEST_CASE("enhance_keypoints: identity at keep 1.0, exact counts, corner-rich bias") {
    const ImageGrid img = make_test_image(128, 128, 15);
    const auto kps = detect_keypoints(img, SiftConfig{});
    REQUIRE(kps.size() >= 8);
    const ComplexDecomposition dec = dtcwt(img, 3);

    const auto all = enhance_keypoints(kps, dec, 1.0);
    REQUIRE(all.size() == kps.size());
    for (std::size_t i = 0; i < kps.size(); ++i)
        CHECK(all[i].x == kps[i].x);
    // idempotent at 1.0
    const auto again = enhance_keypoints(all, dec, 1.0);
    CHECK(again.size() == all.size());

    CHECK(enhance_keypoints(std::vector<Keypoint>{}, dec, 0.5).empty());

    // exact counting contract on a padded list
    std::vector<Keypoint> hundred;
    for (int i = 0; i < 100; ++i) {
        Keypoint kp = kps[static_cast<std::size_t>(i) % kps.size()];
        kp.x = 10.0 + (i % 10) * 10.0;
        kp.y = 10.0 + (i / 10) * 10.0;
        hundred.push_back(kp);
    }
    CHECK(enhance_keypoints(hundred, dec, 0.25).size() == 25);

    CHECK_THROWS_AS((void)enhance_keypoints(kps, dec, 0.0), Error);
    CHECK_THROWS_AS((void)enhance_keypoints(kps, dec, 1.5), Error);
}

TEST_CASE("enhance_keypoints: survivors concentrate where structure lives") {
    // left half blank, right half textured
    ImageGrid img = ImageGrid::zeros(256, 128, 8);
    const ImageGrid tex = make_test_image(128, 128, 33);
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x)
            img.at(128 + x, y) = tex.at(x, y);

    // synthetic keypoints straddling both halves
    std::vector<Keypoint> kps;
    for (int i = 0; i < 30; ++i) {
        Keypoint kp;
        kp.x = 20.0 + (i % 15) * 6.0;          // blank half
        kp.y = 20.0 + (i / 15) * 40.0;
        kp.sigma = 2.0;
        kp.response = 1.0;
        kps.push_back(kp);
        kp.x += 128.0;                          // textured half twin
        kps.push_back(kp);
    }
    const ComplexDecomposition dec = dtcwt(img, 3);
    const auto kept = enhance_keypoints(kps, dec, 0.5);
    REQUIRE(kept.size() == 30);
    for (const auto& kp : kept)
        CHECK(kp.x >= 128.0);  // every survivor sits in the textured half
}

TEST_CASE("match_descriptors: identity pairing on identical sets") {
    const ImageGrid img = make_test_image(128, 128, 44);
    const SiftFeatures f = detect_and_describe(img, SiftConfig{});
    REQUIRE(f.descriptors.size() >= 5);
    const auto matches = match_descriptors(f.descriptors, f.descriptors, 1.0, 0.8);
    REQUIRE(!matches.empty());
    for (const auto& m : matches) {
        CHECK(m.source_index == m.target_index);
        CHECK(m.distance == doctest::Approx(0.0).scale(1.0));
    }
}

TEST_CASE("match_descriptors: single descriptor kept with ratio 0; validation") {
    Descriptor d;
    d.values.fill(1.0 / std::sqrt(128.0));
    const std::vector<Descriptor> one = {d};
    const auto matches = match_descriptors(one, one, 1.0, 0.8);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].ratio == 0.0);

    CHECK_THROWS_AS((void)match_descriptors(one, one, 0.7, 0.8), Error);  // no signatures
    CHECK_THROWS_AS((void)match_descriptors(one, one, 1.0, 1.0), Error);
    CHECK_THROWS_AS((void)match_descriptors(one, one, -0.1, 0.8), Error);
}

TEST_CASE("match_descriptors: wavelet signature disambiguates decoys") {
    Rng rng(2718);
    auto unit128 = [&] {
        std::array<double, 128> v{};
        double norm = 0.0;
        for (double& x : v) {
            x = rng.uniform01();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (double& x : v)
            x /= norm;
        return v;
    };
    auto unit12 = [&] {
        std::array<double, 12> v{};
        double norm = 0.0;
        for (double& x : v) {
            x = rng.uniform01();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (double& x : v)
            x /= norm;
        return v;
    };
    auto jitter = [&](std::array<double, 128> v) {
        for (double& x : v)
            x = std::max(0.0, x + 0.02 * rng.normal());
        double norm = 0.0;
        for (double x : v)
            norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v)
            x /= norm;
        return v;
    };

    std::vector<Descriptor> a, b;
    for (int i = 0; i < 20; ++i) {
        const auto base = unit128();
        const auto sig = unit12();
        Descriptor qa;  // query
        qa.values = jitter(base);
        qa.wavelet_signature = sig;
        a.push_back(qa);

        Descriptor true_b;  // correct counterpart: same signature
        true_b.values = jitter(base);
        true_b.wavelet_signature = sig;
        b.push_back(true_b);
    }
    for (int i = 0; i < 20; ++i) {
        Descriptor decoy;  // same value statistics, foreign signature
        decoy.values = jitter(a[static_cast<std::size_t>(i)].values);
        decoy.wavelet_signature = unit12();
        b.push_back(decoy);
    }

    auto decoy_count = [&](double alpha) {
        int n = 0;
        for (const auto& m : match_descriptors(a, b, alpha, 0.8))
            if (m.target_index >= 20)
                ++n;
        return n;
    };
    auto true_count = [&](double alpha) {
        int n = 0;
        for (const auto& m : match_descriptors(a, b, alpha, 0.8))
            if (m.target_index < 20 && m.target_index == m.source_index)
                ++n;
        return n;
    };

    CHECK(decoy_count(0.7) <= decoy_count(1.0));
    CHECK(true_count(0.7) > true_count(1.0));
    CHECK(true_count(0.7) >= 15);
}

TEST_CASE("match_descriptors: alpha = 1 ignores signatures entirely") {
    const ImageGrid img = make_test_image(128, 128, 50);
    SiftFeatures f = detect_and_describe(img, SiftConfig{});
    REQUIRE(f.descriptors.size() >= 4);
    const auto plain = match_descriptors(f.descriptors, f.descriptors, 1.0, 0.8);

    // attach signatures, match again with alpha = 1: identical output
    const ComplexDecomposition dec = dtcwt(img, 3);
    attach_wavelet_signatures(f.descriptors, f.keypoints, dec);
    const auto with_sig = match_descriptors(f.descriptors, f.descriptors, 1.0, 0.8);
    REQUIRE(plain.size() == with_sig.size());
    for (std::size_t i = 0; i < plain.size(); ++i) {
        CHECK(plain[i].source_index == with_sig[i].source_index);
        CHECK(plain[i].distance == with_sig[i].distance);
    }

    for (const auto& d : f.descriptors) {
        REQUIRE(d.wavelet_signature.has_value());
        double norm = 0.0;
        for (double v : *d.wavelet_signature)
            norm += v * v;
        CHECK(std::fabs(std::sqrt(norm) - 1.0) < 1e-9);
    }
}

TEST_CASE("feature and match CSV surfaces") {
    test_helpers::TempDir tmp("sift");
    const ImageGrid img = make_test_image(128, 128, 60);
    SiftFeatures f = detect_and_describe(img, SiftConfig{});
    REQUIRE(!f.keypoints.empty());
    write_features_csv(f.keypoints, f.descriptors, tmp.file("k.csv"));

    std::ifstream in(tmp.file("k.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("x,y,sigma,orientation,response,v0", 0) == 0);

    const auto matches = match_descriptors(f.descriptors, f.descriptors, 1.0, 0.8);
    write_matches_csv(matches, tmp.file("m.csv"));
    std::ifstream min(tmp.file("m.csv"));
    std::getline(min, header);
    CHECK(header == "src_idx,dst_idx,distance,ratio");
}
