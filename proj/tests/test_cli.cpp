// Drives the installed CLI binary end to end. The binary path arrives via the
// WAVEREG_CLI environment variable (set by ctest).
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "core/image.hpp"
#include "core/transform.hpp"
#include "helpers.hpp"

using namespace wavereg;
using test_helpers::TempDir;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string output;
};

CmdResult run_cmd(const std::string& cmd) {
    CmdResult res;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 512> buf;
    while (fgets(buf.data(), buf.size(), pipe))
        res.output += buf.data();
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string cli_path() {
    const char* p = std::getenv("WAVEREG_CLI");
    REQUIRE_MESSAGE(p != nullptr, "WAVEREG_CLI must point at the built binary");
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli: --help exits 0 and names the flags") {
    const std::string cli = cli_path();
    CHECK(run_cmd(cli + " --help").exit_code == 0);
    for (const std::string sub : {"register", "synth", "benchmark", "wavelet"}) {
        const CmdResult r = run_cmd(cli + " " + sub + " --help");
        CHECK(r.exit_code == 0);
    }
    const CmdResult reg = run_cmd(cli + " register --help");
    for (const std::string flag : {"--method", "--enhance", "--master", "--slave", "--model",
                                   "--out", "--report", "--config", "--seed"})
        CHECK(reg.output.find(flag) != std::string::npos);
}

TEST_CASE("cli: register identical images near-identity; idempotent outputs") {
    const std::string cli = cli_path();
    TempDir tmp("cli_reg");
    save_pgm8(make_test_image(128, 128, 3), tmp.file("img.pgm"));

    const std::string cmd = cli + " register --method sift --enhance none --master " +
                            tmp.file("img.pgm") + " --slave " + tmp.file("img.pgm") +
                            " --model affine --out " + tmp.file("t.txt") + " --report " +
                            tmp.file("r.csv") + " --seed 9";
    const CmdResult r1 = run_cmd(cmd);
    CHECK_MESSAGE(r1.exit_code == 0, r1.output);

    const TransformModel t = read_transform(tmp.file("t.txt"));
    CHECK(std::fabs(t.coefficients[0] - 1.0) < 1e-2);
    CHECK(std::fabs(t.coefficients[1]) < 1e-2);
    CHECK(std::fabs(t.coefficients[2]) < 0.25);
    CHECK(std::fabs(t.coefficients[5]) < 0.25);

    const std::string first = slurp(tmp.file("t.txt"));
    const CmdResult r2 = run_cmd(cmd);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(tmp.file("t.txt")) == first);  // identical bytes on rerun

    const std::string report = slurp(tmp.file("r.csv"));
    CHECK(report.find("pair,method,enhancement,model") == 0);
    CHECK(report.find("sift,none,affine") != std::string::npos);
}

TEST_CASE("cli: invalid method/enhance combo is a usage error naming the valid set") {
    const std::string cli = cli_path();
    TempDir tmp("cli_combo");
    save_pgm8(make_test_image(64, 64, 4), tmp.file("img.pgm"));
    const CmdResult r = run_cmd(cli + " register --method mi --enhance dtcwt --master " +
                                tmp.file("img.pgm") + " --slave " + tmp.file("img.pgm") +
                                " --model translation --out " + tmp.file("t.txt"));
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("none|dwt") != std::string::npos);
}

TEST_CASE("cli: missing slave file fails with the path in the message") {
    const std::string cli = cli_path();
    TempDir tmp("cli_missing");
    save_pgm8(make_test_image(64, 64, 4), tmp.file("img.pgm"));
    const CmdResult r = run_cmd(cli + " register --method sift --master " + tmp.file("img.pgm") +
                                " --slave " + tmp.file("gone.pgm") + " --out " + tmp.file("t.txt"));
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("gone.pgm") != std::string::npos);
}

TEST_CASE("cli: synth identity gives byte-identical master/slave; deterministic reruns") {
    const std::string cli = cli_path();
    TempDir tmp("cli_synth");
    save_pgm8(make_test_image(96, 96, 5), tmp.file("base.pgm"));

    const std::string cmd = cli + " synth --input " + tmp.file("base.pgm") +
                            " --truth translation --params 0,0 --noise-sigma 0 --gamma 1"
                            " --degrade 1 --seed 4 --out-dir " + tmp.file("out");
    CHECK(run_cmd(cmd).exit_code == 0);
    CHECK(slurp(tmp.file("out/master.pgm")) == slurp(tmp.file("out/slave.pgm")));
    CHECK(slurp(tmp.file("out/truth.txt")).rfind("translation", 0) == 0);
    CHECK(slurp(tmp.file("out/checkpoints.csv")).rfind("x,y,u,v", 0) == 0);

    // deterministic rerun with noise this time
    const std::string noisy = cli + " synth --input " + tmp.file("base.pgm") +
                              " --truth similarity --params 0.99,0.05,2,-1 --noise-sigma 3"
                              " --gamma 1.1 --degrade 2 --seed 11 --out-dir ";
    CHECK(run_cmd(noisy + tmp.file("n1")).exit_code == 0);
    CHECK(run_cmd(noisy + tmp.file("n2")).exit_code == 0);
    for (const std::string f :
         {"master.pgm", "slave.pgm", "slave_mask.pgm", "truth.txt", "checkpoints.csv"})
        CHECK(slurp(tmp.file("n1/" + f)) == slurp(tmp.file("n2/" + f)));
}

TEST_CASE("cli: synth rejects wrong parameter arity with the expected count") {
    const std::string cli = cli_path();
    TempDir tmp("cli_arity");
    save_pgm8(make_test_image(64, 64, 6), tmp.file("base.pgm"));
    const CmdResult r = run_cmd(cli + " synth --input " + tmp.file("base.pgm") +
                                " --truth affine --params 1,0,0,1 --out-dir " + tmp.file("o"));
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("6") != std::string::npos);
}

TEST_CASE("cli: benchmark runs a small suite") {
    const std::string cli = cli_path();
    TempDir tmp("cli_bench");
    {
        std::ofstream f(tmp.file("s.suite"));
        f << "image = synth:96x96:2\ntrials = 2\nseed = 12\ntruth = translation\n"
             "max_translation = 3\nnoise_sigma_frac = 0\ndegrade = 1\n"
             "[cell]\nmethod = mi\nenhancement = none\nmodel = translation\n";
    }
    const CmdResult r = run_cmd(cli + " benchmark --suite " + tmp.file("s.suite") + " --out " +
                                tmp.file("out.csv"));
    CHECK_MESSAGE(r.exit_code == 0, r.output);
    const std::string csv = slurp(tmp.file("out.csv"));
    int rows = 0;
    for (std::size_t pos = 0; (pos = csv.find("\np0,", pos)) != std::string::npos; ++pos)
        ++rows;
    CHECK(rows == 2);

    const CmdResult bad = run_cmd(cli + " benchmark --suite " + tmp.file("missing.suite") +
                                  " --out " + tmp.file("x.csv"));
    CHECK(bad.exit_code == 1);
}

TEST_CASE("cli: wavelet decompose writes the closed-form 2x2 subbands") {
    const std::string cli = cli_path();
    TempDir tmp("cli_wave");
    ImageGrid img = ImageGrid::zeros(2, 2, 8);
    img.samples = {1, 2, 3, 4};
    {
        std::ofstream f(tmp.file("two.pgm"));
        f << "P2\n2 2\n255\n1 2 3 4\n";
    }
    const CmdResult r = run_cmd(cli + " wavelet decompose --type haar --levels 1 --input " +
                                tmp.file("two.pgm") + " --out-prefix " + tmp.file("w"));
    CHECK_MESSAGE(r.exit_code == 0, r.output);
    const std::string manifest = slurp(tmp.file("w_manifest.csv"));
    CHECK(manifest.find(",5,5") != std::string::npos);    // ll min=max=5
    CHECK(manifest.find(",-2,-2") != std::string::npos);  // lh
    CHECK(manifest.find(",-1,-1") != std::string::npos);  // hl
    CHECK(manifest.find(",0,0") != std::string::npos);    // hh

    // excessive depth: propagated precondition, exit 1
    save_pgm8(make_test_image(32, 32, 9), tmp.file("small.pgm"));
    const CmdResult deep = run_cmd(cli + " wavelet decompose --type haar --levels 10 --input " +
                                   tmp.file("small.pgm") + " --out-prefix " + tmp.file("d"));
    CHECK(deep.exit_code == 1);

    const CmdResult cp = run_cmd(cli + " wavelet controlpoints --type haar --level 2 --input " +
                                 tmp.file("small.pgm") + " --out " + tmp.file("cp.csv"));
    CHECK(cp.exit_code == 0);
    CHECK(slurp(tmp.file("cp.csv")).rfind("x,y,level,modulus", 0) == 0);
}
