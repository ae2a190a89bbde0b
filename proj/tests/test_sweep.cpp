#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "dwt/sweep.hpp"

using namespace dwt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "dwt_test_XXXXXX").string();
        path = mkdtemp(tmpl.data());
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::string minimal_config(const fs::path& out) {
    return "# strip resolvent sweep\n"
           "[profile]\n"
           "name = strip_constant\n"
           "sigma = 1.0\n"
           "[sweep]\n"
           "q_range = 20 200 5  ; five points\n"
           "output_dir = " + out.string() + "\n"
           "[checks]\n"
           "names = resolvent_fit\n";
}

int cli(const std::string& args, const fs::path& cache) {
    const std::string cmd = "DWT_CACHE_DIR='" + cache.string() + "' '" + DWT_CLI_PATH + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    const SweepConfig c = parse_config(minimal_config("out"));
    CHECK(c.profile == "strip_constant");
    REQUIRE(c.profile_params.size() == 1);
    CHECK(c.profile_params[0].second == 1.0);
    REQUIRE(c.q_values.size() == 5);
    CHECK(c.q_values.front() == doctest::Approx(20.0));
    CHECK(c.q_values.back() == doctest::Approx(200.0));
    CHECK(c.checks == std::vector<std::string>{"resolvent_fit"});
    CHECK(c.output_dir == "out");
    CHECK(c.beta_strategy == BetaStrategy::Modes);

    const SweepConfig d = parse_config(
        "[profile]\nname = polynomial\nbeta_exp = 2\n[sweep]\nq_values = 10, 20, 40\nbeta_strategy = list\n"
        "beta_list = 1 2.5\ntau = 0.9\ngamma = 1\nseed = 17\ngrid_n = 128\n[decay]\nn = 64\nk_max = 8\n");
    CHECK(d.q_values == std::vector<double>{10, 20, 40});
    CHECK(d.beta_list == std::vector<double>{1, 2.5});
    CHECK(d.tau.value() == 0.9);
    CHECK(d.gamma.value() == 1);
    CHECK(d.seed == 17);
    CHECK(d.grid_n == 128);
    CHECK(d.decay_n == 64);
    CHECK(d.decay_k_max == 8);

    CHECK_THROWS_AS(parse_config("[profile]\nname = strip_constant\n[sweep]\nq_range = 1 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[profile]\nname = strip_constant\n[sweep]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[profile]\nname = strip_constant\nsigma = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[profile]\nname = strip_constant\nbeta_exp = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[sweep]\nq_values = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[profile]\nname = strip_constant\n[sweep]\nbeta_strategy = list\n"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[profile]\nname = wobbly\n"), doctest::Contains("wobbly"), UnknownNameError);
    CHECK_THROWS_WITH_AS(parse_config("[profile]\nname = constant\n[checks]\nnames = resolvent_fit, vibes\n"),
                         doctest::Contains("vibes"), UnknownNameError);
}

TEST_CASE("config hash") {
    const SweepConfig a = parse_config(minimal_config("one"));
    const SweepConfig b = parse_config(minimal_config("two"));
    CHECK(config_hash(a) == config_hash(b));  // output_dir does not affect results
    CHECK(config_hash(a).size() == 64);
    SweepConfig c = a;
    c.seed = 1;
    CHECK(config_hash(c) != config_hash(a));
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("formatting and report round trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(format_double(-2.5) == "-2.5");
    RunReport r;
    r.config_hash = "abc";
    r.fits["resolvent"] = ExponentFit{0.5, 1.25, 0.99, {10.0, 1000.0}};
    r.checks["moyal"] = CheckResult{true, {{"slope_N1", 1.01}}};
    r.provenance["toolkit_version"] = kToolkitVersion;
    r.decay_trace = {{0.0, 1.0, 1.0}, {1.0, 0.25, 0.5}};
    const RunReport back = report_from_json(report_to_json(r));
    CHECK(back.config_hash == "abc");
    CHECK(back.fits.at("resolvent").slope == 0.5);
    CHECK(back.fits.at("resolvent").window.second == 1000.0);
    CHECK(back.checks.at("moyal").pass);
    CHECK(back.checks.at("moyal").values.at("slope_N1") == 1.01);
    CHECK(back.decay_trace.size() == 2);
    CHECK(report_to_json(back) == report_to_json(r));
}

TEST_CASE("run: schema, cache and determinism") {
    TempDir tmp;
    const fs::path out = tmp.path / "out";
    const SweepConfig cfg = parse_config(minimal_config(out));
    RunOptions opt;
    opt.cache_dir = tmp.path / "cache";
    opt.jobs = 2;
    const RunReport r = run(cfg, opt);
    CHECK(r.fits.size() == 1);
    CHECK(r.fits.count("resolvent") == 1);
    CHECK(r.provenance.at("toolkit_version") == kToolkitVersion);
    const std::string csv = slurp(out / "resolvent.csv");
    CHECK(csv.rfind("q,beta,k,norm\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    const RunReport disk = report_from_json(slurp(out / "report.json"));
    CHECK(disk.config_hash == config_hash(cfg));

    const RunReport hit = run(cfg, opt);
    CHECK(hit.provenance.at("cache") == "hit");
    CHECK(slurp(out / "resolvent.csv") == csv);

    fs::remove_all(out);
    opt.force = true;
    opt.jobs = 1;
    const RunReport again = run(cfg, opt);
    CHECK(again.provenance.at("cache") != "hit");
    CHECK(sha256_hex(slurp(out / "resolvent.csv")) == sha256_hex(csv));

    SUBCASE("render") {
        const auto files = report_render(out / "report.json");
        CHECK(files.size() == 2);
        CHECK(fs::exists(out / "resolvent_series.csv"));
        CHECK(slurp(out / "resolvent_series.csv").rfind("q,resolvent_norm,log_x,log_y\n", 0) == 0);
        const std::string svg = slurp(out / "resolvent.svg");
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("slope") != std::string::npos);
    }
}

TEST_CASE("render: empty fits and decay traces") {
    TempDir tmp;
    RunReport r;
    r.config_hash = "x";
    spit(tmp.path / "report.json", report_to_json(r));
    CHECK(report_render(tmp.path / "report.json").empty());
    r.decay_trace = {{0.0, 1.0, 1.0}, {2.0, 0.25, 0.5}};
    spit(tmp.path / "report.json", report_to_json(r));
    const auto files = report_render(tmp.path / "report.json");
    REQUIRE(files.size() == 1);
    CHECK(slurp(files[0]).rfind("t,E,E_sqrt_over_datanorm\n", 0) == 0);
    for (const auto& e : fs::directory_iterator(tmp.path)) CHECK(e.path().extension() != ".svg");
}

TEST_CASE("CLI exit codes") {
    TempDir tmp;
    const fs::path cache = tmp.path / "cache";
    const fs::path good = tmp.path / "good.ini";
    spit(good, minimal_config(tmp.path / "out"));
    CHECK(cli("run '" + good.string() + "' --jobs 2", cache) == 0);
    CHECK(fs::exists(tmp.path / "out" / "report.json"));
    CHECK(cli("render '" + (tmp.path / "out" / "report.json").string() + "'", cache) == 0);
    CHECK(cli("--version", cache) == 0);

    const fs::path unknown = tmp.path / "unknown.ini";
    spit(unknown, "[profile]\nname = wobbly\n");
    CHECK(cli("run '" + unknown.string() + "'", cache) == 3);

    const fs::path broken = tmp.path / "broken.ini";
    spit(broken, "[profile]\nname = strip_constant\n[sweep]\nq_range = 1 2\n");
    CHECK(cli("run '" + broken.string() + "'", cache) == 2);
    CHECK(cli("run '" + (tmp.path / "missing.ini").string() + "'", cache) == 2);
    CHECK(cli("frobnicate", cache) == 2);

    // W = 0: the undamped operator is singular at beta = q^2 - k^2 = j^2.
    const fs::path singular = tmp.path / "singular.ini";
    spit(singular, "[profile]\nname = constant\nc = 0\n[sweep]\nq_values = 5, 10, 13, 17, 25\n"
                   "align_to_peak = false\noutput_dir = " + (tmp.path / "s").string() +
                       "\n[checks]\nnames = resolvent_fit\n");
    CHECK(cli("run '" + singular.string() + "'", cache) == 4);
}
