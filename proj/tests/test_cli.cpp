#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "specbox/experiment.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>

using namespace specbox;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << body;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "specbox_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Stokes config: one mode at |k| = 1 with unit initial energy, no forcing.
std::string stokes_config(const std::string& out_dir) {
    const double amp = std::sqrt(0.5 / std::pow(kTwoPi, 2));  // ||v0||^2 = 1
    char buf[2048];
    std::snprintf(buf, sizeof buf, R"({
  "domain": {"dimension": 2, "resolution": 16},
  "physics": {"viscosity": 0.4},
  "time": {"dt": 0.01, "t_end": 2.0},
  "initial": {"kind": "modes", "modes": [
    {"wavevector": [1, 0], "amplitude": [[0.0, 0.0], [%.17g, 0.0]]}
  ]},
  "forcing": {"kind": "steady", "base": {"modes": []}},
  "averaging": {"horizons": [2.0]},
  "output": {"directory": "%s"}
})", amp, out_dir.c_str());
    return buf;
}

std::string golden_config(const std::string& out_dir) {
    char buf[2048];
    std::snprintf(buf, sizeof buf, R"({
  "domain": {"dimension": 2, "resolution": 16},
  "physics": {"viscosity": 0.3},
  "time": {"dt": 0.005, "t_end": 4.0},
  "initial": {"kind": "random", "amplitude": 0.3, "seed": 5},
  "forcing": {"kind": "time_periodic",
              "base": {"modes": [{"wavevector": [1, 0], "amplitude": [[0.0, 0.0], [0.08, 0.0]]}]},
              "modulation": {"modes": [{"wavevector": [0, 1], "amplitude": [[0.06, 0.0], [0.0, 0.0]]}]},
              "angular_frequency": 1.5},
  "averaging": {"horizons": [2.0, 4.0]},
  "output": {"directory": "%s"}
})", out_dir.c_str());
    return buf;
}

} // namespace

TEST_CASE("stokes config: CSV energy column matches the analytic decay") {
    const auto dir = fresh_dir("stokes");
    const auto cfg_path = dir / "config.json";
    const auto out_dir = (dir / "out").string();
    spit(cfg_path, stokes_config(out_dir));

    CHECK(cli_main({"run", cfg_path.string()}) == kOk);
    const std::string csv = slurp(fs::path(out_dir) / "series.csv");

    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // schema comment
    CHECK(line == "# specbox-series-1");
    std::getline(in, line);  // header
    CHECK(line == "t,energy,grad_sq,work_rate,f_dual_sq");
    int rows = 0;
    while (std::getline(in, line)) {
        double t, e;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &t, &e) == 2);
        const double expect = std::exp(-2.0 * 0.4 * t);  // ||v0||^2 = 1, |k|^2 = 1
        CHECK(std::abs(e - expect) <= 1e-12 * expect);
        ++rows;
    }
    CHECK(rows == 201);
}

TEST_CASE("t_end = 0 produces one CSV row and an n/a averaging report") {
    const auto dir = fresh_dir("tzero");
    const auto out_dir = (dir / "out").string();
    std::string cfg = R"({
  "domain": {"dimension": 2, "resolution": 16},
  "physics": {"viscosity": 0.4},
  "time": {"dt": 0.01, "t_end": 0.0},
  "forcing": {"kind": "steady", "base": {"modes": []}},
  "output": {"directory": ")" + out_dir + "\"}\n}";
    spit(dir / "config.json", cfg);
    CHECK(cli_main({"run", (dir / "config.json").string()}) == kOk);
    const std::string csv = slurp(fs::path(out_dir) / "series.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // schema + header + one row
    const std::string rep = slurp(fs::path(out_dir) / "report.json");
    CHECK(rep.find("\"averaging_not_applicable\": true") != std::string::npos);
}

TEST_CASE("golden run is byte-identical across repeats and verifies") {
    const auto dir = fresh_dir("golden");
    const auto out1 = (dir / "out1").string();
    const auto out2 = (dir / "out2").string();
    spit(dir / "c1.json", golden_config(out1));
    spit(dir / "c2.json", golden_config(out2));

    REQUIRE(cli_main({"run", (dir / "c1.json").string()}) == kOk);
    REQUIRE(cli_main({"run", (dir / "c2.json").string()}) == kOk);

    // Identical bytes apart from the differing output paths in the echo.
    CHECK(slurp(fs::path(out1) / "series.csv") == slurp(fs::path(out2) / "series.csv"));
    std::string r1 = slurp(fs::path(out1) / "report.json");
    std::string r2 = slurp(fs::path(out2) / "report.json");
    const auto scrub = [](std::string s, const std::string& what) {
        for (std::size_t pos; (pos = s.find(what)) != std::string::npos;)
            s.erase(pos, what.size());
        return s;
    };
    CHECK(scrub(r1, out1) == scrub(r2, out2));

    CHECK(cli_main({"verify", out1}) == kOk);

    // Checkpoints round-trip bit-exactly through the reader.
    auto lattice = make_lattice(GridSpec{2, 16, kTwoPi, 2.0 / 3.0});
    auto s1 = read_checkpoint((fs::path(out1) / "checkpoint_t4.chk").string(), lattice);
    auto s2 = read_checkpoint((fs::path(out2) / "checkpoint_t4.chk").string(), lattice);
    CHECK(s1.v.raw() == s2.v.raw());
    CHECK(cli_main({"checkpoint-info", (fs::path(out1) / "checkpoint_t4.chk").string()}) == kOk);
}

TEST_CASE("verify rejects a hand-corrupted closure field") {
    const auto dir = fresh_dir("corrupt");
    const auto out = (dir / "out").string();
    spit(dir / "c.json", golden_config(out));
    REQUIRE(cli_main({"run", (dir / "c.json").string()}) == kOk);

    // Swap the recorded eps for a value that breaks the closure identity.
    std::string rep = slurp(fs::path(out) / "report.json");
    const std::string key = "\"eps\": ";
    const auto pos = rep.find(key);
    REQUIRE(pos != std::string::npos);
    const auto vstart = pos + key.size();
    const auto vend = rep.find_first_of(",\n", vstart);
    rep.replace(vstart, vend - vstart, "0.125");
    spit(fs::path(out) / "report.json", rep);

    std::vector<std::string> failures;
    CHECK(verify_reports(out, &failures) == kVerifyFailure);
    bool named = false;
    for (const auto& f : failures)
        if (f.find("dissipation closure") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("verify fails on an empty directory") {
    const auto dir = fresh_dir("empty");
    std::vector<std::string> failures;
    CHECK(verify_reports(dir.string(), &failures) == kVerifyFailure);
    REQUIRE(failures.size() == 1);
    CHECK(failures[0] == "reports present");
}

TEST_CASE("config errors exit with code 2 and unknown commands print usage") {
    const auto dir = fresh_dir("badcfg");
    spit(dir / "bad.json", "{\"domain\": {\"dimension\": 2, \"resolution\": 12}}");
    CHECK(cli_main({"run", (dir / "bad.json").string()}) == kConfigError);
    CHECK(cli_main({"run", (dir / "missing.json").string()}) == kConfigError);
    CHECK(cli_main({}) == kConfigError);
    CHECK(cli_main({"frobnicate"}) == kConfigError);
}

TEST_CASE("ensemble subcommand writes ensemble.json and realization reports") {
    const auto dir = fresh_dir("ensemble");
    const auto out = (dir / "out").string();
    std::string cfg = R"({
  "domain": {"dimension": 2, "resolution": 16},
  "physics": {"viscosity": 0.5},
  "time": {"dt": 0.005, "t_end": 5.0},
  "forcing": {"kind": "steady", "base": {"modes": [
    {"wavevector": [1, 0], "amplitude": [[0.0, 0.0], [0.15, 0.0]]}
  ]}},
  "ensemble": {"enabled": true, "n": 3, "amplitude": 0.002,
               "schedule": [[0, 2], [3, 0], [0, 4]], "jobs": 1},
  "output": {"directory": ")" + out + "\"}\n}";
    spit(dir / "c.json", cfg);
    REQUIRE(cli_main({"ensemble", (dir / "c.json").string()}) == kOk);
    CHECK(fs::exists(fs::path(out) / "ensemble.json"));
    CHECK(fs::exists(fs::path(out) / "realization_00" / "report.json"));
    CHECK(fs::exists(fs::path(out) / "realization_02" / "report.json"));
    CHECK(cli_main({"verify", out}) == kOk);

    // Disabled ensemble section is a config error for this subcommand.
    std::string cfg2 = cfg;
    const auto epos = cfg2.find("\"enabled\": true");
    cfg2.replace(epos, 15, "\"enabled\": false");
    spit(dir / "c2.json", cfg2);
    CHECK(cli_main({"ensemble", (dir / "c2.json").string()}) == kConfigError);
}

TEST_CASE("output root environment override is honored") {
    const auto dir = fresh_dir("envroot");
    setenv("SPECBOX_OUTPUT_ROOT", dir.c_str(), 1);
    auto cfg = parse_config(R"({
  "domain": {"dimension": 2, "resolution": 16},
  "physics": {"viscosity": 0.5},
  "time": {"dt": 0.01, "t_end": 0.0},
  "forcing": {"kind": "steady", "base": {"modes": []}},
  "output": {"directory": "nested/out"}
})");
    CHECK(resolve_output_dir(cfg) == (dir / "nested/out").string());
    unsetenv("SPECBOX_OUTPUT_ROOT");
    CHECK(resolve_output_dir(cfg) == "nested/out");
}
