#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "frontlab_cli_suite";

struct cli_result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

cli_result run_cli(const std::string& args) {
    const fs::path out = kRoot / "stdout.txt";
    const fs::path err = kRoot / "stderr.txt";
    const std::string cmd = std::string(FRONTLAB_BIN) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    cli_result r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

json base_config() {
    return json{
        {"params", {{"d1", 1.0}, {"d2", 1.0}, {"r1", 1.0}, {"r2", 0.25},
                    {"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"mu", 1.5}}},
        {"kernels", {{"j1", {{"family", "triangle"}, {"radius", 1.0}}},
                     {"j2", {{"family", "triangle"}, {"radius", 1.0}}}}},
        {"grid", {{"dx", 0.25}, {"x_max", 8.0}}},
        {"time", {{"horizon", 2.0}, {"log_dt", 0.25}}},
        {"initial", {{"h0", 2.0},
                     {"u", {{"amplitude", 0.5}}},
                     {"v", {{"amplitude", 0.8}}}}},
    };
}

fs::path write_config(const std::string& name, const json& j) {
    fs::create_directories(kRoot);
    const fs::path p = kRoot / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

}  // namespace

TEST_CASE("simulate writes the expected files", "[cli]") {
    fs::remove_all(kRoot);
    auto cfg = base_config();
    cfg["output"] = {{"snapshots", true}, {"plot_script", true}};
    cfg["probes"] = {1.0};
    const auto cfgp = write_config("sim.json", cfg);
    const fs::path out = kRoot / "sim_out";
    const auto r =
        run_cli("simulate --config " + cfgp.string() + " --out " + out.string());
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(out / "trajectory.csv"));
    CHECK(fs::exists(out / "final_state.csv"));
    CHECK(fs::exists(out / "snapshots.csv"));
    CHECK(fs::exists(out / "plot.py"));
    CHECK(fs::exists(out / "summary.json"));
    CHECK(fs::exists(out / "manifest.json"));

    const json summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary["t_final"].get<double>() >= 2.0 - 0.2);
    CHECK(summary["h_final"].get<double>() >= 2.0);
    CHECK(summary["steps"].get<int>() > 0);
    // the same summary lands on stdout
    const json echoed = json::parse(r.out);
    CHECK(echoed["h_final"] == summary["h_final"]);

    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["tool"] == "frontlab");
    CHECK(manifest["subcommand"] == "simulate");
    CHECK(manifest["config"]["params"]["mu"] == 1.5);
    CHECK(manifest.contains("created"));

    // the trajectory has a header plus one row per logged record
    std::ifstream tr(out / "trajectory.csv");
    std::string header;
    std::getline(tr, header);
    CHECK(header.rfind("t,h,g,sup_u,sup_v", 0) == 0);
    CHECK(header.find("u_at_1") != std::string::npos);
}

TEST_CASE("configuration errors exit with the config code", "[cli]") {
    auto cfg = base_config();
    cfg.erase("params");
    const auto cfgp = write_config("bad.json", cfg);
    const auto r = run_cli("simulate --config " + cfgp.string() + " --out " +
                           (kRoot / "bad_out").string());
    CHECK(r.exit_code == 2);
    const json err = json::parse(r.err);
    CHECK(err["error"] == "ConfigError");
    CHECK(err["code"] == 2);
}

TEST_CASE("missing threshold exits with its own code", "[cli]") {
    auto cfg = base_config();
    cfg["params"]["r2"] = 0.6;  // growth beats diffusive loss: no threshold length
    const auto cfgp = write_config("nothresh.json", cfg);
    const auto r = run_cli("critical-length --config " + cfgp.string() + " --out " +
                           (kRoot / "nothresh_out").string());
    CHECK(r.exit_code == 3);
    CHECK(json::parse(r.err)["error"] == "NoCriticalLength");
}

TEST_CASE("heavy-tailed semi-wave request exits with its own code", "[cli]") {
    auto cfg = base_config();
    cfg["kernels"]["j2"] = {{"family", "algebraic"}, {"gamma", 1.5}};
    const auto cfgp = write_config("heavy.json", cfg);
    const auto r = run_cli("semiwave --config " + cfgp.string() + " --out " +
                           (kRoot / "heavy_out").string());
    CHECK(r.exit_code == 6);
    CHECK(json::parse(r.err)["error"] == "NoSemiWave");
}

TEST_CASE("seedless runs are byte identical", "[cli]") {
    const auto cfgp = write_config("seedless.json", base_config());
    const fs::path o1 = kRoot / "seedless_1", o2 = kRoot / "seedless_2";
    const auto r1 = run_cli("simulate --seedless --config " + cfgp.string() +
                            " --out " + o1.string());
    const auto r2 = run_cli("simulate --seedless --config " + cfgp.string() +
                            " --out " + o2.string());
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(o1 / "manifest.json") == slurp(o2 / "manifest.json"));
    CHECK(slurp(o1 / "summary.json") == slurp(o2 / "summary.json"));
    CHECK(slurp(o1 / "trajectory.csv") == slurp(o2 / "trajectory.csv"));
    const json manifest = json::parse(slurp(o1 / "manifest.json"));
    CHECK(manifest["seedless"] == true);
    CHECK(!manifest.contains("created"));
}

TEST_CASE("speed and eigen subcommands publish their numbers", "[cli]") {
    auto cfg = base_config();
    cfg["eigen"] = {{"lengths", {0.5, 1.0}}, {"dx_target", 0.05}};
    const auto cfgp = write_config("speed.json", cfg);

    const fs::path so = kRoot / "speed_out";
    const auto rs =
        run_cli("speed --config " + cfgp.string() + " --out " + so.string());
    REQUIRE(rs.exit_code == 0);
    const json ss = json::parse(slurp(so / "summary.json"));
    CHECK(ss["c_star"].get<double>() > 0.0);
    CHECK(ss["field"] == "v");
    CHECK(fs::exists(so / "dispersion.csv"));

    const fs::path eo = kRoot / "eigen_out";
    const auto re =
        run_cli("eigen --config " + cfgp.string() + " --out " + eo.string());
    REQUIRE(re.exit_code == 0);
    const json es = json::parse(slurp(eo / "summary.json"));
    CHECK(es["curve"].size() == 2);
    std::ifstream ec(eo / "eigen.csv");
    std::string line;
    int rows = 0;
    while (std::getline(ec, line)) ++rows;
    CHECK(rows == 3);  // header + one row per length
}

TEST_CASE("compare reports ordered trajectories", "[cli]") {
    auto cfg = base_config();
    cfg["compare"] = {{"factor", 1.2}, {"front_offset", 0.25}};
    const auto cfgp = write_config("compare.json", cfg);
    const fs::path out = kRoot / "compare_out";
    const auto r =
        run_cli("compare --config " + cfgp.string() + " --out " + out.string());
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    const json s = json::parse(slurp(out / "summary.json"));
    CHECK(s["ordered"] == true);
    CHECK(s["worst_gap"].get<double>() <= 1e-12);
    CHECK(fs::exists(out / "trajectory_small.csv"));
    CHECK(fs::exists(out / "trajectory_large.csv"));
}

TEST_CASE("sweep runs every cell, in parallel when asked", "[cli]") {
    auto cfg = base_config();
    cfg["sweep"] = {{"parameter", "mu"}, {"values", {0.5, 1.0, 2.0}}};
    const auto cfgp = write_config("sweep.json", cfg);
    const fs::path out = kRoot / "sweep_out";
    const auto r = run_cli("sweep --workers 2 --config " + cfgp.string() +
                           " --out " + out.string());
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    const json s = json::parse(slurp(out / "summary.json"));
    CHECK(s["cells"] == 3);
    CHECK(s["failures"] == 0);
    std::ifstream sc(out / "sweep.csv");
    std::string line;
    std::getline(sc, line);
    CHECK(line.rfind("value,verdict", 0) == 0);
    int rows = 0;
    std::vector<std::string> firsts;
    while (std::getline(sc, line)) {
        firsts.push_back(line.substr(0, line.find(',')));
        ++rows;
    }
    CHECK(rows == 3);
    // rows come back in input order regardless of worker scheduling
    CHECK(firsts == std::vector<std::string>{"0.5", "1", "2"});

    // a sweep clause is required
    const auto nosweep = write_config("nosweep.json", base_config());
    const auto r2 = run_cli("sweep --config " + nosweep.string() + " --out " +
                            (kRoot / "nosweep_out").string());
    CHECK(r2.exit_code == 2);
}

TEST_CASE("bad invocations fail without touching outputs", "[cli]") {
    const auto cfgp = write_config("ok.json", base_config());
    CHECK(run_cli("frobnicate --config " + cfgp.string()).exit_code != 0);
    CHECK(run_cli("simulate").exit_code != 0);  // --config is required
    CHECK(run_cli("simulate --config " + (kRoot / "absent.json").string())
              .exit_code != 0);
    CHECK(run_cli("").exit_code != 0);  // a subcommand is required
}
