// End-to-end runs of the installed binary through a shell.  FLATLAB_BIN is
// injected by the build as the absolute path of the executable.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CmdResult run_cmd(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const fs::path errfile =
        fs::temp_directory_path() /
        ("flatlab_cli_stderr_" + std::to_string(getpid()) + "_" +
         std::to_string(counter++) + ".txt");
    std::string cmd = env;
    if (!env.empty()) cmd += " ";
    cmd += std::string(FLATLAB_BIN) + " " + args + " 2>" + errfile.string();

    CmdResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        res.out.append(buf.data(), got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

    std::ifstream ein(errfile);
    std::stringstream ss;
    ss << ein.rdbuf();
    res.err = ss.str();
    fs::remove(errfile);
    return res;
}

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() /
              ("flatlab_cli_test_" + std::to_string(getpid()));
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }

    std::string write(const std::string& name, const std::string& content) const {
        const fs::path p = dir / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
    std::string sub(const std::string& name) const {
        return (dir / name).string();
    }
};

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

json load_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return json::parse(in);
}

const char* INTERP_CONFIG = R"({
  "name": "smoke-interp",
  "seed": 7,
  "geometry": {"kind": "plane"},
  "weight": {"kind": "quadratic", "a": 1.0},
  "sequence": {"kind": "points", "list": [[-2, 0], [2, 0], [0, 2]]},
  "task": {
    "kind": "interp",
    "N": 30,
    "domain": {"kind": "disk", "R": 8.0},
    "probe": [0.5, 0.5]
  }
})";

} // namespace

TEST_CASE("version flag") {
    CmdResult r = run_cmd("--version");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("no subcommand prints help and signals misuse") {
    CmdResult r = run_cmd("");
    CHECK(r.exit_code == 2);
}

TEST_CASE("interp scenario produces a complete run directory") {
    Workspace ws;
    const std::string cfg = ws.write("interp.json", INTERP_CONFIG);
    CmdResult r = run_cmd("run " + cfg + " --out " + ws.sub("runs"));
    REQUIRE(r.exit_code == 0);
    const fs::path run_dir = trim(r.out);
    REQUIRE(fs::is_directory(run_dir));
    CHECK(run_dir.filename().string().find("smoke-interp-") == 0);

    REQUIRE(fs::exists(run_dir / "report.json"));
    REQUIRE(fs::exists(run_dir / "manifest.json"));
    REQUIRE(fs::exists(run_dir / "constants.csv"));

    json report = load_json(run_dir / "report.json");
    CHECK(report["name"] == "smoke-interp");
    CHECK(report["task"] == "interp");
    CHECK(report["outputs"]["count"] == 3);
    CHECK(report["outputs"]["constant"].is_number());
    CHECK(report["outputs"]["constant"].get<double>() > 0.0);
    CHECK(report["outputs"].contains("probe"));
    // the refinement column ships by default
    CHECK(report["outputs"].contains("constant_at_N_plus_20"));

    json manifest = load_json(run_dir / "manifest.json");
    CHECK(manifest["version"] == "0.1.0");
    CHECK(manifest["scenario"]["name"] == "smoke-interp");
    bool manifest_listed = false;
    for (const auto& f : manifest["files"])
        if (f["name"] == "manifest.json") manifest_listed = true;
    CHECK(manifest_listed);
}

TEST_CASE("unknown config key is a config error") {
    Workspace ws;
    json cfg = json::parse(INTERP_CONFIG);
    cfg["task"]["bogus"] = 1;
    const std::string path = ws.write("bad.json", cfg.dump());
    CmdResult r = run_cmd("run " + path + " --out " + ws.sub("runs"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("unknown key") != std::string::npos);
}

TEST_CASE("missing sequence file is a config error") {
    Workspace ws;
    json cfg = json::parse(INTERP_CONFIG);
    cfg["sequence"] = {{"kind", "file"}, {"path", ws.sub("absent.pts")}};
    const std::string path = ws.write("missing.json", cfg.dump());
    CmdResult r = run_cmd("run " + path + " --out " + ws.sub("runs"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("no such file") != std::string::npos);
}

TEST_CASE("flat weight in a density task is a numeric error") {
    Workspace ws;
    json cfg = {
        {"name", "flat-density"},
        {"geometry", {{"kind", "plane"}}},
        {"weight", {{"kind", "radial_poly"}, {"coeffs", {1.0}}}},
        {"sequence",
         {{"kind", "lattice"}, {"s", 2.0}, {"window", {-12, 12, -12, 12}}}},
        {"task",
         {{"kind", "density"},
          {"ladder", {5.0}},
          {"window", {-12, 12, -12, 12}},
          {"sampler",
           {{"kind", "cell"}, {"cell", {0, 2, 0, 2}}, {"step", 1.0}}}}}};
    const std::string path = ws.write("flat.json", cfg.dump());
    CmdResult r = run_cmd("run " + path + " --out " + ws.sub("runs"));
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("kernel_laplacian_mass") != std::string::npos);
}

TEST_CASE("sweep over lattice spacing") {
    Workspace ws;
    json cfg = {
        {"name", "spacing-sweep"},
        {"seed", 3},
        {"geometry", {{"kind", "plane"}}},
        {"weight", {{"kind", "quadratic"}, {"a", 1.0}}},
        {"sequence",
         {{"kind", "lattice"}, {"s", 3.0}, {"window", {-4, 4, -4, 4}}}},
        {"task",
         {{"kind", "sweep"},
          {"variable", "s"},
          {"values", {2.6, 2.2}},
          {"inner",
           {{"kind", "interp"},
            {"N", 25},
            {"domain", {{"kind", "disk"}, {"R", 8.0}}},
            {"n_ladder", false}}}}}};
    const std::string path = ws.write("sweep.json", cfg.dump());
    CmdResult r = run_cmd("sweep " + path + " --out " + ws.sub("runs"));
    REQUIRE(r.exit_code == 0);
    const fs::path run_dir = trim(r.out);
    REQUIRE(fs::exists(run_dir / "sweep.csv"));

    std::ifstream csv(run_dir / "sweep.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line.find("s,status") == 0);
    int rows = 0, ok = 0;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        ++rows;
        if (line.find(",ok,") != std::string::npos) ++ok;
    }
    CHECK(rows == 2);
    CHECK(ok == 2);

    json report = load_json(run_dir / "report.json");
    CHECK(report["outputs"]["rows"].size() == 2);

    // an empty sweep range cannot run
    cfg["task"]["values"] = json::array();
    const std::string empty = ws.write("sweep_empty.json", cfg.dump());
    CHECK(run_cmd("sweep " + empty + " --out " + ws.sub("runs")).exit_code == 2);

    // subcommand and task kind must agree, both ways
    CHECK(run_cmd("run " + path + " --out " + ws.sub("runs")).exit_code == 2);
    const std::string plain = ws.write("plain.json", INTERP_CONFIG);
    CHECK(run_cmd("sweep " + plain + " --out " + ws.sub("runs")).exit_code == 2);
}

TEST_CASE("compare distinguishes equal, drifted, and mismatched runs") {
    Workspace ws;
    const std::string cfg = ws.write("interp.json", INTERP_CONFIG);
    CmdResult r1 = run_cmd("run " + cfg + " --out " + ws.sub("runs"));
    CmdResult r2 = run_cmd("run " + cfg + " --out " + ws.sub("runs"));
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r2.exit_code == 0);
    const std::string a = trim(r1.out), b = trim(r2.out);
    REQUIRE(a != b);

    CmdResult same = run_cmd("compare " + a + " " + b);
    CHECK(same.exit_code == 0);
    CHECK(same.out.find("empty diff") != std::string::npos);

    json drifted = json::parse(INTERP_CONFIG);
    drifted["task"]["N"] = 26;
    const std::string cfg2 = ws.write("interp26.json", drifted.dump());
    CmdResult r3 = run_cmd("run " + cfg2 + " --out " + ws.sub("runs"));
    REQUIRE(r3.exit_code == 0);
    CmdResult drift = run_cmd("compare " + a + " " + trim(r3.out));
    CHECK(drift.exit_code == 1);

    json other = {
        {"name", "smoke-interp"},
        {"seed", 7},
        {"geometry", {{"kind", "plane"}}},
        {"weight", {{"kind", "quadratic"}, {"a", 0.5}}},
        {"sequence",
         {{"kind", "lattice"}, {"s", 2.0}, {"window", {-10, 10, -10, 10}}}},
        {"task",
         {{"kind", "density"},
          {"ladder", {5.0}},
          {"window", {-10, 10, -10, 10}},
          {"sampler",
           {{"kind", "cell"}, {"cell", {0, 2, 0, 2}}, {"step", 1.0}}}}}};
    const std::string cfg3 = ws.write("density.json", other.dump());
    CmdResult r4 = run_cmd("run " + cfg3 + " --out " + ws.sub("runs"));
    REQUIRE(r4.exit_code == 0);
    CmdResult schema = run_cmd("compare " + a + " " + trim(r4.out));
    CHECK(schema.exit_code == 2);

    CHECK(run_cmd("compare " + a + " " + ws.sub("nonexistent")).exit_code == 2);
}

TEST_CASE("results do not depend on the worker count") {
    Workspace ws;
    const std::string cfg = ws.write("interp.json", INTERP_CONFIG);
    CmdResult r1 = run_cmd("run " + cfg + " --out " + ws.sub("runs1"),
                           "FLATLAB_JOBS=1");
    CmdResult r4 = run_cmd("run " + cfg + " --out " + ws.sub("runs4"),
                           "FLATLAB_JOBS=4");
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r4.exit_code == 0);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const fs::path d1 = trim(r1.out), d4 = trim(r4.out);
    CHECK(slurp(d1 / "constants.csv") == slurp(d4 / "constants.csv"));
    CHECK(slurp(d1 / "report.json") == slurp(d4 / "report.json"));

    // the env override is recorded
    CHECK(load_json(d1 / "manifest.json")["jobs"] == 1);
    CHECK(load_json(d4 / "manifest.json")["jobs"] == 4);
}
