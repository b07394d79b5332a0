#include "parisian/harness.hpp"

#include "parisian/errors.hpp"
#include "testkit.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace parisian;

namespace {

ExperimentConfig base_config() {
    ExperimentConfig cfg;
    cfg.a = 0.8;
    cfg.rho = 0.1;
    cfg.n_paths = 10000;
    cfg.timing = false;
    cfg.const_n = 500;
    cfg.const_delta = 1.0 / 64.0;
    cfg.const_tmax = {2.0, 4.0, 8.0};
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        testkit::fail(__FILE__, __LINE__, "cannot read " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE(harness_parse_full_round_trip) {
    const std::string text =
        "# experiment description\n"
        "c1 = 0.5\n"
        "c2=0.25\n"
        "a = 0.8   # trailing comment\n"
        "rho = -0.3\n"
        "s1 = 1.5\n"
        "s2 = 0.5\n"
        "\n"
        "u_list = 2, 4, 8\n"
        "n_paths = 20000\n"
        "seed = 31415\n"
        "workers = 2\n"
        "m = 24\n"
        "boundary_tol = 1e-10\n"
        "tilt = off\n"
        "overhang = yes\n"
        "timing = false\n"
        "format = both\n"
        "out = /tmp/somewhere\n"
        "const_n = 5000\n"
        "const_delta = 0.0078125\n"
        "const_tmax = 4, 8\n"
        "const_closed_form_s0 = no\n"
        "sup_correction = off\n";
    const ExperimentConfig cfg = parse_config_text(text);
    REQUIRE(cfg.c1 == 0.5 && cfg.c2 == 0.25, "drifts");
    REQUIRE(cfg.a == 0.8 && cfg.rho == -0.3, "model shape");
    REQUIRE(cfg.s1 == 1.5 && cfg.s2 == 0.5, "windows");
    REQUIRE(cfg.u_list.size() == 3 && cfg.u_list[1] == 4.0, "barrier levels");
    REQUIRE(cfg.n_paths == 20000 && cfg.seed == 31415, "budget and seed");
    REQUIRE(cfg.workers == 2 && cfg.m == 24, "workers and grid density");
    REQUIRE(cfg.boundary_tol == 1e-10, "tolerance");
    REQUIRE(cfg.tilt == ExperimentConfig::Tilt::off, "tilt mode");
    REQUIRE(cfg.overhang && !cfg.timing, "flags");
    REQUIRE(cfg.format == ExperimentConfig::Format::both, "format");
    REQUIRE(cfg.out == "/tmp/somewhere", "output path");
    REQUIRE(cfg.const_n == 5000 && cfg.const_delta == 0.0078125, "constant controls");
    REQUIRE(cfg.const_tmax.size() == 2 && cfg.const_tmax[1] == 8.0, "ladder");
    REQUIRE(!cfg.const_closed_form_s0 && !cfg.sup_correction, "estimator toggles");

    const ExperimentConfig dflt = parse_config_text("");
    REQUIRE(dflt.a == 1.0 && dflt.workers == 0 && dflt.timing, "defaults");
    REQUIRE(dflt.tilt == ExperimentConfig::Tilt::auto_mode, "default tilt");
}

TEST_CASE(harness_parse_errors) {
    REQUIRE_THROWS(parse_config_text("banana = 1\n"), param_error, "unknown key");
    try {
        parse_config_text("a = 1\n\nthis is not an assignment\n");
        testkit::fail(__FILE__, __LINE__, "expected a parse failure");
    } catch (const param_error& e) {
        REQUIRE(contains(e.what(), "line 3"), "line number in: " << e.what());
    }
    REQUIRE_THROWS(parse_config_text("a = fast\n"), param_error, "bad number");
    REQUIRE_THROWS(parse_config_text("n_paths = 1e4\n"), param_error,
                   "integer keys take integers");
    REQUIRE_THROWS(parse_config_text("overhang = maybe\n"), param_error, "bad bool");
    REQUIRE_THROWS(parse_config_text("tilt = sideways\n"), param_error, "bad tilt");
    REQUIRE_THROWS(parse_config_text("format = xml\n"), param_error, "bad format");
    REQUIRE_THROWS(parse_config_file("/nonexistent/config.txt"), param_error,
                   "missing file");
}

TEST_CASE(harness_validate_config) {
    ExperimentConfig cfg;
    validate_config(cfg);

    cfg.u_list = {2.0, 2.0};
    REQUIRE_THROWS(validate_config(cfg), param_error, "u_list must increase");
    cfg.u_list = {-1.0};
    REQUIRE_THROWS(validate_config(cfg), param_error, "u_list must be positive");
    cfg.u_list = {1.0, 2.0};
    validate_config(cfg);

    cfg.n_paths = 9999;
    REQUIRE_THROWS(validate_config(cfg), param_error, "n_paths floor");
    cfg.n_paths = 10000;
    cfg.m = 7;
    REQUIRE_THROWS(validate_config(cfg), param_error, "m floor");
    cfg.m = 8;
    cfg.const_n = 99;
    REQUIRE_THROWS(validate_config(cfg), param_error, "const_n floor");
    cfg.const_n = 100;
    cfg.boundary_tol = 0.0;
    REQUIRE_THROWS(validate_config(cfg), param_error, "tolerance lower edge");
    cfg.boundary_tol = 2e-3;
    REQUIRE_THROWS(validate_config(cfg), param_error, "tolerance upper edge");
    cfg.boundary_tol = 1e-3;
    validate_config(cfg);
    cfg.workers = -1;
    REQUIRE_THROWS(validate_config(cfg), param_error, "negative workers");
}

TEST_CASE(harness_resolve_workers) {
    const char* saved = std::getenv("PARISIAN_WORKERS");
    const std::string saved_value = saved != nullptr ? saved : "";
    unsetenv("PARISIAN_WORKERS");

    ExperimentConfig cfg;
    REQUIRE(resolve_workers(0, cfg) == 1, "fallback is one worker");
    cfg.workers = 2;
    REQUIRE(resolve_workers(0, cfg) == 2, "config value");
    REQUIRE(resolve_workers(4, cfg) == 4, "CLI flag wins");

    setenv("PARISIAN_WORKERS", "7", 1);
    REQUIRE(resolve_workers(0, cfg) == 2, "config beats the environment");
    cfg.workers = 0;
    REQUIRE(resolve_workers(0, cfg) == 7, "environment fills unset config");
    setenv("PARISIAN_WORKERS", "abc", 1);
    REQUIRE_THROWS(resolve_workers(0, cfg), param_error, "malformed environment");
    setenv("PARISIAN_WORKERS", "0", 1);
    REQUIRE_THROWS(resolve_workers(0, cfg), param_error, "environment must be >= 1");

    if (saved != nullptr) {
        setenv("PARISIAN_WORKERS", saved_value.c_str(), 1);
    } else {
        unsetenv("PARISIAN_WORKERS");
    }
}

TEST_CASE(harness_constants_only_run) {
    ExperimentConfig cfg = base_config();
    cfg.s1 = 1.0;
    cfg.s2 = 1.0;
    const ExperimentReport rep = run_experiment(cfg);
    REQUIRE(rep.regime == "CASE_I", "regime " << rep.regime);
    REQUIRE(rep.constants.size() == 2 && rep.estimation_calls == 2,
            "two distinct constants estimated once each");
    REQUIRE(rep.constants[0].key == "R(1,1)" && rep.constants[1].key == "R(0,0)",
            "keys " << rep.constants[0].key << " " << rep.constants[1].key);
    REQUIRE(rep.limit.value > 0.0 && rep.limit.value < 1.0,
            "limit in (0,1): " << rep.limit.value);
    REQUIRE(rep.rows.empty() && !rep.has_errors(), "no rows requested");
    REQUIRE(emit_csv(rep) ==
                "u,p_classical,p_parisian,ratio,ci_low,ci_high,n_steps,seconds\n",
            "header-only table");
}

TEST_CASE(harness_constant_cache_dedupe) {
    ExperimentConfig cfg = base_config();
    const ExperimentReport rep = run_experiment(cfg);
    REQUIRE(rep.constants.size() == 1 && rep.estimation_calls == 1,
            "zero windows collapse the joint functional to one key");
    REQUIRE(rep.limit.value == 1.0 && rep.limit.se == 0.0,
            "shared key cancels exactly");

    ExperimentConfig ciii = base_config();
    ciii.a = 1.0;
    ciii.rho = -0.5;
    ciii.s1 = 0.5;
    ciii.s2 = 0.5;
    const ExperimentReport rep3 = run_experiment(ciii);
    REQUIRE(rep3.regime == "CASE_III", "regime " << rep3.regime);
    REQUIRE(rep3.constants.size() == 2 && rep3.estimation_calls == 2,
            "equal windows dedupe the four requirements to two");
}

TEST_CASE(harness_swap_row_and_emission) {
    ExperimentConfig cfg = base_config();
    cfg.a = 2.5;
    cfg.c1 = 0.2;
    cfg.c2 = 0.1;
    cfg.u_list = {2.0};
    cfg.seed = 9090;
    const ExperimentReport rep = run_experiment(cfg);
    REQUIRE(rep.swapped && rep.barrier_scale == 2.5, "roles exchanged");
    REQUIRE(rep.params.a == 0.4 && rep.params.c1 == 0.1 && rep.params.c2 == 0.2,
            "coordinates swapped into the working frame");
    bool warned = false;
    for (const auto& w : rep.warnings) {
        warned = warned || contains(w, "swapped");
    }
    REQUIRE(warned, "swap is announced");
    REQUIRE(rep.rows.size() == 1 && rep.rows[0].u == 5.0,
            "barrier level rescaled to the working frame");
    const RowRecord& row = rep.rows[0];
    REQUIRE(!row.failed, "simulation ran");
    REQUIRE(row.ratio == 1.0, "zero windows make the ratio exactly one");
    REQUIRE(row.ci_low >= 0.0 && row.ci_high <= 1.0 && row.ci_low <= row.ci_high,
            "interval inside [0,1]");
    REQUIRE(row.seconds == 0.0, "timing off zeroes the clock");

    const std::string csv = emit_csv(rep);
    const auto first_nl = csv.find('\n');
    const std::string data_line = csv.substr(first_nl + 1, csv.find('\n', first_nl + 1) - first_nl - 1);
    REQUIRE(data_line.rfind("5,", 0) == 0, "row starts with the level: " << data_line);
    long commas = 0;
    for (const char ch : data_line) {
        commas += ch == ',' ? 1 : 0;
    }
    REQUIRE(commas == 7, "eight CSV fields");

    const std::string json = emit_json(rep);
    REQUIRE(json.rfind("{\n  \"regime\":", 0) == 0, "regime leads the document");
    REQUIRE(contains(json, "\"swapped\": true"), "swap flag serialized");
    REQUIRE(contains(json, "\"barrier_scale\": 2.5"), "scale serialized");
    REQUIRE(contains(json, "\"seed\": 9090"), "seed serialized");
    REQUIRE(!contains(json, "\"workers\""), "resolved parallelism never serialized");
    REQUIRE(contains(json, "\"timing\": false"), "config echo present");
}

TEST_CASE(harness_failed_row_reporting) {
    ExperimentConfig cfg = base_config();
    cfg.a = 1.0;
    cfg.rho = 0.0;
    cfg.u_list = {1.0, 12.0};
    cfg.tilt = ExperimentConfig::Tilt::off;
    const ExperimentReport rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 2, "one row per level");
    REQUIRE(!rep.rows[0].failed, "easy level succeeds untilted");
    REQUIRE(rep.rows[1].failed, "far level sees no event untilted");
    REQUIRE(std::isnan(rep.rows[1].ratio) && std::isnan(rep.rows[1].p_classical),
            "failed row carries no numbers");
    REQUIRE(rep.has_errors() && rep.errors.size() == 1, "error recorded");
    REQUIRE(contains(rep.errors[0], "u=12"), "error names the level: " << rep.errors[0]);

    const std::string csv = emit_csv(rep);
    REQUIRE(contains(csv, "nan"), "failed row serializes as nan");
    const std::string json = emit_json(rep);
    REQUIRE(contains(json, "\"failed\": true"), "failure flag in JSON");
    REQUIRE(contains(json, "\"error\""), "failure reason in JSON");
}

TEST_CASE(harness_worker_and_repeat_determinism) {
    ExperimentConfig cfg = base_config();
    cfg.u_list = {1.5};
    const ExperimentReport r1 = run_experiment(cfg, 1);
    const ExperimentReport r2 = run_experiment(cfg, 1);
    const ExperimentReport r3 = run_experiment(cfg, 3);
    REQUIRE(emit_csv(r1) == emit_csv(r2), "repeat run is byte identical");
    REQUIRE(emit_json(r1) == emit_json(r2), "repeat JSON is byte identical");
    REQUIRE(emit_csv(r1) == emit_csv(r3), "worker count leaves the CSV unchanged");
    REQUIRE(emit_json(r1) == emit_json(r3), "worker count leaves the JSON unchanged");
    REQUIRE(r3.workers == 3, "resolved count still visible to callers");
}

TEST_CASE(harness_emit_report_files) {
    ExperimentConfig cfg = base_config();
    const ExperimentReport rep = run_experiment(cfg);

    const std::string dir =
        (std::filesystem::temp_directory_path() /
         ("parisian_emit_" + std::to_string(::getpid())))
            .string();
    const auto paths = emit_report(rep, dir, ExperimentConfig::Format::both);
    REQUIRE(paths.size() == 2, "both formats written");
    REQUIRE(slurp(paths[0]) == emit_csv(rep), "CSV file bytes");
    REQUIRE(slurp(paths[1]) == emit_json(rep), "JSON file bytes");
    const auto csv_only = emit_report(rep, dir, ExperimentConfig::Format::csv);
    REQUIRE(csv_only.size() == 1 && contains(csv_only[0], "report.csv"),
            "single format writes one file");
    REQUIRE_THROWS(emit_report(rep, "", ExperimentConfig::Format::csv), param_error,
                   "empty output directory");
    std::filesystem::remove_all(dir);
}

TEST_CASE(harness_cli_binary_smoke) {
    const char* bin = std::getenv("PARISIAN_CLI_BIN");
    if (bin == nullptr) {
        std::cout << "  (PARISIAN_CLI_BIN unset, CLI subprocess checks skipped)\n";
        return;
    }
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() / ("parisian_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string q = "\"" + std::string(bin) + "\"";
    const auto run = [&](const std::string& args) {
        const std::string cmd =
            q + " " + args + " > " + (dir / "out.txt").string() + " 2>&1";
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    const auto out_text = [&]() { return slurp((dir / "out.txt").string()); };

    REQUIRE(run("--help") == 0, "--help exits cleanly");
    REQUIRE(contains(out_text(), "classify"), "help lists the verbs");

    {
        std::ofstream f(dir / "exp.cfg");
        f << "a = 0.8\nrho = 0.1\nu_list = 1.5\nn_paths = 10000\n"
          << "timing = false\nconst_n = 500\nconst_delta = 0.015625\n"
          << "const_tmax = 2, 4, 8\nseed = 4242\n";
    }
    REQUIRE(run("classify --config " + (dir / "exp.cfg").string() + " --u 4") == 0,
            "classify succeeds");
    REQUIRE(contains(out_text(), "CASE_I"), "regime printed");
    REQUIRE(contains(out_text(), "tilt"), "tilt details printed for a level");

    {
        std::ofstream f(dir / "bad.cfg");
        f << "nonsense = 1\n";
    }
    REQUIRE(run("classify --config " + (dir / "bad.cfg").string()) == 2,
            "parameter problems exit 2");

    const std::string sim_out = (dir / "run1").string();
    REQUIRE(run("simulate --config " + (dir / "exp.cfg").string() + " --out " +
                sim_out + " --format both") == 0,
            "simulate succeeds: " << out_text());
    const std::string csv1 = slurp(sim_out + "/report.csv");
    REQUIRE(csv1.rfind("u,p_classical", 0) == 0, "CSV header present");

    // a second worker count must reproduce the files byte for byte
    const std::string sim_out2 = (dir / "run2").string();
    REQUIRE(run("simulate --config " + (dir / "exp.cfg").string() + " --out " +
                sim_out2 + " --format both --workers 2") == 0,
            "simulate with more workers");
    REQUIRE(slurp(sim_out2 + "/report.csv") == csv1, "CSV worker invariance");
    REQUIRE(slurp(sim_out2 + "/report.json") == slurp(sim_out + "/report.json"),
            "JSON worker invariance");

    // round trip: re-emitting the stored JSON reproduces the CSV bytes
    const std::string rt_out = (dir / "rt").string();
    REQUIRE(run("report --in " + sim_out + "/report.json --out " + rt_out) == 0,
            "report verb succeeds");
    REQUIRE(slurp(rt_out + "/report.csv") == csv1, "rows round trip through JSON");

    {
        std::ofstream f(dir / "fail.cfg");
        f << "a = 1\nrho = 0\nu_list = 12\nn_paths = 10000\ntilt = off\n"
          << "timing = false\nconst_n = 500\n";
    }
    REQUIRE(run("simulate --config " + (dir / "fail.cfg").string() + " --out " +
                (dir / "failrun").string()) == 3,
            "simulation-quality failures exit 3");
    fs::remove_all(dir);
}
