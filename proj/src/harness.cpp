#include "parisian/harness.hpp"

#include "parisian/errors.hpp"
#include "parisian/pathsim.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

namespace parisian {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end == nullptr || *end != '\0') {
        throw param_error("config key " + key + " expects a number, got '" + value + "'");
    }
    return v;
}

long parse_long(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (value.empty() || end == nullptr || *end != '\0') {
        throw param_error("config key " + key + " expects an integer, got '" + value + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (value.empty() || end == nullptr || *end != '\0') {
        throw param_error("config key " + key + " expects an unsigned integer, got '" + value + "'");
    }
    return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "off" || value == "no") {
        return false;
    }
    throw param_error("config key " + key + " expects a boolean, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    if (trim(value).empty()) {
        return out;
    }
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(key, trim(item)));
    }
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

const char* tilt_name(ExperimentConfig::Tilt t) {
    switch (t) {
        case ExperimentConfig::Tilt::auto_mode: return "auto";
        case ExperimentConfig::Tilt::on: return "on";
        case ExperimentConfig::Tilt::off: return "off";
    }
    return "auto";
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string raw;
    long line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) {
            raw = raw.substr(0, hash);
        }
        const std::string line = trim(raw);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw param_error("config line " + std::to_string(line_no) +
                              " is not of the form key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "c1") {
            cfg.c1 = parse_double(key, value);
        } else if (key == "c2") {
            cfg.c2 = parse_double(key, value);
        } else if (key == "a") {
            cfg.a = parse_double(key, value);
        } else if (key == "rho") {
            cfg.rho = parse_double(key, value);
        } else if (key == "s1") {
            cfg.s1 = parse_double(key, value);
        } else if (key == "s2") {
            cfg.s2 = parse_double(key, value);
        } else if (key == "u_list") {
            cfg.u_list = parse_list(key, value);
        } else if (key == "n_paths") {
            cfg.n_paths = parse_long(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_u64(key, value);
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(parse_long(key, value));
        } else if (key == "m") {
            cfg.m = static_cast<int>(parse_long(key, value));
        } else if (key == "boundary_tol") {
            cfg.boundary_tol = parse_double(key, value);
        } else if (key == "tilt") {
            if (value == "auto") {
                cfg.tilt = ExperimentConfig::Tilt::auto_mode;
            } else if (value == "on") {
                cfg.tilt = ExperimentConfig::Tilt::on;
            } else if (value == "off") {
                cfg.tilt = ExperimentConfig::Tilt::off;
            } else {
                throw param_error("config key tilt expects auto, on, or off");
            }
        } else if (key == "overhang") {
            cfg.overhang = parse_bool(key, value);
        } else if (key == "timing") {
            cfg.timing = parse_bool(key, value);
        } else if (key == "format") {
            if (value == "csv") {
                cfg.format = ExperimentConfig::Format::csv;
            } else if (value == "json") {
                cfg.format = ExperimentConfig::Format::json;
            } else if (value == "both") {
                cfg.format = ExperimentConfig::Format::both;
            } else {
                throw param_error("config key format expects csv, json, or both");
            }
        } else if (key == "out") {
            cfg.out = value;
        } else if (key == "const_n") {
            cfg.const_n = parse_long(key, value);
        } else if (key == "const_delta") {
            cfg.const_delta = parse_double(key, value);
        } else if (key == "const_tmax") {
            cfg.const_tmax = parse_list(key, value);
        } else if (key == "const_closed_form_s0") {
            cfg.const_closed_form_s0 = parse_bool(key, value);
        } else if (key == "sup_correction") {
            cfg.sup_correction = parse_bool(key, value);
        } else {
            throw param_error("unknown config key: " + key);
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw param_error("cannot read config file: " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void validate_config(const ExperimentConfig& cfg) {
    for (std::size_t i = 0; i < cfg.u_list.size(); ++i) {
        const double u = cfg.u_list[i];
        if (!(u > 0.0) || !std::isfinite(u)) {
            throw param_error("u_list entries must be positive and finite");
        }
        if (i > 0 && u <= cfg.u_list[i - 1]) {
            throw param_error("u_list must be strictly increasing");
        }
    }
    if (cfg.n_paths < 10000) {
        throw param_error("n_paths must be >= 10000");
    }
    if (cfg.m < 8) {
        throw param_error("grid refinement m must be >= 8");
    }
    if (cfg.const_n < 100) {
        throw param_error("const_n must be >= 100");
    }
    if (!(cfg.boundary_tol > 0.0) || cfg.boundary_tol > 1e-3) {
        throw param_error("boundary_tol must be in (0, 1e-3]");
    }
    if (cfg.workers < 0) {
        throw param_error("workers must be >= 1 when set");
    }
}

int resolve_workers(int cli_value, const ExperimentConfig& cfg) {
    if (cli_value > 0) {
        return cli_value;
    }
    if (cfg.workers > 0) {
        return cfg.workers;
    }
    if (const char* env = std::getenv("PARISIAN_WORKERS")) {
        const std::string value(env);
        char* end = nullptr;
        const long v = std::strtol(value.c_str(), &end, 10);
        if (value.empty() || end == nullptr || *end != '\0' || v < 1) {
            throw param_error("PARISIAN_WORKERS must be a positive integer");
        }
        return static_cast<int>(v);
    }
    return 1;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int cli_workers) {
    validate_config(cfg);

    ExperimentReport rep;
    rep.config = cfg;
    rep.seed = cfg.seed;
    rep.workers = resolve_workers(cli_workers, cfg);

    const NormalizedModel nm =
        normalize_model(cfg.c1, cfg.c2, cfg.a, cfg.rho, cfg.s1, cfg.s2);
    rep.params = nm.params;
    rep.swapped = nm.swapped;
    rep.barrier_scale = nm.barrier_scale;

    std::vector<double> u_scaled = cfg.u_list;
    if (nm.swapped) {
        for (double& u : u_scaled) {
            u *= nm.barrier_scale;
        }
        rep.warnings.push_back(
            "barrier ratio exceeds 1: component roles swapped, levels rescaled by " +
            fmt17(nm.barrier_scale));
    }

    rep.regime = regime_name(classify_regime(nm.params, cfg.boundary_tol));

    McOptions mc;
    mc.n_paths = cfg.const_n;
    mc.seed = cfg.seed;
    mc.workers = rep.workers;
    mc.delta = cfg.const_delta;
    mc.t_ladder = cfg.const_tmax;
    mc.closed_form_s0 = cfg.const_closed_form_s0;
    mc.sup_correction = cfg.sup_correction;

    LimitConstants lc;
    for (const auto& spec : required_constants(nm.params, cfg.boundary_tol)) {
        const std::string key = spec.key();
        if (lc.values.count(key) != 0) {
            continue;
        }
        ConstantEstimate est = estimate_constant(spec, nm.params, mc);
        ++rep.estimation_calls;
        lc.values[key] = Estimate{est.value, est.se};
        for (const auto& w : est.warnings) {
            rep.warnings.push_back(key + ": " + w);
        }
        rep.constants.push_back(std::move(est));
    }
    rep.limit = theoretical_ratio_limit(nm.params, lc, cfg.boundary_tol);

    for (const double u : u_scaled) {
        RowRecord row;
        row.u = u;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const GridSpec grid = make_grid(nm.params, u, cfg.m);
            row.n_steps = grid.n_steps;
            const double uu = u * u;
            if (window_steps(nm.params.s1 / uu, grid.n_steps) < 0 ||
                window_steps(nm.params.s2 / uu, grid.n_steps) < 0) {
                rep.warnings.push_back(
                    "u=" + fmt17(u) +
                    ": clearance window exceeds the horizon, the event is impossible");
            }
            TiltConfig tilt;
            if (cfg.tilt != ExperimentConfig::Tilt::off) {
                tilt = default_tilt(nm.params, u, cfg.boundary_tol);
            }
            const RatioEstimate est =
                estimate_conditional_ratio(nm.params, u, grid, cfg.n_paths, tilt,
                                           cfg.seed, rep.workers, cfg.overhang);
            row.p_classical = est.p_classical;
            row.p_parisian = est.p_parisian;
            row.ratio = est.ratio;
            row.ci_low = est.ci_low;
            row.ci_high = est.ci_high;
        } catch (const sim_error& e) {
            row.failed = true;
            row.error = e.what();
            rep.errors.push_back("u=" + fmt17(u) + ": " + e.what());
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.p_classical = nan;
            row.p_parisian = nan;
            row.ratio = nan;
            row.ci_low = nan;
            row.ci_high = nan;
        }
        const auto t1 = std::chrono::steady_clock::now();
        row.seconds =
            cfg.timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

std::string emit_csv_rows(const std::vector<RowRecord>& rows) {
    std::string out = "u,p_classical,p_parisian,ratio,ci_low,ci_high,n_steps,seconds\n";
    for (const auto& r : rows) {
        out += fmt17(r.u) + "," + fmt17(r.p_classical) + "," + fmt17(r.p_parisian) +
               "," + fmt17(r.ratio) + "," + fmt17(r.ci_low) + "," + fmt17(r.ci_high) +
               "," + std::to_string(r.n_steps) + "," + fmt17(r.seconds) + "\n";
    }
    return out;
}

std::string emit_csv(const ExperimentReport& report) {
    return emit_csv_rows(report.rows);
}

std::string emit_json(const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["regime"] = report.regime;
    j["params"] = {{"c1", report.params.c1}, {"c2", report.params.c2},
                   {"a", report.params.a},   {"rho", report.params.rho},
                   {"s1", report.params.s1}, {"s2", report.params.s2}};
    j["swapped"] = report.swapped;
    j["barrier_scale"] = report.barrier_scale;
    j["limit"] = {{"value", report.limit.value}, {"se", report.limit.se}};

    nlohmann::ordered_json consts = nlohmann::ordered_json::array();
    for (const auto& c : report.constants) {
        nlohmann::ordered_json jc;
        jc["key"] = c.key;
        jc["value"] = c.value;
        jc["se"] = c.se;
        jc["closed_form"] = c.closed_form;
        nlohmann::ordered_json ladder = nlohmann::ordered_json::array();
        for (const auto& l : c.ladder) {
            ladder.push_back({{"span", l.span}, {"value", l.value}, {"se", l.se}});
        }
        jc["ladder"] = ladder;
        jc["warnings"] = c.warnings;
        consts.push_back(jc);
    }
    j["constants"] = consts;
    j["estimation_calls"] = report.estimation_calls;

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json jr;
        jr["u"] = r.u;
        jr["p_classical"] = r.p_classical;
        jr["p_parisian"] = r.p_parisian;
        jr["ratio"] = r.ratio;
        jr["ci_low"] = r.ci_low;
        jr["ci_high"] = r.ci_high;
        jr["n_steps"] = r.n_steps;
        jr["seconds"] = r.seconds;
        jr["failed"] = r.failed;
        if (r.failed) {
            jr["error"] = r.error;
        }
        rows.push_back(jr);
    }
    j["rows"] = rows;
    j["warnings"] = report.warnings;
    j["errors"] = report.errors;
    j["seed"] = report.seed;
    j["n_paths"] = report.config.n_paths;
    j["m"] = report.config.m;
    j["overhang"] = report.config.overhang;
    j["tilt"] = tilt_name(report.config.tilt);
    j["timing"] = report.config.timing;
    return j.dump(2) + "\n";
}

std::vector<std::string> emit_report(const ExperimentReport& report,
                                     const std::string& out_dir,
                                     ExperimentConfig::Format format) {
    if (out_dir.empty()) {
        throw param_error("output directory is required");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw param_error("cannot create output directory: " + out_dir);
    }
    std::vector<std::string> written;
    const auto write_file = [&](const std::string& name, const std::string& content) {
        const std::string path = (std::filesystem::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw param_error("cannot write output file: " + path);
        }
        out << content;
        out.close();
        if (!out) {
            throw param_error("cannot write output file: " + path);
        }
        written.push_back(path);
    };
    if (format == ExperimentConfig::Format::csv ||
        format == ExperimentConfig::Format::both) {
        write_file("report.csv", emit_csv(report));
    }
    if (format == ExperimentConfig::Format::json ||
        format == ExperimentConfig::Format::both) {
        write_file("report.json", emit_json(report));
    }
    return written;
}

} // namespace parisian
