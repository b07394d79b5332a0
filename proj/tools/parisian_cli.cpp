#include "parisian/errors.hpp"
#include "parisian/harness.hpp"
#include "parisian/pathsim.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

namespace {

using parisian::ExperimentConfig;

ExperimentConfig::Format parse_format_flag(const std::string& s) {
    if (s == "csv") {
        return ExperimentConfig::Format::csv;
    }
    if (s == "json") {
        return ExperimentConfig::Format::json;
    }
    if (s == "both") {
        return ExperimentConfig::Format::both;
    }
    throw parisian::param_error("--format expects csv, json, or both");
}

ExperimentConfig::Tilt parse_tilt_flag(const std::string& s) {
    if (s == "auto") {
        return ExperimentConfig::Tilt::auto_mode;
    }
    if (s == "on") {
        return ExperimentConfig::Tilt::on;
    }
    if (s == "off") {
        return ExperimentConfig::Tilt::off;
    }
    throw parisian::param_error("--tilt expects auto, on, or off");
}

double num_or_nan(const nlohmann::ordered_json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.at(key).get<double>();
}

int run_main(int argc, char** argv) {
    CLI::App app{"Two-component Brownian risk: regime classification, limit constants, "
                 "and rare-event ruin simulation"};
    app.require_subcommand(1);

    std::string cfg_path;
    std::string out_dir;
    std::string format_str;
    std::string tilt_str;
    std::string in_path;
    std::uint64_t seed_flag = 0;
    int workers_flag = 0;
    double u_flag = 0.0;

    auto* classify = app.add_subcommand("classify", "Print the asymptotic regime");
    classify->add_option("--config", cfg_path, "experiment config file")->required();
    classify->add_option("--u", u_flag, "barrier level for optimizer and tilt details");

    auto* constants = app.add_subcommand("constants", "Estimate the limit constants");
    constants->add_option("--config", cfg_path, "experiment config file")->required();
    constants->add_option("--seed", seed_flag, "override the config seed");
    constants->add_option("--workers", workers_flag, "worker threads");

    auto* simulate = app.add_subcommand("simulate", "Run the full experiment");
    simulate->add_option("--config", cfg_path, "experiment config file")->required();
    simulate->add_option("--out", out_dir, "output directory");
    simulate->add_option("--format", format_str, "csv, json, or both");
    simulate->add_option("--seed", seed_flag, "override the config seed");
    simulate->add_option("--workers", workers_flag, "worker threads");
    simulate->add_option("--tilt", tilt_str, "auto, on, or off");

    auto* report = app.add_subcommand("report", "Re-emit a stored JSON report");
    report->add_option("--in", in_path, "report.json produced by simulate")->required();
    report->add_option("--out", out_dir, "output directory")->required();
    report->add_option("--format", format_str, "csv, json, or both");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (app.got_subcommand(classify)) {
        const ExperimentConfig cfg = parisian::parse_config_file(cfg_path);
        const parisian::NormalizedModel nm = parisian::normalize_model(
            cfg.c1, cfg.c2, cfg.a, cfg.rho, cfg.s1, cfg.s2);
        const parisian::Regime regime =
            parisian::classify_regime(nm.params, cfg.boundary_tol);
        nlohmann::ordered_json j;
        j["regime"] = parisian::regime_name(regime);
        j["swapped"] = nm.swapped;
        j["a"] = nm.params.a;
        j["rho"] = nm.params.rho;
        j["critical_rho"] = parisian::critical_rho(nm.params.a);
        j["t_star"] = parisian::limit_optimizer_time(nm.params, cfg.boundary_tol);
        if (classify->count("--u") > 0) {
            const auto pts = parisian::optimizer_point(nm.params, u_flag, cfg.boundary_tol);
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& pt : pts) {
                arr.push_back({{"s", pt.s}, {"t", pt.t}});
            }
            j["optimizer"] = arr;
            const parisian::TiltConfig tilt =
                parisian::default_tilt(nm.params, u_flag, cfg.boundary_tol);
            j["tilt"] = {{"alpha", tilt.alpha}, {"beta", tilt.beta}};
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (app.got_subcommand(constants)) {
        ExperimentConfig cfg = parisian::parse_config_file(cfg_path);
        if (constants->count("--seed") > 0) {
            cfg.seed = seed_flag;
        }
        cfg.u_list.clear();
        const parisian::ExperimentReport rep =
            parisian::run_experiment(cfg, workers_flag);
        nlohmann::ordered_json j;
        j["regime"] = rep.regime;
        j["limit"] = {{"value", rep.limit.value}, {"se", rep.limit.se}};
        nlohmann::ordered_json consts = nlohmann::ordered_json::array();
        for (const auto& c : rep.constants) {
            consts.push_back({{"key", c.key},
                              {"value", c.value},
                              {"se", c.se},
                              {"closed_form", c.closed_form}});
        }
        j["constants"] = consts;
        j["estimation_calls"] = rep.estimation_calls;
        j["warnings"] = rep.warnings;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (app.got_subcommand(simulate)) {
        ExperimentConfig cfg = parisian::parse_config_file(cfg_path);
        if (simulate->count("--seed") > 0) {
            cfg.seed = seed_flag;
        }
        if (simulate->count("--tilt") > 0) {
            cfg.tilt = parse_tilt_flag(tilt_str);
        }
        if (simulate->count("--format") > 0) {
            cfg.format = parse_format_flag(format_str);
        }
        if (simulate->count("--out") > 0) {
            cfg.out = out_dir;
        }
        if (cfg.out.empty()) {
            throw parisian::param_error(
                "simulate requires an output directory (--out or config key out)");
        }
        const parisian::ExperimentReport rep =
            parisian::run_experiment(cfg, workers_flag);
        const auto paths = parisian::emit_report(rep, cfg.out, cfg.format);
        for (const auto& p : paths) {
            std::cout << p << "\n";
        }
        if (rep.has_errors()) {
            for (const auto& e : rep.errors) {
                std::cerr << "error: " << e << "\n";
            }
            return 3;
        }
        return 0;
    }

    // report: rebuild emissions from a stored JSON report
    std::ifstream in(in_path);
    if (!in) {
        throw parisian::param_error("cannot read report file: " + in_path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw parisian::param_error(std::string("cannot parse report file: ") + e.what());
    }
    if (!j.contains("rows") || !j.at("rows").is_array()) {
        throw parisian::param_error("report file has no rows array");
    }
    std::vector<parisian::RowRecord> rows;
    for (const auto& jr : j.at("rows")) {
        parisian::RowRecord r;
        r.u = num_or_nan(jr, "u");
        r.p_classical = num_or_nan(jr, "p_classical");
        r.p_parisian = num_or_nan(jr, "p_parisian");
        r.ratio = num_or_nan(jr, "ratio");
        r.ci_low = num_or_nan(jr, "ci_low");
        r.ci_high = num_or_nan(jr, "ci_high");
        r.n_steps = jr.contains("n_steps") ? jr.at("n_steps").get<long>() : 0;
        r.seconds = num_or_nan(jr, "seconds");
        r.failed = jr.value("failed", false);
        r.error = jr.value("error", std::string());
        rows.push_back(std::move(r));
    }
    const ExperimentConfig::Format fmt =
        report->count("--format") > 0 ? parse_format_flag(format_str)
                                      : ExperimentConfig::Format::csv;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw parisian::param_error("cannot create output directory: " + out_dir);
    }
    const auto write_file = [&](const std::string& name, const std::string& content) {
        const std::string path = (std::filesystem::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw parisian::param_error("cannot write output file: " + path);
        }
        out << content;
        std::cout << path << "\n";
    };
    if (fmt == ExperimentConfig::Format::csv || fmt == ExperimentConfig::Format::both) {
        write_file("report.csv", parisian::emit_csv_rows(rows));
    }
    if (fmt == ExperimentConfig::Format::json || fmt == ExperimentConfig::Format::both) {
        write_file("report.json", j.dump(2) + "\n");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const parisian::sim_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const parisian::param_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const parisian::assembly_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
