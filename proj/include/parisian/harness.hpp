#pragma once

#include "parisian/analytics.hpp"
#include "parisian/constants.hpp"
#include "parisian/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace parisian {

// Flat key=value experiment description. workers = 0 means unset; the
// effective value resolves CLI flag, then config, then PARISIAN_WORKERS,
// then 1.
struct ExperimentConfig {
    double c1 = 0.0;
    double c2 = 0.0;
    double a = 1.0;
    double rho = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    std::vector<double> u_list;
    long n_paths = 100000;
    std::uint64_t seed = 20240801;
    int workers = 0;
    int m = 16;
    double boundary_tol = 1e-12;

    enum class Tilt { auto_mode, on, off };
    Tilt tilt = Tilt::auto_mode;
    bool overhang = false;
    bool timing = true;

    enum class Format { csv, json, both };
    Format format = Format::csv;
    std::string out;

    long const_n = 100000;
    double const_delta = 0.0;
    std::vector<double> const_tmax;
    bool const_closed_form_s0 = true;
    bool sup_correction = true;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Structural invariants: u_list strictly increasing and positive (empty
// is allowed and yields a header-only table), n_paths >= 10000, m >= 8.
void validate_config(const ExperimentConfig& cfg);

int resolve_workers(int cli_value, const ExperimentConfig& cfg);

struct RowRecord {
    double u = 0.0;
    double p_classical = 0.0;
    double p_parisian = 0.0;
    double ratio = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long n_steps = 0;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct ExperimentReport {
    ExperimentConfig config;
    ModelParams params{0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
    bool swapped = false;
    double barrier_scale = 1.0;
    std::string regime;
    Estimate limit;
    std::vector<ConstantEstimate> constants;
    long estimation_calls = 0;
    std::vector<RowRecord> rows;
    std::vector<std::string> warnings;
    std::vector<std::string> errors;
    std::uint64_t seed = 0;
    int workers = 1;

    bool has_errors() const { return !errors.empty(); }
};

// Classifies, estimates each required limit constant exactly once,
// assembles the theoretical limit, then runs the conditional ratio at
// every barrier level. Per-row simulation failures become error records
// and failed rows; parameter problems throw.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int cli_workers = 0);

// Emissions never include the resolved worker count, so runs differing
// only in parallelism produce byte-identical bytes.
std::string emit_csv_rows(const std::vector<RowRecord>& rows);
std::string emit_csv(const ExperimentReport& report);
std::string emit_json(const ExperimentReport& report);

// Writes the selected formats into out_dir (created if missing) and
// returns the file paths written.
std::vector<std::string> emit_report(const ExperimentReport& report,
                                     const std::string& out_dir,
                                     ExperimentConfig::Format format);

} // namespace parisian
