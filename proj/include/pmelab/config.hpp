#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmelab/pme.hpp"

namespace pmelab {

// Malformed or out-of-contract configuration; the message names the field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fully resolved experiment settings. Every field has an explicit default so
// the resolved form can be embedded in reports and re-run identically.
struct ExperimentConfig {
    // [grid]
    int dim = 2;
    std::vector<int> counts{33, 33};
    std::vector<double> extents{1.0, 1.0};

    // [model]
    double m = 2.0;
    std::string mode = "pme";  // pme | heat-validation
    std::string eps_expr = "1";
    double eps_lower = 1e-3, eps_upper = 1e3;
    std::string gamma_expr = "1";
    double gamma_lower = 1e-3, gamma_upper = 1e3;

    // [data]
    std::string g_expr = "1";  // boundary datum for the single-g stages

    // [h]
    double h_min = 1.6, h_max = 16.0;
    int h_count = 5;

    // [time]
    TimeGridSpec tgrid = [] {
        TimeGridSpec t;
        t.kind = TimeGridSpec::Kind::stretched;
        t.dt0 = 2e-3;
        t.uniform_until = 1.0;
        t.growth = 1.03;
        return t;
    }();

    // [pme]
    double k0 = 100.0;        // start of the doubling schedule (forward stage)
    double k_tol = 1e-6;      // schedule stopping tolerance
    double level_k = 1e8;     // single level used by the transform pipelines
    NewtonOptions newton;
    double horizon_factor = 40.0;

    // [fit]
    std::string fit_rule = "product-exact";  // product-exact | trapezoid
    bool fit_peeling = false;

    // [verify]
    double verify_k = 1e10;
    double verify_dt0 = 3e-4;
    double verify_growth = 1.001;
    double verify_slack = 1e-9;
    bool verify_fine = true;
    std::vector<double> verify_hs{4.0, 8.0, 16.0};

    // [gamma_recon]
    int grec_basis = 8;
    double grec_alpha = 1e-6;
    double grec_lower = 0.1, grec_upper = 10.0;
    int grec_max_iter = 30;

    // [eps_recon]
    int erec_degree = 2;
    double erec_alpha = -1.0;  // < 0: discrepancy ladder
    double erec_lower = 1e-3, erec_upper = 1e3;
    double erec_s_scale = 0.1;

    // [run]
    std::vector<std::string> stages{"all"};
    std::string out_dir = "out";
    std::uint64_t seed = 1234;
    double noise = 0.0;  // multiplicative DN noise
    int jobs = 0;        // 0: leave the OpenMP default
    bool strict = false;
};

// Parses INI-style text (sections, key = value, # comments). Unknown sections
// or keys are errors; values and cross-field contracts are validated.
ExperimentConfig parse_config_text(const std::string& text);

// File + environment: variables PMELAB_<SECTION>_<KEY> override file values.
ExperimentConfig load_config(const std::string& path, bool apply_env = true);

// Full INI dump of a resolved config; parse_config_text round-trips it.
std::string resolved_ini(const ExperimentConfig& c);

// Throws ConfigError naming the offending field.
void validate_config(const ExperimentConfig& c);

}  // namespace pmelab
