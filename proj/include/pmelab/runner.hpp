#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmelab/config.hpp"

namespace pmelab {

// One invariant or acceptance check with its measured value and bound.
struct CheckRow {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// A stage aborted; the stage name travels with the message and artifacts
// written before the failure stay on disk.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string st, const std::string& msg)
        : std::runtime_error("stage " + st + ": " + msg), stage(std::move(st)) {}
};

struct RunReport {
    std::vector<std::string> stages_run;
    std::vector<CheckRow> checks;               // each declared check exactly once
    std::map<std::string, double> scalars;      // error norms, slopes, diagnostics
    std::vector<std::string> manifest;          // files written, sorted
    std::string resolved_config;
    bool all_checks_pass = true;
};

// Executes the configured stage list. Deterministic for a fixed config and
// seed; wall-clock timings go to stderr, never into the report.
RunReport run(const ExperimentConfig& cfg);

void write_report_json(const std::string& path, const RunReport& rep);

// Plot-shaped CSV extracts from a finished run's artifacts. Knows the
// selections "remainder", "dn-residual" and "reconstruction"; missing inputs
// are reported by name. Returns the files written.
std::vector<std::string> emit_plots(const std::string& out_dir,
                                    const std::vector<std::string>& selection);

}  // namespace pmelab
