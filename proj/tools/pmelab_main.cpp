#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmelab/config.hpp"
#include "pmelab/kernels.hpp"
#include "pmelab/runner.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, ','))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

struct CommonFlags {
    std::string config_path;
    std::string stage_list;
    int jobs = -1;
    bool strict = false;
    long long seed = -1;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
    cmd->add_option("--config", fl.config_path, "experiment configuration file (INI)");
    cmd->add_option("--jobs", fl.jobs, "OpenMP thread count (0 keeps the runtime default)");
    cmd->add_flag("--strict", fl.strict, "treat failed invariant checks as fatal (exit 4)");
    cmd->add_option("--seed", fl.seed, "override the run seed");
}

pmelab::ExperimentConfig resolve_config(const CommonFlags& fl) {
    pmelab::ExperimentConfig cfg;
    if (!fl.config_path.empty()) cfg = pmelab::load_config(fl.config_path);
    if (!fl.stage_list.empty()) cfg.stages = split_list(fl.stage_list);
    if (fl.jobs >= 0) cfg.jobs = fl.jobs;
    if (fl.seed >= 0) cfg.seed = static_cast<std::uint64_t>(fl.seed);
    if (fl.strict) cfg.strict = true;
    pmelab::validate_config(cfg);
    return cfg;
}

int execute(const pmelab::ExperimentConfig& cfg) {
    if (cfg.jobs > 0) pmelab::kernels::set_threads(cfg.jobs);
    pmelab::RunReport rep = pmelab::run(cfg);

    for (const pmelab::CheckRow& c : rep.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << c.value
                  << "  bound=" << c.bound << "\n";
    std::string rpath = (std::filesystem::path(cfg.out_dir) / "report.json").string();
    pmelab::write_report_json(rpath, rep);
    std::cout << "report: " << rpath << "\n";

    if (!rep.all_checks_pass && cfg.strict) {
        std::cerr << "strict mode: invariant checks failed\n";
        return 4;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"degenerate-diffusion boundary-data laboratory"};
    app.require_subcommand(1);

    CommonFlags run_fl, verify_fl, plot_fl;

    CLI::App* cmd_run = app.add_subcommand("run", "execute the configured stage list");
    add_common(cmd_run, run_fl);
    cmd_run->add_option("--stage", run_fl.stage_list,
                        "comma-separated stages (forward,transform,fit,recon-gamma,recon-eps,verify,all)");

    CLI::App* cmd_verify =
        app.add_subcommand("verify", "run only the expansion sign and remainder checks");
    add_common(cmd_verify, verify_fl);

    std::vector<std::string> selections;
    std::string plot_dir;
    CLI::App* cmd_plot = app.add_subcommand("plot-data", "derive plot-ready tables from run artifacts");
    cmd_plot->add_option("--config", plot_fl.config_path, "configuration naming the output directory");
    cmd_plot->add_option("--dir", plot_dir, "output directory holding the artifacts");
    cmd_plot->add_option("selection", selections,
                         "plot families: remainder, dn-residual, reconstruction");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int r = app.exit(e);
        return r == 0 ? 0 : 2;
    }

    try {
        if (cmd_run->parsed()) return execute(resolve_config(run_fl));
        if (cmd_verify->parsed()) {
            pmelab::ExperimentConfig cfg = resolve_config(verify_fl);
            cfg.stages = {"verify"};
            return execute(cfg);
        }
        if (cmd_plot->parsed()) {
            for (const std::string& s : selections)
                if (s != "remainder" && s != "dn-residual" && s != "reconstruction")
                    throw pmelab::ConfigError("plot-data: unknown selection '" + s + "'");
            std::string dir = plot_dir;
            if (dir.empty()) {
                pmelab::ExperimentConfig cfg;
                if (!plot_fl.config_path.empty()) cfg = pmelab::load_config(plot_fl.config_path);
                dir = cfg.out_dir;
            }
            std::vector<std::string> written = pmelab::emit_plots(dir, selections);
            for (const std::string& p : written) std::cout << p << "\n";
            return 0;
        }
    } catch (const pmelab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const pmelab::StageError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
