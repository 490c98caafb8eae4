// dfvote: run voting-model experiments from a JSON config.
//
//   dfvote verify-clt --config clt.json --out results/ --workers 4
//   dfvote estimate-alpha --input margins.csv

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dfvote/config.hpp"
#include "dfvote/errors.hpp"
#include "dfvote/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kVerificationFailed = 1, kInvalidInput = 2, kResource = 3, kOther = 4 };

int run(const std::string& kind, const std::string& config_path, const dfvote::RunOptions& options) {
    dfvote::ExperimentConfig config;
    if (!config_path.empty()) {
        config = dfvote::load_config(config_path);
    } else if (kind == "estimate-alpha" && options.input) {
        config.seed = 0;
    } else {
        throw dfvote::ConfigError("--config is required for " + kind);
    }
    if (config.experiment.empty()) config.experiment = kind;
    if (config.experiment != kind)
        throw dfvote::ConfigError("config describes experiment '" + config.experiment + "' but the subcommand is '" +
                                  kind + "'");
    const auto result = dfvote::run_experiment(config, options);
    std::cout << "config hash " << result.config_hash << ", artifacts in " << result.output_dir << "\n";
    return result.exit_code == 0 ? kOk : kVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification of multi-group de Finetti voting models"};
    app.require_subcommand(1);
    std::string config_path, out_dir, input;
    std::uint64_t seed = 0;
    int workers = 0;

    for (const auto& kind : dfvote::kExperimentKinds) {
        auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        sub->add_option("--config", config_path, "experiment config (JSON)");
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "seed override");
        sub->add_option("--workers", workers, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
        if (kind == "estimate-alpha") sub->add_option("--input", input, "CSV of population,abs_margin or population,margin_per_capita");
    }
    CLI11_PARSE(app, argc, argv);

    auto* chosen = app.get_subcommands().front();
    dfvote::RunOptions options;
    options.workers = workers;
    options.log = &std::cout;
    if (chosen->count("--out")) options.output_dir = out_dir;
    if (chosen->count("--seed")) options.seed = seed;
    if (chosen->get_option_no_throw("--input") && chosen->count("--input")) options.input = input;

    try {
        return run(chosen->get_name(), config_path, options);
    } catch (const dfvote::ConfigError& e) {
        if (e.line() > 0)
            std::cerr << "config error (line " << e.line() << "): " << e.what() << "\n";
        else
            std::cerr << "config error: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const dfvote::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const dfvote::ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kResource;
    } catch (const dfvote::ToleranceError& e) {
        std::cerr << "tolerance not met: " << e.what() << "\n";
        return kOther;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
}
