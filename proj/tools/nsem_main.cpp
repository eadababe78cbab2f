#include "nsem/errors.hpp"
#include "nsem/experiment.hpp"
#include "nsem/matrix_io.hpp"
#include "nsem/verify.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerifyFailed = 3;

int cmd_run(const std::string& config_path, const std::string& sweep_text) {
    nsem::ExperimentConfig config;
    try {
        config = nsem::parse_experiment_config(config_path);
        config.validate();
        if (!sweep_text.empty()) {
            const nsem::SweepSpec sweep = nsem::parse_sweep(sweep_text);
            return nsem::run_sweep(config, sweep, std::cout) ? kExitOk : kExitRuntime;
        }
    } catch (const nsem::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const nsem::ExperimentResult result = nsem::run_experiment(config, std::cout);
        nsem::write_reports(config, result);
        std::cout << "reports written to " << config.output_dir.string() << "\n";
        if (!result.ok) {
            for (const nsem::MethodRun& run : result.runs) {
                if (!run.stream.ok) {
                    std::cerr << nsem::method_name(run.method) << ": " << run.stream.error
                              << "\n";
                }
            }
            for (const nsem::SuiteResult& suite : result.verify_results) {
                if (!suite.pass) std::cerr << "verify " << suite.suite << " failed\n";
            }
        }
        return result.ok ? kExitOk : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_verify(const std::string& suite, const nsem::VerifyParams& params) {
    nsem::SuiteResult result;
    try {
        result = nsem::run_suite(suite, params);
    } catch (const nsem::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    for (const nsem::TrialOutcome& trial : result.trials) {
        std::cout << result.suite << " seed=" << trial.seed << " observed=" << trial.observed
                  << " bound=" << trial.bound;
        if (trial.alt_bound > 0.0) std::cout << " sum_max_bound=" << trial.alt_bound;
        std::cout << (trial.pass ? " pass" : " FAIL") << "\n";
    }
    std::size_t passed = 0;
    std::string failing;
    for (const nsem::TrialOutcome& trial : result.trials) {
        if (trial.pass) {
            ++passed;
        } else {
            if (!failing.empty()) failing += ", ";
            failing += std::to_string(trial.seed);
        }
    }
    std::cout << result.suite << ": " << passed << "/" << result.trials.size()
              << " trials passed (max observed " << result.max_observed << ") in "
              << result.elapsed_seconds << " s\n";
    if (!result.pass) {
        std::cerr << result.suite << ": failing seeds: " << failing << "\n";
        return kExitVerifyFailed;
    }
    return kExitOk;
}

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
    try {
        const nsem::ExperimentConfig config = nsem::parse_experiment_config(config_path);
        config.world.validate();
        nsem::write_world(config, out_dir);
        std::cout << "world written to " << out_dir << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_edit_files(nsem::EditFilesRequest request, const std::string& config_path,
                   const std::string& method_name) {
    try {
        if (!config_path.empty()) {
            const nsem::ExperimentConfig config = nsem::parse_experiment_config(config_path);
            request.solver = config.solver;
        }
        const auto method = nsem::method_from_name(method_name);
        if (!method) throw nsem::config_error("unknown method '" + method_name + "'");
        request.method = *method;
    } catch (const nsem::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        return nsem::run_edit_files(request, std::cout) ? kExitOk : kExitRuntime;
    } catch (const nsem::io_error& e) {
        std::cerr << "file error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nsem::dimension_error& e) {
        // mismatched shapes between the loaded files count as malformed input
        std::cerr << "file error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"null-space aligned sequential editing benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    std::string sweep_text;
    auto* run = app.add_subcommand("run", "run a method comparison from a config file");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--sweep", sweep_text, "expand one key over values, e.g. batch_size=1,10,100");

    std::string suite;
    nsem::VerifyParams params;
    auto* verify = app.add_subcommand("verify", "run a property suite");
    verify->add_option("--suite", suite, "thm1 | thm2 | equivalence | interference")->required();
    verify->add_option("--trials", params.trials, "number of seeded trials");
    verify->add_option("--d", params.d, "key dimension");
    verify->add_option("--n", params.n, "batch size");
    verify->add_option("--steps", params.steps, "stream length");
    verify->add_option("--tau", params.tau, "threshold (thm1 suite)");
    verify->add_option("--seed", params.seed0, "base seed");

    std::string gen_config;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "write a synthetic world to disk");
    gen->add_option("--config", gen_config, "experiment config file")->required();
    gen->add_option("--out", gen_out, "output directory")->required();

    nsem::EditFilesRequest request;
    std::string edit_config;
    std::string edit_method = "evoedit";
    std::string edit_weights;
    std::string edit_keys;
    std::string edit_batches;
    std::string edit_out;
    auto* edit = app.add_subcommand("edit-files", "edit weight files with on-disk batches");
    edit->add_option("--weights", edit_weights, "initial weights (.nsem)")->required();
    edit->add_option("--preserved-keys", edit_keys, "preserved keys (.nsem)")->required();
    edit->add_option("--batches", edit_batches, "directory of batch files")->required();
    edit->add_option("--method", edit_method, "evoedit | alphaedit | recompute | plain");
    edit->add_option("--config", edit_config, "experiment config file (solver section)");
    edit->add_option("--out", edit_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    if (run->parsed()) return cmd_run(config_path, sweep_text);
    if (verify->parsed()) return cmd_verify(suite, params);
    if (gen->parsed()) return cmd_gen(gen_config, gen_out);
    if (edit->parsed()) {
        request.weights = edit_weights;
        request.preserved_keys = edit_keys;
        request.batches_dir = edit_batches;
        request.output_dir = edit_out;
        return cmd_edit_files(std::move(request), edit_config, edit_method);
    }
    return kExitConfig;
}
