// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run with --only N to execute a single criterion.

#include "nsem/errors.hpp"
#include "nsem/experiment.hpp"
#include "nsem/matrix_io.hpp"
#include "nsem/numerics.hpp"
#include "nsem/projector.hpp"
#include "nsem/rng.hpp"
#include "nsem/sequence.hpp"
#include "nsem/solver.hpp"
#include "nsem/synth.hpp"
#include "nsem/verify.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef NSEM_CLI_PATH
#define NSEM_CLI_PATH "nsem"
#endif

namespace {

using namespace nsem;
using Clock = std::chrono::steady_clock;

bool g_all_pass = true;

std::string fmt(double value) {
    std::ostringstream out;
    out.precision(6);
    out << value;
    return out.str();
}

void report(int id, const std::string& label, bool pass, const std::string& detail) {
    g_all_pass = g_all_pass && pass;
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << label;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
}

std::filesystem::path work_dir() {
    static const auto dir = [] {
        auto path = std::filesystem::temp_directory_path() /
                    ("nsem_acceptance_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
        return path;
    }();
    return dir;
}

int run_cli(const std::string& args, const std::filesystem::path& log_path) {
    const std::string command =
        std::string(NSEM_CLI_PATH) + " " + args + " > " + log_path.string() + " 2>&1";
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string suite_detail(const SuiteResult& result) {
    std::size_t passed = 0;
    for (const TrialOutcome& trial : result.trials)
        if (trial.pass) ++passed;
    std::ostringstream out;
    out << passed << "/" << result.trials.size() << " trials, max observed "
        << fmt(result.max_observed) << ", " << fmt(result.elapsed_seconds) << " s";
    for (const TrialOutcome& trial : result.trials) {
        if (!trial.pass) out << ", failing seed " << trial.seed;
    }
    return out.str();
}

// 1. Sequential alignment equals the dense rebuild with no truncation.
void criterion_exact_alignment() {
    VerifyParams params; // 50 trials, d=32, n=4, 5 steps, tau=1e-10
    const SuiteResult result = run_exact_alignment_suite(params);
    const bool pass = result.pass && result.elapsed_seconds < 30.0;
    report(1, "sequential projector matches dense rebuild to 1e-7", pass,
           suite_detail(result));
}

// 2. Measured deviation stays under the evaluated truncation bound.
void criterion_truncation_bound() {
    VerifyParams params;
    const SuiteResult result = run_truncation_bound_suite(params);
    const bool clamp_ok = !result.trials.empty() && result.trials.front().pass;
    const bool pass = result.pass && clamp_ok && result.elapsed_seconds < 60.0;
    report(2, "deviation bounded by the truncation estimate (clamp verified)", pass,
           suite_detail(result));
}

// 3. Reduced solver equals the direct normal-equation solve.
void criterion_solver_equivalence() {
    VerifyParams params;
    const SuiteResult result = run_solver_equivalence_suite(params);
    const bool pass = result.pass && result.max_observed <= 1e-8;
    report(3, "direct and reduced solvers agree to 1e-8", pass, suite_detail(result));
}

// 4. Projected updates leave preserved and previously aligned outputs fixed.
void criterion_exact_preservation() {
    bool pass = true;
    double worst = 0.0;
    for (std::uint64_t seed = 101; seed < 106; ++seed) {
        WorldSpec spec;
        spec.d_k = 32;
        spec.d_v = 16;
        spec.n_preserved = 6;
        spec.t_steps = 8;
        spec.batch_size = 4;
        spec.seed = seed;
        const World world = gen_world(spec);
        const auto stream = gen_stream(spec, world.w0, Matrix(spec.d_k, 0));

        SolverConfig config;
        config.tau_initial = 1e-10;
        config.tau_align = 1e-10;
        EditSession session = new_session(world.w0, world.k0, Method::evoedit, config);

        const double preserved_norm = frobenius_norm(product(world.w0, world.k0));
        Matrix previous = session.weights();
        for (std::size_t t = 0; t < stream.size(); ++t) {
            session.apply_edit(stream[t]);
            const Matrix& current = session.weights();
            const double preserved_change =
                frobenius_norm(subtract(product(current, world.k0),
                                        product(previous, world.k0))) /
                preserved_norm;
            worst = std::max(worst, preserved_change);
            pass = pass && preserved_change <= 1e-7;
            for (std::size_t j = 0; j < t; ++j) { // batches aligned before this step
                const Matrix before = product(previous, stream[j].keys);
                const Matrix after = product(current, stream[j].keys);
                const double change =
                    frobenius_norm(subtract(after, before)) / frobenius_norm(before);
                worst = std::max(worst, change);
                pass = pass && change <= 1e-7;
            }
            previous = current;
        }
    }
    report(4, "preserved and aligned outputs move at most 1e-7 per step", pass,
           "5 streams, worst relative change " + fmt(worst));
}

// 5. Early edits survive under the evolving projector, not under the fixed one.
void criterion_retention_ordering() {
    WorldSpec spec;
    spec.d_k = 64;
    spec.d_v = 64;
    spec.n_preserved = 20;
    spec.t_steps = 200;
    spec.batch_size = 2;
    spec.overlap = 0.3;
    spec.seed = 33;
    const World world = gen_world(spec);
    const auto stream = gen_stream(spec, world.w0, Matrix(spec.d_k, 0));

    const SolverConfig config;
    EditSession evo = new_session(world.w0, world.k0, Method::evoedit, config);
    EditSession alpha = new_session(world.w0, world.k0, Method::alphaedit, config);
    const StreamResult evo_result = run_stream(evo, stream);
    const StreamResult alpha_result = run_stream(alpha, stream);

    const double evo_retention =
        evo_result.ok ? evo_result.traces.back().early_retention : 1.0;
    const double alpha_retention =
        alpha_result.ok ? alpha_result.traces.back().early_retention : 0.0;
    const SummaryReport evo_summary =
        metrics(evo_result.traces, evo_result.final_weights, world, stream);
    const bool pass = evo_result.ok && alpha_result.ok && evo_retention <= 1e-6 &&
                      alpha_retention >= 10.0 * evo_retention && alpha_retention > 0.0 &&
                      evo_summary.preservation <= 1e-6;
    report(5, "final early retention: evolving <= 1e-6 and 10x below fixed", pass,
           "evoedit " + fmt(evo_retention) + ", alphaedit " + fmt(alpha_retention) +
               ", evoedit preservation " + fmt(evo_summary.preservation));
}

// 6. Desk-scale runtime split: the reduced solve is at least 5x cheaper.
void criterion_runtime_split() {
    ExperimentConfig config;
    config.world.d_k = 2048;
    config.world.d_v = 2048;
    config.world.n_preserved = 512;
    config.world.t_steps = 20;
    config.world.batch_size = 8;
    config.world.seed = 1;
    config.methods = {Method::evoedit, Method::alphaedit};
    config.output_dir = work_dir() / "runtime_split";

    std::ostringstream log;
    const ExperimentResult result = run_experiment(config, log);
    write_reports(config, result);

    double evo_solve = -1.0;
    double alpha_solve = -1.0;
    bool schema_ok = false;
    try {
        std::ifstream in(config.output_dir / "summary.json");
        const auto summary = nlohmann::json::parse(in);
        const auto& methods = summary.at("methods");
        evo_solve = methods.at("evoedit").at("solve_seconds_total").get<double>();
        alpha_solve = methods.at("alphaedit").at("solve_seconds_total").get<double>();
        schema_ok = methods.at("evoedit").contains("proj_seconds_total") &&
                    methods.at("evoedit").contains("total_seconds") &&
                    summary.contains("speedup_vs_alphaedit") &&
                    summary.at("schema_version").get<int>() == 1;
    } catch (const std::exception&) {
        schema_ok = false;
    }
    const bool pass =
        result.ok && schema_ok && evo_solve > 0.0 && evo_solve * 5.0 <= alpha_solve;
    report(6, "solve time at d=2048 is at least 5x below the fixed-projector baseline", pass,
           "evoedit solve " + fmt(evo_solve) + " s, alphaedit solve " + fmt(alpha_solve) +
               " s, split present in summary.json: " + (schema_ok ? "yes" : "no"));
}

// 7. Basis orthonormality stays tight across a long run.
void criterion_projector_hygiene() {
    WorldSpec spec;
    spec.d_k = 256;
    spec.d_v = 128;
    spec.n_preserved = 32;
    spec.t_steps = 500;
    spec.batch_size = 1;
    spec.overlap = 0.2;
    spec.seed = 7;
    const World world = gen_world(spec);
    const auto stream = gen_stream(spec, world.w0, Matrix(spec.d_k, 0));
    EditSession session = new_session(world.w0, world.k0, Method::evoedit, SolverConfig{});

    double worst = 0.0;
    bool pass = true;
    for (const EditBatch& batch : stream) {
        session.apply_edit(batch);
        const double err = session.projector().orthonormality_error();
        worst = std::max(worst, err);
        pass = pass && err <= 1e-6;
    }
    report(7, "complement basis stays orthonormal over 500 steps at d=256", pass,
           "max ||B^T B - I||_F = " + fmt(worst) + ", final rank " +
               std::to_string(session.projector().rank()));
}

// 8. Interference inequality across sampled edits.
void criterion_interference() {
    VerifyParams params;
    const SuiteResult result = run_interference_suite(params);
    report(8, "interference bound holds over 100 sampled edits per instance", result.pass,
           suite_detail(result));
}

// 9. Reruns reproduce the non-timing trace columns; the file path matches the
// in-process run bit-exactly.
void criterion_determinism_and_parity() {
    const auto dir = work_dir() / "determinism";
    std::filesystem::create_directories(dir);

    const std::string base_config =
        "world.d_k = 32\nworld.d_v = 16\nworld.n_preserved = 8\nworld.t_steps = 10\n"
        "world.batch_size = 2\nworld.overlap = 0.25\nworld.seed = 4\n"
        "methods = evoedit, alphaedit, recompute, plain\n";

    bool rerun_ok = true;
    for (const char* run_name : {"run_a", "run_b"}) {
        std::ofstream cfg(dir / (std::string(run_name) + ".cfg"));
        cfg << base_config << "output_dir = " << (dir / run_name).string() << "\n";
        cfg.close();
        const int code = run_cli("run --config " + (dir / (std::string(run_name) + ".cfg")).string(),
                                 dir / (std::string(run_name) + ".log"));
        rerun_ok = rerun_ok && code == 0;
    }
    // compare every method's trace minus the two timing columns
    const auto non_timing_lines = [](const std::filesystem::path& path) {
        std::vector<std::string> lines;
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            std::vector<std::string> cells;
            std::stringstream stream(line);
            std::string cell;
            while (std::getline(stream, cell, ',')) cells.push_back(cell);
            std::string kept;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i == 1 || i == 2) continue;
                kept += cells[i] + "|";
            }
            lines.push_back(kept);
        }
        return lines;
    };
    for (const char* method : {"evoedit", "alphaedit", "recompute", "plain"}) {
        const auto a = non_timing_lines(dir / "run_a" / (std::string(method) + "_trace.csv"));
        const auto b = non_timing_lines(dir / "run_b" / (std::string(method) + "_trace.csv"));
        rerun_ok = rerun_ok && !a.empty() && a == b;
    }

    // file-path parity through the CLI against an in-process run
    const std::string gen_config_path = (dir / "gen.cfg").string();
    {
        std::ofstream cfg(dir / "gen.cfg");
        cfg << "world.d_k = 24\nworld.d_v = 12\nworld.n_preserved = 6\nworld.t_steps = 3\n"
               "world.batch_size = 2\nworld.seed = 4\nmethods = evoedit\n";
    }
    bool parity_ok =
        run_cli("gen --config " + gen_config_path + " --out " + (dir / "world").string(),
                dir / "gen.log") == 0;
    parity_ok = parity_ok &&
                run_cli("edit-files --weights " + (dir / "world" / "weights.nsem").string() +
                            " --preserved-keys " +
                            (dir / "world" / "preserved_keys.nsem").string() + " --batches " +
                            (dir / "world" / "batches").string() +
                            " --method evoedit --config " + gen_config_path + " --out " +
                            (dir / "edited").string(),
                        dir / "edit.log") == 0;
    if (parity_ok) {
        WorldSpec spec;
        spec.d_k = 24;
        spec.d_v = 12;
        spec.n_preserved = 6;
        spec.t_steps = 3;
        spec.batch_size = 2;
        spec.seed = 4;
        const World world = gen_world(spec);
        const auto stream = gen_stream(spec, world.w0, Matrix(spec.d_k, 0));
        EditSession session = new_session(world.w0, world.k0, Method::evoedit, SolverConfig{});
        const StreamResult in_process = run_stream(session, stream);
        const Matrix from_files = read_matrix(dir / "edited" / "edited_weights.nsem");
        parity_ok = from_files == in_process.final_weights;
    }

    report(9, "reruns and the file path reproduce results exactly", rerun_ok && parity_ok,
           std::string("non-timing columns identical: ") + (rerun_ok ? "yes" : "no") +
               ", file-path weights bit-identical: " + (parity_ok ? "yes" : "no"));
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--only") only = std::atoi(argv[i + 1]);
    }
    const auto start = Clock::now();
    const auto want = [&](int id) { return only == 0 || only == id; };
    try {
        if (want(1)) criterion_exact_alignment();
        if (want(2)) criterion_truncation_bound();
        if (want(3)) criterion_solver_equivalence();
        if (want(4)) criterion_exact_preservation();
        if (want(5)) criterion_retention_ordering();
        if (want(6)) criterion_runtime_split();
        if (want(7)) criterion_projector_hygiene();
        if (want(8)) criterion_interference();
        if (want(9)) criterion_determinism_and_parity();
    } catch (const std::exception& e) {
        std::cout << "[FAIL] acceptance aborted: " << e.what() << std::endl;
        g_all_pass = false;
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    std::cout << (g_all_pass ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " in "
              << fmt(elapsed) << " s" << std::endl;
    return g_all_pass ? 0 : 1;
}
