#include "nsem/experiment.hpp"

#include "nsem/errors.hpp"
#include "nsem/matrix_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace nsem {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(std::string_view text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    const auto end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t parsed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw config_error(key + ": expected a non-negative integer, got '" + value + "'");
    }
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw config_error(key + ": expected a number, got '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw config_error(key + ": expected true/false, got '" + value + "'");
}

bool apply_known_entry(ExperimentConfig& config, const std::string& key,
                       const std::string& value) {
    WorldSpec& world = config.world;
    SolverConfig& solver = config.solver;
    if (key == "world.d_k") world.d_k = to_u64(key, value);
    else if (key == "world.d_v") world.d_v = to_u64(key, value);
    else if (key == "world.n_preserved") world.n_preserved = to_u64(key, value);
    else if (key == "world.t_steps") world.t_steps = to_u64(key, value);
    else if (key == "world.batch_size") world.batch_size = to_u64(key, value);
    else if (key == "world.overlap") world.overlap = to_double(key, value);
    else if (key == "world.seed") world.seed = to_u64(key, value);
    else if (key == "solver.tau_initial") solver.tau_initial = to_double(key, value);
    else if (key == "solver.tau_align") solver.tau_align = to_double(key, value);
    else if (key == "solver.l2") solver.l2 = to_double(key, value);
    else if (key == "solver.keep_dense_oracle") solver.keep_dense_oracle = to_bool(key, value);
    else if (key == "solver.seed") solver.seed = to_u64(key, value);
    else if (key == "output_dir") config.output_dir = value;
    else if (key == "methods") {
        config.methods.clear();
        for (const std::string& name : split_list(value)) {
            const auto method = method_from_name(name);
            if (!method) throw config_error("methods: unknown method '" + name + "'");
            config.methods.push_back(*method);
        }
    } else if (key == "report_formats") {
        config.report_formats.clear();
        for (const std::string& fmt : split_list(value)) config.report_formats.insert(fmt);
    } else if (key == "verify_suites") {
        config.verify_suites = split_list(value);
    } else {
        return false;
    }
    return true;
}

const char* kTraceHeader =
    "step,solve_seconds,proj_seconds,edit_residual_after,preservation_drift,"
    "early_retention,projector_rank";

void write_trace_csv(const std::filesystem::path& path, const std::vector<StepTrace>& traces,
                     bool with_deviation) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << kTraceHeader;
    if (with_deviation) out << ",deviation_vs_oracle";
    out << "\n";
    out << std::setprecision(17);
    for (const StepTrace& t : traces) {
        out << t.step << ',' << t.solve_seconds << ',' << t.proj_seconds << ','
            << t.edit_residual_after << ',' << t.preservation_drift << ',' << t.early_retention
            << ',' << t.projector_rank;
        if (with_deviation) out << ',' << t.deviation_vs_oracle.value_or(0.0);
        out << "\n";
    }
    if (!out) throw io_error("write failed for " + path.string());
}

ordered_json summary_for(const MethodRun& run) {
    const SummaryReport& s = run.summary;
    ordered_json j;
    j["steps"] = s.steps;
    j["ok"] = run.stream.ok;
    if (!run.stream.ok) j["error"] = run.stream.error;
    j["solve_seconds_total"] = s.solve_seconds_total;
    j["proj_seconds_total"] = s.proj_seconds_total;
    j["total_seconds"] = s.solve_seconds_total + s.proj_seconds_total;
    j["solve_seconds_mean"] = s.solve_seconds_mean;
    j["proj_seconds_mean"] = s.proj_seconds_mean;
    j["rewrite_residual_first_batch"] = s.rewrite_residual_first_batch;
    j["preservation"] = s.preservation;
    j["final_preservation_drift"] = s.final_preservation_drift;
    j["final_early_retention"] = s.final_early_retention;
    j["final_projector_rank"] = s.final_projector_rank;
    return j;
}

std::size_t worker_cap() {
    if (const char* env = std::getenv("NSEM_THREADS")) {
        const long parsed = std::atol(env);
        if (parsed >= 1) return static_cast<std::size_t>(parsed);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::vector<EditBatch> load_batches(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw io_error("batch directory " + dir.string() + " does not exist");
    }
    std::vector<std::filesystem::path> key_files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 10 && name.ends_with(".keys.nsem")) key_files.push_back(entry.path());
    }
    std::sort(key_files.begin(), key_files.end());
    std::vector<EditBatch> batches;
    batches.reserve(key_files.size());
    for (const auto& key_path : key_files) {
        std::string values_name = key_path.filename().string();
        values_name.replace(values_name.size() - 10, 10, ".values.nsem");
        const auto values_path = key_path.parent_path() / values_name;
        if (!std::filesystem::exists(values_path)) {
            throw io_error("missing values file for " + key_path.string());
        }
        batches.push_back(EditBatch{read_matrix(key_path), read_matrix(values_path)});
    }
    return batches;
}

} // namespace

void ExperimentConfig::validate() const {
    world.validate();
    solver.validate();
    if (methods.empty() && verify_suites.empty()) {
        throw config_error("select at least one method or one verify suite");
    }
    for (std::size_t i = 0; i < methods.size(); ++i)
        for (std::size_t j = i + 1; j < methods.size(); ++j)
            if (methods[i] == methods[j]) throw config_error("methods: duplicate entry");
    for (const std::string& fmt : report_formats) {
        if (fmt != "csv" && fmt != "json") {
            throw config_error("report_formats: unknown format '" + fmt + "'");
        }
    }
    const auto& known = verify_suite_names();
    for (const std::string& suite : verify_suites) {
        if (std::find(known.begin(), known.end(), suite) == known.end()) {
            throw config_error("verify_suites: unknown suite '" + suite + "'");
        }
    }
}

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
    if (apply_known_entry(config, key, value)) return;
    if (key.find('.') == std::string::npos) {
        if (apply_known_entry(config, "world." + key, value)) return;
        if (apply_known_entry(config, "solver." + key, value)) return;
    }
    throw config_error("unknown configuration key '" + key + "'");
}

ExperimentConfig parse_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path.string());
    ExperimentConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw config_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) {
            throw config_error(path.string() + ":" + std::to_string(line_no) + ": empty key");
        }
        try {
            apply_config_entry(config, key, value);
        } catch (const config_error& e) {
            throw config_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log) {
    ExperimentResult result;
    result.world = gen_world(config.world);
    result.stream =
        gen_stream(config.world, result.world.w0, Matrix(config.world.d_k, 0));

    for (Method method : config.methods) {
        log << "running " << method_name(method) << " over " << result.stream.size()
            << " batches (d_k=" << config.world.d_k << ", n=" << config.world.batch_size
            << ")\n";
        MethodRun run;
        run.method = method;
        try {
            EditSession session = new_session(result.world.w0, result.world.k0, method,
                                              config.solver);
            run.stream = run_stream(session, result.stream);
        } catch (const std::exception& e) {
            run.stream.ok = false;
            run.stream.error = e.what();
        }
        if (!run.stream.final_weights.empty()) {
            run.summary = metrics(run.stream.traces, run.stream.final_weights, result.world,
                                  result.stream);
        }
        if (!run.stream.ok) {
            log << "  aborted at step " << run.stream.traces.size() + 1 << ": "
                << run.stream.error << "\n";
            result.ok = false;
        } else {
            log << "  solve " << run.summary.solve_seconds_total << " s, proj "
                << run.summary.proj_seconds_total << " s, preservation drift "
                << run.summary.final_preservation_drift << ", early retention "
                << run.summary.final_early_retention << "\n";
        }
        result.runs.push_back(std::move(run));
    }

    for (const std::string& suite : config.verify_suites) {
        VerifyParams params;
        params.seed0 = config.solver.seed + 1;
        SuiteResult suite_result = run_suite(suite, params);
        log << "verify " << suite << ": "
            << (suite_result.pass ? "pass" : "FAIL") << " ("
            << suite_result.trials.size() << " trials, max observed "
            << suite_result.max_observed << ", " << suite_result.elapsed_seconds << " s)\n";
        if (!suite_result.pass) result.ok = false;
        result.verify_results.push_back(std::move(suite_result));
    }
    return result;
}

std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
    ordered_json j;
    j["schema_version"] = 1;
    j["world"] = {{"d_k", config.world.d_k},
                  {"d_v", config.world.d_v},
                  {"n_preserved", config.world.n_preserved},
                  {"t_steps", config.world.t_steps},
                  {"batch_size", config.world.batch_size},
                  {"overlap", config.world.overlap},
                  {"seed", config.world.seed}};
    j["solver"] = {{"tau_initial", config.solver.tau_initial},
                   {"tau_align", config.solver.tau_align},
                   {"l2", config.solver.l2},
                   {"keep_dense_oracle", config.solver.keep_dense_oracle},
                   {"seed", config.solver.seed}};
    ordered_json methods;
    const MethodRun* baseline = nullptr;
    for (const MethodRun& run : result.runs) {
        methods[std::string(method_name(run.method))] = summary_for(run);
        if (run.method == Method::alphaedit) baseline = &run;
    }
    j["methods"] = std::move(methods);
    if (baseline != nullptr && result.runs.size() > 1) {
        ordered_json speedups;
        const double base_solve = baseline->summary.solve_seconds_total;
        const double base_total =
            baseline->summary.solve_seconds_total + baseline->summary.proj_seconds_total;
        for (const MethodRun& run : result.runs) {
            if (run.method == Method::alphaedit) continue;
            const double solve = run.summary.solve_seconds_total;
            const double total = solve + run.summary.proj_seconds_total;
            speedups[std::string(method_name(run.method))] = {
                {"solve", solve > 0.0 ? base_solve / solve : 0.0},
                {"total", total > 0.0 ? base_total / total : 0.0}};
        }
        j["speedup_vs_alphaedit"] = std::move(speedups);
    }
    if (!result.verify_results.empty()) {
        ordered_json suites;
        for (const SuiteResult& suite : result.verify_results) {
            suites[suite.suite] = {{"pass", suite.pass},
                                   {"trials", suite.trials.size()},
                                   {"max_observed", suite.max_observed},
                                   {"elapsed_seconds", suite.elapsed_seconds}};
        }
        j["verify"] = std::move(suites);
    }
    return j.dump(2) + "\n";
}

void write_reports(const ExperimentConfig& config, const ExperimentResult& result) {
    std::filesystem::create_directories(config.output_dir);
    if (config.report_formats.count("csv") > 0) {
        for (const MethodRun& run : result.runs) {
            const auto path =
                config.output_dir / (std::string(method_name(run.method)) + "_trace.csv");
            write_trace_csv(path, run.stream.traces,
                            config.solver.keep_dense_oracle && run.method == Method::evoedit);
        }
    }
    if (config.report_formats.count("json") > 0) {
        std::ofstream out(config.output_dir / "summary.json", std::ios::trunc);
        if (!out) throw io_error("cannot write summary.json");
        out << summary_json(config, result);
    }
}

SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw config_error("sweep: expected key=v1,v2,..., got '" + text + "'");
    }
    SweepSpec spec;
    spec.key = trim(text.substr(0, eq));
    spec.values = split_list(text.substr(eq + 1));
    if (spec.values.empty()) throw config_error("sweep: no values given");
    return spec;
}

bool run_sweep(const ExperimentConfig& base, const SweepSpec& sweep, std::ostream& log) {
    struct SweepRun {
        std::string value;
        ExperimentConfig config;
        std::string log_text;
        bool ok = false;
        ordered_json methods;
    };
    std::vector<SweepRun> runs;
    for (const std::string& value : sweep.values) {
        SweepRun run;
        run.value = value;
        run.config = base;
        apply_config_entry(run.config, sweep.key, value);
        run.config.validate();
        run.config.output_dir = base.output_dir / (sweep.key + "=" + value);
        runs.push_back(std::move(run));
    }

    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::min(worker_cap(), runs.size());
    auto work = [&]() {
        for (;;) {
            const std::size_t index = next.fetch_add(1);
            if (index >= runs.size()) return;
            SweepRun& run = runs[index];
            std::ostringstream local;
            try {
                const ExperimentResult result = run_experiment(run.config, local);
                write_reports(run.config, result);
                run.ok = result.ok;
                for (const MethodRun& method_run : result.runs) {
                    run.methods[std::string(method_name(method_run.method))] =
                        summary_for(method_run);
                }
            } catch (const std::exception& e) {
                local << "  failed: " << e.what() << "\n";
                run.ok = false;
            }
            run.log_text = local.str();
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();

    bool all_ok = true;
    ordered_json sweep_json;
    sweep_json["schema_version"] = 1;
    sweep_json["sweep_key"] = sweep.key;
    sweep_json["runs"] = ordered_json::array();
    for (const SweepRun& run : runs) {
        log << "[" << sweep.key << "=" << run.value << "]\n" << run.log_text;
        all_ok = all_ok && run.ok;
        sweep_json["runs"].push_back({{"value", run.value},
                                      {"output_dir", run.config.output_dir.string()},
                                      {"ok", run.ok},
                                      {"methods", run.methods}});
    }
    std::filesystem::create_directories(base.output_dir);
    std::ofstream out(base.output_dir / "sweep_summary.json", std::ios::trunc);
    out << sweep_json.dump(2) << "\n";
    return all_ok;
}

bool run_edit_files(const EditFilesRequest& request, std::ostream& log) {
    const Matrix w0 = read_matrix(request.weights);
    const Matrix k0 = read_matrix(request.preserved_keys);
    const std::vector<EditBatch> batches = load_batches(request.batches_dir);
    for (std::size_t i = 0; i < batches.size(); ++i) {
        const EditBatch& batch = batches[i];
        if (batch.keys.rows() != w0.cols() || batch.values.rows() != w0.rows() ||
            batch.keys.cols() != batch.values.cols() || batch.keys.cols() == 0) {
            throw io_error("batch " + std::to_string(i + 1) +
                           " does not conform to the weight dimensions");
        }
    }
    log << "editing " << w0.rows() << "x" << w0.cols() << " weights with " << batches.size()
        << " batch files (" << method_name(request.method) << ")\n";

    EditSession session = new_session(w0, k0, request.method, request.solver);
    const StreamResult result = run_stream(session, batches);

    std::filesystem::create_directories(request.output_dir);
    write_matrix(request.output_dir / "edited_weights.nsem", result.final_weights);
    write_trace_csv(request.output_dir /
                        (std::string(method_name(request.method)) + "_trace.csv"),
                    result.traces,
                    request.solver.keep_dense_oracle && request.method == Method::evoedit);
    if (!result.ok) log << "  aborted: " << result.error << "\n";
    return result.ok;
}

void write_world(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    const World world = gen_world(config.world);
    const std::vector<EditBatch> stream =
        gen_stream(config.world, world.w0, Matrix(config.world.d_k, 0));
    std::filesystem::create_directories(out_dir / "batches");
    write_matrix(out_dir / "weights.nsem", world.w0);
    write_matrix(out_dir / "preserved_keys.nsem", world.k0);
    write_matrix(out_dir / "preserved_values.nsem", world.v0);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        std::ostringstream stem;
        stem << "batch_" << std::setfill('0') << std::setw(5) << i + 1;
        write_matrix(out_dir / "batches" / (stem.str() + ".keys.nsem"), stream[i].keys);
        write_matrix(out_dir / "batches" / (stem.str() + ".values.nsem"), stream[i].values);
    }
}

} // namespace nsem
