#pragma once

#include "nsem/sequence.hpp"
#include "nsem/synth.hpp"
#include "nsem/verify.hpp"

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace nsem {

/// One benchmark run: which world to generate, which methods to race over
/// the same stream, which property suites to run, where to put reports.
struct ExperimentConfig {
    WorldSpec world;
    SolverConfig solver;
    std::vector<Method> methods;
    std::filesystem::path output_dir = "nsem_out";
    std::set<std::string> report_formats = {"csv", "json"};
    std::vector<std::string> verify_suites;

    void validate() const; // throws config_error
};

/// Flat key-value text: one `section.key = value` per line, '#' comments,
/// unknown keys are errors.
ExperimentConfig parse_experiment_config(const std::filesystem::path& path);

/// Applies a single `key = value` entry; used by the parser and by --sweep
/// overrides (sweep keys may omit the section prefix).
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

struct MethodRun {
    Method method = Method::evoedit;
    StreamResult stream;
    SummaryReport summary;
};

struct ExperimentResult {
    World world;
    std::vector<EditBatch> stream;
    std::vector<MethodRun> runs;
    std::vector<SuiteResult> verify_results;
    bool ok = true; // false when any method aborted or any suite failed
};

/// Generates the world and stream once, runs every configured method over
/// the same stream, then any configured verify suites.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log);

/// Writes `<method>_trace.csv` per method and `summary.json` into the
/// directory (created if missing), honoring config.report_formats.
void write_reports(const ExperimentConfig& config, const ExperimentResult& result);

/// The `summary.json` payload as a string (schema_version 1).
std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result);

struct SweepSpec {
    std::string key;
    std::vector<std::string> values;
};

/// "key=v1,v2,..." for --sweep.
SweepSpec parse_sweep(const std::string& text);

/// Expands the sweep into one run per value under output_dir/<key>=<value>,
/// executing up to NSEM_THREADS runs in parallel (default: hardware
/// concurrency), and writes a top-level sweep_summary.json.
/// Returns false if any run failed.
bool run_sweep(const ExperimentConfig& base, const SweepSpec& sweep, std::ostream& log);

// Offline editing over matrix files.
struct EditFilesRequest {
    std::filesystem::path weights;
    std::filesystem::path preserved_keys;
    std::filesystem::path batches_dir;
    Method method = Method::evoedit;
    SolverConfig solver;
    std::filesystem::path output_dir;
};

/// Loads the weight and key files plus every `*.keys.nsem`/`*.values.nsem`
/// pair in batches_dir (lexicographic order), runs the method, writes
/// `edited_weights.nsem` and `<method>_trace.csv`. Returns false if the
/// stream aborted.
bool run_edit_files(const EditFilesRequest& request, std::ostream& log);

/// Writes a generated world and its batch files under out_dir:
/// weights.nsem, preserved_keys.nsem, preserved_values.nsem and
/// batches/batch_NNNNN.{keys,values}.nsem.
void write_world(const ExperimentConfig& config, const std::filesystem::path& out_dir);

} // namespace nsem
