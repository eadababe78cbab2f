#pragma once

#include "nsem/matrix.hpp"
#include "nsem/projector.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nsem {

/// Shared knobs for the property suites. Trial i runs with seed seed0 + i.
struct VerifyParams {
    int trials = 50;
    std::size_t d = 32;
    std::size_t n = 4;
    int steps = 5;
    double tau = 1e-10;
    std::uint64_t seed0 = 1;
};

struct TrialOutcome {
    std::uint64_t seed = 0;
    double observed = 0.0;
    double bound = 0.0;     // the bound the trial is checked against
    double alt_bound = 0.0; // truncation suite only: the coarser sum/max form, reported not asserted
    bool pass = true;
};

struct SuiteResult {
    std::string suite;
    std::vector<TrialOutcome> trials;
    bool pass = true;
    double max_observed = 0.0;
    double elapsed_seconds = 0.0;
};

// Suite ids accepted by the CLI:
//   thm1         — sequential alignment equals the dense rebuild when nothing
//                  is truncated (deviation <= 1e-7)
//   thm2         — measured projector deviation stays under the evaluated
//                  truncation bound on streams with a threshold placed inside
//                  the spectrum; includes the clamp-at-1 check
//   equivalence  — solve_direct and solve_woodbury(l2=1) agree to 1e-8
//   interference — sampled edits on protected inputs respect the
//                  interference inequality with 1e-8 slack
const std::vector<std::string>& verify_suite_names();

SuiteResult run_suite(const std::string& name, const VerifyParams& params);

SuiteResult run_exact_alignment_suite(const VerifyParams& params);  // thm1
SuiteResult run_truncation_bound_suite(const VerifyParams& params); // thm2
SuiteResult run_solver_equivalence_suite(const VerifyParams& params);
SuiteResult run_interference_suite(const VerifyParams& params);

/// One truncated alignment run with everything the bound evaluator needs.
/// The threshold is placed strictly between two singular values of the middle
/// alignment step, so truncation is guaranteed to occur.
struct TruncatedStream {
    Projector projector;                  // final truncated projector
    Matrix ideal;                         // dense no-truncation reference
    std::vector<AlignmentRecord> records;
    std::vector<Matrix> projected_keys;   // reference-projected key blocks
    std::vector<Matrix> projector_errors; // per-step projector error applied to keys
    Matrix span;                          // stacked reference-projected keys
    double span_min_sigma = 0.0;
    double chosen_tau = 0.0;
};

TruncatedStream build_truncated_stream(std::uint64_t seed, std::size_t d, std::size_t n,
                                       int steps);

} // namespace nsem
