#pragma once

#include "nsem/matrix.hpp"
#include "nsem/sequence.hpp"
#include "nsem/solver.hpp"

#include <cstdint>
#include <vector>

namespace nsem {

/// Shape of a synthetic editing problem. overlap is the fraction of each
/// batch's keys drawn from previously edited subspaces, the knob that forces
/// interference between edits.
struct WorldSpec {
    std::size_t d_k = 64;
    std::size_t d_v = 64;
    std::size_t n_preserved = 0;
    std::size_t t_steps = 0;
    std::size_t batch_size = 1;
    double overlap = 0.0;
    std::uint64_t seed = 0;

    void validate() const; // throws config_error
};

struct World {
    Matrix w0; // d_v x d_k
    Matrix k0; // d_k x n_preserved, unit columns
    Matrix v0; // d_v x n_preserved, exactly w0 k0
};

/// Ground-truth memory plus preserved facts that are consistent with it by
/// construction. Bit-identical for identical specs.
World gen_world(const WorldSpec& spec);

/// t_steps batches of batch_size edits. Keys are unit columns, fresh Gaussian
/// or (with probability overlap) unit-normalized combinations of keys from
/// earlier batches; prior_keys seeds that pool. Values are w0 k_t plus a
/// unit-norm perturbation per column, so every edit genuinely changes the map.
std::vector<EditBatch> gen_stream(const WorldSpec& spec, const Matrix& w0,
                                  const Matrix& prior_keys);

struct SummaryReport {
    double rewrite_residual_first_batch = 0.0; // ||w_T k_1 - v_1||_F / ||v_1||_F
    double preservation = 0.0;                 // ||w_T k0 - v0||_F / ||v0||_F
    double final_preservation_drift = 0.0;
    double final_early_retention = 0.0;
    double solve_seconds_total = 0.0;
    double proj_seconds_total = 0.0;
    double solve_seconds_mean = 0.0;
    double proj_seconds_mean = 0.0;
    std::size_t steps = 0;
    std::size_t final_projector_rank = 0;
    std::vector<StepTrace> series; // the per-step curves the totals are drawn from
};

/// Residual-based summary of a finished run.
SummaryReport metrics(const std::vector<StepTrace>& traces, const Matrix& final_weights,
                      const World& world, const std::vector<EditBatch>& stream);

} // namespace nsem
