#pragma once

#include "nsem/matrix.hpp"
#include "nsem/projector.hpp"
#include "nsem/solver.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsem {

enum class Method {
    evoedit,   // evolving null-space alignment, reduced inner solve
    alphaedit, // fixed initial projector, full-dimension solve
    recompute, // projector rebuilt from the full key history each step
    plain      // joint ridge solve, no null-space projection
};

std::string_view method_name(Method m);
std::optional<Method> method_from_name(std::string_view name);

struct SolverConfig {
    double tau_initial = 1e-2; // covariance eigenvalue threshold (initial estimate, rebuilds)
    double tau_align = 1e-2;   // projected-key singular value threshold (alignment)
    double l2 = 1.0;           // inner-system regularizer; ridge for the plain method
    bool keep_dense_oracle = false; // verification mode: track deviation vs dense rebuild
    std::uint64_t seed = 0;

    void validate() const; // throws config_error
};

struct StepTrace {
    int step = 0;
    double solve_seconds = 0.0;
    double proj_seconds = 0.0;
    double edit_residual_after = 0.0;  // ||w_t k_t - v_t||_F
    double preservation_drift = 0.0;   // ||w_t k0 - w0 k0||_F / ||w0 k0||_F
    double early_retention = 0.0;      // same ratio on the first batch's post-edit outputs
    std::size_t projector_rank = 0;
    std::optional<double> deviation_vs_oracle;
};

/// Mutable state of one sequential editing run. Steps are strictly ordered;
/// distinct sessions are independent and may run concurrently.
class EditSession {
public:
    EditSession(Matrix w0, const Matrix& k0, Method method, const SolverConfig& config);

    /// Applies one batch: aligns the projector with the previous batch's keys
    /// (evoedit, from the second step on), computes the method's update, adds
    /// it to the weights and returns the step trace. The session is left
    /// unmodified if any stage throws.
    StepTrace apply_edit(const EditBatch& batch);

    const Matrix& weights() const noexcept { return w_; }
    const Matrix& initial_weights() const noexcept { return w0_; }
    const Projector& projector() const noexcept { return projector_; }
    const Matrix& preserved_keys() const noexcept { return k0_; }
    int step() const noexcept { return step_; }
    Method method() const noexcept { return method_; }
    const SolverConfig& config() const noexcept { return config_; }

private:
    Matrix w_;
    Matrix w0_;
    Matrix k0_;
    Matrix preserved_outputs_; // w0 k0, the drift baseline and preserved targets
    double preserved_norm_ = 0.0;
    Projector projector_;
    int step_ = 0;
    Method method_;
    SolverConfig config_;

    Matrix pending_keys_;    // evoedit: batch waiting to be aligned next step
    Matrix history_;         // alphaedit/recompute: [k0 | applied batches]
    Matrix aligned_history_; // oracle mode: keys currently inside the projector
    Matrix first_keys_;
    Matrix first_outputs_;   // w_1 k_1 snapshot
    double first_norm_ = 0.0;
};

/// New session per the chosen method; the projector is estimated from the
/// preserved keys (bypassed for the plain method). k0 may be empty.
EditSession new_session(Matrix w0, const Matrix& k0, Method method, const SolverConfig& config);

struct StreamResult {
    Matrix final_weights;
    std::vector<StepTrace> traces;
    bool ok = true;
    std::string error; // first failing step's message when !ok
};

/// Applies all batches in order; stops at the first failing step, keeping the
/// traces collected so far.
StreamResult run_stream(EditSession& session, std::span<const EditBatch> stream);

} // namespace nsem
