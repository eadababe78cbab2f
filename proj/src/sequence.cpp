#include "nsem/sequence.hpp"

#include "nsem/errors.hpp"

#include <chrono>
#include <utility>

namespace nsem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double relative_change(const Matrix& current, const Matrix& baseline, double baseline_norm) {
    if (baseline_norm == 0.0) return 0.0;
    return frobenius_norm(subtract(current, baseline)) / baseline_norm;
}

} // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::evoedit: return "evoedit";
        case Method::alphaedit: return "alphaedit";
        case Method::recompute: return "recompute";
        case Method::plain: return "plain";
    }
    return "unknown";
}

std::optional<Method> method_from_name(std::string_view name) {
    if (name == "evoedit") return Method::evoedit;
    if (name == "alphaedit") return Method::alphaedit;
    if (name == "recompute") return Method::recompute;
    if (name == "plain") return Method::plain;
    return std::nullopt;
}

void SolverConfig::validate() const {
    if (!(tau_initial > 0.0)) throw config_error("solver.tau_initial must be positive");
    if (!(tau_align > 0.0)) throw config_error("solver.tau_align must be positive");
    if (!(l2 > 0.0)) throw config_error("solver.l2 must be positive");
}

EditSession::EditSession(Matrix w0, const Matrix& k0, Method method, const SolverConfig& config)
    : w_(std::move(w0)), method_(method), config_(config) {
    config_.validate();
    if (w_.rows() == 0 || w_.cols() == 0) throw config_error("initial weights must be non-empty");
    if (!w_.all_finite()) throw numeric_error("initial weights contain non-finite entries");

    const std::size_t d = w_.cols();
    k0_ = k0.cols() == 0 ? Matrix(d, 0) : k0;
    if (k0_.cols() > 0 && k0_.rows() != d) {
        throw dimension_error("preserved keys rows do not match weight columns");
    }

    w0_ = w_;
    preserved_outputs_ = k0_.cols() > 0 ? product(w0_, k0_) : Matrix(w_.rows(), 0);
    preserved_norm_ = frobenius_norm(preserved_outputs_);

    projector_ = method_ == Method::plain ? Projector::full(d)
                                          : estimate_initial(k0_, config_.tau_initial);
    pending_keys_ = Matrix(d, 0);
    if (method_ == Method::alphaedit || method_ == Method::recompute) history_ = k0_;
    if (config_.keep_dense_oracle) aligned_history_ = k0_;
}

StepTrace EditSession::apply_edit(const EditBatch& batch) {
    const int next = step_ + 1;
    double proj_seconds = 0.0;
    double solve_seconds = 0.0;

    // Stage everything; the session mutates only after all stages succeed.
    Projector next_projector = projector_;
    Matrix delta;
    switch (method_) {
        case Method::evoedit: {
            if (step_ >= 1) {
                const auto start = Clock::now();
                auto [aligned, record] = align(projector_, pending_keys_, config_.tau_align);
                proj_seconds = seconds_since(start);
                next_projector = std::move(aligned);
            }
            const auto start = Clock::now();
            delta = solve_woodbury(w_, next_projector, batch, config_.l2);
            solve_seconds = seconds_since(start);
            break;
        }
        case Method::alphaedit: {
            const auto start = Clock::now();
            delta = solve_alphaedit(w_, projector_, history_, batch);
            solve_seconds = seconds_since(start);
            break;
        }
        case Method::recompute: {
            auto start = Clock::now();
            next_projector = recompute_projector(history_, config_.tau_initial);
            proj_seconds = seconds_since(start);
            start = Clock::now();
            delta = solve_woodbury(w_, next_projector, batch, config_.l2);
            solve_seconds = seconds_since(start);
            break;
        }
        case Method::plain: {
            const auto start = Clock::now();
            delta = solve_plain(w_, EditBatch{k0_, preserved_outputs_}, batch, config_.l2);
            solve_seconds = seconds_since(start);
            break;
        }
    }
    Matrix next_w = add(w_, delta);

    // Commit.
    w_ = std::move(next_w);
    projector_ = std::move(next_projector);
    if (method_ == Method::evoedit || method_ == Method::recompute) {
        projector_.set_generation(next);
    }
    step_ = next;
    if (method_ == Method::alphaedit || method_ == Method::recompute) {
        history_ = hcat(history_, batch.keys);
    }
    if (method_ == Method::evoedit) {
        if (config_.keep_dense_oracle && pending_keys_.cols() > 0) {
            aligned_history_ = hcat(aligned_history_, pending_keys_);
        }
        pending_keys_ = batch.keys;
    }
    if (next == 1) {
        first_keys_ = batch.keys;
        first_outputs_ = product(w_, batch.keys);
        first_norm_ = frobenius_norm(first_outputs_);
    }

    StepTrace trace;
    trace.step = next;
    trace.solve_seconds = solve_seconds;
    trace.proj_seconds = proj_seconds;
    trace.edit_residual_after = frobenius_norm(subtract(product(w_, batch.keys), batch.values));
    trace.preservation_drift =
        k0_.cols() > 0 ? relative_change(product(w_, k0_), preserved_outputs_, preserved_norm_)
                       : 0.0;
    trace.early_retention =
        next > 1 ? relative_change(product(w_, first_keys_), first_outputs_, first_norm_) : 0.0;
    trace.projector_rank = projector_.rank();
    if (config_.keep_dense_oracle && method_ == Method::evoedit) {
        trace.deviation_vs_oracle =
            deviation(projector_, oracle_recompute(aligned_history_, config_.tau_initial));
    }
    return trace;
}

EditSession new_session(Matrix w0, const Matrix& k0, Method method, const SolverConfig& config) {
    return EditSession(std::move(w0), k0, method, config);
}

StreamResult run_stream(EditSession& session, std::span<const EditBatch> stream) {
    StreamResult result;
    result.traces.reserve(stream.size());
    for (const EditBatch& batch : stream) {
        try {
            result.traces.push_back(session.apply_edit(batch));
        } catch (const std::exception& e) {
            result.ok = false;
            result.error = e.what();
            break;
        }
    }
    result.final_weights = session.weights();
    return result;
}

} // namespace nsem
