#include "nsem/synth.hpp"

#include "nsem/errors.hpp"
#include "nsem/rng.hpp"

#include <cmath>

namespace nsem {

namespace {

void normalize_column(Matrix& m, std::size_t j) {
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) norm_sq += m(i, j) * m(i, j);
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) return;
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) /= norm;
}

Matrix unit_gaussian_column(Rng& rng, std::size_t dim) {
    Matrix col = gaussian_matrix(rng, dim, 1);
    normalize_column(col, 0);
    return col;
}

} // namespace

void WorldSpec::validate() const {
    if (d_k < 1 || d_v < 1) throw config_error("world dimensions must be at least 1");
    if (batch_size < 1) throw config_error("world.batch_size must be at least 1");
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw config_error("world.overlap must be in [0, 1]");
}

World gen_world(const WorldSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    World world;
    const double w_scale = 1.0 / std::sqrt(static_cast<double>(spec.d_k));
    world.w0 = scale(gaussian_matrix(rng, spec.d_v, spec.d_k), w_scale);
    world.k0 = gaussian_matrix(rng, spec.d_k, spec.n_preserved);
    for (std::size_t j = 0; j < world.k0.cols(); ++j) normalize_column(world.k0, j);
    world.v0 = spec.n_preserved > 0 ? product(world.w0, world.k0) : Matrix(spec.d_v, 0);
    return world;
}

std::vector<EditBatch> gen_stream(const WorldSpec& spec, const Matrix& w0,
                                  const Matrix& prior_keys) {
    spec.validate();
    if (w0.cols() != spec.d_k || w0.rows() != spec.d_v) {
        throw dimension_error("gen_stream: weights do not match the world spec");
    }
    if (prior_keys.cols() > 0 && prior_keys.rows() != spec.d_k) {
        throw dimension_error("gen_stream: prior keys have wrong row count");
    }

    // Distinct sub-seed so streams do not replay the world's draws.
    Rng rng(spec.seed * 0x9e3779b97f4a7c15ULL + 1);
    Matrix pool = prior_keys.cols() > 0 ? prior_keys : Matrix(spec.d_k, 0);

    std::vector<EditBatch> stream;
    stream.reserve(spec.t_steps);
    for (std::size_t t = 0; t < spec.t_steps; ++t) {
        Matrix keys(spec.d_k, spec.batch_size);
        for (std::size_t j = 0; j < spec.batch_size; ++j) {
            Matrix col(spec.d_k, 1);
            const bool reuse = rng.uniform() < spec.overlap && pool.cols() > 0;
            if (reuse) {
                col = product(pool, gaussian_matrix(rng, pool.cols(), 1));
                normalize_column(col, 0);
            }
            if (!reuse || frobenius_norm(col) == 0.0) {
                col = unit_gaussian_column(rng, spec.d_k);
            }
            for (std::size_t i = 0; i < spec.d_k; ++i) keys(i, j) = col(i, 0);
        }
        Matrix values = product(w0, keys);
        for (std::size_t j = 0; j < spec.batch_size; ++j) {
            Matrix bump = unit_gaussian_column(rng, spec.d_v);
            for (std::size_t i = 0; i < spec.d_v; ++i) values(i, j) += bump(i, 0);
        }
        // Completed batches join the overlap pool; keys inside one batch stay
        // independent of each other.
        pool = hcat(pool, keys);
        stream.push_back(EditBatch{std::move(keys), std::move(values)});
    }
    return stream;
}

SummaryReport metrics(const std::vector<StepTrace>& traces, const Matrix& final_weights,
                      const World& world, const std::vector<EditBatch>& stream) {
    SummaryReport report;
    report.steps = traces.size();
    report.series = traces;
    for (const StepTrace& trace : traces) {
        report.solve_seconds_total += trace.solve_seconds;
        report.proj_seconds_total += trace.proj_seconds;
    }
    if (!traces.empty()) {
        report.solve_seconds_mean = report.solve_seconds_total / static_cast<double>(traces.size());
        report.proj_seconds_mean = report.proj_seconds_total / static_cast<double>(traces.size());
        report.final_preservation_drift = traces.back().preservation_drift;
        report.final_early_retention = traces.back().early_retention;
        report.final_projector_rank = traces.back().projector_rank;
    }
    if (!stream.empty()) {
        const EditBatch& first = stream.front();
        const double target_norm = frobenius_norm(first.values);
        if (target_norm > 0.0) {
            report.rewrite_residual_first_batch =
                frobenius_norm(subtract(product(final_weights, first.keys), first.values)) /
                target_norm;
        }
    }
    if (world.k0.cols() > 0) {
        const double v0_norm = frobenius_norm(world.v0);
        if (v0_norm > 0.0) {
            report.preservation =
                frobenius_norm(subtract(product(final_weights, world.k0), world.v0)) / v0_norm;
        }
    }
    return report;
}

} // namespace nsem
