#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nsem/numerics.hpp"
#include "nsem/synth.hpp"

#include <cmath>

using namespace nsem;

namespace {

WorldSpec spec_for(std::uint64_t seed, std::size_t d_k = 32, std::size_t d_v = 16,
                   std::size_t n_preserved = 10, std::size_t t_steps = 4,
                   std::size_t batch_size = 2, double overlap = 0.0) {
    WorldSpec spec;
    spec.d_k = d_k;
    spec.d_v = d_v;
    spec.n_preserved = n_preserved;
    spec.t_steps = t_steps;
    spec.batch_size = batch_size;
    spec.overlap = overlap;
    spec.seed = seed;
    return spec;
}

} // namespace

TEST_CASE("gen_world with no preserved facts") {
    const World world = gen_world(spec_for(1, 8, 4, 0));
    CHECK(world.k0.cols() == 0);
    CHECK(world.v0.cols() == 0);
    CHECK(world.w0.rows() == 4);
    CHECK(world.w0.cols() == 8);
}

TEST_CASE("preserved facts are consistent by construction") {
    const World world = gen_world(spec_for(2));
    CHECK(max_abs(subtract(world.v0, product(world.w0, world.k0))) == 0.0);
    for (std::size_t j = 0; j < world.k0.cols(); ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < world.k0.rows(); ++i)
            norm += world.k0(i, j) * world.k0(i, j);
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("generation is deterministic in the seed") {
    const WorldSpec spec = spec_for(4);
    const World a = gen_world(spec);
    const World b = gen_world(spec);
    CHECK(a.w0 == b.w0);
    CHECK(a.k0 == b.k0);
    CHECK(a.v0 == b.v0);
    const auto sa = gen_stream(spec, a.w0, Matrix(spec.d_k, 0));
    const auto sb = gen_stream(spec, b.w0, Matrix(spec.d_k, 0));
    REQUIRE(sa.size() == sb.size());
    for (std::size_t t = 0; t < sa.size(); ++t) {
        CHECK(sa[t].keys == sb[t].keys);
        CHECK(sa[t].values == sb[t].values);
    }
}

TEST_CASE("fresh keys stay nearly orthogonal to earlier ones") {
    const WorldSpec spec = spec_for(5, 128, 16, 0, 5, 2, 0.0);
    const World world = gen_world(spec);
    const auto stream = gen_stream(spec, world.w0, Matrix(spec.d_k, 0));
    Matrix pool(spec.d_k, 0);
    double max_cos = 0.0;
    for (const EditBatch& batch : stream) {
        if (pool.cols() > 0) {
            const Matrix cosines = product_tn(pool, batch.keys);
            max_cos = std::max(max_cos, max_abs(cosines));
        }
        pool = hcat(pool, batch.keys);
    }
    CHECK(max_cos < 0.5);
}

TEST_CASE("full overlap places keys inside the previous edit span") {
    const WorldSpec spec = spec_for(6, 24, 8, 0, 4, 3, 1.0);
    const World world = gen_world(spec);
    const auto stream = gen_stream(spec, world.w0, Matrix(spec.d_k, 0));
    Matrix pool(spec.d_k, 0);
    for (std::size_t t = 0; t < stream.size(); ++t) {
        if (t >= 1) {
            const SvdResult basis = thin_svd(pool);
            std::size_t rank = 0;
            while (rank < basis.sigma.size() && basis.sigma[rank] > 1e-12) ++rank;
            const Matrix u = basis.u.columns(0, rank);
            const Matrix inside = product(u, product_tn(u, stream[t].keys));
            CHECK(frobenius_norm(subtract(stream[t].keys, inside)) <= 1e-10);
        }
        pool = hcat(pool, stream[t].keys);
    }
}

TEST_CASE("stream residuals have the constructed norm") {
    const WorldSpec spec = spec_for(33, 64, 32, 5, 6, 3, 0.25);
    const World world = gen_world(spec);
    const auto stream = gen_stream(spec, world.w0, Matrix(spec.d_k, 0));
    const double expected = std::sqrt(static_cast<double>(spec.batch_size));
    for (const EditBatch& batch : stream) {
        const double norm = frobenius_norm(subtract(batch.values, product(world.w0, batch.keys)));
        CHECK(norm == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("metrics on an untouched session") {
    const World world = gen_world(spec_for(7));
    const SummaryReport report = metrics({}, world.w0, world, {});
    CHECK(report.steps == 0);
    CHECK(report.preservation == 0.0);
    CHECK(report.rewrite_residual_first_batch == 0.0);
    CHECK(report.solve_seconds_total == 0.0);
}

TEST_CASE("metrics on a perfect editor") {
    const WorldSpec spec = spec_for(8);
    const World world = gen_world(spec);
    // a stream of already-known facts: the initial weights already solve it
    std::vector<EditBatch> stream;
    const auto raw = gen_stream(spec, world.w0, Matrix(spec.d_k, 0));
    for (const EditBatch& batch : raw) {
        stream.push_back(EditBatch{batch.keys, product(world.w0, batch.keys)});
    }
    const SummaryReport report = metrics({}, world.w0, world, stream);
    CHECK(report.rewrite_residual_first_batch == 0.0);
    CHECK(report.preservation == 0.0);
}

TEST_CASE("metrics aggregates the trace series") {
    std::vector<StepTrace> traces(3);
    traces[0].solve_seconds = 0.5;
    traces[1].solve_seconds = 0.25;
    traces[2].solve_seconds = 0.25;
    traces[0].proj_seconds = 0.1;
    traces[2].proj_seconds = 0.3;
    traces[2].preservation_drift = 0.125;
    traces[2].early_retention = 0.0625;
    traces[2].projector_rank = 9;
    const World world = gen_world(spec_for(9, 8, 4, 0));
    const SummaryReport report = metrics(traces, world.w0, world, {});
    CHECK(report.steps == 3);
    CHECK(report.solve_seconds_total == doctest::Approx(1.0));
    CHECK(report.proj_seconds_total == doctest::Approx(0.4));
    CHECK(report.solve_seconds_mean == doctest::Approx(1.0 / 3.0));
    CHECK(report.final_preservation_drift == doctest::Approx(0.125));
    CHECK(report.final_early_retention == doctest::Approx(0.0625));
    CHECK(report.final_projector_rank == 9);
    REQUIRE(report.series.size() == 3);
    CHECK(report.series[2].projector_rank == 9);
}
