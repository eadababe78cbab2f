#include "nsem/errors.hpp"
#include "nsem/experiment.hpp"
#include "nsem/matrix_io.hpp"
#include "nsem/numerics.hpp"
#include "nsem/projector.hpp"
#include "nsem/sequence.hpp"
#include "nsem/solver.hpp"
#include "nsem/synth.hpp"
#include "nsem/verify.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;

namespace {

nsem::Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw nsem::dimension_error("expected a 2-d array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    std::vector<double> data(rows * cols);
    std::memcpy(data.data(), a.data(), rows * cols * sizeof(double));
    return nsem::Matrix(rows, cols, std::move(data));
}

py::array_t<double> to_array(const nsem::Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
    return out;
}

using NpArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

nsem::EditBatch to_batch(const NpArray& keys, const NpArray& values) {
    return nsem::EditBatch{to_matrix(keys), to_matrix(values)};
}

} // namespace

PYBIND11_MODULE(nsem, m) {
    m.doc() = "null-space aligned sequential editing for linear associative memories";

    py::register_exception<nsem::error>(m, "NsemError");

    py::enum_<nsem::Method>(m, "Method")
        .value("evoedit", nsem::Method::evoedit)
        .value("alphaedit", nsem::Method::alphaedit)
        .value("recompute", nsem::Method::recompute)
        .value("plain", nsem::Method::plain);

    py::class_<nsem::SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("tau_initial", &nsem::SolverConfig::tau_initial)
        .def_readwrite("tau_align", &nsem::SolverConfig::tau_align)
        .def_readwrite("l2", &nsem::SolverConfig::l2)
        .def_readwrite("keep_dense_oracle", &nsem::SolverConfig::keep_dense_oracle)
        .def_readwrite("seed", &nsem::SolverConfig::seed);

    py::class_<nsem::WorldSpec>(m, "WorldSpec")
        .def(py::init<>())
        .def_readwrite("d_k", &nsem::WorldSpec::d_k)
        .def_readwrite("d_v", &nsem::WorldSpec::d_v)
        .def_readwrite("n_preserved", &nsem::WorldSpec::n_preserved)
        .def_readwrite("t_steps", &nsem::WorldSpec::t_steps)
        .def_readwrite("batch_size", &nsem::WorldSpec::batch_size)
        .def_readwrite("overlap", &nsem::WorldSpec::overlap)
        .def_readwrite("seed", &nsem::WorldSpec::seed);

    py::class_<nsem::StepTrace>(m, "StepTrace")
        .def_readonly("step", &nsem::StepTrace::step)
        .def_readonly("solve_seconds", &nsem::StepTrace::solve_seconds)
        .def_readonly("proj_seconds", &nsem::StepTrace::proj_seconds)
        .def_readonly("edit_residual_after", &nsem::StepTrace::edit_residual_after)
        .def_readonly("preservation_drift", &nsem::StepTrace::preservation_drift)
        .def_readonly("early_retention", &nsem::StepTrace::early_retention)
        .def_readonly("projector_rank", &nsem::StepTrace::projector_rank)
        .def_readonly("deviation_vs_oracle", &nsem::StepTrace::deviation_vs_oracle);

    py::class_<nsem::AlignmentRecord>(m, "AlignmentRecord")
        .def_property_readonly("retained_directions",
                               [](const nsem::AlignmentRecord& r) {
                                   return to_array(r.retained_directions);
                               })
        .def_readonly("retained_sigmas", &nsem::AlignmentRecord::retained_sigmas)
        .def_readonly("discarded_sigmas", &nsem::AlignmentRecord::discarded_sigmas)
        .def_readonly("spectral_gap", &nsem::AlignmentRecord::spectral_gap);

    py::class_<nsem::Projector>(m, "Projector")
        .def_property_readonly("dim", &nsem::Projector::dim)
        .def_property_readonly("rank", &nsem::Projector::rank)
        .def_property_readonly("generation", &nsem::Projector::generation)
        .def("apply", [](const nsem::Projector& p, const NpArray& x) {
            return to_array(p.apply(to_matrix(x)));
        })
        .def("dense", [](const nsem::Projector& p) { return to_array(p.dense()); })
        .def("complement_basis",
             [](const nsem::Projector& p) { return to_array(p.complement_basis()); })
        .def("orthonormality_error", &nsem::Projector::orthonormality_error);

    m.def("thin_svd", [](const NpArray& a) {
        const nsem::SvdResult svd = nsem::thin_svd(to_matrix(a));
        return py::make_tuple(to_array(svd.u), svd.sigma, to_array(svd.vt));
    });
    m.def("spectral_norm", [](const NpArray& a) { return nsem::spectral_norm(to_matrix(a)); });

    m.def("estimate_initial", [](const NpArray& k0, double tau) {
        return nsem::estimate_initial(to_matrix(k0), tau);
    });
    m.def("align", [](const nsem::Projector& p, const NpArray& keys, double tau) {
        auto [next, record] = nsem::align(p, to_matrix(keys), tau);
        return py::make_tuple(next, record);
    });
    m.def("oracle_recompute", [](const NpArray& k_hat, double tau) {
        return to_array(nsem::oracle_recompute(to_matrix(k_hat), tau));
    });
    m.def("deviation", [](const nsem::Projector& p, const NpArray& ideal) {
        return nsem::deviation(p, to_matrix(ideal));
    });

    m.def("residual", [](const NpArray& w, const NpArray& keys, const NpArray& values) {
        return to_array(nsem::residual(to_matrix(w), to_batch(keys, values)).r);
    });
    m.def("solve_direct",
          [](const NpArray& w, const nsem::Projector& p, const NpArray& keys,
             const NpArray& values) {
              return to_array(nsem::solve_direct(to_matrix(w), p, to_batch(keys, values)));
          });
    m.def(
        "solve_woodbury",
        [](const NpArray& w, const nsem::Projector& p, const NpArray& keys,
           const NpArray& values, double l2) {
            return to_array(nsem::solve_woodbury(to_matrix(w), p, to_batch(keys, values), l2));
        },
        py::arg("w"), py::arg("p"), py::arg("keys"), py::arg("values"), py::arg("l2") = 1.0);
    m.def("solve_alphaedit",
          [](const NpArray& w, const nsem::Projector& p0, const NpArray& preserved,
             const NpArray& keys, const NpArray& values) {
              return to_array(nsem::solve_alphaedit(to_matrix(w), p0, to_matrix(preserved),
                                                    to_batch(keys, values)));
          });
    m.def("solve_plain",
          [](const NpArray& w, const NpArray& k0, const NpArray& v0, const NpArray& keys,
             const NpArray& values, double ridge) {
              return to_array(nsem::solve_plain(to_matrix(w), to_batch(k0, v0),
                                                to_batch(keys, values), ridge));
          });

    py::class_<nsem::EditSession>(m, "EditSession")
        .def(py::init([](const NpArray& w0, const NpArray& k0, nsem::Method method,
                         const nsem::SolverConfig& config) {
            return nsem::EditSession(to_matrix(w0), to_matrix(k0), method, config);
        }))
        .def("apply_edit",
             [](nsem::EditSession& session, const NpArray& keys, const NpArray& values) {
                 return session.apply_edit(to_batch(keys, values));
             })
        .def("weights",
             [](const nsem::EditSession& session) { return to_array(session.weights()); })
        .def_property_readonly("step", &nsem::EditSession::step)
        .def_property_readonly("projector", &nsem::EditSession::projector);

    py::class_<nsem::World>(m, "World")
        .def_property_readonly("w0", [](const nsem::World& w) { return to_array(w.w0); })
        .def_property_readonly("k0", [](const nsem::World& w) { return to_array(w.k0); })
        .def_property_readonly("v0", [](const nsem::World& w) { return to_array(w.v0); });

    m.def("gen_world", &nsem::gen_world);
    m.def("gen_stream", [](const nsem::WorldSpec& spec, const NpArray& w0,
                           const NpArray& prior_keys) {
        const auto stream = nsem::gen_stream(spec, to_matrix(w0), to_matrix(prior_keys));
        py::list out;
        for (const nsem::EditBatch& batch : stream) {
            out.append(py::make_tuple(to_array(batch.keys), to_array(batch.values)));
        }
        return out;
    });

    m.def("run_stream", [](nsem::EditSession& session, const py::list& stream) {
        std::vector<nsem::EditBatch> batches;
        for (const auto& item : stream) {
            const auto pair = item.cast<py::tuple>();
            batches.push_back(to_batch(pair[0].cast<NpArray>(), pair[1].cast<NpArray>()));
        }
        const nsem::StreamResult result = nsem::run_stream(session, batches);
        py::dict out;
        out["final_weights"] = to_array(result.final_weights);
        out["traces"] = result.traces;
        out["ok"] = result.ok;
        out["error"] = result.error;
        return out;
    });

    m.def("write_matrix", [](const std::filesystem::path& path, const NpArray& a) {
        nsem::write_matrix(path, to_matrix(a));
    });
    m.def("read_matrix",
          [](const std::filesystem::path& path) { return to_array(nsem::read_matrix(path)); });

    m.def(
        "run_verify_suite",
        [](const std::string& name, int trials, std::size_t d, std::size_t n, int steps,
           double tau, std::uint64_t seed) {
            nsem::VerifyParams params;
            params.trials = trials;
            params.d = d;
            params.n = n;
            params.steps = steps;
            params.tau = tau;
            params.seed0 = seed;
            const nsem::SuiteResult result = nsem::run_suite(name, params);
            py::dict out;
            out["suite"] = result.suite;
            out["pass"] = result.pass;
            out["trials"] = result.trials.size();
            out["max_observed"] = result.max_observed;
            out["elapsed_seconds"] = result.elapsed_seconds;
            return out;
        },
        py::arg("name"), py::arg("trials") = 50, py::arg("d") = 32, py::arg("n") = 4,
        py::arg("steps") = 5, py::arg("tau") = 1e-10, py::arg("seed") = 1);
}
