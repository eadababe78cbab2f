"""Smoke tests for the python module: bindings load, the core operations run,
and results line up with the documented behavior."""

import os
import sys
import tempfile

import numpy as np

import nsem


def test_svd_identity():
    u, sigma, vt = nsem.thin_svd(np.eye(3))
    assert np.allclose(sigma, [1.0, 1.0, 1.0])
    assert np.allclose(u @ vt, np.eye(3), atol=1e-12)


def test_projector_annihilates_preserved_keys():
    rng = np.random.default_rng(0)
    keys = rng.standard_normal((16, 5))
    p = nsem.estimate_initial(keys, 1e-8)
    assert p.rank == 5
    assert np.linalg.norm(p.apply(keys)) <= 1e-8
    dense = p.dense()
    assert np.allclose(dense, dense.T, atol=1e-10)


def test_woodbury_matches_direct():
    rng = np.random.default_rng(1)
    d = 12
    p = nsem.estimate_initial(rng.standard_normal((d, 4)), 1e-8)
    w = rng.standard_normal((6, d)) / np.sqrt(d)
    keys = rng.standard_normal((d, 3))
    keys /= np.linalg.norm(keys, axis=0)
    values = w @ keys + rng.standard_normal((6, 3))
    gap = np.linalg.norm(
        nsem.solve_direct(w, p, keys, values) - nsem.solve_woodbury(w, p, keys, values)
    )
    assert gap <= 1e-8


def test_session_preserves_initial_knowledge():
    spec = nsem.WorldSpec()
    spec.d_k = 32
    spec.d_v = 16
    spec.n_preserved = 8
    spec.t_steps = 12
    spec.batch_size = 2
    spec.seed = 5
    world = nsem.gen_world(spec)
    stream = nsem.gen_stream(spec, world.w0, np.zeros((spec.d_k, 0)))

    session = nsem.EditSession(world.w0, world.k0, nsem.Method.evoedit, nsem.SolverConfig())
    result = nsem.run_stream(session, stream)
    assert result["ok"]
    assert result["traces"][-1].preservation_drift <= 1e-6
    assert result["traces"][-1].early_retention <= 1e-6


def test_matrix_file_round_trip():
    rng = np.random.default_rng(2)
    m = rng.standard_normal((7, 3))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "m.nsem")
        nsem.write_matrix(path, m)
        back = nsem.read_matrix(path)
    assert (back == m).all()


def test_verify_suite_runs():
    outcome = nsem.run_verify_suite("thm1", trials=3)
    assert outcome["pass"]
    assert outcome["trials"] == 3


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
