"""Quick check that the extension module loads and agrees with known values.

Build with `maturin develop` (or copy the cdylib to `ramsey_forge_py.so` on
PYTHONPATH) and run `python smoke_test.py`.
"""

import ramsey_forge_py as rf


def main():
    inst = rf.RamseyInstance(6, 3, 3)
    assert inst.num_edges() == 15

    # K6 has 20 triangles and its complement none
    assert rf.ramsey_energy(rf.Graph.complete(6), inst) == 20
    assert rf.ramsey_energy(rf.Graph.empty(6), inst) == 20

    c5 = rf.exhaustive_ground(rf.RamseyInstance(5, 3, 3))
    assert c5["e_gs"] == 0 and c5["degeneracy"] == 12, c5

    model = rf.build_ramsey_model(rf.RamseyInstance(4, 4, 2))
    assert model.num_vars == 10, model
    spin = model.to_spin()
    reads = rf.simulated_anneal(spin, reads=200, seed=1)
    best = min(r["energy"] for r in reads)
    assert best == 1.0, best

    dist = rf.qa_energy_distribution(rf.build_ramsey_model(rf.RamseyInstance(4, 3, 3)).to_spin(), tf=20.0)
    assert abs(sum(p for _, p in dist) - 1.0) < 1e-6

    report = rf.ramsey_protocol(4, 2, solver="oracle", n_start=3)
    assert report["ramsey_number"] == 4, report

    assert rf.repetition_count(0.5, 0.01) >= 1

    try:
        rf.RamseyInstance(1, 3, 3)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
