"""Smoke test for the plexsim Python extension.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/plexsim-*.whl
Then run with `python python/smoke_test.py` or `pytest python/`.
"""

import math

import plexsim


def test_resonant_spec_is_unconventional_blockade():
    spec = plexsim.SystemSpec(2.0, 0.35, 2.0, [plexsim.EmitterSpec(2.0, 0.08, 0.08, label="e1")])
    r = plexsim.steady_correlations(spec)
    assert r.g2 < 1.0 < r.g3
    assert r.regime == "UPB"


def test_detuned_preset_is_blockade():
    r = plexsim.evaluate(plexsim.preset("detuned"))
    assert r.g2 < 1.0 and r.g3 < 1.0
    assert r.regime == "PB"


def test_empty_cavity_is_coherent():
    spec = plexsim.SystemSpec(2.0, 0.35, 2.05)
    r = plexsim.steady_correlations(spec)
    assert abs(r.g2 - 1.0) < 1e-6 and abs(r.g3 - 1.0) < 1e-6
    expected = spec.drive_amplitude**2 / (0.05**2 + 0.35**2 / 4)
    assert abs(r.mean_n - expected) < 1e-6 * expected


def test_eom_matches_master_equation_at_weak_drive():
    spec = plexsim.preset("resonant")
    spec.drive_amplitude = 0.35 / 10000
    g2, g3, _ = plexsim.eom_solve(spec)
    me = plexsim.steady_correlations(spec)
    assert abs(me.g2 - g2) < 1e-3 * g2
    assert abs(me.g3 - g3) < 1e-3 * g3


def test_vacuum_rabi_doublet():
    levels = plexsim.energy_levels(plexsim.preset("resonant"), 2)
    assert [round(e, 10) for e in levels[1]] == [1.92, 2.08]
    two = plexsim.energy_levels(plexsim.preset("two-emitter"), 2)
    assert len(two[1]) == 3 and len(two[2]) == 4


def test_pathway_phase_at_resonance():
    phase = plexsim.pathway_phase(plexsim.preset("resonant"), 2.0)
    assert abs(abs(phase) - math.pi) < 1e-9


def test_photon_statistics_sign_pattern():
    probabilities, deltas, mean_n = plexsim.photon_statistics(plexsim.preset("resonant"))
    assert abs(sum(probabilities) - 1.0) < 1e-10
    assert deltas[2] < 0.0 < deltas[3]
    assert mean_n > 0.0


def test_sweep_and_optical_scenario():
    spec = plexsim.preset("resonant")
    result = plexsim.sweep(spec, "drive_omega", [1.9, 2.0, 2.1], engine="eom")
    assert len(result) == 3 and result.engine == "eom"
    assert all(p.error_code is None for p in result.points)

    optical = plexsim.optical_scenario([0.0, 20.0, 60.0, 80.0])
    g3 = [g for _, g in optical.correlations()]
    assert abs(g3[0] - g3[2]) < 1e-6 * g3[0]
    assert abs(g3[1] - g3[3]) < 1e-6 * g3[1]


def test_errors_carry_codes():
    spec = plexsim.SystemSpec(2.0, 0.35, 2.0, n_max=2)
    try:
        plexsim.steady_correlations(spec)
    except plexsim.PlexsimError as e:
        assert e.args[1] == "invalid-truncation"
    else:
        raise AssertionError("n_max = 2 must be rejected")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok {name}")
