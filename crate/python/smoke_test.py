"""Smoke test for the pycasimir extension.

Build and install with `maturin develop -m crates/python/Cargo.toml`, or put
the compiled module on PYTHONPATH, then run `python python/smoke_test.py`.
"""

import math

import pycasimir as pc


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    closed = pc.pair_energy_t0(1.0, 1.0)
    assert close(closed.value, -23.0 / (4.0 * math.pi), 1e-14), closed
    numeric = pc.pair_energy_t0_numeric(1.0, 1.0)
    assert close(numeric.value, closed.value, 1e-8), numeric

    cold = pc.pair_free_energy(1.0, 1.0, 1e6)
    assert close(cold.value, closed.value, 1e-3), cold

    ks = pc.kspace_pair_energy_extrapolated(1.0, 1.0)
    assert close(ks.value, closed.value, 1e-3), ks

    assert close(pc.overlap_volume(1.0, 1.0), 5.0 * math.pi / 12.0, 1e-14)

    medium = pc.Medium.dilute(0.01)
    fit = pc.hardcore_fit(1.0, medium)
    theory = pc.finite_part_prediction(1.0, medium)
    assert close(fit.finite_1_over_a, theory, 1e-2), (fit, theory)

    eps = pc.epsilon_relation(pc.Medium(1.0, 0.001))
    assert eps.epsilon > 1.0

    closed_self, numeric_self = pc.self_energy(1.0, 0.1, 0.5)
    assert close(numeric_self, closed_self, 1e-8)

    try:
        pc.overlap_volume(-1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative separation accepted")

    print("pycasimir smoke test OK")


if __name__ == "__main__":
    main()
