#!/usr/bin/env python3
"""Smoke test for the _jcspec extension module.

Build and stage the module first:

    cargo build -p jcspec-python --release
    cp target/release/lib_jcspec.so python/_jcspec.so

then run `python3 python/smoke_test.py`.
"""
import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import _jcspec as jc


def approx(a, b, tol):
    assert abs(a - b) < tol, f"{a} vs {b} (tol {tol})"


def main():
    print(f"_jcspec {jc.__version__}")

    # modified coupling at the reference parameter sets
    approx(jc.g_prime(8 / 3, 0.03), 0.995196, 1e-6)
    approx(jc.g_prime(16 / 3, 0.03), 0.980742, 1e-5)
    approx(jc.g_prime(8 / 3, 0.1), 0.946177, 1e-5)
    print("g_prime ok")

    # quasi-energy ladder: sqrt(2) g' at eps = 0.04
    approx(jc.quasi_energy(2, +1, 0.04), math.sqrt(2) * 0.995196, 1e-5)
    assert jc.quasi_energy(0, +1, 0.3) == 0.0
    try:
        jc.quasi_energy(1, +1, 0.6)
        raise AssertionError("invalid regime accepted")
    except ValueError:
        pass
    print("quasi_energy ok")

    # numeric eigenvalues of the effective Hamiltonian contain the ladder
    ladder = jc.eigen_ladder(8 / 3, 0.03, 30)
    gp = jc.g_prime(8 / 3, 0.03)
    for n in (1, 2, 3):
        target = math.sqrt(n) * gp
        nearest = min(abs(e - target) for e in ladder)
        assert nearest < 1e-4, f"manifold {n}: deviation {nearest}"
    print("eigen_ladder ok")

    # damping-induced transition strength follows (2 Omega kappa / g^2)^2
    s = jc.forbidden_strength(8 / 3, 0.03, 30)
    ratio = s / 0.08**2
    assert 0.9 < ratio < 1.1, ratio
    print(f"forbidden_strength ok (ratio {ratio:.4f})")

    # small spectrum run end to end
    config = {
        "omega_over_g": 8 / 3,
        "two_kappa_over_g": 0.03,
        "fock_dim": 12,
        "delta_points": 1201,
    }
    deltas, intensity, peaks = jc.compute_spectrum(json.dumps(config))
    assert len(deltas) == len(intensity) == 1201
    assert max(intensity) == 1.0
    labels = {p[0] for p in peaks}
    assert "a" in labels, labels
    peak_a = next(p for p in peaks if p[0] == "a" and p[1] > 0)
    approx(peak_a[1], gp, 0.02)
    print(f"compute_spectrum ok (peak a at {peak_a[1]:.4f}, {len(peaks)} peaks)")

    print("smoke test passed")


if __name__ == "__main__":
    main()
