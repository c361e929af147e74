"""Quick end-to-end check of the starkladder Python module.

Install the extension first, e.g. with `maturin build -m crates/py/Cargo.toml`,
install the wheel, then run `python python/smoke_test.py`.
"""

import json
import math
import sys
import tempfile

import starkladder as sl


def main():
    lat = sl.Lattice("dimer1i", 60, 0.2)
    print(lat)
    assert len(lat.labels()) == 60

    certs = lat.certificates()
    assert all(v < 1e-12 for v in certs.values()), certs

    spec = sl.eigendecompose(lat)
    assert len(spec) == 60 and spec.max_residual < 1e-9
    k, e0 = spec.reference_state("+")
    assert abs(e0.imag - 0.764) < 0.01, e0
    print(f"E0 = {e0:.5f}")

    ladders = spec.ladders(0.4)
    assert len(ladders["families"]) >= 2

    for op, shift in [("T2", 0.4), ("TR*g", 0.0)]:
        r = sl.verify_ladder_operator(lat, op, shift)
        assert r < 1e-6, (op, r)

    psi0 = sl.gaussian_state(lat, 0.3, 30)
    period = math.pi / lat.omega
    times = [period * k / 10 for k in range(11)]
    f = sl.fidelity(lat, psi0, times)
    assert f[0] == 1.0 and all(0.0 <= v <= 1.0 for v in f)

    herm = sl.Lattice("uniform1d", 40, 0.5)
    p = sl.dirac_probability(herm, sl.gaussian_state(herm, 0.3, 20), times, 0.0)
    assert max(abs(sum(row) - 1.0) for row in p) < 1e-10

    pair = sl.Lattice("pair2d_boson", 6, 0.2)
    h, oracle = pair.hamiltonian(), sl.oracle_hamiltonian(pair)
    dev = max(abs(a - b) for ra, rb in zip(h, oracle) for a, b in zip(ra, rb))
    assert dev < 1e-12, dev

    sym, anti = sl.sector_decompose(sl.Lattice("pair2d_electron", 6, 0.2))
    assert len(sym) == 21 and len(anti) == 15

    assert sl.validate_config("[model]\nn_sites = 40\n") == []
    assert sl.validate_config("[model]\nn_sites = -5\n")
    try:
        sl.Lattice("hexagonal", 10, 0.2)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown kind accepted")

    assert len(sl.list_experiments()) >= 6
    with tempfile.TemporaryDirectory() as d:
        checks = sl.run_experiment('experiment = "ladder_scan"\n', d)
        assert all(c["passed"] for c in checks), json.dumps(checks, indent=1)

    print("smoke test ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
