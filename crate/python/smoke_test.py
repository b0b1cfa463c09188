#!/usr/bin/env python3
"""Smoke test for the nlfv_py extension module.

Build and stage the module first:

    cargo build --release -p nlfv-py
    cp target/release/libnlfv_py.so python/nlfv_py.so

then run `python3 python/smoke_test.py` from the repository root.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import nlfv_py as nlfv  # noqa: E402


def main() -> None:
    names = nlfv.catalog()
    print("catalog:", names)
    assert set(names) >= {"uniform", "positivity", "minimum", "minmax", "convergence", "transient"}

    # case definitions round-trip through TOML
    toml_text = nlfv.case_toml("uniform")
    assert "grid" in toml_text and "tensor" in toml_text

    # the relaxation couple respects c1 = 2 c2
    c1, c2, bound = nlfv.c_weights("uniform", grid_n=20)
    print(f"c couple: ({c1:.3e}, {c2:.3e}), binding bound {bound:.3e}")
    assert 0.0 < c2 <= c1 < 1.0
    assert abs(c1 - 2.0 * c2) <= 1e-12 * c1

    # steady solve with the relaxed scheme, audit on
    sol = nlfv.solve("uniform", "rnlmpfa", grid_n=20, audit=True)
    print(f"uniform 20x20 rnlmpfa: n_iter={sol.n_iter}, converged={sol.converged}, "
          f"f in [{sol.f_min:.3e}, {sol.f_max:.6f}], audit_pass={sol.audit_pass}")
    assert sol.converged
    assert sol.audit_pass is True
    assert len(sol.field) == sol.nx * sol.ny == 400
    assert sol.r_under == 0.0 and sol.r_over == 0.0
    # boundary data sin(pi x) sin(pi y) bounds the solution
    assert -1e-12 <= sol.f_min and sol.f_max <= 1.0 + 1e-12

    # algebraic-residual run reproduces the two-iteration convergence
    fast = nlfv.solve("uniform", "rnlmpfa", grid_n=20, residual="algebraic")
    print(f"algebraic residual: n_iter={fast.n_iter}")
    assert fast.n_iter == 2

    # manufactured case reports a small relative error
    conv = nlfv.solve("convergence", "rnlmpfa", grid_n=20)
    print(f"convergence 20x20: err2={100.0 * conv.err2:.4f}%")
    assert conv.err2 is not None and conv.err2 < 0.01

    # the three schemes agree on the linear (diagonal-tensor) limit via a
    # custom TOML case
    case = """
name = "custom-iso"
c_override = [0.25, 0.125]

[grid]
kind = "uniform"
domain = [0.0, 1.0, 0.0, 1.0]
nx = 8
ny = 8

[tensor]
kind = "uniform"
dxx = 3.0
dxy = 0.0
dyy = 1.0

[source]
kind = "zero"

[bc.left]
kind = "dirichlet"
[bc.left.value]
kind = "one"
[bc.right]
kind = "dirichlet"
[bc.right.value]
kind = "one"
[bc.bottom]
kind = "dirichlet"
[bc.bottom.value]
kind = "one"
[bc.top]
kind = "dirichlet"
[bc.top.value]
kind = "one"

[picard]
epsilon = 1e-6
residual = "algebraic_residual"
max_iter = 50

[picard.init]
kind = "ones"
"""
    fields = []
    for scheme in ("nltpfa", "nlmpfa", "rnlmpfa"):
        s = nlfv.solve(case, scheme)
        assert s.converged
        fields.append(s.field)
        assert all(abs(v - 1.0) < 1e-11 for v in s.field), "constant data must be reproduced"
    assert all(math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)
               for a, b in zip(fields[0], fields[2]))

    # transient synthetic case stays within the boundary-data bounds
    tr = nlfv.solve_transient("transient", "rnlmpfa", dt=1000.0)
    print(f"transient dt=1000: steps={tr['n_steps']}, n_iter_avg={tr['n_iter_avg']:.3f}, "
          f"nonconv={tr['frac_nonconverged']:.4f}")
    assert tr["n_steps"] == 90
    assert tr["frac_nonconverged"] == 0.0
    assert tr["n_iter_avg"] <= 10.0
    assert tr["f_min"] >= -1e22 and tr["f_max"] <= 1e30 * (1.0 + 1e-8)

    print("smoke test OK")


if __name__ == "__main__":
    main()
