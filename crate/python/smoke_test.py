#!/usr/bin/env python3
"""Smoke test for the penumbra_py extension module.

Builds nothing itself: expects `cargo build -p penumbra-py [--release]` to
have produced libpenumbra_py.so, which is linked into a temp directory under
the importable name and exercised end to end.
"""
import os
import shutil
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def locate_library() -> Path:
    candidates = [
        ROOT / "target" / "release" / "libpenumbra_py.so",
        ROOT / "target" / "debug" / "libpenumbra_py.so",
    ]
    for cand in candidates:
        if cand.exists():
            return cand
    sys.exit("libpenumbra_py.so not found; run `cargo build -p penumbra-py` first")


def main() -> None:
    lib = locate_library()
    tmp = tempfile.mkdtemp(prefix="penumbra_py_")
    shutil.copy(lib, os.path.join(tmp, "penumbra_py.so"))
    sys.path.insert(0, tmp)
    import penumbra_py as pm

    # arithmetic layer
    assert pm.exact_divisors(12) == [1, 3, 4, 12]
    assert pm.exact_divisors(30) == [1, 2, 3, 5, 6, 10, 15, 30]
    assert pm.star(6, 10) == 15
    assert pm.a_of(6, 2) == 7
    assert pm.sqrt_classes(-3, 13) == [7, 19]
    assert pm.is_fundamental(-4) and not pm.is_fundamental(-12)
    assert pm.gamma0_index(1152) == 2304
    assert pm.sturm_bound(10, 1, 288) == (1920, 1)
    assert pm.kronecker_symbol(2, 7) == 1

    # q-series layer
    j = {Fraction(n, d): Fraction(v) for n, d, v in pm.j_invariant(4)}
    assert j[Fraction(-1)] == 1
    assert j[Fraction(1)] == 196884
    assert j[Fraction(3)] == 864299970
    eta = {Fraction(n, d): Fraction(v) for n, d, v in pm.eta(6)}
    assert eta[Fraction(1, 24)] == 1
    assert eta[Fraction(25, 24)] == -1
    theta = {Fraction(n, d): Fraction(v) for n, d, v in pm.theta_null(1, 1, 9)}
    assert theta[Fraction(1, 4)] == 2

    # data layer
    reg = pm.PenumbraRegistry()
    info = dict((k, g) for k, g, _, _ in reg.info())
    assert info["-3:1"] == "Th"
    assert info["-4:1"] == "2.F4(2).2"
    assert reg.mt_coefficient("-3:1", "1A", 0, 0) == "248"
    assert reg.mt_coefficient("-3:1", "1A", 5, 1) == "-171990"
    assert reg.mt_coefficient("-4:1", "1A", 0, 0) == "-492"
    rows = {ell: (k, n, b) for ell, k, n, _, _, b in reg.sturm(-3)}
    assert rows["1"] == (10, 288, 1920)
    table_lines = reg.verify_tables()
    assert table_lines and all(ok for ok, _ in table_lines)
    relation_lines = reg.verify_relations(-3)
    assert relation_lines and all(ok for ok, _ in relation_lines)

    # a small Rademacher run lands near the Thompson graded dimension
    values = dict(pm.rademacher_scaled(1, -3, c_max=200, d_max=5, scale=2))
    assert abs(values[(0, 0)] - 248) < 5.0
    assert abs(values[(4, 0)] - 54000) < 1.0
    assert abs(values[(5, 1)] + 171990) < 1.0

    print("penumbra_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
