"""Acceptance criteria, one test each, run through the command-line layer.

Each test prints ``criterion <k>: PASS|FAIL`` with the failing checks.  The
lines are also collected into the pytest terminal summary.  Run standalone
with ``python tests/test_acceptance.py``.
"""

import sys
import tempfile
from pathlib import Path

import pytest

from latticepdo.cli import main
from latticepdo.io import read_table

H_LIST_5 = "0.125,0.0625,0.03125,0.015625,0.0078125"

CRITERIA = {
    1: ("transform pair", "transforms",
        ["N_list=4,8,16,32,64", "tol=1e-12", "max_seconds=1"]),
    2: ("multiplier identities", "multipliers", ["tol=1e-12"]),
    3: ("projector algebra", "project",
        ["realization=spatial", "N=32", "tol=1e-12", "tol_complement=1e-14"]),
    4: ("kernel-form projector", "project",
        ["realization=kernel_quadrature", "N=32", "eps_list=1e-1,1e-2,1e-3", "tol_kernel=1e-3",
         "max_seconds=60"]),
    5: ("exp-split factorization", "factorize-exp",
        ["N=32", "n_seeds=20", "tol_reconstruction=1e-12", "tol_support=1e-10",
         "tol_homomorphism=1e-11"]),
    6: ("order certificates", "certify-symbol",
        ["weight_mode=modulus_sum", f"h_list={H_LIST_5}", "max_drift=0.10"]),
    7: ("unique quadrant solve", "solve-unique",
        ["tol=1e-8", "oracle_M=8,16,32", "tol_oracle=1e-4", "max_seconds=30"]),
    8: ("general solution", "general-solution",
        ["n_list=1,2", "trials=3", "tol=1e-8", "min_difference=1e-3", "max_drift=0.25",
         f"h_list={H_LIST_5}"]),
    9: ("Dirichlet problem", "solve-dirichlet", ["tol_system=1e-10", "tol_trace=1e-6"]),
    10: ("nonlocal problem", "solve-nonlocal",
         ["tol_transformed=1e-12", "tol_spatial=1e-8", "tol_residual=1e-8", "max_drift=0.25",
          f"h_list={H_LIST_5}"]),
    11: ("discrete-continuous convergence", "convergence",
         ["factor=separable(1,2)", "h_list=0.125,0.0625,0.03125,0.015625", "min_beta=1", "min_r2=0.95", "tol_band=1e-8",
          "tail_factor=39.47841760435743", "max_seconds=600"]),
    12: ("determinism", "determinism", []),
}

RESULTS = {}


def run_criterion(k, root: Path):
    label, command, overrides = CRITERIA[k]
    out = root / f"criterion_{k:02d}"
    args = [command, "--out", str(out), "--seed", "0"]
    for o in overrides:
        args += ["--override", o]
    code = main(args)
    checks = read_table(out / "checks.csv") if (out / "checks.csv").exists() else []
    failed = [c["check"] for c in checks if c["passed"] != "true"]
    ok = code == 0 and not failed and bool(checks)
    detail = "" if ok else f" exit={code} failed={','.join(failed) or '-'}"
    if not ok and (out / "error.txt").exists():
        detail += f" ({(out / 'error.txt').read_text().strip()[:160]})"
    line = f"criterion {k:2d} [{label}]: {'PASS' if ok else 'FAIL'}{detail}"
    RESULTS[k] = line
    print(line)
    return ok, code, checks


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, tmp_path):
    ok, code, checks = run_criterion(k, tmp_path)
    assert checks, "no checks recorded"
    assert code == 0, RESULTS[k]
    assert ok, RESULTS[k]


if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        results = [run_criterion(k, Path(tmp))[0] for k in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
