"""Command-line entry point.

Every subcommand reads an optional INI file (``[experiment]`` section),
applies ``--override key=value`` pairs on top, runs, and writes CSV tables
plus ``checks.csv`` into ``--out``.

Exit codes: 0 success, 2 precondition failure, 3 numerical failure or a
failed check, 64 unknown command, 65 invalid configuration.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import logging
import sys
import tempfile
import traceback
from pathlib import Path

from .continuum import catalog_factor
from .exceptions import NumericalError, PreconditionError
from .experiments import RUNNERS, Checks
from .io import write_table
from .projector import REALIZATIONS
from .sobolev import WEIGHT_MODES
from .symbols import CATALOG_SYMBOLS, catalog_names

log = logging.getLogger("latticepdo")

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64
EXIT_CONFIG = 65

_COMMON = {"seed": "0", "conv": "closed", "weight_mode": "modulus_sum"}

DEFAULTS = {
    "transforms": {"h": "0.125", "N_list": "4,8,16,32,64", "tol": "1e-12", "max_seconds": "1"},
    "multipliers": {"h": "0.125", "N": "32", "tol": "1e-12"},
    "project": {
        "h": "0.125", "N": "32", "realization": "spatial", "input": "exp", "input_rate": "2", "input_width": "3",
        "eps_list": "1e-1,1e-2,1e-3", "tol": "1e-12", "tol_complement": "1e-14", "tol_kernel": "1e-3", "tol_extrapolated": "1e-5",
        "max_seconds": "60",
    },
    "factorize-exp": {
        "h": "0.125", "N": "32", "n_seeds": "20", "scale": "0.1", "width": "2.0",
        "tol_reconstruction": "1e-12", "tol_support": "1e-10", "tol_homomorphism": "1e-11",
    },
    "certify-symbol": {
        "N": "32", "h_list": "0.125,0.0625,0.03125,0.015625,0.0078125",
        "symbols": "identity;exp_split(0);plus(1,1);plus(8,1);product(exp_split(0),plus(8,1))",
        "max_drift": "0.10",
    },
    "solve-unique": {
        "h": "0.125", "N": "64", "symbol": "exp_split(0,0.1,0.8)", "rate": "0.5",
        "tol": "1e-8", "oracle_M": "8,16,32", "tol_oracle": "1e-4", "max_seconds": "30",
    },
    "oracle-compare": {
        "h": "0.125", "N": "64", "symbol": "exp_split(0,0.1,0.8)", "rate": "0.5",
        "oracle_M": "8,16,32", "tol_apply": "1e-10",
    },
    "general-solution": {
        "half_length": "8", "h_list": "0.125,0.0625,0.03125,0.015625,0.0078125",
        "symbol": "plus(6,{n})", "n_list": "1,2", "trials": "3", "qn_c": "6", "data_width": "1",
        "stencil": "multiplier", "tol": "1e-8", "max_drift": "0.25", "min_difference": "1e-3",
    },
    "solve-dirichlet": {
        "half_length": "4", "h": "0.125", "symbol": "product(exp_smooth(0.5,0.5,0.25),plus(12,1))",
        "data_width": "0.5", "oversample": "1", "tol_system": "1e-10", "tol_trace": "1e-6",
    },
    "solve-nonlocal": {
        "half_length": "4", "h_list": "0.125,0.0625,0.03125,0.015625,0.0078125",
        "symbol": "product(exp_smooth(0.5,0.5,0.25),plus(12,1))", "data": "fixed",
        "data_width": "0.5", "zero_mean": "true", "tol_transformed": "1e-12", "tol_spatial": "1e-8",
        "tol_residual": "1e-8", "tol_cross": "1e-10", "max_drift": "0.25",
    },
    "convergence": {
        "factor": "separable(1,2)", "data": "halfline", "sigma": "0.5", "band_sigma": "0.4",
        "half_length": "8", "h_list": "0.125,0.0625,0.03125,0.015625",
        "min_beta": "1.0", "min_r2": "0.95", "tol_band": "1e-8", "tail_factor": "39.47841760435743",
        "max_seconds": "600",
    },
}

DEFAULTS["determinism"] = {
    "commands": "transforms,multipliers,project,factorize-exp,certify-symbol,solve-unique,solve-dirichlet",
}

HELP = {
    "determinism": "run commands twice and compare their CSV files byte for byte",
    "transforms": "round-trip and Parseval checks of the lattice transforms",
    "multipliers": "difference operators against their Fourier multipliers",
    "project": "quadrant projector (spatial or kernel-quadrature realization)",
    "factorize-exp": "exponential two-quadrant factorization on seeded symbols",
    "certify-symbol": "order certificates (c1, c2) across a mesh sweep",
    "solve-unique": "unique quadrant solve with manufactured and oracle checks",
    "oracle-compare": "dense convolution-matrix reference on growing windows",
    "general-solution": "general solution for index - s = n + delta, n >= 1",
    "solve-dirichlet": "Dirichlet problem through the layer-spectrum system",
    "solve-nonlocal": "nonlocal problem with zero-mean half-line data",
    "convergence": "lattice versus continuous solution as h -> 0",
}


class ConfigError(Exception):
    pass


class ExperimentConfig:
    """String-valued settings with typed accessors."""

    def __init__(self, values: dict):
        self.values = dict(values)

    def has(self, key):
        return key in self.values and self.values[key] != ""

    def _get(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise ConfigError(f"missing setting {key!r}") from None

    def _convert(self, key, fn):
        raw = self._get(key)
        try:
            return fn(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"setting {key}={raw!r}: {exc}") from None

    def str(self, key):
        return self._get(key)

    def float(self, key):
        return self._convert(key, float)

    def int(self, key):
        return self._convert(key, int)

    def bool(self, key):
        def parse(v):
            low = v.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError("not a boolean")
        return self._convert(key, parse)

    def floats(self, key):
        return self._convert(key, lambda v: [float(x) for x in v.split(",") if x.strip()])

    def ints(self, key):
        return self._convert(key, lambda v: [int(x) for x in v.split(",") if x.strip()])

    def strs(self, key, sep=","):
        return [x.strip() for x in self._get(key).split(sep) if x.strip()]


Config = ExperimentConfig

_CHOICES = {
    "conv": ("closed", "open"),
    "weight_mode": WEIGHT_MODES,
    "realization": REALIZATIONS,
    "stencil": ("multiplier", "forward"),
    "input": ("exp", "gaussian", "zero"),
}
_DATA_CHOICES = {"solve-nonlocal": ("fixed", "random"), "convergence": ("halfline", "bandlimited")}
_TEXT_KEYS = {"symbol", "symbols", "factor", "data", "commands"} | set(_CHOICES)


def validate_config(command, cfg: ExperimentConfig):
    """Reject bad names and out-of-range numbers before anything is computed."""
    v = cfg.values
    for key, allowed in _CHOICES.items():
        if key in v and v[key] not in allowed:
            raise ConfigError(f"{key}={v[key]!r}; expected one of {', '.join(allowed)}")
    if "data" in v and command in _DATA_CHOICES and v["data"] not in _DATA_CHOICES[command]:
        raise ConfigError(f"data={v['data']!r}; expected one of {', '.join(_DATA_CHOICES[command])}")
    exprs = []
    if "symbol" in v:
        exprs.append(v["symbol"].replace("{n}", "1"))
    if "symbols" in v:
        exprs.extend(cfg.strs("symbols", sep=";"))
    for expr in exprs:
        try:
            names = catalog_names(expr)
        except PreconditionError as exc:
            raise ConfigError(str(exc)) from None
        bad = [n for n in names if n not in CATALOG_SYMBOLS]
        if bad:
            raise ConfigError(f"unknown catalog symbol {bad[0]!r} in {expr!r}")
    if "factor" in v:
        try:
            catalog_factor(v["factor"])
        except PreconditionError as exc:
            raise ConfigError(str(exc)) from None
    if "commands" in v:
        bad = [c for c in cfg.strs("commands") if c not in RUNNERS]
        if bad:
            raise ConfigError(f"unknown command {bad[0]!r} in commands")
    # every remaining setting is numeric (a number or a comma list of numbers)
    for key, raw in v.items():
        if key in _TEXT_KEYS:
            continue
        if key == "zero_mean":
            cfg.bool(key)
            continue
        if key in ("seed", "N", "n_seeds", "trials", "oversample") or key.endswith("_M") or key in ("N_list", "n_list"):
            nums = cfg.ints(key)
            if key != "seed" and any(x < 1 for x in nums):
                raise ConfigError(f"{key} must be positive integers, got {raw!r}")
            continue
        nums = cfg.floats(key)
        if key in ("h", "h_list", "half_length", "sigma", "band_sigma", "max_seconds", "eps_list") or key.startswith("tol"):
            if not nums or any(not x > 0 for x in nums):
                raise ConfigError(f"{key} must be positive, got {raw!r}")
    return cfg


def load_config(command, path=None, overrides=(), seed=None) -> ExperimentConfig:
    values = dict(_COMMON)
    values.update(DEFAULTS[command])
    known = set(values) | {"N", "s", "half_length", "h"}
    if path is not None:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            read = cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        if not cp.has_section("experiment"):
            raise ConfigError(f"{path} has no [experiment] section")
        values.update(cp["experiment"])
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    if seed is not None:
        values["seed"] = str(seed)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown settings for {command}: {', '.join(sorted(unknown))}")
    return validate_config(command, ExperimentConfig(values))


def run_determinism(cfg, out, checks):
    """Each listed command runs twice into fresh directories with its defaults and ``seed``."""
    rows = []
    for command in cfg.strs("commands"):
        if command not in RUNNERS:
            raise ConfigError(f"determinism: unknown command {command!r}")
        sub = load_config(command, overrides=[f"seed={cfg.str('seed')}"])
        digests = []
        with tempfile.TemporaryDirectory() as tmp:
            for rep in (0, 1):
                d = Path(tmp) / str(rep)
                d.mkdir()
                try:
                    RUNNERS[command](sub, d, Checks())
                except PreconditionError:
                    pass  # the files written before the failure are still compared
                digests.append({f.name: hashlib.sha256(f.read_bytes()).hexdigest()
                                for f in sorted(d.glob("*.csv"))})
        same = bool(digests[0]) and digests[0] == digests[1]
        for name, dig in digests[0].items():
            rows.append([command, name, dig, dig == digests[1].get(name)])
        checks.add(f"identical[{command}]", same, True, "is")
    write_table(out / "determinism.csv", ["command", "file", "sha256", "identical"], rows)


ALL_COMMANDS = {**RUNNERS, "determinism": run_determinism}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latticepdo", description="Lattice quadrant solvers and checks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", metavar="command")
    for name in ALL_COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="INI file with an [experiment] section")
        sp.add_argument("--out", default=f"results/{name}", help="output directory")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    return p


def _write_error(out: Path, exc: BaseException):
    out.mkdir(parents=True, exist_ok=True)
    (out / "error.txt").write_text(f"{type(exc).__name__}: {exc}\n")


def run(command, config: ExperimentConfig, out) -> int:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "config.csv", ["key", "value"], sorted(config.values.items()))
    checks = Checks()
    try:
        ALL_COMMANDS[command](config, out, checks)
    except ConfigError as exc:
        _write_error(out, exc)
        log.error("%s", exc)
        return EXIT_CONFIG
    except PreconditionError as exc:
        checks.write(out)
        _write_error(out, exc)
        log.error("precondition: %s", exc)
        return EXIT_PRECONDITION
    except (NumericalError, ArithmeticError, FloatingPointError) as exc:
        checks.write(out)
        _write_error(out, exc)
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    checks.write(out)
    failed = [c for c in checks.items if not c.passed]
    for c in checks.items:
        log.info("%-40s %s", c.name, "pass" if c.passed else "FAIL")
    if failed:
        _write_error(out, NumericalError("failed checks: " + ", ".join(c.name for c in failed)))
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    if command is not None and command not in ALL_COMMANDS:
        print(f"unknown command {command!r}; choose from {', '.join(ALL_COMMANDS)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.command, args.config, args.override, args.seed)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        _write_error(Path(args.out), exc)
        return EXIT_CONFIG
    try:
        return run(args.command, cfg, args.out)
    except Exception as exc:  # noqa: BLE001 - unexpected bug: report and fail loudly
        _write_error(Path(args.out), exc)
        traceback.print_exc()
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
