"""Command-line front end.

    fekete reproduce <example>
    fekete verify --family F --band B --max-sum S [--expect-violation]
    fekete modulus --space X --eps E[,E...] --samples K --seed R
    fekete limit --family F --N N
    fekete spectral --matrix A.csv --N N

Exit codes: 0 success, 1 property violated, 2 usage/parse error,
3 runtime/generator error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from . import report as _report
from .analysis import (
    limit_diagnostics,
    log_doubling_margin,
    read_matrix_csv,
    rn_margins,
    spectral_radius_demo,
    submultiplicativity_violations,
    theta_margins,
)
from .errors import FeketeError, GeneratorFailure, SpecParseError
from .sequences import (
    incomplete_c,
    incomplete_family,
    nonconvex_family,
    parse_family,
    scaled_basis_family,
    spiral_angle,
    spiral_family,
    uc_witness_family,
    uc_witness_pair,
)
from .spaces import SpaceSpec, modulus_profile, norm, norms, parse_space
from .verify import (
    ConstraintBand,
    Verdict,
    check_subadditivity,
    parse_band,
    subset_uniform_convexity_probe,
)

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3

EXAMPLES = ("spiral2d", "scaled-basis", "uc-witness", "incomplete", "nonconvex-alt")
FORMATS = ("json", "csv", "human")


@dataclass(frozen=True)
class RunConfig:
    command: str
    example: Optional[str] = None
    family: Optional[str] = None
    band: str = "full"
    max_sum: int = 100
    N: int = 200
    tolerance: float = 1e-9
    eps: tuple = (1.0,)
    samples: int = 10_000
    seed: int = 0
    space: Optional[str] = None
    dim: Optional[int] = None
    window: float = 4.0
    matrix: Optional[str] = None
    expect_violation: bool = False
    output: Optional[str] = None
    format: str = "json"

    def to_argv(self) -> list:
        """Inverse of :func:`parse_config` (only non-default values are emitted)."""
        argv = [self.command]
        if self.example is not None:
            argv.append(self.example)
        default = RunConfig(self.command)
        for f in fields(self):
            if f.name in ("command", "example"):
                continue
            val = getattr(self, f.name)
            if val == getattr(default, f.name):
                continue
            flag = _FLAG[f.name]
            if f.name == "expect_violation":
                argv.append(flag)
            elif f.name == "eps":
                argv += [flag, ",".join(repr(float(e)) for e in val)]
            else:
                argv += [flag, repr(val) if isinstance(val, float) else str(val)]
        return argv


_FLAG = {
    "family": "--family", "band": "--band", "max_sum": "--max-sum", "N": "--N",
    "tolerance": "--tolerance", "eps": "--eps", "samples": "--samples", "seed": "--seed",
    "space": "--space", "dim": "--dim", "window": "--window", "matrix": "--matrix",
    "expect_violation": "--expect-violation", "output": "--output", "format": "--format",
}

_COMMAND_KEYS = {
    "reproduce": {"example", "output", "format"},
    "verify": {"family", "band", "max_sum", "tolerance", "expect_violation", "output", "format"},
    "modulus": {"space", "eps", "samples", "seed", "dim", "output", "format"},
    "limit": {"family", "N", "window", "output", "format"},
    "spectral": {"matrix", "N", "seed", "output", "format"},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _eps_list(text):
    try:
        vals = tuple(float(x) for x in str(text).split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty epsilon list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fekete", description="Subadditive vector sequences laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON config file; explicit flags win")
        sp.add_argument("--output", "-o", default=None)
        sp.add_argument("--format", choices=FORMATS, default=None)

    sp = sub.add_parser("reproduce", help="run the verification bundle of one construction")
    sp.add_argument("example", choices=EXAMPLES)
    common(sp)

    sp = sub.add_parser("verify", help="scan subadditivity over a band")
    sp.add_argument("--family", default=None)
    sp.add_argument("--band", default=None)
    sp.add_argument("--max-sum", dest="max_sum", type=int, default=None)
    sp.add_argument("--tolerance", type=float, default=None)
    sp.add_argument("--expect-violation", dest="expect_violation", action="store_true", default=None)
    common(sp)

    sp = sub.add_parser("modulus", help="estimate the modulus of convexity")
    sp.add_argument("--space", default=None)
    sp.add_argument("--eps", type=_eps_list, default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--dim", type=int, default=None)
    common(sp)

    sp = sub.add_parser("limit", help="growth-rate and direction diagnostics")
    sp.add_argument("--family", default=None)
    sp.add_argument("--N", dest="N", type=int, default=None)
    sp.add_argument("--window", type=float, default=None)
    common(sp)

    sp = sub.add_parser("spectral", help="spectral radius via ||A^n||^(1/n)")
    sp.add_argument("--matrix", default=None)
    sp.add_argument("--N", dest="N", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    common(sp)
    return p


def _load_config(path, command):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - _COMMAND_KEYS[command]
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
    if "eps" in data:
        e = data["eps"]
        data["eps"] = tuple(float(x) for x in (e if isinstance(e, list) else [e]))
    return data


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values = {}
    if getattr(ns, "config", None):
        values.update(_load_config(ns.config, ns.command))
    for key in _COMMAND_KEYS[ns.command]:
        val = getattr(ns, key, None)
        if val is not None:
            values[key] = val
    try:
        return RunConfig(command=ns.command, **values)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# reproduce bundles


@dataclass
class Check:
    name: str
    construction: str
    passed: bool
    detail: dict

    def as_dict(self):
        return {"name": self.name, "construction": self.construction,
                "passed": self.passed, "detail": self.detail}


def _bundle_spiral():
    what = "planar spiral v_n = r_n (cos theta_n, sin theta_n), r_n = n + n/sqrt(ln(n+1)), theta_n = (ln n)^(1/4)/100"
    checks = []
    rep = check_subadditivity(spiral_family(), ConstraintBand.ratio(0.5, 2.0), 5000, 1e-12)
    checks.append(Check("band-subadditivity", what, rep.ok,
                        {"band": rep.band, "max_sum": rep.max_sum, "pairs": rep.pairs_checked,
                         "violations": len(rep.violations), "max_margin": rep.max_margin}))
    worst = math.inf
    for n in range(1, 2001):
        worst = min(worst, float(rn_margins(n, np.arange(n, 2 * n + 1)).min()))
    checks.append(Check("radius-inequality", what, worst >= 0,
                        {"n_max": 2000, "min_margin": worst}))
    ns = np.arange(1, 1_000_001)
    gap, bound = theta_margins(ns)
    ok = bool(np.all(gap >= 0) and np.all(bound - gap >= 0))
    checks.append(Check("angle-doubling-bound", what, ok,
                        {"n_max": int(ns[-1]), "min_gap": float(gap.min()),
                         "min_upper_margin": float((bound - gap).min())}))
    ks = range(1, 61)
    thetas = [spiral_angle(2**k) for k in ks]
    closed = [(k * math.log(2.0)) ** 0.25 / 100.0 for k in ks]
    err = max(abs(a - b) / b for a, b in zip(thetas, closed))
    mono = all(b > a for a, b in zip(thetas, thetas[1:]))
    checks.append(Check("dyadic-angle-closed-form", what, err <= 1e-12 and mono,
                        {"k_max": 60, "max_rel_err": err, "strictly_increasing": mono}))
    logm = min(log_doubling_margin(n) for n in range(1, 100_001))
    checks.append(Check("log-doubling", what, logm >= 0, {"n_max": 100_000, "min_margin": logm}))
    d = limit_diagnostics(spiral_family(), 1000)
    expect = 1.0 + math.log(1001.0) ** -0.5
    checks.append(Check("growth-rate", what, abs(d.growth_inf - expect) <= 1e-12 * expect,
                        {"N": 1000, "growth_inf": d.growth_inf, "closed_form": expect,
                         "verdict": d.verdict.value}))
    return checks


def _bundle_scaled_basis():
    what = "v_n = n e_n in the l1 + weighted-l2 norm sum|a_n| + sqrt(sum a_n^2/16^n)"
    fam = scaled_basis_family()
    checks = []
    rep = check_subadditivity(fam, ConstraintBand.full(), 300, 1e-12)
    checks.append(Check("full-subadditivity", what, rep.ok,
                        {"max_sum": 300, "pairs": rep.pairs_checked,
                         "violations": len(rep.violations), "max_margin": rep.max_margin}))
    # n + m + sqrt(n^2/16^n + m^2/16^m) >= n + m + n/4^n >= n + m + (n+m)/4^(n+m), log domain
    ln4 = math.log(4.0)
    ok = True
    for n in range(1, 301):
        for m in range(n, 301 - n):
            a = 0.5 * np.logaddexp(2 * math.log(n) - n * 2 * ln4, 2 * math.log(m) - m * 2 * ln4)
            b = math.log(n) - n * ln4
            c = math.log(n + m) - (n + m) * ln4
            if not (a >= b >= c):
                ok = False
    checks.append(Check("norm-chain", what, ok, {"n_plus_m_max": 300}))
    V = fam.matrix(300)[9:]
    U = V / norms(fam.space, V)[:, None]
    gmin = math.inf
    for i in range(len(U) - 1):
        gmin = min(gmin, float(norms(fam.space, U[i] - U[i + 1:]).min()))
    checks.append(Check("direction-gaps", what, gmin >= 2 - 1e-6,
                        {"n_min": 10, "n_max": 300, "min_gap": gmin}))
    d = limit_diagnostics(fam, 200)
    checks.append(Check("divergence-evidence", what, d.verdict == Verdict.DIVERGENCE,
                        {"N": 200, "verdict": d.verdict.value, "max_gap": d.direction_gap}))
    return checks


def _bundle_uc_witness():
    what = "nested l2-of-l^(k+1) norm with witnesses (e_{2k-1} +- e_{2k}) / 2^(1/(k+1))"
    X = SpaceSpec.nested()
    checks = []
    err = 0.0
    for k in range(1, 51):
        v, w = uc_witness_pair(k)
        target = 2.0 ** (1.0 - 1.0 / (k + 1))
        vf, wf = v.materialize(), w.materialize()
        err = max(err, abs(norm(X, vf) - 1), abs(norm(X, wf) - 1),
                  abs(norm(X, vf + wf) - target), abs(norm(X, vf - wf) - target))
    checks.append(Check("witness-values", what, err <= 1e-12, {"k_max": 50, "max_abs_err": err}))
    for K in (5, 20, 50):
        pts = [x for k in range(1, K + 1) for x in uc_witness_pair(k)]
        est = subset_uniform_convexity_probe(pts, X, 1.0)
        bound = 2.0 - 2.0 ** (1.0 - 1.0 / (K + 1))
        checks.append(Check(f"subset-probe-K{K}", what, est.delta_hat <= bound + 1e-12,
                            {"K": K, "delta_hat": est.delta_hat, "bound": bound}))
    return checks


def _bundle_incomplete():
    what = "eventually-zero sequences under l2, v_{n,m} = c_n / 2^(2^m) (m <= n), c_n = n(1 + 10/ln ln(10n))"
    fam = incomplete_family()
    checks = []
    rep = check_subadditivity(fam, ConstraintBand.full(), 512, 1e-9)
    checks.append(Check("full-subadditivity", what, rep.ok,
                        {"max_sum": 512, "pairs": rep.pairs_checked,
                         "violations": len(rep.violations), "max_margin": rep.max_margin}))
    ratios = [incomplete_c(n) / n for n in range(1, 10_001)]
    ok = all(r > 1 for r in ratios) and all(b < a for a, b in zip(ratios, ratios[1:]))
    checks.append(Check("c-ratio-monotone", what, ok, {"n_max": 10_000}))
    err = 0.0
    for n in (1, 5, 50, 500):
        x = fam.vector(n)
        for m in range(1, min(n, 9) + 1):
            want = incomplete_c(n) / n * 2.0 ** (-(2**m))
            err = max(err, abs(x.coord(m) / n - want) / want)
    checks.append(Check("coordinates", what, err <= 1e-12, {"max_rel_err": err}))
    return checks


def _bundle_nonconvex():
    what = "l1 on R^2 with u = e_1, v = e_2: v_n = n v (n even), n u (n odd)"
    fam = nonconvex_family()
    checks = []
    V = fam.matrix(200)
    tot = norms(fam.space, V)
    worst = 0.0
    for s in range(2, 201):
        n = np.arange(1, s // 2 + 1)
        rhs = norms(fam.space, V[n - 1] + V[s - n - 1])
        worst = max(worst, float(np.max(np.abs(tot[s - 1] - rhs))))
    checks.append(Check("equality", what, worst <= 1e-9, {"max_sum": 200, "max_abs_diff": worst}))
    rep = check_subadditivity(fam, ConstraintBand.full(), 200, 1e-9)
    checks.append(Check("full-subadditivity", what, rep.ok,
                        {"pairs": rep.pairs_checked, "violations": len(rep.violations)}))
    W = V / np.arange(1, 201)[:, None]
    alt = float(norms(fam.space, W[1:] - W[:-1]).min())
    checks.append(Check("no-limit", what, alt >= 2 - 1e-12,
                        {"min_consecutive_gap_of_v_n_over_n": alt}))
    return checks


BUNDLES = {
    "spiral2d": _bundle_spiral,
    "scaled-basis": _bundle_scaled_basis,
    "uc-witness": _bundle_uc_witness,
    "incomplete": _bundle_incomplete,
    "nonconvex-alt": _bundle_nonconvex,
}


# ---------------------------------------------------------------------------
# commands


def _emit(cfg, payload: dict, csv_text: str, human: str):
    if cfg.format == "json":
        text = _report.dumps(payload)
    elif cfg.format == "csv":
        text = csv_text
    else:
        text = human
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_reproduce(cfg: RunConfig) -> int:
    checks = BUNDLES[cfg.example]()
    ok = all(c.passed for c in checks)
    payload = {"example": cfg.example, "ok": ok, "checks": [c.as_dict() for c in checks]}
    csv_text = _report.rows_to_csv(["check", "passed"], [(c.name, c.passed) for c in checks])
    lines = [f"reproduce {cfg.example}: {'PASS' if ok else 'FAIL'}",
             f"  construction: {checks[0].construction}"]
    for c in checks:
        lines.append(f"  [{'pass' if c.passed else 'FAIL'}] {c.name}: "
                     + ", ".join(f"{k}={v}" for k, v in c.detail.items()))
    _emit(cfg, payload, csv_text, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_VIOLATED


def cmd_verify(cfg: RunConfig) -> int:
    if not cfg.family:
        raise UsageError("verify needs --family")
    fam = parse_family(cfg.family)
    band = parse_band(cfg.band)
    rep = check_subadditivity(fam, band, cfg.max_sum, cfg.tolerance)
    human = rep.summary() + "\n"
    for v in rep.violations[:20]:
        human += f"  n={v.n} m={v.m} lhs={v.lhs:.17g} rhs={v.rhs:.17g} margin={v.margin:.3e}\n"
    _emit(cfg, rep.as_dict(), rep.to_csv(), human)
    if cfg.expect_violation:
        return EXIT_OK if rep.violations else EXIT_VIOLATED
    return EXIT_OK if rep.ok else EXIT_VIOLATED


def cmd_modulus(cfg: RunConfig) -> int:
    if not cfg.space:
        raise UsageError("modulus needs --space")
    space = parse_space(cfg.space)
    ests = modulus_profile(space, cfg.eps, cfg.samples, cfg.seed, dim=cfg.dim)
    payload = {"space": str(space), "samples": cfg.samples, "seed": cfg.seed,
               "estimates": [e.as_dict() for e in ests]}
    csv_text = _report.rows_to_csv(["epsilon", "delta_hat", "gamma"],
                                   [(e.epsilon, e.delta_hat, e.gamma) for e in ests])
    human = "".join(f"{space} eps={e.epsilon:g}: delta_hat={e.delta_hat:.10f} gamma={e.gamma:.10f}\n"
                    for e in ests)
    _emit(cfg, payload, csv_text, human)
    return EXIT_OK


def cmd_limit(cfg: RunConfig) -> int:
    if not cfg.family:
        raise UsageError("limit needs --family")
    d = limit_diagnostics(parse_family(cfg.family), cfg.N, cfg.window)
    csv_text = _report.rows_to_csv(["n_lo", "n_hi", "max_gap"], d.window_gaps)
    human = (f"{d.family} N={d.N}: growth inf={d.growth_inf:.12g} (n={d.growth_argmin}), "
             f"trailing={d.growth_trailing:.12g}, max direction gap={d.direction_gap:.6g}, "
             f"verdict={d.verdict.value}\n")
    _emit(cfg, d.as_dict(), csv_text, human)
    return EXIT_OK


def cmd_spectral(cfg: RunConfig) -> int:
    if not cfg.matrix:
        raise UsageError("spectral needs --matrix")
    try:
        A = read_matrix_csv(cfg.matrix)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix {cfg.matrix}: {exc}") from exc
    rep = spectral_radius_demo(A, cfg.N, cfg.seed)
    bad = submultiplicativity_violations(rep)
    payload = rep.as_dict()
    payload["submultiplicativity_violations"] = [list(p) for p in bad]
    csv_text = _report.rows_to_csv(
        ["n", "log_norm", "root", "running_inf"],
        [(i + 1, rep.log_norms[i], rep.roots[i], rep.running_inf[i]) for i in range(rep.N)],
    )
    human = (f"spectral N={rep.N}: running inf {rep.running_inf[-1]:.15g}, "
             f"nilpotent at {rep.nilpotent_at}, submultiplicativity violations {len(bad)}\n")
    _emit(cfg, payload, csv_text, human)
    return EXIT_OK if not bad else EXIT_VIOLATED


COMMANDS = {
    "reproduce": cmd_reproduce,
    "verify": cmd_verify,
    "modulus": cmd_modulus,
    "limit": cmd_limit,
    "spectral": cmd_spectral,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        if cfg.format not in FORMATS:
            raise UsageError(f"unknown format {cfg.format!r}")
        return COMMANDS[cfg.command](cfg)
    except (UsageError, SpecParseError) as exc:
        print(f"fekete: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeneratorFailure as exc:
        print(f"fekete: generator failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (FeketeError, ValueError, ArithmeticError) as exc:
        print(f"fekete: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
