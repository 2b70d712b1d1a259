"""Command-line front end: ``regtrace {identities,spectrum,trace,equiconv}``.

Exit codes: 0 all checks passed, 1 a numeric check failed, 2 invalid input
or irregular boundary conditions.
"""
from __future__ import annotations

import argparse
import ast
import csv
import hashlib
import json
import math
import operator
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, bc_model
from .bc_model import BoundaryConditionError, BoundaryConditionSet, classify, normalize, parse_bc
from .coeffmat import (IrregularBoundaryError, abel_sum_PQ, birkhoff_regular, build_structure,
                       kappa_traces, rank_one_identity_residual, series_term,
                       series_term_identity, special_case_coefficients, sumcoeff_residual,
                       sumcoeff_target, trace_coefficients)
from .equiconv import default_arc, equiconv_experiment, prop_bound_check, prop_rl_check
from .funcspace import ProfileError, profile_from_config
from .greenfn import green0_decay_scan
from .spectrum import (LocalizationError, OperatorSpec, RadiiPlan, admissible_radii,
                       eig_operator, eig_unperturbed)
from .trace_engine import trace_experiment

DEFAULTS = {
    "nmax": 30,
    "M": 128,
    "radii": 6,
    "trace_radii": None,
    "equiconv_grid": 21,
    "equiconv_margin": 1e-3,
    "scan_margin": 0.2,
    "drift_tol": 1e-6,
    "drift_refine": 1.5,
    "tail": 5,
    "identity_tol": 1e-10,
    "abel_r": 0.999,
    "abel_K": 100000,
    "abel_tol": 1e-2,
    "spectrum_tol": 1e-6,
    "trace_tol": 5e-2,
    "series_checks": 4,
    "appendix": False,
    "prop_R": [1, 10, 100, 1000],
    "prop_rl_R": [10, 100, 1000],
    "prop_profiles": [{"kind": "constant", "params": {"value": 1}}],
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "e": math.e}


def eval_number(value):
    """Numbers pass through; strings such as ``"2*pi/3"`` are evaluated safely."""
    if isinstance(value, (int, float)):
        return value
    if not isinstance(value, str):
        raise ConfigError(f"expected a number, got {value!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ConfigError(f"unsupported expression {value!r}")

    try:
        return float(ev(ast.parse(value, mode="eval")))
    except SyntaxError as exc:
        raise ConfigError(f"bad numeric expression {value!r}") from exc


def _numbers(obj):
    """Recursively evaluate string expressions inside lists and dicts."""
    if isinstance(obj, dict):
        return {k: (v if k in ("kind", "func", "path", "preset", "interp") else _numbers(v))
                for k, v in obj.items()}
    if isinstance(obj, list):
        return [_numbers(v) for v in obj]
    if isinstance(obj, str):
        return eval_number(obj)
    return obj


def _complex(v):
    if isinstance(v, list):
        return complex(v[0], v[1])
    return complex(v)


def bc_from_config(entry: dict) -> BoundaryConditionSet:
    entry = _numbers(entry)
    preset = entry.get("preset")
    if preset is None:
        return parse_bc(entry)
    a, b = entry.get("interval", [0.0, math.pi])
    if preset == "dirichlet":
        return bc_model.dirichlet(a, b)
    if preset == "neumann":
        return bc_model.neumann(a, b)
    if preset == "periodic":
        return bc_model.periodic(int(entry.get("n", 2)), a, b)
    if preset == "quasi_periodic":
        return bc_model.quasi_periodic(int(entry["n"]), _complex(entry["theta"]), a, b)
    if preset == "separated":
        return bc_model.separated(int(entry["n"]), a, b, entry["left"], entry["right"])
    raise ConfigError(f"unknown boundary-condition preset {preset!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    bcs: BoundaryConditionSet
    op: OperatorSpec
    options: dict
    raw: dict
    sha256: str
    base_dir: Path


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_bytes()
        raw = json.loads(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "bc" not in raw:
        raise ConfigError("config must be an object with a 'bc' entry")
    base = path.parent
    bcs = bc_from_config(raw["bc"])
    opts = dict(DEFAULTS)
    unknown = set(raw.get("options", {})) - set(DEFAULTS) - {"equiconv_radii"}
    if unknown:
        raise ConfigError(f"unknown options: {sorted(unknown)}")
    opts.update(_numbers(raw.get("options", {})))
    opts.update({k: v for k, v in (overrides or {}).items() if v is not None})
    p_entries = _numbers(raw.get("p", []) or [])
    if len(p_entries) > bcs.n - 1:
        raise ConfigError(f"at most n-1 = {bcs.n - 1} lower-order coefficients")
    p = tuple(profile_from_config(e, bcs.a, bcs.b, base) for e in p_entries)
    q = profile_from_config(_numbers(raw.get("q")), bcs.a, bcs.b, base) if raw.get("q") else None
    op = OperatorSpec(bcs, p, q)
    _validate(opts, bcs)
    return ExperimentConfig(bcs, op, opts, raw, hashlib.sha256(text).hexdigest(), base)


def _validate(opts, bcs):
    if int(opts["nmax"]) < 1 or int(opts["nmax"]) > 200:
        raise ConfigError("nmax must lie in [1, 200]")
    if int(opts["M"]) < 4 * bcs.n:
        raise ConfigError(f"grid size M must be at least 4n = {4 * bcs.n}")
    if int(opts["radii"]) < 1:
        raise ConfigError("radii count must be positive")
    if not 0 < float(opts["abel_r"]) < 1:
        raise ConfigError("abel_r must lie in (0, 1)")


# ---------------------------------------------------------------- output


def _c(v):
    v = complex(v)
    return [float(v.real), float(v.imag)]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return _c(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_json(path: Path, data: dict):
    path.write_text(json.dumps(_clean(data), sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in r])


def _envelope(cfg: ExperimentConfig, command: str, seed: int) -> dict:
    return {
        "command": command,
        "version": __version__,
        "config_sha256": cfg.sha256,
        "seed": seed,
        "tolerances": {k: cfg.options[k] for k in
                       ("identity_tol", "abel_tol", "spectrum_tol", "trace_tol", "drift_tol")},
        "options": cfg.options,
        "boundary_conditions": cfg.bcs.to_dict(),
    }


# ---------------------------------------------------------------- commands


def cmd_identities(cfg: ExperimentConfig, out: Path, seed: int) -> int:
    bcs = cfg.bcs
    o = cfg.options
    reg = birkhoff_regular(bcs)
    report = _envelope(cfg, "identities", seed)
    report["regularity_ratios"] = list(reg.ratios)
    if not reg:
        report["status"] = "not Birkhoff regular"
        write_json(out / "report.json", report)
        print("error: not Birkhoff regular", file=sys.stderr)
        return 2
    tol = float(o["identity_tol"])
    checks = {}
    sm = build_structure(bcs)
    checks["sumcoeff"] = {}
    for kappa in (1, 2):
        tp, tq = kappa_traces(sm, kappa)
        checks["sumcoeff"][f"kappa{kappa}"] = {
            "trace_P": tp, "trace_Q": tq, "sum": tp + tq,
            "target": sumcoeff_target(bcs.d, bcs.n),
            "residual": sumcoeff_residual(sm, kappa)}
    coef = trace_coefficients(sm)
    cls = classify(bcs)
    report["class"] = cls.tag
    report["d"] = list(bcs.d)
    report["coefficients"] = {"c_a": coef.c_a, "c_b": coef.c_b}
    residuals = [checks["sumcoeff"][k]["residual"] for k in ("kappa1", "kappa2")]
    if cls.tag != "general":
        sc = special_case_coefficients(bcs, cls)
        diff = max(abs(sc.c_a - coef.c_a), abs(sc.c_b - coef.c_b))
        checks["special_case"] = {"c_a": sc.c_a, "c_b": sc.c_b, "difference": diff}
        residuals.append(diff)
    rng = np.random.default_rng(seed)
    ks = sorted({int(k) for k in rng.integers(0, 4 * bcs.n, size=int(o["series_checks"]))})
    series = []
    for kappa in (1, 2):
        for k in ks:
            lhs = series_term(sm, kappa, k)
            rhs = series_term_identity(sm, kappa, k)
            res = max(abs(lhs[0] - rhs[0]), abs(lhs[1] - rhs[1]))
            r1 = rank_one_identity_residual(sm, kappa, k)
            series.append({"kappa": kappa, "k": k, "residual": res, "rank_one_residual": r1})
            residuals.extend([res, r1])
    checks["series_terms"] = series
    abel = []
    abel_ok = True
    for kappa in (1, 2):
        P, Q = abel_sum_PQ(sm, kappa, float(o["abel_r"]), int(o["abel_K"]))
        err = max(float(np.abs(P - sm.Pmat[kappa - 1]).max()),
                  float(np.abs(Q - sm.Qmat[kappa - 1]).max()))
        abel.append({"kappa": kappa, "max_entry_error": err})
        abel_ok &= err < float(o["abel_tol"])
    checks["abel"] = abel
    report["checks"] = checks
    ok = all(r < tol for r in residuals) and abel_ok
    report["status"] = "pass" if ok else "fail"
    write_json(out / "report.json", report)
    return 0 if ok else 1


def _spectrum_rows(res):
    return [(i, repr(re), repr(im), m) for i, re, im, m in res.rows()]


def cmd_spectrum(cfg: ExperimentConfig, out: Path, seed: int) -> int:
    o = cfg.options
    report = _envelope(cfg, "spectrum", seed)
    N, M = int(o["nmax"]), int(o["M"])
    spec0 = eig_unperturbed(cfg.bcs, N)
    write_csv(out / "spectrum_unperturbed.csv", ["index", "re", "im", "multiplicity"],
              _spectrum_rows(spec0))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lam = eig_operator(cfg.op.with_q(None), N, M, float(o["drift_tol"]), float(o["drift_refine"]))
        write_csv(out / "spectrum_L.csv", ["index", "re", "im", "multiplicity"],
                  _spectrum_rows(lam))
        mu = None
        if cfg.op.q is not None:
            mu = eig_operator(cfg.op, N, M, float(o["drift_tol"]), float(o["drift_refine"]))
            write_csv(out / "spectrum_perturbed.csv", ["index", "re", "im", "multiplicity"],
                      _spectrum_rows(mu))
    report["warnings"] = sorted({str(w.message) for w in caught})
    report["counts"] = {"unperturbed": spec0.count, "L": lam.count,
                        "perturbed": None if mu is None else mu.count}
    report["zero_multiplicity"] = spec0.resolution.get("zero_multiplicity", 0)
    ok = True
    if not cfg.op.has_lower_terms:
        k = min(spec0.count, lam.count, 15)
        a, b = spec0.expanded()[:k], lam.expanded()[:k]
        dev = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))) if k else 0.0
        report["char_det_vs_collocation"] = {"compared": k, "max_relative_deviation": dev}
        ok = dev < float(o["spectrum_tol"])
    report["status"] = "pass" if ok else "fail"
    write_json(out / "report.json", report)
    return 0 if ok else 1


def cmd_trace(cfg: ExperimentConfig, out: Path, seed: int) -> int:
    o = cfg.options
    if cfg.op.q is None:
        raise ConfigError("trace command needs a perturbation 'q'")
    report = _envelope(cfg, "trace", seed)
    bcs_n = normalize(cfg.bcs)
    op = OperatorSpec(bcs_n, cfg.op.p, None)
    tr = trace_experiment(op, cfg.op.q, int(o["nmax"]), int(o["M"]), o["trace_radii"],
                          float(o["drift_tol"]), int(o["tail"]))
    report["trace"] = tr.to_dict()
    report["coefficients"] = dict(zip(("c_a", "c_b"), trace_coefficients(bcs_n).as_tuple()))
    write_csv(out / "trace.csv", ["R_l", "re_S_l", "im_S_l"], tr.rows())
    ok = tr.deviation < float(o["trace_tol"])
    report["status"] = "pass" if ok else "fail"
    write_json(out / "report.json", report)
    return 0 if ok else 1


def cmd_equiconv(cfg: ExperimentConfig, out: Path, seed: int) -> int:
    o = cfg.options
    report = _envelope(cfg, "equiconv", seed)
    bcs = cfg.bcs
    if o.get("equiconv_radii"):
        radii = [float(r) for r in o["equiconv_radii"]]
        spec0 = eig_unperturbed(bcs, max(int(o["nmax"]), 1))
        mods = np.abs(spec0.expanded()) ** (1.0 / bcs.n)
        plan = RadiiPlan(tuple(radii), tuple(float(np.min(np.abs(mods - R))) for R in radii))
    else:
        spec0 = eig_unperturbed(bcs, max(int(o["nmax"]), int(o["radii"]) + 2))
        plan = admissible_radii(spec0, int(o["radii"]))
    diag = equiconv_experiment(bcs, cfg.op, plan, int(o["equiconv_grid"]),
                               None, float(o["equiconv_margin"]))
    report["equiconv"] = diag.to_dict()
    write_csv(out / "equiconv.csv", ["R", "equiconv_value", "phi_integral"], diag.rows())
    scan = green0_decay_scan(bcs, float(o["scan_margin"]), plan.radii)
    write_csv(out / "green0_scan.csv", ["R", "max_CJ", "max_global"], scan.rows())
    report["green0_scan"] = {"max_compact": scan.max_compact, "max_global": scan.max_global}
    if cfg.op.has_lower_terms or cfg.op.q is not None:
        ok = diag.trend == 1.0 and not diag.flags
    else:
        ok = all(v == 0.0 for v in diag.values)
    if o["appendix"]:
        Rb = [float(r) for r in o["prop_R"]]
        vals, top = prop_bound_check(bcs.a, bcs.b, bcs.n, Rb)
        write_csv(out / "prop_bound.csv", ["R", "phi_integral"], list(zip(Rb, vals)))
        bound_ok = top <= 2 * vals[0]
        Rr = [float(r) for r in o["prop_rl_R"]]
        rl = []
        rl_ok = True
        for entry in o["prop_profiles"]:
            prof = profile_from_config(entry, bcs.a, bcs.b, cfg.base_dir)
            sup = prop_rl_check(prof, 1.0, 0.0, default_arc(), Rr)
            rl.append({"profile": prof.describe(), "sup": list(sup)})
            rl_ok &= bool(np.all(np.diff(sup) < 0))
        write_csv(out / "prop_rl.csv", ["R"] + [f"profile_{i}" for i in range(len(rl))],
                  [[R] + [r["sup"][i] for r in rl] for i, R in enumerate(Rr)])
        report["appendix"] = {"prop_bound": {"R": Rb, "values": vals, "bounded": bound_ok},
                              "prop_rl": {"R": Rr, "profiles": rl, "decreasing": rl_ok}}
        ok = ok and bound_ok and rl_ok
    report["status"] = "pass" if ok else "fail"
    write_json(out / "report.json", report)
    return 0 if ok else 1


COMMANDS = {"identities": cmd_identities, "spectrum": cmd_spectrum, "trace": cmd_trace,
            "equiconv": cmd_equiconv}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regtrace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"regtrace {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment description")
        sp.add_argument("--out", default="regtrace-out", help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--nmax", type=int, help="number of eigenvalues")
        sp.add_argument("--grid", type=int, help="collocation grid size M")
        sp.add_argument("--radii", type=int, help="number of contour radii")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"nmax": args.nmax, "M": args.grid, "radii": args.radii}
    try:
        cfg = load_config(args.config, overrides)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.seed)
    except IrregularBoundaryError:
        print("error: not Birkhoff regular", file=sys.stderr)
        return 2
    except (ConfigError, BoundaryConditionError, ProfileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LocalizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
