"""Command line front end.

Exit codes: 0 success, 2 usage / parse / parameter error, 3 a constructed
state failed validation.  Verdicts are data: ``check`` exits 0 whatever
they say.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import analysis, criteria, statefile
from .linops import Operator, hermitian_eigenvalues, von_neumann_entropy
from .states import (
    HADAMARD_ANGLES,
    ClassParams,
    StateValidationError,
    UnitaryAngles,
    add_white_noise,
    class_c_state,
    fourier_unitary,
    hadamard,
    lambda_tilde,
    qubit_unitary,
    rho_h_flag_form,
    spider_y,
    xy_from_unitary,
)

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION = 0, 2, 3
CLASSES = ("rho_U", "tilde", "spider_y", "flag_form")
UNITARIES = ("hadamard", "fourier", "identity", "angles")


class UsageError(Exception):
    pass


def _angles(text: str | None) -> UnitaryAngles:
    if text is None:
        return HADAMARD_ANGLES
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad angles {text!r}: {exc}") from exc
    if len(vals) != 4:
        raise UsageError(f"need four comma-separated angles, got {text!r}")
    return UnitaryAngles(*vals)


def make_unitary(name: str, d: int, angles: str | None = None) -> np.ndarray:
    if name == "hadamard":
        if d != 2:
            raise UsageError("the Hadamard generator needs d = 2")
        return hadamard().data
    if name == "fourier":
        return fourier_unitary(d).data
    if name == "identity":
        return np.eye(d, dtype=complex)
    if name == "angles":
        if d != 2:
            raise UsageError("angle-parametrized generators need d = 2")
        return qubit_unitary(_angles(angles)).data
    raise UsageError(f"unknown unitary {name!r}")


def _params_for(cls: str, d: int, norm: float, p, alpha, beta) -> ClassParams:
    if cls == "tilde":
        for name, v in (("alpha", alpha), ("beta", beta)):
            if v is not None and v != 1:
                raise UsageError(f"the tilde class fixes {name} = 1")
        alpha = beta = 1.0
    p = lambda_tilde(norm) if p is None else p
    return ClassParams(d, p, 1.0 if alpha is None else alpha, 1.0 if beta is None else beta)


def build_state(args) -> tuple[Operator, dict]:
    """Construct the state requested on the command line with its metadata."""
    cls, d = args.cls, args.d
    meta: dict = {"class": cls}
    if cls == "spider_y":
        if d != 2:
            raise UsageError("spider_y needs d = 2")
        if args.q is None:
            raise UsageError("spider_y needs --q")
        a1 = _angles(args.angles)
        a2 = _angles(args.angles2) if args.angles2 else a1
        xy = spider_y(a1, a2, args.q)
        p_edge = 1.0 / (1.0 + xy.norm_x_gamma**2)
        p = p_edge if args.p is None else args.p
        alpha = math.sqrt((1 - p) / p) if args.alpha is None else args.alpha
        params = ClassParams(2, p, alpha, 0.0 if args.beta is None else args.beta)
        rho = class_c_state(params, xy)
        meta["q"] = args.q
        meta["unitary"] = {"id": "spider_y", "angles": list(a1), "angles2": list(a2)}
    else:
        U = make_unitary(args.unitary, d, args.angles)
        xy = xy_from_unitary(U, args.unitary)
        params = _params_for(cls, d, xy.norm_x_gamma, args.p, args.alpha, args.beta)
        if cls == "flag_form":
            if args.unitary != "hadamard":
                raise UsageError("flag_form is defined for the Hadamard generator")
            rho = rho_h_flag_form(params).state
        else:
            rho = class_c_state(params, xy)
        meta["unitary"] = {"id": args.unitary, "matrix": statefile.matrix_to_pairs(U)}
        if args.unitary == "angles":
            meta["unitary"]["angles"] = list(_angles(args.angles))
    if args.noise:
        rho = add_white_noise(rho, args.noise)
    meta.update(
        d=d,
        p=params.p,
        alpha=params.alpha,
        beta=params.beta,
        noise=args.noise or 0.0,
        norm_x_gamma=xy.norm_x_gamma,
        entropy=analysis.entropy_class_c(params, xy).total if not args.noise else von_neumann_entropy(rho),
    )
    return rho, meta


def cmd_construct(args) -> int:
    rho, meta = build_state(args)
    statefile.save(args.out, rho, meta)
    lmin = float(hermitian_eigenvalues(rho).eigenvalues[-1])
    print(f"wrote {args.out}")
    print(f"trace      {rho.tr().real:.15g}")
    print(f"psd_margin {lmin:.6e}")
    print(f"class      {meta['class']}  d={meta['d']}  p={meta['p']:.10g}  alpha={meta['alpha']:.10g}  beta={meta['beta']:.10g}")
    print(f"norm_x_gamma {meta['norm_x_gamma']:.10g}")
    print(f"entropy    {meta['entropy']:.10g}")
    return EXIT_OK


def check_verdicts(rho: Operator, meta: dict, ppt=True, key=True, sep=True) -> dict:
    out: dict = {}
    if ppt:
        out["ppt"] = criteria.ppt_numeric(rho).as_dict()
    if key:
        out["key"] = criteria.general_key_condition(rho).as_dict()
        blocks = criteria.is_spider(rho)
        if blocks is not None:
            try:
                out["key_spider"] = criteria.key_condition_spider(blocks).as_dict()
            except ValueError:
                pass
    if sep:
        out["sep"] = _separability_from_meta(meta)
    return statefile.jsonable(out)


def _separability_from_meta(meta: dict) -> dict:
    na = {"condition": "separable", "holds": None, "margin": None, "inputs": {"reason": ""}}
    unitary = meta.get("unitary", {})
    if meta.get("d") != 2 or meta.get("class") not in ("rho_U", "tilde", "flag_form") or meta.get("noise"):
        na["inputs"]["reason"] = "needs a noiseless d = 2 rho_U-type state"
        return na
    U = statefile.pairs_to_matrix(unitary["matrix"])
    params = ClassParams(2, meta["p"], meta["alpha"], meta["beta"])
    norm = meta["norm_x_gamma"]
    if abs(params.beta) > norm:
        v = criteria.Verdict("separable", False, norm - abs(params.beta), {"reason": "|beta| > ||X^Gamma||"})
        return v.as_dict()
    return criteria.separability_conditions(params, norm, U).as_dict()


def cmd_check(args) -> int:
    try:
        rho, meta = statefile.load(args.input)
    except statefile.StateFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    chosen = args.ppt or args.key or args.sep
    report = check_verdicts(rho, meta, ppt=args.ppt or not chosen, key=args.key or not chosen, sep=args.sep or not chosen)
    if args.json:
        print(json.dumps({"file": str(args.input), "verdicts": report}, indent=2))
    else:
        for name, v in report.items():
            holds = "n/a" if v["holds"] is None else ("holds" if v["holds"] else "fails")
            margin = "" if v["margin"] is None else f"margin={v['margin']:.6e}"
            print(f"{name:<11} {holds:<6} {margin}")
    return EXIT_OK


@dataclass
class ScanRecord:
    p: float
    alpha: float
    beta: float
    d: int
    unitary: str
    q: float | None
    ppt_analytic: bool
    ppt_numeric: bool
    ppt_margin: float
    key: bool
    key_margin: float
    separable: bool | None
    entropy: float
    tolerable_noise: float | None
    dw_rate: float | None
    icoh: float | None


SCAN_HEADER = [f.name for f in fields(ScanRecord)]
GRID_KEYS = ("p", "alpha", "beta", "q")


def parse_grid(text: str) -> dict[str, list]:
    """``p=a:b:n,alpha=auto,beta=0.5`` -> axis values; ``a:b:n`` is linspace."""
    axes: dict[str, list] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise UsageError(f"grid item {item!r} is not key=value")
        key, rule = (s.strip() for s in item.split("=", 1))
        if key not in GRID_KEYS:
            raise UsageError(f"unknown grid axis {key!r}")
        if key in axes:
            raise UsageError(f"grid axis {key!r} given twice")
        if rule == "auto":
            if key not in ("alpha", "beta"):
                raise UsageError("only alpha and beta accept 'auto'")
            axes[key] = ["auto"]
            continue
        parts = rule.split(":")
        try:
            if len(parts) == 1:
                axes[key] = [float(parts[0])]
            elif len(parts) == 3:
                a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
                if n < 1:
                    raise ValueError("point count must be positive")
                axes[key] = list(np.linspace(a, b, n))
            else:
                raise ValueError("expected a, or a:b:n")
        except ValueError as exc:
            raise UsageError(f"bad grid item {item!r}: {exc}") from exc
    if "p" not in axes:
        raise UsageError("grid needs a p axis")
    return axes


@dataclass(frozen=True)
class _ScanSetup:
    cls: str
    d: int
    unitary: str
    angles: str | None
    dw: bool
    icoh: bool


def _scan_point(setup: _ScanSetup, point: dict) -> ScanRecord:
    q = point.get("q")
    if setup.cls == "spider_y":
        if q is None:
            raise UsageError("spider_y scans need a q axis")
        a = _angles(setup.angles)
        xy = spider_y(a, a, q)
        U = None
    else:
        U = make_unitary(setup.unitary, setup.d, setup.angles)
        xy = xy_from_unitary(U, setup.unitary)
    norm = xy.norm_x_gamma
    p = float(point["p"])
    a1 = criteria.alpha_1(p, norm)
    alpha = point.get("alpha", 1.0)
    beta = point.get("beta", 1.0)
    if setup.cls == "tilde":
        alpha = beta = 1.0
    alpha = min(1.0, a1) if alpha == "auto" else float(alpha)
    beta = (1.0 if a1 == 0 else min(1.0, 1.0 / a1)) if beta == "auto" else float(beta)
    params = ClassParams(setup.d, p, alpha, beta)
    rho = class_c_state(params, xy)
    ppt_num = criteria.ppt_numeric(rho)
    key = criteria.key_condition_class_c(params)
    separable = None
    if setup.d == 2 and U is not None:
        if abs(beta) <= norm:
            separable = criteria.separability_conditions(params, norm, U).holds
        else:
            separable = False
    return ScanRecord(
        p=params.p,
        alpha=params.alpha,
        beta=params.beta,
        d=setup.d,
        unitary="spider_y" if setup.cls == "spider_y" else setup.unitary,
        q=q,
        ppt_analytic=criteria.ppt_analytic_class_c(params, norm).holds,
        ppt_numeric=ppt_num.holds,
        ppt_margin=ppt_num.margin,
        key=key.holds,
        key_margin=key.margin,
        separable=separable,
        entropy=analysis.entropy_class_c(params, xy).total,
        tolerable_noise=criteria.tolerable_noise_recurrence(params) if params.p > 0.5 else None,
        dw_rate=analysis.dw_rate_ccq(rho) if setup.dw else None,
        icoh=analysis.coherent_information_erasure(params, xy).icoh if setup.icoh else None,
    )


def _scan_task(job):
    return _scan_point(*job)


def grid_points(axes: dict[str, list]) -> list[dict]:
    keys = [k for k in GRID_KEYS if k in axes]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]


def run_scan(setup: _ScanSetup, axes: dict[str, list], jobs: int = 1) -> list[ScanRecord]:
    tasks = [(setup, pt) for pt in grid_points(axes)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_scan_task, tasks))
    return [_scan_task(t) for t in tasks]


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_records(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SCAN_HEADER)
        for r in records:
            row = asdict(r)
            w.writerow([_csv_value(row[k]) for k in SCAN_HEADER])


def cmd_scan(args) -> int:
    axes = parse_grid(args.grid)
    d = 2 if args.cls == "spider_y" else args.d
    setup = _ScanSetup(args.cls, d, args.unitary, args.angles, args.dw, args.icoh)
    records = run_scan(setup, axes, args.jobs)
    write_records(args.out, records)
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def cmd_noise(args) -> int:
    U = make_unitary(args.unitary, args.d)
    xy = xy_from_unitary(U, args.unitary)
    params = ClassParams(args.d, lambda_tilde(xy.norm_x_gamma), 1.0, 1.0)
    rho = class_c_state(params, xy)
    delta = criteria.tolerable_noise_recurrence(params)
    dw_zero = analysis.noise_threshold_dw(rho)
    eps_grid = np.linspace(0.0, args.eps_max, args.points)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "dw_rate", "recurrence_key_margin", "recurrence_key"])
        for eps in eps_grid:
            noisy = add_white_noise(rho, float(eps))
            v = criteria.general_key_condition(noisy)
            w.writerow([_csv_value(x) for x in (eps, analysis.dw_rate_ccq(noisy), v.margin, v.holds)])
    print(f"recurrence_threshold {delta:.6f}")
    print(f"dw_threshold         {dw_zero:.6f}")
    print(f"ratio                {delta / dw_zero:.3f}")
    return EXIT_OK


def d_cap_from_env() -> int:
    raw = os.environ.get("BOUNDKEY_DMAX")
    if raw is None:
        return analysis.DEFAULT_D_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"BOUNDKEY_DMAX={raw!r} is not an integer") from exc


def _int_range(text: str) -> tuple[int, int]:
    try:
        a, b = (int(s) for s in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}, expected a:b") from exc
    if a < 2 or b < a:
        raise UsageError(f"bad range {text!r}")
    return a, b


def cmd_erasure(args) -> int:
    lo, hi = _int_range(args.d_range)
    cap = d_cap_from_env()
    if hi > cap:
        raise UsageError(f"d = {hi} exceeds the dimension cap {cap} (set BOUNDKEY_DMAX)")
    config = analysis.ERASURE_CONFIGS[args.config]
    reports = analysis.erasure_scan(config, range(lo, hi + 1), d_cap=cap)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "S", "S_aprime_b_bprime", "S_b_bprime", "S_a_b_bprime", "icoh"])
        for r in reports:
            w.writerow([_csv_value(x) for x in (r.d, r.S, r.S_aprime_b_bprime, r.S_b_bprime, r.S_a_b_bprime, r.icoh)])
    first = next((r.d for r in reports if r.icoh > 0), None)
    print(f"threshold {first if first is not None else 'none'}")
    return EXIT_OK


def cmd_entropy_max(args) -> int:
    if args.family == "rho_U":
        value, p = analysis.entropy_supremum_rho_u(args.d)
        params, xy = analysis.rho_u_supremum_point(args.d, p)
        argmax = {"p": p}
    elif args.family == "spider_y":
        m = analysis.entropy_max_spider_y()
        value, params, argmax = m.value, m.params, {"q": m.q}
        xy = spider_y(HADAMARD_ANGLES, HADAMARD_ANGLES, m.q)
    else:
        xy = xy_from_unitary(fourier_unitary(args.d).data, "fourier")
        params = ClassParams(args.d, lambda_tilde(xy.norm_x_gamma), 1.0, 1.0)
        value, argmax = analysis.entropy_class_c(params, xy).total, {"p": params.p}
    breakdown = asdict(analysis.entropy_class_c(params, xy))
    report = {"family": args.family, "d": params.d, "maximum": value, "argmax": argmax,
              "params": asdict(params), "breakdown": breakdown}
    if args.json:
        print(json.dumps(statefile.jsonable(report), indent=2))
    else:
        print(f"maximum {value:.6f}")
        print("argmax  " + "  ".join(f"{k}={v:.6f}" for k, v in argmax.items()))
        for k, v in breakdown.items():
            print(f"  {k:<12} {v + 0.0:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="boundkey", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a state and write it as JSON")
    c.add_argument("--class", dest="cls", choices=CLASSES, required=True)
    c.add_argument("--unitary", choices=UNITARIES, default="hadamard")
    c.add_argument("--angles", help="alpha,beta,gamma,delta of the (first) qubit unitary")
    c.add_argument("--angles2", help="angles of the second spider_y unitary")
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--p", type=float)
    c.add_argument("--alpha", type=float)
    c.add_argument("--beta", type=float)
    c.add_argument("--q", type=float)
    c.add_argument("--noise", type=float, default=0.0, help="white-noise fraction")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_construct)

    k = sub.add_parser("check", help="evaluate verdicts on a state file")
    k.add_argument("--in", dest="input", required=True)
    k.add_argument("--ppt", action="store_true")
    k.add_argument("--key", action="store_true")
    k.add_argument("--sep", action="store_true")
    k.add_argument("--json", action="store_true")
    k.set_defaults(func=cmd_check)

    s = sub.add_parser("scan", help="sweep class parameters into a CSV")
    s.add_argument("--class", dest="cls", choices=("rho_U", "tilde", "spider_y"), required=True)
    s.add_argument("--unitary", choices=UNITARIES, default="hadamard")
    s.add_argument("--angles")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--grid", required=True, help="e.g. p=0.51:0.66:20,alpha=auto,beta=auto")
    s.add_argument("--dw", action="store_true", help="also compute Devetak-Winter rates")
    s.add_argument("--icoh", action="store_true", help="also compute erasure coherent information")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scan)

    n = sub.add_parser("noise", help="tolerable white noise with and without recurrence")
    n.add_argument("--class", dest="cls", choices=("tilde",), default="tilde")
    n.add_argument("--unitary", choices=("hadamard", "fourier", "identity"), default="hadamard")
    n.add_argument("--d", type=int, default=2)
    n.add_argument("--eps-max", type=float, default=0.2)
    n.add_argument("--points", type=int, default=81)
    n.add_argument("--out", required=True)
    n.set_defaults(func=cmd_noise)

    e = sub.add_parser("erasure", help="coherent information after erasing A' vs d")
    e.add_argument("--config", choices=sorted(analysis.ERASURE_CONFIGS), required=True)
    e.add_argument("--d-range", required=True, help="a:b inclusive")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_erasure)

    m = sub.add_parser("entropy-max", help="entropy maxima of the PPT key-distillable families")
    m.add_argument("--family", choices=("rho_U", "spider_y", "tilde"), required=True)
    m.add_argument("--d", type=int, default=2)
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_entropy_max)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StateValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (UsageError, ValueError, statefile.StateFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
