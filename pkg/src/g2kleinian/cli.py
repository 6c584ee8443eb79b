"""Command-line front end: ``g2kleinian {periods,iterate,eval,abel} JOB``.

A job is a JSON object::

    {"f": [f0, f1, ..., f6],            # coefficients, low degree first
     "disks": [disk, disk, disk],       # optional
     "points": [[z1, z2], ...],         # eval
     "divisor": [P, Q]}                 # abel; P is [x, y] or {"inf": a}

Complex numbers are ``[re, im]`` pairs or plain reals.  Output is JSON with
sorted keys, so identical jobs give byte-identical reports.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .cpoly import CPoly, is_admissible
from .disks import DiskTriple, find_disks
from .errors import CertificateError, InputError, KleinianError, PolarSetError
from .kleinian import FIT_TOL, POLE_TOL, build_context, eval_S, sigma_zeta, wp
from .periods import compute_periods, is_quasi_reduced
from .richelot import MAX_ITER, TOWER_TOL, iterate_tower
from .thetaref import oracle_S, theta_data

__all__ = ["JobSpec", "run", "main", "parse_job"]

CERT_TOL = 1e-6
METHODS = ("richelot", "theta", "both")


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _cvec(v) -> list:
    return [_c(x) for x in np.ravel(v)]


def _parse_complex(v, where: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise InputError(f"{where}: expected a number or [re, im], got {v!r}")


@dataclass
class JobSpec:
    """One CLI job: the curve, optional disks, inputs and run options."""

    polynomial: CPoly
    disks: Optional[DiskTriple] = None
    points: List[np.ndarray] = field(default_factory=list)
    divisor: Optional[list] = None
    method: str = "richelot"
    derivatives: bool = False
    weierstrass: bool = False
    tower_tol: float = TOWER_TOL
    fit_tol: float = FIT_TOL
    cert_tol: float = CERT_TOL
    max_iter: int = MAX_ITER
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")
        for name in ("tower_tol", "fit_tol", "cert_tol"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")


def parse_job(data: dict) -> dict:
    """Validate the JSON job object; returns keyword arguments for :class:`JobSpec`."""
    if not isinstance(data, dict):
        raise InputError("a job is a JSON object")
    if "f" not in data:
        raise InputError("job needs the coefficient list 'f'")
    coeffs = data["f"]
    if not isinstance(coeffs, list) or not 1 <= len(coeffs) <= 7:
        raise InputError("'f' must list at most 7 coefficients, low degree first")
    f = CPoly([_parse_complex(c, f"f[{i}]") for i, c in enumerate(coeffs)])
    out = {"polynomial": f}
    if data.get("disks") is not None:
        out["disks"] = DiskTriple.from_json(data["disks"])
    pts = []
    for i, p in enumerate(data.get("points", [])):
        if not isinstance(p, list) or len(p) != 2:
            raise InputError(f"points[{i}] must be [z1, z2]")
        pts.append(np.array([_parse_complex(x, f"points[{i}]") for x in p]))
    out["points"] = pts
    if data.get("divisor") is not None:
        out["divisor"] = data["divisor"]
    return out


# --- subcommands -------------------------------------------------------------------

def _disks(job: JobSpec) -> DiskTriple:
    return job.disks if job.disks is not None else find_disks(job.polynomial)


def _check_admissible(f: CPoly):
    if not is_admissible(f):
        raise InputError("polynomial is not admissible (degree 5 or 6, simple roots)")


def _periods_only(job: JobSpec):
    _check_admissible(job.polynomial)
    D = _disks(job)
    tower = iterate_tower(job.polynomial, D, job.tower_tol, job.max_iter)
    return D, tower, compute_periods(tower, job.polynomial)


def run_periods(job: JobSpec) -> dict:
    D, tower, per = _periods_only(job)
    out = per.to_json()
    out["quasi_reduced"] = bool(is_quasi_reduced(per.omega))
    out["disks"] = D.to_json()
    out["tower_depth"] = tower.depth
    return out


def run_iterate(job: JobSpec) -> dict:
    _check_admissible(job.polynomial)
    D = _disks(job)
    tower = iterate_tower(job.polynomial, D, job.tower_tol, job.max_iter)
    out = tower.to_json()
    out["disks"] = D.to_json()
    return out


def _discrepancy(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def run_eval(job: JobSpec) -> dict:
    if not job.points:
        raise InputError("eval needs at least one point")
    want_r = job.method in ("richelot", "both")
    want_t = job.method in ("theta", "both")
    if want_r:
        ctx = build_context(job.polynomial, job.disks, job.tower_tol, job.max_iter,
                            job.fit_tol, job.seed)
        per, D = ctx.periods, ctx.tower.disks
        if job.weierstrass and not ctx.is_weierstrass:
            raise InputError("--weierstrass needs a quintic with leading coefficient 4")
    else:
        if job.weierstrass:
            raise InputError("--weierstrass needs the richelot method")
        D, _, per = _periods_only(job)
    tdata = theta_data(per) if want_t else None

    def one(z):
        rec = {"z": _cvec(z)}
        sv = None
        if want_r:
            sv = eval_S(ctx, z)
            rec["richelot"] = sv.to_json(job.derivatives)
            try:
                rec["wp"] = _cvec(wp(ctx, z, POLE_TOL, sv))
            except PolarSetError:
                rec["wp"] = None
            if job.weierstrass:
                try:
                    s2, z1, z2 = sigma_zeta(ctx, z, POLE_TOL, sv)
                    rec["sigma_2z"] = _c(s2)
                    rec["zeta"] = _cvec([z1, z2])
                except PolarSetError:
                    rec["sigma_2z"] = None
                    rec["zeta"] = None
        if want_t:
            so = oracle_S(per, z, tdata)
            rec["theta"] = so.to_json(job.derivatives)
            if sv is not None:
                d = _discrepancy(sv.s, so.s)
                if job.derivatives:
                    d = max(d, _discrepancy(sv.grad, so.grad))
                rec["discrepancy"] = d
        return rec

    if job.workers > 1:
        with ThreadPoolExecutor(job.workers) as ex:
            recs = list(ex.map(one, job.points))
    else:
        recs = [one(z) for z in job.points]
    out = {"method": job.method, "disks": D.to_json(), "points": recs}
    if want_r:
        out["transfer_residuals"] = [t.residual for t in ctx.transfers]
        out["transfer_holdout"] = [t.holdout for t in ctx.transfers]
    if job.method == "both":
        md = max(r["discrepancy"] for r in recs)
        out["max_discrepancy"] = md
        if md > 1e-7:
            raise CertificateError("richelot and theta values disagree", max_discrepancy=md)
    return out


def run_abel(job: JobSpec) -> dict:
    from .abel import CurvePoint, Divisor2, abel_map
    if job.divisor is None or not isinstance(job.divisor, list) or len(job.divisor) != 2:
        raise InputError("abel needs 'divisor': [P, Q]")
    D = Divisor2(*(CurvePoint.from_json(p) for p in job.divisor))
    ctx = build_context(job.polynomial, job.disks, job.tower_tol, job.max_iter,
                        job.fit_tol, job.seed)
    res = abel_map(ctx, D, seed=job.seed, cert_tol=job.cert_tol)
    out = res.to_json()
    out["divisor"] = D.to_json()
    out["disks"] = ctx.tower.disks.to_json()
    return out


COMMANDS = {"periods": run_periods, "iterate": run_iterate, "eval": run_eval,
            "abel": run_abel}


def run(command: str, job: JobSpec) -> dict:
    """Run one subcommand and return its JSON-ready report."""
    return COMMANDS[command](job)


# --- argument handling -------------------------------------------------------------

def _load_json(path: str, what: str):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {what} {path!r}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} {path!r}: invalid JSON at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="g2kleinian",
                                description="Genus-2 Kleinian functions through Richelot towers.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, hlp in (("periods", "period matrices and the Riemann matrix"),
                      ("iterate", "dump the Richelot tower"),
                      ("eval", "S, S22, S12, S11 and wp at points"),
                      ("abel", "Abel map of a two-point divisor")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("job", nargs="?", default=None,
                       help="job JSON file, or - for stdin")
        s.add_argument("--poly", help="coefficients as a JSON list (overrides the job's f)")
        s.add_argument("--disks", metavar="FILE", help="disk triple JSON file")
        s.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
        s.add_argument("--tol-tower", type=float, default=TOWER_TOL)
        s.add_argument("--tol-fit", type=float, default=FIT_TOL)
        s.add_argument("--tol-cert", type=float, default=CERT_TOL)
        s.add_argument("--max-iter", type=int, default=MAX_ITER)
        s.add_argument("--seed", type=int, default=0)
        if name == "eval":
            s.add_argument("--method", choices=METHODS, default="richelot")
            s.add_argument("--derivatives", action="store_true")
            s.add_argument("--weierstrass", action="store_true",
                           help="also sigma(2z) and zeta (quintic with leading coefficient 4)")
            s.add_argument("--workers", type=int, default=1)
    return p


def job_from_args(args) -> JobSpec:
    data = _load_json(args.job, "job") if args.job else {}
    if args.poly:
        try:
            data["f"] = json.loads(args.poly)
        except json.JSONDecodeError as exc:
            raise InputError(f"--poly: invalid JSON at column {exc.colno}: {exc.msg}") from exc
    if args.disks:
        data["disks"] = _load_json(args.disks, "disks file")
    kw = parse_job(data)
    return JobSpec(**kw, method=getattr(args, "method", "richelot"),
                   derivatives=getattr(args, "derivatives", False),
                   weierstrass=getattr(args, "weierstrass", False),
                   tower_tol=args.tol_tower, fit_tol=args.tol_fit, cert_tol=args.tol_cert,
                   max_iter=args.max_iter, seed=args.seed,
                   workers=getattr(args, "workers", 1))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = job_from_args(args)
        report = run(args.command, job)
    except KleinianError as exc:
        print(json.dumps(exc.report(), sort_keys=True), file=sys.stderr)
        return exc.exit_code
    text = json.dumps(report, sort_keys=True, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
