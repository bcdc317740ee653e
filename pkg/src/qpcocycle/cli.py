"""Command-line front end.

Exit codes: 0 all pass, 1 a failure, 2 inconclusive cells (no failure),
3 usage or configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, asymptotics, constants
from .cocycle import (
    CocycleSpec,
    acceleration,
    complexified_profile,
    dominated_splitting_check,
    lyapunov_exponent,
    resolve_workers,
)
from .config import CampaignConfig, ConfigError, parse_config
from .errors import CocycleError, ContractError, MarginError, PrecisionError
from .jensen import jensen_integral, jensen_integral_quadrature, two_omega_from_roots
from .report import DEFAULT_PRECISION, emit_report
from .zeros import laurent_roots

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
COMMANDS = (
    "le",
    "profile",
    "accel",
    "zeros",
    "jensen",
    "verify-asymptotics",
    "verify-stratified",
    "verify-constants",
    "bounds",
)


@dataclass
class Result:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    status: list[str] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, row: dict, status: str, line: str) -> None:
        self.rows.append(row)
        self.status.append(status)
        self.lines.append(f"[{status}] {line}")

    @property
    def exit_code(self) -> int:
        if "fail" in self.status:
            return EXIT_FAIL
        if "inconclusive" in self.status:
            return EXIT_INCONCLUSIVE
        return EXIT_PASS


def _cells(cfg: CampaignConfig):
    for lam in cfg.lambdas:
        for E in cfg.energies_for(lam):
            yield lam, E


def cmd_le(cfg: CampaignConfig, workers: int) -> Result:
    res = Result(["alpha", "lambda", "E", "y", "n", "M", "L", "spread", "L_n", "L_2n", "status"])
    for lam, E in _cells(cfg):
        for y in cfg.ys:
            est = lyapunov_exponent(CocycleSpec(cfg.alpha, lam, E, y, cfg.potential), cfg.n, cfg.M, workers)
            st = "pass" if est.subadditive else "fail"
            res.add(
                {"alpha": cfg.alpha, "lambda": lam, "E": E, "y": y, "n": cfg.n, "M": cfg.M, "L": est.value,
                 "spread": est.spread, "L_n": est.raw_pairs[0], "L_2n": est.raw_pairs[1], "status": st},
                st,
                f"lambda={lam:g} E={E:g} y={y:g} L={est.value:.10g} spread={est.spread:.3g}",
            )
    return res


def cmd_profile(cfg: CampaignConfig, workers: int) -> Result:
    res = Result(["lambda", "E", "y", "L", "spread", "convex_ok", "even_ok", "status"])
    for lam, E in _cells(cfg):
        prof = complexified_profile(CocycleSpec(cfg.alpha, lam, E, 0.0, cfg.potential), cfg.ys, cfg.n, cfg.M, workers)
        st = "pass" if prof.convex_ok and prof.even_ok else "fail"
        for y, est in prof:
            res.rows.append({"lambda": lam, "E": E, "y": y, "L": est.value, "spread": est.spread,
                             "convex_ok": prof.convex_ok, "even_ok": prof.even_ok, "status": st})
        res.status.append(st)
        res.lines.append(
            f"[{st}] lambda={lam:g} E={E:g} convexity_defect={prof.convexity_defect:.3g} "
            f"evenness_defect={prof.evenness_defect:.3g}"
        )
    return res


def cmd_accel(cfg: CampaignConfig, workers: int) -> Result:
    res = Result(["lambda", "E", "y", "t", "raw", "quantized", "residual", "flagged", "status"])
    for lam, E in _cells(cfg):
        for y in cfg.ys:
            row = {"lambda": lam, "E": E, "y": y, "t": cfg.t}
            try:
                a = acceleration(CocycleSpec(cfg.alpha, lam, E, y, cfg.potential), y, cfg.t, cfg.n, cfg.M, workers)
            except PrecisionError as e:
                res.add({**row, "status": "inconclusive"}, "inconclusive", f"lambda={lam:g} E={E:g} y={y:g}: {e}")
                continue
            st = "fail" if a.flagged else "pass"
            res.add({**row, "raw": a.raw, "quantized": a.quantized, "residual": a.residual, "flagged": a.flagged,
                     "status": st}, st, f"lambda={lam:g} E={E:g} y={y:g} omega={a.raw:.6f} -> {a.quantized}")
    return res


def cmd_zeros(cfg: CampaignConfig, workers: int) -> Result:
    res = Result(["mu", "re", "im", "multiplicity", "in_strip"])
    sets = []
    for mu in cfg.shifts():
        zs = laurent_roots(cfg.potential, mu, restrict_to_strip=False)
        for z, m in zs.zeros:
            res.rows.append({"mu": mu, "re": z.real, "im": z.imag, "multiplicity": m, "in_strip": True})
        for z, m in zs.outside:
            res.rows.append({"mu": mu, "re": z.real, "im": z.imag, "multiplicity": m, "in_strip": False})
        sets.append(zs.to_dict())
        res.status.append("pass")
        res.lines.append(f"[pass] mu={mu:g} zeros in strip: {sum(m for _, m in zs.zeros)}")
    res.extra["zero_sets"] = sets
    return res


def cmd_jensen(cfg: CampaignConfig, workers: int) -> Result:
    res = Result(["mu", "y", "I_roots", "I_quadrature", "difference", "two_omega", "status"])
    for mu in cfg.shifts():
        zs = laurent_roots(cfg.potential, mu, restrict_to_strip=False)
        for y in cfg.ys:
            I = jensen_integral(cfg.potential, mu, y, zs)
            row = {"mu": mu, "y": y, "I_roots": I, "two_omega": two_omega_from_roots(zs, y)}
            try:
                q = jensen_integral_quadrature(cfg.potential, mu, y, zs=zs)
            except MarginError:
                res.add({**row, "status": "pass"}, "pass", f"mu={mu:g} y={y:g} I={I:.10g} (zero near line)")
                continue
            st = "pass" if abs(q - I) <= 1e-8 else "fail"
            res.add({**row, "I_quadrature": q, "difference": q - I, "status": st}, st,
                    f"mu={mu:g} y={y:g} I={I:.10g} quadrature diff={q - I:.3g}")
    return res


def cmd_verify_asymptotics(cfg: CampaignConfig, workers: int) -> Result:
    res = Result(["lambda", "E", "predicted", "measured", "residual", "bound", "status"])
    consts = asymptotics.theorem_constants(cfg.potential, cfg.rho)
    certs = []
    for lam, E in _cells(cfg):
        c = asymptotics.verify_asymptotics(cfg.potential, cfg.alpha, lam, E, cfg.rho, cfg.n, cfg.M,
                                           consts=consts, workers=workers)
        st = c.status
        if st == "pass" and not all(c.checks.values()):
            st = "fail"
        row = c.row()
        row["status"] = st
        failed = [k for k, v in c.checks.items() if not v]
        res.add(row, st, f"lambda={lam:g} E={E:g} residual={c.residual:.3g} bound={c.bound:.3g}"
                + (f" failed checks: {', '.join(failed)}" if failed else ""))
        certs.append(c.to_dict())
    res.extra = {"constants": consts.to_dict(), "certificates": certs}
    return res


def cmd_verify_stratified(cfg: CampaignConfig, workers: int) -> Result:
    if cfg.mu1 is None:
        raise ContractError("[stratum] mu1 and mu2 are required for verify-stratified")
    res = Result(["lambda", "E", "mu", "predicted", "measured", "residual", "bound", "omega0", "omega0_bound",
                  "band_ok", "threshold_ok", "status"])
    base = asymptotics.stratum_quantities(cfg.potential, cfg.mu1, cfg.mu2)
    reports = []
    for lam in cfg.lambdas:
        rep = asymptotics.verify_stratified(cfg.potential, cfg.alpha, lam, cfg.mu1, cfg.mu2, cfg.energies_for(lam),
                                            cfg.n, cfg.M, cfg.t, cfg.enforce_threshold, base, workers)
        for r in rep.results:
            ok = r.status == "pass" and r.omega_ok and rep.band_ok and rep.threshold_ok
            st = "pass" if ok else ("inconclusive" if r.status == "inconclusive" else "fail")
            res.add({"lambda": lam, "E": r.E, "mu": r.mu, "predicted": r.predicted, "measured": r.measured,
                     "residual": r.residual, "bound": r.bound, "omega0": r.omega0, "omega0_bound": r.omega0_bound,
                     "band_ok": rep.band_ok, "threshold_ok": rep.threshold_ok, "status": st}, st,
                    f"lambda={lam:g} E={r.E:g} residual={r.residual:.3g} bound={r.bound:.3g} omega0={r.omega0} "
                    f"threshold_ok={rep.threshold_ok}")
        reports.append(rep.to_dict())
    res.extra = {"reports": reports}
    return res


def cmd_verify_constants(cfg: CampaignConfig | None, workers: int) -> Result:
    res = Result(["name", "value", "published", "difference", "status"])
    try:
        kc = constants.rederive_k_constants()
        err = None
    except constants.ConstantMismatchError as e:
        kc = constants.rederive_k_constants(check=False)
        err = str(e)
    k1_closed = float(np.exp(-2 * np.pi) / (2 * np.exp(2 * np.pi) + 2))
    rows = [
        ("K1", constants.K1, k1_closed, 1e-20),
        ("K2", kc.K2, constants.K2_PUBLISHED, constants.MATCH_TOL),
        ("K3", kc.K3, constants.K3_PUBLISHED, constants.MATCH_TOL),
        ("case1_c", kc.case1_c, constants.CASE1_PUBLISHED, constants.MATCH_TOL),
    ]
    for name, v, pub, tol in rows:
        st = "pass" if abs(v - pub) <= tol else "fail"
        res.add({"name": name, "value": v, "published": pub, "difference": v - pub, "status": st}, st,
                f"{name} = {v:.10g} (published {pub:g})")
    res.extra = {"k_constants": kc.to_dict(), "error": err}
    return res


def cmd_bounds(cfg: CampaignConfig, workers: int) -> Result:
    res = Result(["kind", "lambda", "E", "y", "delta", "value", "lower", "upper", "status"])
    for lam, E in _cells(cfg):
        for y in cfg.ys:
            r = dominated_splitting_check(CocycleSpec(cfg.alpha, lam, E, y, cfg.potential), None, True,
                                          cfg.n, cfg.M, workers=workers)
            if not r.is_dominated:
                res.add({"kind": "splitting", "lambda": lam, "E": E, "y": y, "value": r.m_g, "status": "pass"},
                        "pass", f"lambda={lam:g} E={E:g} y={y:g} m={r.m_g:.4g} not dominated")
                continue
            ok = r.contains and r.contains_alt and r.k_bound_ok
            st = "pass" if ok else "fail"
            res.add({"kind": "splitting", "lambda": lam, "E": E, "y": y, "value": r.measured_le,
                     "lower": r.le_lower, "upper": r.le_upper, "status": st}, st,
                    f"lambda={lam:g} E={E:g} y={y:g} m={r.m_g:.4g} L(D)={r.measured_le:.3g} in "
                    f"[{r.le_lower:.4g}, {r.le_upper:.4g}]")
    for d in cfg.deltas:
        dk = asymptotics.duarte_klein_bound(cfg.potential, cfg.rho, d)
        if dk.degenerate:
            res.add({"kind": "strip_margin", "delta": d, "status": "pass"}, "pass", f"delta={d:g} skipped (constant f)")
            continue
        st = "pass" if dk.verified else "fail"
        res.add({"kind": "strip_margin", "delta": d, "value": dk.worst_lhs, "lower": dk.bound, "status": st}, st,
                f"delta={d:g} min over mu of margin {dk.worst_lhs:.4g} >= {dk.bound:.3g}: {dk.violations} violations")
    return res


HANDLERS: dict[str, Callable] = {
    "le": cmd_le,
    "profile": cmd_profile,
    "accel": cmd_accel,
    "zeros": cmd_zeros,
    "jensen": cmd_jensen,
    "verify-asymptotics": cmd_verify_asymptotics,
    "verify-stratified": cmd_verify_stratified,
    "verify-constants": cmd_verify_constants,
    "bounds": cmd_bounds,
}


def run_command(name: str, cfg: CampaignConfig | None, workers: int | None = None) -> Result:
    if name not in HANDLERS:
        raise ContractError(f"unknown command {name!r}")
    if cfg is None and name != "verify-constants":
        raise ContractError(f"command {name!r} needs --config")
    return HANDLERS[name](cfg, resolve_workers(workers))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qpcocycle", description="Lyapunov exponent asymptotics for analytic quasi-periodic cocycles")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="campaign file (INI); optional for verify-constants")
    ap.add_argument("--out", type=Path, help="output directory (default: [output] dir, else ./out)")
    ap.add_argument("--workers", type=int, help="processes for the phase average (default: $COCYCLE_WORKERS or 1)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="significant digits, 1..17")
    return ap


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not 1 <= args.precision <= 17:
        print("error: --precision must lie in 1..17", file=sys.stderr)
        return EXIT_USAGE
    workers = args.workers
    if workers is None and os.environ.get("COCYCLE_WORKERS"):
        try:
            workers = int(os.environ["COCYCLE_WORKERS"])
        except ValueError:
            print("error: COCYCLE_WORKERS must be an integer", file=sys.stderr)
            return EXIT_USAGE
    cfg = None
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as e:
            print(f"error: cannot read {args.config}: {e.strerror}", file=sys.stderr)
            return EXIT_USAGE
        try:
            cfg = parse_config(text)
        except ConfigError as e:
            for v in e.violations:
                print(f"config error: {v}", file=sys.stderr)
            return EXIT_USAGE
    try:
        result = run_command(args.command, cfg, workers)
    except ContractError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CocycleError as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL
    for line in result.lines:
        print(line)
    out = args.out or (Path(cfg.out_dir) if cfg and cfg.out_dir else Path("out"))
    try:
        paths = emit_report(args.command, result.rows, result.columns, args.format, out, args.precision,
                            result.extra, config_sha256=cfg.sha256 if cfg else "")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    print(f"wrote {', '.join(str(p) for p in paths)}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
