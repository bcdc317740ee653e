"""Campaign configuration: flat INI sections validated up front.

Example::

    [potential]
    preset = amo
    h = 0.5

    [run]
    lambda = 40, 80
    E = 0
    rho = 0.2

Every violation is collected before reporting, so one pass shows them all.
"""

from __future__ import annotations

import configparser
import difflib
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .cocycle import DEFAULT_M, DEFAULT_N, GOLDEN
from .errors import CocycleError, ContractError
from .potential import PRESETS, FourierPotential, preset

SCHEMA: dict[str, dict[str, str]] = {
    "potential": {"preset": "str", "coeffs": "str", "h": "float"},
    "run": {
        "alpha": "float",
        "rho": "float",
        "lambda": "floats",
        "E": "floats",
        "mu": "floats",
        "y": "floats",
        "delta": "floats",
        "n": "int",
        "M": "int",
        "t": "float",
    },
    "stratum": {"mu1": "float", "mu2": "float", "enforce_threshold": "bool"},
    "output": {"dir": "str"},
}


class ConfigError(ContractError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class CampaignConfig:
    potential: FourierPotential
    potential_label: str
    alpha: float = GOLDEN
    rho: float = 0.2
    lambdas: tuple[float, ...] = ()
    energies: tuple[float, ...] | None = None
    mus: tuple[float, ...] | None = None
    ys: tuple[float, ...] = (0.0,)
    deltas: tuple[float, ...] = ()
    n: int = DEFAULT_N
    M: int = DEFAULT_M
    t: float = 1e-2
    mu1: float | None = None
    mu2: float | None = None
    enforce_threshold: bool = True
    out_dir: str | None = None
    text: str = field(default="", repr=False)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()

    def energies_for(self, lam: float) -> tuple[float, ...]:
        if self.energies is not None:
            return self.energies
        if self.mus is not None:
            return tuple(m * lam for m in self.mus)
        return (0.0,)

    def shifts(self) -> tuple[float, ...]:
        """Values of ``mu``: given directly, or ``E / lam`` over the grid."""
        if self.mus is not None:
            return self.mus
        return tuple(sorted({E / lam for lam in self.lambdas for E in self.energies_for(lam) if lam != 0}))


def _parse_value(kind: str, raw: str):
    if kind == "str":
        return raw.strip()
    if kind == "float":
        return float(raw)
    if kind == "int":
        v = float(raw)
        if v != int(v):
            raise ValueError(f"{raw!r} is not an integer")
        return int(v)
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{raw!r} is not a boolean")
    if kind == "floats":
        return tuple(float(v) for v in raw.replace(";", ",").split(",") if v.strip())
    raise AssertionError(kind)


def _parse_coeffs(raw: str) -> dict[int, complex]:
    terms: dict[int, complex] = {}
    for item in raw.split(","):
        if not item.strip():
            continue
        k, _, v = item.partition(":")
        if not _:
            raise ValueError(f"coefficient {item.strip()!r} is not of the form k:value")
        terms[int(k)] = terms.get(int(k), 0) + complex(v.strip().replace(" ", ""))
    return terms


def _read(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"), strict=True)
    cp.optionxform = str  # keys are case-sensitive (E, M)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError([f"line {e.lineno}: expected a [section] header before {e.line.strip()!r}"]) from None
    except configparser.ParsingError as e:
        raise ConfigError([f"line {ln}: cannot parse {line.strip()!r}" for ln, line in e.errors]) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError([f"line {e.lineno}: {e.message if hasattr(e, 'message') else e}"]) from None
    return cp


def _suggest(word: str, options) -> str:
    close = difflib.get_close_matches(word, list(options), n=1, cutoff=0.6)
    return f"; did you mean {close[0]!r}?" if close else ""


def parse_config(text: str) -> CampaignConfig:
    cp = _read(text)
    errors: list[str] = []
    values: dict[str, dict] = {s: {} for s in SCHEMA}
    for sec in cp.sections():
        if sec not in SCHEMA:
            errors.append(f"unknown section [{sec}]{_suggest(sec, SCHEMA)}")
            continue
        allowed = SCHEMA[sec]
        for key, raw in cp.items(sec):
            if key not in allowed:
                errors.append(f"[{sec}] unknown key {key!r}{_suggest(key, allowed)}")
                continue
            try:
                values[sec][key] = _parse_value(allowed[key], raw)
            except ValueError as e:
                errors.append(f"[{sec}] {key}: {e}")

    pot, run, strat, out = values["potential"], values["run"], values["stratum"], values["output"]
    h = pot.get("h", 0.5)
    potential = None
    label = ""
    if "preset" in pot and "coeffs" in pot:
        errors.append("[potential] give either preset or coeffs, not both")
    elif "coeffs" in pot:
        try:
            potential = FourierPotential.from_terms(_parse_coeffs(pot["coeffs"]), h)
            label = pot["coeffs"]
        except (ValueError, CocycleError) as e:
            errors.append(f"[potential] coeffs: {e}")
    else:
        name = pot.get("preset", "amo")
        if name not in PRESETS:
            errors.append(f"[potential] unknown preset {name!r}{_suggest(name, PRESETS)}")
        else:
            try:
                potential = preset(name, h)
                label = name
            except CocycleError as e:
                errors.append(f"[potential] h: {e}")

    alpha = run.get("alpha", GOLDEN)
    if not 0 < alpha < 1:
        errors.append("[run] alpha must lie in (0, 1)")
    rho = run.get("rho", 0.2)
    if not 0 < rho < min(h, 1.0) / 2:
        errors.append("[run] rho must satisfy 0 < rho < min(h,1)/2")
    n = run.get("n", DEFAULT_N)
    if n < 2:
        errors.append("[run] n must be at least 2")
    M = run.get("M", DEFAULT_M)
    if M < 16:
        errors.append("[run] M must be at least 16")
    t = run.get("t", 1e-2)
    if not 0 < t <= 1e-2:
        errors.append("[run] t must satisfy 0 < t <= 1e-2")
    if run.get("E") and run.get("mu"):
        errors.append("[run] give either E or mu, not both")
    lambdas = run.get("lambda", ())
    if any(not np.isfinite(v) for v in lambdas):
        errors.append("[run] lambda values must be finite")
    ys = run.get("y", (0.0,))
    if any(abs(y) > h for y in ys):
        errors.append(f"[run] every y must satisfy |y| <= h = {h}")
    deltas = run.get("delta", ())
    if any(not 0 < d < rho for d in deltas):
        errors.append("[run] every delta must satisfy 0 < delta < rho")
    mu1, mu2 = strat.get("mu1"), strat.get("mu2")
    if (mu1 is None) != (mu2 is None):
        errors.append("[stratum] give both mu1 and mu2")
    elif mu1 is not None and not mu1 < mu2:
        errors.append("[stratum] need mu1 < mu2")

    if errors:
        raise ConfigError(errors)
    return CampaignConfig(
        potential=potential,
        potential_label=label,
        alpha=alpha,
        rho=rho,
        lambdas=lambdas,
        energies=run.get("E"),
        mus=run.get("mu"),
        ys=ys,
        deltas=deltas,
        n=n,
        M=M,
        t=t,
        mu1=mu1,
        mu2=mu2,
        enforce_threshold=strat.get("enforce_threshold", True),
        out_dir=out.get("dir"),
        text=text,
    )
