"""Lorentz quasi-norms of step functions, evaluated exactly.

For a step function the distribution function d_f(lam) = |{f > lam}| is a
right-continuous staircase whose only breakpoints are the distinct cell
values, so

    ||f||_{p,inf} = sup_{lam>0} lam d_f(lam)^(1/p)
    ||f||_{p,q}   = p^(1/q) ( int_0^inf [d_f(lam)^(1/p) lam]^q dlam/lam )^(1/q)

reduce to a finite scan over the sorted values and a finite segment sum.
Both are the normative algorithms here; quadrature appears only as a test
oracle.  q = infinity is marked by the Q_INF sentinel, not a float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import DyadicCube, StepFunction


class _QInf:
    """Sentinel marking the weak space L^{p,inf}."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Q_INF"


Q_INF = _QInf()


def is_weak(q) -> bool:
    return q is Q_INF


@dataclass(frozen=True)
class LorentzIndex:
    """Exponent pair (p, q); q = Q_INF selects the weak space."""

    p: float
    q: object = Q_INF

    def __post_init__(self):
        if not (self.p > 0):
            raise ValueError(f"p must be positive, got {self.p}")
        if not is_weak(self.q) and not (isinstance(self.q, (int, float)) and self.q > 0):
            raise ValueError(f"q must be positive or Q_INF, got {self.q}")


class CheckResult(NamedTuple):
    ok: bool
    residual: float


def weak_norm(f: StepFunction, p: float, cube: DyadicCube | None = None) -> float:
    """||f chi_cube||_{p,inf}, exact for step functions.

    The supremum over lam is attained in the left limit at a distinct value v,
    where lam d_f(lam)^(1/p) -> v |{f >= v}|^(1/p); scanning the cell values in
    decreasing order realizes |{f >= v}| as (rank of last occurrence) times the
    cell measure.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    vals = np.sort(f.block(cube))[::-1]
    pos = vals > 0
    if not pos.any():
        return 0.0
    counts = np.arange(1, vals.size + 1, dtype=float) * f.grid.cell_measure
    return float(np.max(vals[pos] * counts[pos] ** (1.0 / p)))


def lorentz_norm(f: StepFunction, p: float, q: float) -> float:
    """||f||_{p,q} for finite p, q > 0 via the exact segment sum.

    Between consecutive breakpoints 0 = v_0 < v_1 < ... < v_m of f the
    distribution function is the constant d_i = |{f > v_i}|, so the defining
    integral is sum_i d_i^(q/p) (v_{i+1}^q - v_i^q)/q.  For p = q this equals
    the ordinary L^p norm.
    """
    if is_weak(q) or not (isinstance(q, (int, float)) and math.isfinite(q)):
        raise ValueError("q must be finite and positive; use weak_norm for q = Q_INF")
    if not (p > 0 and q > 0 and math.isfinite(p)):
        raise ValueError(f"exponents must be finite and positive, got p={p}, q={q}")
    vals = np.sort(f.values)
    breaks = np.unique(vals)
    if breaks[0] != 0.0:
        breaks = np.concatenate(([0.0], breaks))
    if breaks.size == 1:
        return 0.0
    # d(v_i) = number of cells strictly above v_i, times the cell measure.
    above = vals.size - np.searchsorted(vals, breaks[:-1], side="right")
    d = above.astype(float) * f.grid.cell_measure
    seg = d ** (q / p) * (breaks[1:] ** q - breaks[:-1] ** q) / q
    return float(p ** (1.0 / q) * seg.sum() ** (1.0 / q))


def lorentz_quasinorm(f: StepFunction, p: float, q) -> float:
    """Dispatch on q: weak_norm for Q_INF, lorentz_norm otherwise."""
    if is_weak(q):
        return weak_norm(f, p)
    return lorentz_norm(f, p, q)


def power_identity_check(f: StepFunction, r: float, p: float, q) -> CheckResult:
    """Verify || |f|^r ||_{p,q} = ||f||^r_{pr,qr} and report the residual."""
    if not (r > 0 and p > 0):
        raise ValueError("exponents must be positive")
    lhs = lorentz_quasinorm(f ** r, p, q)
    rq = q if is_weak(q) else q * r
    rhs = lorentz_quasinorm(f, p * r, rq) ** r
    scale = max(abs(lhs), abs(rhs), 1e-300)
    residual = abs(lhs - rhs) / scale
    return CheckResult(residual <= 1e-10, residual)


def lorentz_holder_check(f: StepFunction, g: StepFunction, s: float) -> CheckResult:
    """Hoelder for Lorentz spaces: ||fg||_{1,1} <= ||f||_{s,inf} ||g||_{s',1}.

    Returns (holds, slack) with slack = RHS - LHS; the inequality carries
    constant one in the distribution-function normalization used here.
    """
    if f.grid != g.grid:
        raise ValueError("grid mismatch between f and g")
    if not s > 1:
        raise ValueError(f"s must exceed 1, got {s}")
    s_conj = s / (s - 1.0)
    lhs = lorentz_norm(f * g, 1.0, 1.0)
    rhs = weak_norm(f, s) * lorentz_norm(g, s_conj, 1.0)
    slack = rhs - lhs
    ok = slack >= -1e-12 * max(rhs, 1.0)
    return CheckResult(ok, slack)
