"""Weight constants over the dyadic lattice, dual weights, and a 1-D
analytic power-weight engine.

Tabulated weights are StepFunctions; every constant is the exact maximum of
its per-cube expression over the lattice cubes, with the attaining cube
returned as witness.  The multiplier classes replace the L^1 average of w
(or w^q) on a cube by its weak-L^1 quasi-norm restricted to the cube.

The power engine evaluates w(x) = |x - center|^exponent on an interval with
closed-form cube integrals, essential suprema and weak-L^1 norms, so weights
like |x|^(-1) can be probed without discretization: divergent integrals
produce +inf as a first-class value, never an exception.  Throughout, the
0 * inf = 0 convention applies to degenerate products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .grid import (
    DyadicCube,
    GridSpec,
    StepFunction,
    coarsen_sums,
    cube_blocks,
)

INF = math.inf


def conjugate(p: float) -> float:
    """Hoelder conjugate p' = p/(p-1)."""
    if not p > 1:
        raise ValueError(f"conjugate exponent needs p > 1, got {p}")
    return p / (p - 1.0)


# --------------------------------------------------------------------------
# analytic power weights
# --------------------------------------------------------------------------

def _distance_integral(a: float, d1: float, d2: float) -> float:
    """int_{d1}^{d2} u^a du for 0 <= d1 < d2, +inf when divergent at 0."""
    if d1 == 0.0:
        if a <= -1.0:
            return INF
        return d2 ** (a + 1.0) / (a + 1.0)
    if a == -1.0:
        return math.log(d2 / d1)
    return (d2 ** (a + 1.0) - d1 ** (a + 1.0)) / (a + 1.0)


@dataclass(frozen=True)
class PowerWeight:
    """w(x) = |x - center|^exponent on the root interval [left, right)."""

    center: float
    exponent: float
    left: float
    right: float

    def __post_init__(self):
        if not self.right > self.left:
            raise ValueError("empty root interval")

    def lattice(self, depth: int) -> GridSpec:
        return GridSpec(1, (self.left,), self.right - self.left, depth)

    def power(self, e: float) -> "PowerWeight":
        """w^e, again a power weight."""
        return PowerWeight(self.center, self.exponent * e, self.left, self.right)

    def moment(self, e: float, lo: float, hi: float) -> float:
        """int_lo^hi |x - c|^(exponent * e) dx, +inf when divergent."""
        a = self.exponent * e
        c = self.center
        if hi <= c:
            return _distance_integral(a, c - hi, c - lo)
        if lo >= c:
            return _distance_integral(a, lo - c, hi - c)
        return _distance_integral(a, 0.0, c - lo) + _distance_integral(a, 0.0, hi - c)

    def integral(self, lo: float, hi: float) -> float:
        return self.moment(1.0, lo, hi)

    def ess_sup_inv(self, lo: float, hi: float) -> float:
        """ess sup of w^(-1) = |x-c|^(-exponent) over [lo, hi)."""
        a = self.exponent
        c = self.center
        if a == 0.0:
            return 1.0
        dlo, dhi = abs(lo - c), abs(hi - c)
        if a < 0.0:
            return max(dlo, dhi) ** (-a)
        if lo <= c <= hi:
            return INF
        return min(dlo, dhi) ** (-a)

    def weak_l1(self, lo: float, hi: float, power: float = 1.0) -> float:
        """|| w^power chi_[lo,hi) ||_{L^{1,inf}} in closed form.

        With t the distance threshold (lam = t^a), the superlevel measure
        h(t) is piecewise affine with breakpoints at the endpoint distances,
        so sup_t t^a h(t) is attained at a breakpoint, at an interior critical
        point t* = -a u / ((a+1) v) of an affine piece h = u + v t, or in the
        t -> 0 limit at the singularity.
        """
        a = self.exponent * power
        c = self.center
        length = hi - lo
        if a == 0.0:
            return length

        dlo, dhi = abs(lo - c), abs(hi - c)
        inside_closure = lo <= c <= hi

        if a < 0.0:
            def h(t):
                return max(0.0, min(hi, c + t) - max(lo, c - t))
        else:
            def h(t):
                return length - max(0.0, min(hi, c + t) - max(lo, c - t))

        def g(t):
            ht = h(t)
            return t ** a * ht if ht > 0.0 else 0.0

        best = 0.0
        if a < 0.0 and inside_closure:
            # h(t) = v0 * t near 0, so g -> v0 * t^(a+1).
            v0 = 2.0 if lo < c < hi else 1.0
            if a < -1.0:
                return INF
            if a == -1.0:
                best = v0

        breaks = sorted({d for d in (dlo, dhi) if d > 0.0})
        for t in breaks:
            best = max(best, g(t))
        # Interior critical points of each affine piece of h.
        edges = [0.0] + breaks
        edges.append(edges[-1] * 2.0 + length)
        for t_lo, t_hi in zip(edges[:-1], edges[1:]):
            if not t_hi > t_lo:
                continue
            t1 = t_lo + (t_hi - t_lo) / 3.0
            t2 = t_lo + 2.0 * (t_hi - t_lo) / 3.0
            v = (h(t2) - h(t1)) / (t2 - t1)
            u = h(t1) - v * t1
            if a != -1.0 and v != 0.0:
                t_star = -a * u / ((a + 1.0) * v)
                if t_lo < t_star < t_hi:
                    best = max(best, g(t_star))
        # Beyond the last breakpoint h is constant: g decays for a < 0 and
        # vanishes for a > 0 (the ball swallowed the interval), so no further
        # candidates arise past the last edge.
        return best

    def tabulate(self, depth: int) -> StepFunction:
        """Exact cell averages; a cell with divergent integral falls back to
        the harmonic regularization 1 / <w^{-1}>_cell (always finite here,
        since |x-c|^a and |x-c|^(-a) cannot both be non-integrable)."""
        grid = self.lattice(depth)
        h = grid.side(depth)
        vals = np.empty(grid.finest_count)
        for j in range(grid.finest_count):
            lo = self.left + j * h
            hi = lo + h
            mass = self.integral(lo, hi)
            if math.isfinite(mass):
                vals[j] = mass / h
            else:
                vals[j] = h / self.moment(-1.0, lo, hi)
        return StepFunction(grid, vals)


Weight = Union[StepFunction, PowerWeight]


# --------------------------------------------------------------------------
# per-cube machinery shared by the constants and witness re-evaluation
# --------------------------------------------------------------------------

def _zero_inf(arr: np.ndarray) -> np.ndarray:
    # nan only arises from 0 * inf products; the convention sends those to 0.
    return np.where(np.isnan(arr), 0.0, arr)


def _grid_of(w: Weight, depth: int | None) -> GridSpec:
    if isinstance(w, StepFunction):
        return w.grid
    if depth is None:
        raise ValueError("power weights need an explicit lattice depth")
    return w.lattice(depth)


def level_sums_of(values: np.ndarray, grid: GridSpec) -> list[np.ndarray]:
    """Per-level cube sums of a raw cell array (may contain +inf, unlike a
    StepFunction); layout identical to grid.level_value_sums."""
    cur = np.asarray(values, dtype=float).reshape((2 ** grid.depth,) * grid.n)
    out: list[np.ndarray] = [np.empty(0)] * (grid.depth + 1)
    out[grid.depth] = cur
    for lev in range(grid.depth, 0, -1):
        cur = coarsen_sums(cur)
        out[lev - 1] = cur
    return [a.reshape(-1) for a in out]


def _weak_l1_rows(values: np.ndarray, grid: GridSpec, lev: int) -> np.ndarray:
    """||v chi_Q||_{1,inf} for every cube Q at a level, by the sorted scan."""
    blocks = np.sort(cube_blocks(values, grid, lev), axis=1)[:, ::-1]
    counts = np.arange(1, blocks.shape[1] + 1, dtype=float) * grid.cell_measure
    return np.max(blocks * counts, axis=1)


def _avgs(sums: list[np.ndarray], grid: GridSpec, lev: int) -> np.ndarray:
    return sums[lev] * grid.cell_measure / grid.cube_measure(lev)


def _power_levels(pw: PowerWeight, grid: GridSpec, cube_value):
    def level_values(lev):
        h = grid.side(lev)
        return np.array([cube_value(pw.left + i * h, pw.left + (i + 1) * h)
                         for i in range(2 ** lev)])
    return level_values


def _cell_power(vals: np.ndarray, e: float) -> np.ndarray:
    # 0^e for e < 0 is +inf here (zero cells make the dual mass divergent).
    with np.errstate(divide="ignore"):
        return vals ** e


def _levels(kind: str, w: Weight, grid: GridSpec, p=None, q=None, r=None):
    """Build the per-level array closure for one constant's cube expression."""
    if isinstance(w, PowerWeight):
        return _power_levels(w, grid, _power_cube_expr(kind, w, p=p, q=q, r=r))

    vals = w.values
    if kind == "ap":
        pc = conjugate(p)
        w_sums = level_sums_of(vals, grid)
        s_sums = level_sums_of(_cell_power(vals, 1.0 - pc), grid)

        def level_values(lev):
            return _avgs(w_sums, grid, lev) * _avgs(s_sums, grid, lev) ** (p - 1.0)

    elif kind == "a1":
        w_sums = level_sums_of(vals, grid)

        def level_values(lev):
            mins = cube_blocks(vals, grid, lev).min(axis=1)
            with np.errstate(divide="ignore"):
                return _avgs(w_sums, grid, lev) / mins

    elif kind == "apq":
        pc = conjugate(p)
        q_sums = level_sums_of(vals ** q, grid)
        s_sums = level_sums_of(_cell_power(vals, -pc), grid)

        def level_values(lev):
            return (_avgs(q_sums, grid, lev) ** (1.0 / q)
                    * _avgs(s_sums, grid, lev) ** (1.0 / pc))

    elif kind == "a1q":
        q_sums = level_sums_of(vals ** q, grid)

        def level_values(lev):
            mins = cube_blocks(vals, grid, lev).min(axis=1)
            with np.errstate(divide="ignore"):
                return _avgs(q_sums, grid, lev) ** (1.0 / q) / mins

    elif kind == "rh":
        w_sums = level_sums_of(vals, grid)
        r_sums = level_sums_of(vals ** r, grid)

        def level_values(lev):
            avg_w = _avgs(w_sums, grid, lev)
            avg_r = _avgs(r_sums, grid, lev)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = avg_r ** (1.0 / r) / avg_w
            return np.where(avg_w > 0, out, 0.0)

    elif kind == "ap_star":
        pc = conjugate(p)
        s_sums = level_sums_of(_cell_power(vals, 1.0 - pc), grid)

        def level_values(lev):
            weak = _weak_l1_rows(vals, grid, lev)
            return (weak / grid.cube_measure(lev)
                    * _avgs(s_sums, grid, lev) ** (p - 1.0))

    elif kind == "apq_star":
        pc = conjugate(p)
        wq = vals ** q
        s_sums = level_sums_of(_cell_power(vals, -pc), grid)

        def level_values(lev):
            weak = _weak_l1_rows(wq, grid, lev)
            return ((weak / grid.cube_measure(lev)) ** (1.0 / q)
                    * _avgs(s_sums, grid, lev) ** (1.0 / pc))

    else:
        raise ValueError(f"unknown constant kind {kind!r}")
    return level_values


def _power_cube_expr(kind: str, pw: PowerWeight, p=None, q=None, r=None):
    """Scalar (lo, hi) -> per-cube value map for a power weight."""
    if kind == "ap":
        pc = conjugate(p)

        def cube_value(lo, hi):
            meas = hi - lo
            return (pw.integral(lo, hi) / meas
                    * (pw.moment(1.0 - pc, lo, hi) / meas) ** (p - 1.0))

    elif kind == "a1":
        def cube_value(lo, hi):
            return pw.integral(lo, hi) / (hi - lo) * pw.ess_sup_inv(lo, hi)

    elif kind == "apq":
        pc = conjugate(p)

        def cube_value(lo, hi):
            meas = hi - lo
            return ((pw.moment(q, lo, hi) / meas) ** (1.0 / q)
                    * (pw.moment(-pc, lo, hi) / meas) ** (1.0 / pc))

    elif kind == "a1q":
        def cube_value(lo, hi):
            return ((pw.moment(q, lo, hi) / (hi - lo)) ** (1.0 / q)
                    * pw.ess_sup_inv(lo, hi))

    elif kind == "rh":
        def cube_value(lo, hi):
            meas = hi - lo
            avg_w = pw.integral(lo, hi) / meas
            if math.isinf(avg_w):
                return INF  # divergent mass: outside every RH class here
            return (pw.moment(r, lo, hi) / meas) ** (1.0 / r) / avg_w

    elif kind == "ap_star":
        def cube_value(lo, hi):
            return ap_star_cube_value(pw, p, lo, hi)

    elif kind == "apq_star":
        pc = conjugate(p)

        def cube_value(lo, hi):
            meas = hi - lo
            return ((pw.weak_l1(lo, hi, power=q) / meas) ** (1.0 / q)
                    * (pw.moment(-pc, lo, hi) / meas) ** (1.0 / pc))

    else:
        raise ValueError(f"unknown constant kind {kind!r}")
    return cube_value


def _scan(tag: str, w: Weight, grid: GridSpec, *, p=None, q=None, r=None) -> "WeightConstant":
    level_values = _levels(tag, w, grid, p=p, q=q, r=r)
    best = -INF
    witness = grid.root
    for lev in range(grid.depth + 1):
        arr = _zero_inf(np.asarray(level_values(lev), dtype=float))
        j = int(np.argmax(arr))
        if arr[j] > best:
            best = float(arr[j])
            witness = grid.cube_from_flat(lev, j)
        if math.isinf(best):
            break
    return WeightConstant(tag, best, witness, p=p, q=q, r=r)


# --------------------------------------------------------------------------
# the constants
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightConstant:
    """One weight-class constant: its value, the attaining cube, and context."""

    tag: str
    value: float
    witness: DyadicCube | None
    p: float | None = None
    q: float | None = None
    r: float | None = None

    def to_dict(self) -> dict:
        return {
            "class": self.tag,
            "p": self.p,
            "q": self.q,
            "r": self.r,
            "value": self.value,
            "witness": self.witness.to_dict() if self.witness is not None else None,
        }


def ap_constant(w: Weight, p: float, depth: int | None = None) -> WeightConstant:
    """[w]_{A_p} = max_Q <w>_Q <w^{1-p'}>_Q^{p-1} over lattice cubes."""
    conjugate(p)
    return _scan("ap", w, _grid_of(w, depth), p=p)


def a1_constant(w: Weight, depth: int | None = None) -> WeightConstant:
    """[w]_{A_1} = max_Q <w>_Q ess sup_Q w^{-1} (ess sup = max over cells)."""
    return _scan("a1", w, _grid_of(w, depth))


def apq_constant(w: Weight, p: float, q: float, depth: int | None = None) -> WeightConstant:
    """[w]_{A_{p,q}} = max_Q <w^q>_Q^{1/q} <w^{-p'}>_Q^{1/p'}."""
    conjugate(p)
    if not q > p:
        raise ValueError(f"fractional class needs q > p, got p={p}, q={q}")
    return _scan("apq", w, _grid_of(w, depth), p=p, q=q)


def a1q_constant(w: Weight, q: float, depth: int | None = None) -> WeightConstant:
    """[w]_{A_{1,q}} = max_Q <w^q>_Q^{1/q} ess sup_Q w^{-1}."""
    if not q > 1:
        raise ValueError(f"A_1q needs q > 1, got {q}")
    return _scan("a1q", w, _grid_of(w, depth), q=q)


def rh_constant(w: Weight, r: float, depth: int | None = None) -> WeightConstant:
    """[w]_{RH_r} = max_Q <w^r>_Q^{1/r} / <w>_Q."""
    if not r > 1:
        raise ValueError(f"reverse Hoelder needs r > 1, got {r}")
    return _scan("rh", w, _grid_of(w, depth), r=r)


def ap_star_constant(w: Weight, p: float, depth: int | None = None) -> WeightConstant:
    """[w]_{A_p^*} = max_Q (1/|Q|) ||w chi_Q||_{1,inf} <w^{1-p'}>_Q^{p-1}."""
    conjugate(p)
    return _scan("ap_star", w, _grid_of(w, depth), p=p)


def apq_star_constant(w: Weight, p: float, q: float, depth: int | None = None) -> WeightConstant:
    """[w]_{A_{p,q}^*} = max_Q ((1/|Q|)||w^q chi_Q||_{1,inf})^{1/q} <w^{-p'}>_Q^{1/p'}."""
    conjugate(p)
    if not q > p:
        raise ValueError(f"fractional class needs q > p, got p={p}, q={q}")
    return _scan("apq_star", w, _grid_of(w, depth), p=p, q=q)


def ap_star_cube_value(pw: PowerWeight, p: float, lo: float, hi: float) -> float:
    """Single-cube A_p^* expression for a power weight, in closed form."""
    pc = conjugate(p)
    meas = hi - lo
    return (pw.weak_l1(lo, hi) / meas
            * (pw.moment(1.0 - pc, lo, hi) / meas) ** (p - 1.0))


def weight_cube_value(w: Weight, kind: str, cube: DyadicCube, *, p=None, q=None,
                      r=None, depth: int | None = None) -> float:
    """Re-evaluate one constant's per-cube expression at a single cube.

    Runs the same per-level arrays the constant scan used and indexes the
    cube, so a reported witness reproduces its constant bit-for-bit.
    """
    grid = _grid_of(w, depth)
    level_values = _levels(kind, w, grid, p=p, q=q, r=r)
    arr = _zero_inf(np.asarray(level_values(cube.level), dtype=float))
    return float(arr[grid.flat_index(cube)])


def ap_star_kernel_cube_value(w: StepFunction, p: float, cube: DyadicCube) -> float:
    """One cube's kernel-form A_p^* expression: the weak-L^1 norm over the
    whole root of w times the rational kernel centered at the cube, times the
    dual average on the cube.  Kernel sampled at cell centers."""
    if not isinstance(w, StepFunction):
        raise ValueError("kernel constant supports tabulated weights only")
    pc = conjugate(p)
    grid = w.grid
    meas = grid.cube_measure(cube.level)
    x_q = np.asarray(grid.cube_center(cube))
    dist = np.linalg.norm(grid.cell_centers() - x_q, axis=1)
    kernel = meas ** (p - 1.0) / (meas ** p + dist ** p)
    vals = np.sort(w.values * kernel)[::-1]
    counts = np.arange(1, grid.finest_count + 1, dtype=float) * grid.cell_measure
    weak = float(np.max(vals * counts))
    avg_s = float(_cell_power(w.block(cube), 1.0 - pc).sum()) * grid.cell_measure / meas
    value = weak * avg_s ** (p - 1.0)
    return 0.0 if math.isnan(value) else value


def ap_star_kernel_constant(w: Weight, p: float) -> WeightConstant:
    """Kernel form of A_p^*: the cutoff chi_Q is replaced by the rational
    kernel |Q|^{p-1} / (|Q|^p + |x - x_Q|^p), with the weak norm taken over
    the whole root.  Approximation by construction: the kernel is sampled at
    cell centers and the domain is truncated to the root cube.
    """
    if not isinstance(w, StepFunction):
        raise ValueError("kernel constant supports tabulated weights only")
    grid = w.grid
    best = -INF
    witness = grid.root
    for cube in grid.all_cubes():
        value = ap_star_kernel_cube_value(w, p, cube)
        if value > best:
            best = value
            witness = cube
    return WeightConstant("ap_star_kernel", best, witness, p=p)


# --------------------------------------------------------------------------
# dual weights and the lemma constants
# --------------------------------------------------------------------------

def dual_weight(w: Weight, p: float, flavor: str = "ap") -> Weight:
    """sigma = w^{1-p'} (flavor "ap") or w^{-p'} (flavor "apq")."""
    pc = conjugate(p)
    if flavor == "ap":
        e = 1.0 - pc
    elif flavor == "apq":
        e = -pc
    else:
        raise ValueError(f"flavor must be 'ap' or 'apq', got {flavor!r}")
    if isinstance(w, PowerWeight):
        return w.power(e)
    if np.any(w.values <= 0.0):
        raise ValueError("dual weight needs strictly positive cell values")
    return w ** e


class SigmaRH(NamedTuple):
    """Subset-inequality constants (c, [sigma]_RH) attached to a star class."""

    c: float
    value: float


def sigma_rh_constant(w: Weight, p: float, q: float | None = None,
                      depth: int | None = None) -> SigmaRH:
    """The pair (c, [sigma]_RH) in (|E|/|Q|)^{2p'} <= c [sigma]_RH sigma(E)/sigma(Q).

    Plain flavor: c = 4^{p'/p} and [sigma]_RH = [w]_{A_p^*}^{p'-1} for
    sigma = w^{1-p'}; fractional flavor (q given): c = 4^{p'/q} and
    [sigma]_RH = [w]_{A_{p,q}^*}^{p'} for sigma = w^{-p'}.  An infinite star
    constant propagates to +inf.
    """
    pc = conjugate(p)
    if q is None:
        star = ap_star_constant(w, p, depth=depth).value
        return SigmaRH(4.0 ** (pc / p), star ** (pc - 1.0))
    star = apq_star_constant(w, p, q, depth=depth).value
    return SigmaRH(4.0 ** (pc / q), star ** pc)


# --------------------------------------------------------------------------
# weight-spec serialization
# --------------------------------------------------------------------------

def weight_to_dict(w: Weight) -> dict:
    if isinstance(w, StepFunction):
        return {"mode": "tabulated", "step": w.to_dict()}
    return {
        "mode": "power",
        "center": w.center,
        "exponent": w.exponent,
        "root": [w.left, w.right],
    }


def weight_from_dict(d: dict) -> Weight:
    mode = d.get("mode")
    if mode == "tabulated":
        return StepFunction.from_dict(d["step"])
    if mode == "power":
        lo, hi = d["root"]
        return PowerWeight(float(d["center"]), float(d["exponent"]), float(lo), float(hi))
    raise ValueError(f"weight spec field 'mode' must be 'tabulated' or 'power', got {mode!r}")
