"""Dyadic lattice over a fixed root cube, and exact step-function arithmetic.

Everything downstream (maximal operators, Lorentz norms, weight constants,
Calderon-Zygmund decompositions) operates on nonnegative functions that are
constant on the 2^(depth*n) finest cells of the lattice.  Cell measures are
dyadic rationals times the root measure, so partitions and parent/child sums
stay exact in double precision; suprema over cubes are finite maxima.

Cubes are half-open boxes [a, a + h)^n, so the cells at each level partition
the root with no boundary double counting.  All enumerations are row-major in
the integer cube index, which keeps reports and tests reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

# Hard cap on the finest-cell count of a grid (2^(depth*n)).
CELL_CAP = 2 ** 24


@dataclass(frozen=True)
class DyadicCube:
    """Lattice node: ``level`` 0 is the root, the finest cells sit at depth."""

    level: int
    index: tuple[int, ...]

    def to_dict(self):
        return {"level": self.level, "index": list(self.index)}


@dataclass(frozen=True)
class GridSpec:
    """Half-open root cube [corner, corner + side)^n bisected ``depth`` times."""

    n: int
    root_corner: tuple[float, ...]
    root_side: float
    depth: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        if self.root_side <= 0:
            raise ValueError(f"root side must be positive, got {self.root_side}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")
        corner = tuple(float(c) for c in self.root_corner)
        if len(corner) != self.n:
            raise ValueError(f"corner has {len(corner)} coordinates, expected {self.n}")
        object.__setattr__(self, "root_corner", corner)
        if 2 ** (self.depth * self.n) > CELL_CAP:
            raise ValueError(
                f"2^(depth*n) = 2^{self.depth * self.n} exceeds the cell cap {CELL_CAP}"
            )

    # ------------------------------------------------------------------ sizes
    @property
    def finest_count(self) -> int:
        return 2 ** (self.depth * self.n)

    @property
    def root_measure(self) -> float:
        return self.root_side ** self.n

    def side(self, level: int) -> float:
        return self.root_side * 2.0 ** (-level)

    def cube_measure(self, level: int) -> float:
        # 2^(-level*n) is an exact power of two, so this is one rounding.
        return self.root_measure * 2.0 ** (-level * self.n)

    @property
    def cell_measure(self) -> float:
        return self.cube_measure(self.depth)

    # ------------------------------------------------------------- navigation
    def _check_level(self, level: int):
        if not 0 <= level <= self.depth:
            raise ValueError(f"level {level} outside [0, {self.depth}]")

    def cube(self, level: int, index) -> DyadicCube:
        self._check_level(level)
        idx = tuple(int(i) for i in index)
        if len(idx) != self.n or any(not 0 <= i < 2 ** level for i in idx):
            raise ValueError(f"index {idx} invalid at level {level}")
        return DyadicCube(level, idx)

    @property
    def root(self) -> DyadicCube:
        return DyadicCube(0, (0,) * self.n)

    def cells(self, level: int) -> list[DyadicCube]:
        """All cubes at ``level`` in row-major index order."""
        self._check_level(level)
        return [DyadicCube(level, idx) for idx in product(range(2 ** level), repeat=self.n)]

    def all_cubes(self):
        """Iterate every lattice cube, coarse levels first, row-major within."""
        for level in range(self.depth + 1):
            yield from self.cells(level)

    def children(self, cube: DyadicCube) -> list[DyadicCube]:
        if cube.level >= self.depth:
            raise ValueError("finest cells have no children")
        return [
            DyadicCube(cube.level + 1, tuple(2 * i + o for i, o in zip(cube.index, off)))
            for off in product((0, 1), repeat=self.n)
        ]

    def parent(self, cube: DyadicCube) -> DyadicCube:
        if cube.level == 0:
            raise ValueError("the root has no parent")
        return DyadicCube(cube.level - 1, tuple(i // 2 for i in cube.index))

    def contains(self, outer: DyadicCube, inner: DyadicCube) -> bool:
        if inner.level < outer.level:
            return False
        shift = inner.level - outer.level
        return all(i >> shift == o for i, o in zip(inner.index, outer.index))

    def cube_corner(self, cube: DyadicCube) -> tuple[float, ...]:
        h = self.side(cube.level)
        return tuple(c + i * h for c, i in zip(self.root_corner, cube.index))

    def cube_center(self, cube: DyadicCube) -> tuple[float, ...]:
        h = self.side(cube.level)
        return tuple(c + h / 2.0 for c in self.cube_corner(cube))

    def flat_index(self, cube: DyadicCube) -> int:
        return int(np.ravel_multi_index(cube.index, (2 ** cube.level,) * self.n))

    def cube_from_flat(self, level: int, flat: int) -> DyadicCube:
        idx = np.unravel_index(flat, (2 ** level,) * self.n)
        return DyadicCube(level, tuple(int(i) for i in idx))

    def cell_slices(self, cube: DyadicCube) -> tuple[slice, ...]:
        """Slices into the (2^depth,)*n value array covering ``cube``."""
        s = 2 ** (self.depth - cube.level)
        return tuple(slice(i * s, (i + 1) * s) for i in cube.index)

    def cell_mask(self, cube: DyadicCube) -> np.ndarray:
        """Boolean mask over the flat finest-cell array selecting ``cube``."""
        mask = np.zeros((2 ** self.depth,) * self.n, dtype=bool)
        mask[self.cell_slices(cube)] = True
        return mask.reshape(-1)

    def cell_centers(self) -> np.ndarray:
        """(finest_count, n) array of finest-cell centers, row-major."""
        h = self.side(self.depth)
        axes = [np.asarray(self.root_corner)[k] + (np.arange(2 ** self.depth) + 0.5) * h
                for k in range(self.n)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=-1)


class StepFunction:
    """Nonnegative function constant on the finest cells of a grid.

    ``values`` is a flat array of length 2^(depth*n) in row-major cell order;
    it is frozen after construction, so instances are safe to share.
    """

    def __init__(self, grid: GridSpec, values):
        vals = np.array(values, dtype=float).reshape(-1)
        if vals.size != grid.finest_count:
            raise ValueError(
                f"expected {grid.finest_count} cell values, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("cell values must be finite")
        if np.any(vals < 0):
            raise ValueError("cell values must be nonnegative")
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals

    # ------------------------------------------------------------ constructors
    @classmethod
    def constant(cls, grid: GridSpec, c: float) -> "StepFunction":
        return cls(grid, np.full(grid.finest_count, float(c)))

    @classmethod
    def indicator(cls, grid: GridSpec, cube: DyadicCube) -> "StepFunction":
        return cls(grid, grid.cell_mask(cube).astype(float))

    def with_values(self, values) -> "StepFunction":
        return StepFunction(self.grid, values)

    # ------------------------------------------------------------- arithmetic
    def __mul__(self, other):
        if isinstance(other, StepFunction):
            if other.grid != self.grid:
                raise ValueError("grid mismatch in pointwise product")
            return StepFunction(self.grid, self.values * other.values)
        return StepFunction(self.grid, self.values * float(other))

    __rmul__ = __mul__

    def __pow__(self, e: float):
        return StepFunction(self.grid, self.values ** float(e))

    # ------------------------------------------------------------ cube access
    def block(self, cube: DyadicCube | None = None) -> np.ndarray:
        """Values of the cells inside ``cube`` (whole root if None), row-major."""
        if cube is None:
            return self.values
        full = self.values.reshape((2 ** self.grid.depth,) * self.grid.n)
        return full[self.grid.cell_slices(cube)].reshape(-1)

    def integral(self, cube: DyadicCube | None = None) -> float:
        """Exact integral over ``cube``: sum of cell values times cell measure."""
        return float(self.block(cube).sum()) * self.grid.cell_measure

    def average(self, cube: DyadicCube | None = None) -> float:
        measure = self.grid.root_measure if cube is None else self.grid.cube_measure(cube.level)
        return self.integral(cube) / measure

    def superlevel_measure(self, lam: float, cube: DyadicCube | None = None) -> float:
        """|{x in cube : f(x) > lam}|, exact up to the cell-measure product."""
        if lam < 0:
            raise ValueError(f"threshold must be >= 0, got {lam}")
        count = int(np.count_nonzero(self.block(cube) > lam))
        return count * self.grid.cell_measure

    # ----------------------------------------------------------- serialization
    def to_dict(self) -> dict:
        return {
            "n": self.grid.n,
            "root_corner": list(self.grid.root_corner),
            "root_side": self.grid.root_side,
            "depth": self.grid.depth,
            "values": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StepFunction":
        grid = GridSpec(
            n=int(d["n"]),
            root_corner=tuple(d["root_corner"]),
            root_side=float(d["root_side"]),
            depth=int(d["depth"]),
        )
        return cls(grid, d["values"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "StepFunction":
        return cls.from_dict(json.loads(text))


# ----------------------------------------------------------- level machinery

def coarsen_sums(arr: np.ndarray) -> np.ndarray:
    """Sum the 2^n sibling blocks of an (m,)*n array down to (m/2,)*n."""
    n = arr.ndim
    m = arr.shape[0]
    shape = []
    for _ in range(n):
        shape.extend([m // 2, 2])
    return arr.reshape(shape).sum(axis=tuple(range(1, 2 * n, 2)))


def level_value_sums(f: StepFunction) -> list[np.ndarray]:
    """Per level, the sum of cell values over each cube (flat, row-major).

    Entry ``lev`` has shape (2^(lev*n),); multiplying by the cell measure gives
    the exact integral of ``f`` over every cube at that level in one array.
    """
    grid = f.grid
    cur = f.values.reshape((2 ** grid.depth,) * grid.n)
    out: list[np.ndarray] = [np.empty(0)] * (grid.depth + 1)
    out[grid.depth] = cur
    for lev in range(grid.depth, 0, -1):
        cur = coarsen_sums(cur)
        out[lev - 1] = cur
    return [a.reshape(-1) for a in out]


def cube_blocks(values: np.ndarray, grid: GridSpec, level: int) -> np.ndarray:
    """Reshape flat cell values to (cubes at level, cells per cube).

    Rows run over cubes in row-major index order; columns are the cells of
    each cube in row-major order, matching ``StepFunction.block``.
    """
    n, depth = grid.n, grid.depth
    m, b = 2 ** level, 2 ** (depth - level)
    shape = []
    for _ in range(n):
        shape.extend([m, b])
    arr = values.reshape(shape)
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return arr.transpose(order).reshape(m ** n, b ** n)
