"""Cell-centred grid functions over anisotropic boxes and their CSV format."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..geometry import AnisoBox, ExponentVector, aniso_metric

__all__ = ["GridFunction", "WeightFunction", "psi_weighted_poincare", "CSV_VERSION"]

CSV_VERSION = "anisoreg-grid v1"
EXTENSIONS = ("zero", "periodic")


@dataclass
class GridFunction:
    """Piecewise-constant function on a tensor grid of ``box``.

    ``values[i_1, ..., i_d]`` is the value on the cell whose centre is
    ``lower + (i + 1/2) h``.  ``extension`` says how the function continues
    outside the box: ``"zero"``, ``"periodic"`` (the box is one period cell) or
    a callable ``f(points) -> values``.
    """

    box: AnisoBox
    values: np.ndarray
    extension: str | Callable = "zero"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != self.box.d:
            raise ValueError(f"values must have {self.box.d} axes, got {v.ndim}")
        if min(v.shape) < 2:
            raise ValueError("resolution must be at least 2 per axis")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        if isinstance(self.extension, str) and self.extension not in EXTENSIONS:
            raise ValueError(f"unknown extension {self.extension!r}")
        self.values = v

    @classmethod
    def from_function(cls, box: AnisoBox, resolution, f: Callable, extension="zero") -> "GridFunction":
        res = _resolution(resolution, box.d)
        pts = cell_centers(box, res)
        return cls(box, np.asarray(f(pts), dtype=float).reshape(res), extension)

    @property
    def resolution(self) -> tuple:
        return self.values.shape

    @property
    def spacing(self) -> np.ndarray:
        return 2.0 * self.box.half_widths / np.asarray(self.resolution)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def centers(self) -> np.ndarray:
        return cell_centers(self.box, self.resolution)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.box, values, self.extension)

    def integral(self, weight=None) -> float:
        v = self.values if weight is None else self.values * weight
        return float(np.sum(v)) * self.cell_volume

    def mean(self) -> float:
        return float(np.mean(self.values))

    def norm(self, p: float = 2.0, mask=None) -> float:
        v = np.abs(self.values if mask is None else self.values[mask])
        if np.isinf(p):
            return float(v.max(initial=0.0))
        return float(np.sum(v**p) * self.cell_volume) ** (1.0 / p)

    def exterior(self, points) -> np.ndarray:
        """Evaluate the extension at points outside the box."""
        pts = np.asarray(points, dtype=float)
        if callable(self.extension):
            return np.asarray(self.extension(pts), dtype=float)
        if self.extension == "zero":
            inside = self.box.contains(pts)
            return np.where(inside, self.at(pts, clip=True), 0.0)
        lo = self.box.lower
        period = 2.0 * self.box.half_widths
        return self.at(lo + np.mod(pts - lo, period), clip=True)

    def at(self, points, clip: bool = False) -> np.ndarray:
        """Piecewise-constant evaluation at points of the box."""
        pts = np.asarray(points, dtype=float)
        idx = np.floor((pts - self.box.lower) / self.spacing).astype(int)
        if clip:
            idx = np.clip(idx, 0, np.asarray(self.resolution) - 1)
        return self.values[tuple(np.moveaxis(idx, -1, 0))]

    # -- serialization ----------------------------------------------------

    def to_csv(self) -> str:
        """CSV with a commented header; rows list ``x_1..x_d, value`` with x_1 varying fastest."""
        out = io.StringIO()
        b = self.box
        out.write(f"# {CSV_VERSION}\n")
        out.write("# sizes=" + ",".join(str(n) for n in self.resolution) + "\n")
        out.write("# center=" + ",".join(repr(float(c)) for c in b.center) + f"\n# radius={b.radius!r}\n")
        out.write("# alphas=" + ",".join(repr(a) for a in b.exponents.alphas) + f"\n# alpha0={b.exponents.alpha0!r}\n")
        ext = self.extension if isinstance(self.extension, str) else "zero"
        out.write(f"# extension={ext}\n")
        out.write(",".join(f"x{k + 1}" for k in range(b.d)) + ",value\n")
        c = self.centers()
        flat_pts = np.stack([c[..., k].ravel(order="F") for k in range(b.d)], axis=1)
        flat_vals = self.values.ravel(order="F")
        for row, v in zip(flat_pts, flat_vals):
            out.write(",".join(repr(float(x)) for x in row) + f",{float(v)!r}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        meta = {}
        lines = text.splitlines()
        body = []
        for line in lines:
            if line.startswith("#"):
                if "=" in line:
                    k, v = line[1:].strip().split("=", 1)
                    meta[k] = v
                elif CSV_VERSION not in line:
                    raise ValueError(f"unsupported grid CSV header {line!r}")
            elif line.strip():
                body.append(line)
        sizes = tuple(int(s) for s in meta["sizes"].split(","))
        ev = ExponentVector(tuple(float(a) for a in meta["alphas"].split(",")), float(meta["alpha0"]))
        box = AnisoBox(np.array([float(c) for c in meta["center"].split(",")]), float(meta["radius"]), ev)
        data = np.loadtxt(io.StringIO("\n".join(body[1:])), delimiter=",", ndmin=2)
        values = data[:, -1].reshape(sizes, order="F")
        return cls(box, values, meta.get("extension", "zero"))


def _resolution(resolution, d: int) -> tuple:
    if np.ndim(resolution) == 0:
        return (int(resolution),) * d
    res = tuple(int(n) for n in resolution)
    if len(res) != d:
        raise ValueError("resolution length does not match the dimension")
    return res


def cell_centers(box: AnisoBox, resolution) -> np.ndarray:
    res = _resolution(resolution, box.d)
    h = 2.0 * box.half_widths / np.asarray(res)
    axes = [box.lower[k] + (np.arange(n) + 0.5) * h[k] for k, n in enumerate(res)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


@dataclass(frozen=True)
class WeightFunction:
    """Spatial weight ``psi``; ``tag`` is ``"psi_weighted_poincare"`` or ``"custom"``."""

    func: Callable = field(compare=False)
    tag: str = "custom"

    def __call__(self, points) -> np.ndarray:
        return np.asarray(self.func(np.asarray(points, dtype=float)), dtype=float)

    def on(self, u: GridFunction) -> np.ndarray:
        return self(u.centers())


def psi_weighted_poincare(ev: ExponentVector) -> WeightFunction:
    """``((3 - 2 sup_k |x_k|^(alpha_k/alpha_max)) ^ 1) v 0``: one on M_1, zero off M_{3/2}."""

    def psi(x):
        return np.clip(3.0 - 2.0 * aniso_metric(x, 0.0, ev), 0.0, 1.0)

    return WeightFunction(psi, "psi_weighted_poincare")
