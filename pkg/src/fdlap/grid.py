"""Finitely supported functions on the mesh ``Z_h = {h j : j in Z}``."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["GridFunction", "read_grid_csv"]


@dataclass(frozen=True)
class GridFunction:
    """Values ``u_j`` for ``j = offset .. offset + N - 1``; zero elsewhere.

    Parameters
    ----------
    h : float
        Mesh size.
    offset : int
        Index of the first stored value.
    values : array_like
        The stored values (at least one).
    """

    h: float
    offset: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if vals.size == 0:
            raise ValueError("GridFunction needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise ValueError("GridFunction values must be finite")
        if not (np.isfinite(self.h) and self.h > 0):
            raise ValueError(f"mesh size must be positive, got {self.h!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "h", float(self.h))

    # -- construction ---------------------------------------------------
    @classmethod
    def delta(cls, h: float, j: int = 0, mass: float = 1.0) -> "GridFunction":
        return cls(h, j, [mass])

    @classmethod
    def zeros(cls, h: float, lo: int, hi: int) -> "GridFunction":
        return cls(h, lo, np.zeros(hi - lo + 1))

    # -- geometry -------------------------------------------------------
    def __len__(self) -> int:
        return self.values.size

    @property
    def lo(self) -> int:
        return self.offset

    @property
    def hi(self) -> int:
        return self.offset + self.values.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    @property
    def x(self) -> np.ndarray:
        return self.h * self.indices

    def support(self) -> tuple[int, int] | None:
        """Smallest index interval holding the nonzero values, or ``None``."""
        nz = np.flatnonzero(self.values)
        if nz.size == 0:
            return None
        return self.lo + int(nz[0]), self.lo + int(nz[-1])

    def support_count(self) -> int:
        return int(np.count_nonzero(self.values))

    def on_window(self, lo: int, hi: int) -> "GridFunction":
        """Values on ``lo..hi`` (zero-padded or cut as needed)."""
        if hi < lo:
            raise ValueError("empty window")
        out = np.zeros(hi - lo + 1)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            out[a - lo : b - lo + 1] = self.values[a - self.lo : b - self.lo + 1]
        return GridFunction(self.h, lo, out)

    def at(self, j) -> np.ndarray:
        """Values at arbitrary indices (zero outside the stored window)."""
        j = np.asarray(j)
        out = np.zeros(j.shape)
        inside = (j >= self.lo) & (j <= self.hi)
        out[inside] = self.values[j[inside] - self.lo]
        return out

    def trimmed(self) -> "GridFunction":
        sup = self.support()
        if sup is None:
            return GridFunction(self.h, self.lo, [0.0])
        return self.on_window(*sup)

    # -- algebra ----------------------------------------------------------
    def _aligned(self, other: "GridFunction"):
        if not np.isclose(self.h, other.h, rtol=1e-14, atol=0):
            raise ValueError(f"mesh mismatch: {self.h} vs {other.h}")
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        return lo, hi, self.on_window(lo, hi).values, other.on_window(lo, hi).values

    def __add__(self, other: "GridFunction") -> "GridFunction":
        lo, _, a, b = self._aligned(other)
        return GridFunction(self.h, lo, a + b)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        lo, _, a, b = self._aligned(other)
        return GridFunction(self.h, lo, a - b)

    def __mul__(self, c: float) -> "GridFunction":
        return GridFunction(self.h, self.lo, c * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return self * -1.0

    # -- norms ------------------------------------------------------------
    def norm(self, p: float = 2.0) -> float:
        """Mesh norm ``(h sum |u_j|^p)^(1/p)``; ``p = inf`` gives the max norm."""
        if np.isinf(p):
            return float(np.max(np.abs(self.values)))
        if p <= 0:
            raise ValueError("p must be positive")
        a = np.abs(self.values)
        scale = a.max()
        if scale == 0:
            return 0.0
        return float(scale * (self.h * np.sum((a / scale) ** p)) ** (1.0 / p))

    def inner(self, other: "GridFunction") -> float:
        _, _, a, b = self._aligned(other)
        return float(self.h * np.dot(a, b))

    # -- serialization ------------------------------------------------------
    def to_csv(self, path=None) -> str:
        """CSV with columns ``j, x, value``; a comment header records ``h`` and ``offset``."""
        buf = io.StringIO()
        buf.write(f"# h={self.h!r} offset={self.offset}\n")
        buf.write("j,x,value\n")
        for j, xv, v in zip(self.indices, self.x, self.values):
            buf.write(f"{int(j)},{float(xv)!r},{float(v)!r}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def read_grid_csv(source) -> GridFunction:
    """Parse the format written by :meth:`GridFunction.to_csv`.

    ``source`` is a path or the CSV text itself. Indices need not be
    contiguous; gaps are filled with zeros. Without a header comment ``h`` is
    recovered from the ``x`` column.
    """
    text = Path(source).read_text() if _is_path(source) else str(source)
    h = None
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("h="):
                    h = float(tok[2:])
            continue
        if line.lower().startswith("j"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected 3 columns (j,x,value), got {line!r}")
        rows.append((int(parts[0]), float(parts[1]), float(parts[2])))
    if not rows:
        raise ValueError("no data rows in grid CSV")
    js = np.array([r[0] for r in rows])
    if h is None:
        nz = js != 0
        if not np.any(nz):
            raise ValueError("cannot infer h from a single row at j=0")
        h = float(np.median(np.array([r[1] for r in rows])[nz] / js[nz]))
    lo, hi = int(js.min()), int(js.max())
    vals = np.zeros(hi - lo + 1)
    vals[js - lo] = [r[2] for r in rows]
    return GridFunction(h, lo, vals)


def _is_path(source) -> bool:
    if isinstance(source, Path):
        return True
    s = str(source)
    return "\n" not in s and not s.lstrip().startswith(("#", "j,")) and Path(s).exists()
