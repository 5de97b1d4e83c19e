"""Shared domain types, defaults and flat-file serialization.

The Dirac system is ``B y' + V y = lam y`` on ``[0, pi]`` with

    B = [[0, 1], [-1, 0]],    V = [[p, q], [q, -p]],

and periodic (``theta = 0``) or antiperiodic (``theta = 1``) boundary
conditions.  Everything here is immutable once constructed.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import ValidationError

SCHEMA_VERSION = 1
_TIE_TOL = 1e-9

__all__ = [
    "BoundaryKind",
    "PERIODIC",
    "ANTIPERIODIC",
    "PotentialGrid",
    "Monodromy",
    "SpectrumTable",
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "free_solution",
    "free_y0",
    "load_potential",
    "save_potential",
    "load_spectrum",
    "save_spectrum",
    "dumps",
]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BoundaryKind:
    """Boundary condition flag: 0 periodic, 1 antiperiodic."""

    theta: int

    def __post_init__(self):
        if isinstance(self.theta, bool) or self.theta not in (0, 1):
            raise ValidationError(f"theta must be 0 or 1, got {self.theta!r}")

    @property
    def sign(self) -> int:
        """The constant term ``(-1)**(theta + 1)`` of the determinant."""
        return -1 if self.theta == 0 else 1

    def center(self, n):
        """Unperturbed eigenvalue location ``2n + theta``."""
        return 2 * np.asarray(n) + self.theta

    @classmethod
    def coerce(cls, kind) -> "BoundaryKind":
        return kind if isinstance(kind, BoundaryKind) else cls(int(kind))


PERIODIC = BoundaryKind(0)
ANTIPERIODIC = BoundaryKind(1)


@dataclass(frozen=True)
class Tolerances:
    integrator_steps: int = 4096
    truncation_N: int = 64
    disk_radius: float = 0.45
    quadrature_points: int = 256
    root_tol: float = 1e-10
    wronskian_tol: float = 1e-8
    tail_tol: float = 1e-12

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not (v > 0) or not math.isfinite(v):
                raise ValidationError(f"tolerance {f.name} must be positive, got {v!r}")
        if self.disk_radius >= 1:
            raise ValidationError("disk_radius must be < 1 so that eigenvalue disks do not overlap")

    def replace(self, **overrides) -> "Tolerances":
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Tolerances":
        return cls(**dict(d))


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True, eq=False)
class PotentialGrid:
    """Uniform samples of ``p`` and ``q`` at ``x_k = k pi / (M - 1)``.

    Between samples the potential is piecewise constant (nearest sample).
    """

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=complex).ravel()
        q = np.asarray(self.q, dtype=complex).ravel()
        if p.size != q.size:
            raise ValidationError(f"p and q lengths differ ({p.size} != {q.size})")
        if p.size < 2:
            raise ValidationError("potential grid needs at least 2 samples")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise ValidationError("potential samples must be finite")
        object.__setattr__(self, "p", _frozen_array(p, complex))
        object.__setattr__(self, "q", _frozen_array(q, complex))

    @property
    def M(self) -> int:
        return self.p.size

    @property
    def spacing(self) -> float:
        return math.pi / (self.M - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.M)

    @classmethod
    def from_functions(cls, p, q, M: int = 4097) -> "PotentialGrid":
        x = np.linspace(0.0, math.pi, M)
        pv = np.broadcast_to(np.asarray(p(x) if callable(p) else p, dtype=complex), x.shape)
        qv = np.broadcast_to(np.asarray(q(x) if callable(q) else q, dtype=complex), x.shape)
        return cls(pv, qv)

    @classmethod
    def constant(cls, p=0.0, q=0.0, M: int = 4097) -> "PotentialGrid":
        return cls(np.full(M, p, dtype=complex), np.full(M, q, dtype=complex))

    @classmethod
    def zero(cls, M: int = 2) -> "PotentialGrid":
        return cls.constant(0.0, 0.0, M)

    def sample_index(self, x) -> np.ndarray:
        idx = np.rint(np.asarray(x, dtype=float) / self.spacing).astype(np.int64)
        return np.clip(idx, 0, self.M - 1)

    def at(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Nearest-sample values ``(p(x), q(x))``."""
        i = self.sample_index(x)
        return self.p[i], self.q[i]

    def l2_norm(self) -> float:
        """Discrete L2 norm of ``V`` (Frobenius) by the trapezoid rule."""
        dens = 2.0 * (np.abs(self.p) ** 2 + np.abs(self.q) ** 2)
        return float(np.sqrt(np.trapezoid(dens, dx=self.spacing)))

    def __eq__(self, other):
        if not isinstance(other, PotentialGrid):
            return NotImplemented
        return np.array_equal(self.p, other.p) and np.array_equal(self.q, other.q)

    def to_dict(self) -> dict:
        return {"M": self.M, "p": _pairs(self.p), "q": _pairs(self.q)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PotentialGrid":
        try:
            M = d["M"]
            p = _unpairs(d["p"], "p")
            q = _unpairs(d["q"], "q")
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed potential: {exc}") from exc
        if not isinstance(M, int) or isinstance(M, bool):
            raise ValidationError("potential field M must be an integer")
        if p.size != q.size:
            raise ValidationError(f"p and q lengths differ ({p.size} != {q.size})")
        if p.size != M:
            raise ValidationError(f"M={M} does not match sample count {p.size}")
        return cls(p, q)


@dataclass(frozen=True)
class Monodromy:
    """``E(pi, lam) = [[c1, -s2], [s1, c2]]``."""

    c1: complex
    s1: complex
    s2: complex
    c2: complex
    lam: complex

    @classmethod
    def from_matrix(cls, E, lam) -> "Monodromy":
        E = np.asarray(E, dtype=complex)
        return cls(complex(E[0, 0]), complex(E[1, 0]), complex(-E[0, 1]), complex(E[1, 1]), complex(lam))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.c1, -self.s2], [self.s1, self.c2]], dtype=complex)

    @property
    def trace(self) -> complex:
        return self.c1 + self.c2

    def to_dict(self) -> dict:
        return {k: [getattr(self, k).real, getattr(self, k).imag] for k in ("c1", "s1", "s2", "c2", "lam")}

    @classmethod
    def from_dict(cls, d) -> "Monodromy":
        return cls(**{k: complex(*d[k]) for k in ("c1", "s1", "s2", "c2", "lam")})


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    """Eigenvalue pairs ``lam[n, j] = 2n + theta + eps[n, j]`` for ``|n| <= N``.

    ``values`` has shape ``(2N + 1, 2)``, row ``i`` holding index ``n = i - N``.
    Each pair is ordered by real part, then imaginary part.
    """

    kind: BoundaryKind
    values: np.ndarray
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", BoundaryKind.coerce(self.kind))
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] % 2 != 1:
            raise ValidationError(f"spectrum values must have shape (2N+1, 2), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("spectrum values must be finite")
        object.__setattr__(self, "values", _frozen_array(_order_pairs(v), complex))

    @property
    def N(self) -> int:
        return (self.values.shape[0] - 1) // 2

    @property
    def n(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.kind.center(self.n).astype(float)

    @property
    def eps(self) -> np.ndarray:
        return self.values - self.centers[:, None]

    def pair(self, n: int) -> tuple[complex, complex]:
        if abs(n) > self.N:
            raise KeyError(n)
        a, b = self.values[n + self.N]
        return complex(a), complex(b)

    @classmethod
    def from_eps(cls, kind, eps) -> "SpectrumTable":
        kind = BoundaryKind.coerce(kind)
        eps = np.asarray(eps, dtype=complex)
        N = (eps.shape[0] - 1) // 2
        return cls(kind, eps + kind.center(np.arange(-N, N + 1))[:, None])

    @classmethod
    def free(cls, kind, N: int) -> "SpectrumTable":
        return cls.from_eps(kind, np.zeros((2 * N + 1, 2)))

    def truncated(self, N: int) -> "SpectrumTable":
        if N > self.N:
            raise ValidationError(f"cannot truncate spectrum of range {self.N} to {N}")
        return SpectrumTable(self.kind, self.values[self.N - N:self.N + N + 1])

    def __eq__(self, other):
        if not isinstance(other, SpectrumTable):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    def to_dict(self) -> dict:
        return {
            "theta": self.kind.theta,
            "N": self.N,
            "entries": [
                {"n": int(n), "l1": [a.real, a.imag], "l2": [b.real, b.imag]}
                for n, (a, b) in zip(self.n, self.values)
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SpectrumTable":
        try:
            kind = BoundaryKind(d["theta"])
            N = d["N"]
            entries = d["entries"]
            if not isinstance(N, int) or isinstance(N, bool) or N < 0:
                raise ValidationError("spectrum field N must be a non-negative integer")
            vals = {}
            for e in entries:
                n = e["n"]
                if n in vals:
                    raise ValidationError(f"duplicate spectrum index n={n}")
                vals[n] = (complex(*e["l1"]), complex(*e["l2"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed spectrum: {exc}") from exc
        if set(vals) != set(range(-N, N + 1)):
            raise ValidationError(f"spectrum entries do not cover n in [-{N}, {N}] exactly")
        return cls(kind, np.array([vals[n] for n in range(-N, N + 1)], dtype=complex))


def _order_pairs(v: np.ndarray) -> np.ndarray:
    # real parts closer than _TIE_TOL (relative) count as equal, so rounding
    # noise cannot flip the order of a conjugate-like pair
    a, b = v[:, 0], v[:, 1]
    tie = np.abs(b.real - a.real) <= _TIE_TOL * (1.0 + np.maximum(np.abs(a), np.abs(b)))
    swap = np.where(tie, b.imag < a.imag, b.real < a.real)
    out = v.copy()
    out[swap] = v[swap][:, ::-1]
    return out


def free_solution(x: float, lam: complex) -> tuple[np.ndarray, np.ndarray]:
    """``E_0(x, lam)`` (rotation by ``lam x``) and its second column ``Y_0``."""
    c, s = np.cos(lam * x), np.sin(lam * x)
    E0 = np.array([[c, -s], [s, c]], dtype=complex)
    return E0, E0[:, 1].copy()


def free_y0(t, lam) -> np.ndarray:
    """Vectorized ``Y_0(t, lam) = (-sin lam t, cos lam t)``; trailing axis of length 2."""
    arg = np.multiply.outer(np.asarray(lam), np.asarray(t))
    return np.stack([-np.sin(arg), np.cos(arg)], axis=-1)


# -- serialization ---------------------------------------------------------

def _pairs(z: Iterable[complex]) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(z, dtype=complex)]


def _unpairs(rows, name: str) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        raise ValidationError(f"{name} is empty")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(f"{name} must be a list of [re, im] pairs")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr[:, 0] + 1j * arr[:, 1]


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite float {x!r}")
        s = format(x, ".17g")
        # keep floats recognizable as floats on reload
        return s if any(ch in s for ch in ".en") else s + ".0"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, Mapping):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _fmt(obj) + "\n"


def _read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc


def load_potential(path) -> PotentialGrid:
    return PotentialGrid.from_dict(_read_json(path))


def save_potential(grid: PotentialGrid, path) -> None:
    Path(path).write_text(dumps(grid.to_dict()))


def load_spectrum(path) -> SpectrumTable:
    return SpectrumTable.from_dict(_read_json(path))


def save_spectrum(table: SpectrumTable, path) -> None:
    Path(path).write_text(dumps(table.to_dict()))
