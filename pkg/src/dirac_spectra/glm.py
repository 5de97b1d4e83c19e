"""The kernel ``F(x, t)`` built from nodes and weights, and a discrete test
that the homogeneous equation

    f(t)^T + int_0^x f(s)^T F(s, t) ds = 0,   0 <= t <= x

has only the trivial solution.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .core import _frozen_array, free_y0
from .errors import ValidationError

DEFAULT_FLOOR = 0.1


@dataclass(frozen=True, eq=False)
class GlmData:
    """Nodes ``lam_n`` and weights ``z_n`` for ``|n| <= truncation_N``."""
    nodes: np.ndarray
    weights: np.ndarray
    truncation_N: int

    def __post_init__(self):
        lam = np.asarray(self.nodes, dtype=float)
        z = np.asarray(self.weights, dtype=complex)
        T = int(self.truncation_N)
        if lam.ndim != 1 or lam.shape != z.shape or lam.size % 2 == 0:
            raise ValidationError("nodes and weights must be matching sequences indexed by -N..N")
        avail = (lam.size - 1) // 2
        if not 0 <= T <= avail:
            raise ValidationError(f"truncation_N={T} outside the available node range 0..{avail}")
        lam = lam[avail - T:avail + T + 1]
        z = z[avail - T:avail + T + 1]
        margin = z.real + z.imag
        if np.any(~(margin > 0)):
            bad = np.flatnonzero(~(margin > 0))[0] - T
            raise ValidationError(f"weight z_{bad} is not strictly above the line Im z = -Re z")
        object.__setattr__(self, "nodes", _frozen_array(lam, float))
        object.__setattr__(self, "weights", _frozen_array(z, complex))
        object.__setattr__(self, "truncation_N", T)

    @property
    def n(self) -> np.ndarray:
        return np.arange(-self.truncation_N, self.truncation_N + 1)

    @classmethod
    def from_construction(cls, data, truncation_N: int | None = None) -> "GlmData":
        T = data.N if truncation_N is None else truncation_N
        return cls(data.nodes, data.z_values, T)

    @classmethod
    def reference(cls, N: int) -> "GlmData":
        """``lam_n = n``, ``z_n = 1/pi``: the kernel vanishes identically."""
        n = np.arange(-N, N + 1)
        return cls(n.astype(float), np.full(n.size, 1 / math.pi, dtype=complex), N)

    def tail_estimate(self) -> dict:
        """l2 masses of ``z_n - 1/pi`` and ``lam_n - n`` over ``N/2 < |n| <= N``."""
        sel = np.abs(self.n) > self.truncation_N // 2
        return {
            "weights": float(np.sqrt(np.sum(np.abs(self.weights[sel] - 1 / math.pi) ** 2))),
            "nodes": float(np.sqrt(np.sum((self.nodes[sel] - self.n[sel]) ** 2))),
        }


def _basis(data: GlmData, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``Y_0(x, lam_n)`` and ``Y_0(x, n)``, each of shape ``x.shape + (2N+1, 2)``."""
    x = np.asarray(x, dtype=float)
    Yl = np.moveaxis(free_y0(x, data.nodes), 0, -2)
    Yn = np.moveaxis(free_y0(x, data.n.astype(float)), 0, -2)
    return Yl, Yn


def kernel_matrix(data: GlmData, xs, ts) -> np.ndarray:
    """``F(x_i, t_j)`` for all pairs; shape ``(len(xs), len(ts), 2, 2)``."""
    Xl, Xn = _basis(data, np.atleast_1d(xs))
    Tl, Tn = _basis(data, np.atleast_1d(ts))
    F = np.empty((Xl.shape[0], Tl.shape[0], 2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            F[:, :, a, b] = (Xl[:, :, a] * data.weights) @ Tl[:, :, b].T - Xn[:, :, a] @ Tn[:, :, b].T / math.pi
    return F


def kernel_F(data: GlmData, x: float, t: float) -> np.ndarray:
    """``F(x, t) = sum_n [z_n Y0(x, lam_n) Y0(t, lam_n)^T - (1/pi) Y0(x, n) Y0(t, n)^T]``."""
    if not (0 <= x <= math.pi and 0 <= t <= math.pi):
        raise ValidationError("x and t must lie in [0, pi]")
    return kernel_matrix(data, [x], [t])[0, 0]


def trapezoid_grid(x: float, grid_points: int) -> tuple[np.ndarray, np.ndarray]:
    s = np.linspace(0.0, x, grid_points)
    w = np.full(grid_points, x / (grid_points - 1))
    w[0] = w[-1] = w[0] / 2
    return s, w


def nystrom_operator(data: GlmData, x: float, grid_points: int) -> np.ndarray:
    """Matrix of ``f -> f + int_0^x f(s)^T F(s, .) ds`` on a uniform grid of ``[0, x]``.

    Unknowns are ordered component-major: index ``a * grid_points + i`` is
    ``f_a(s_i)``.
    """
    if grid_points < 8:
        raise ValidationError("grid_points must be >= 8")
    if not 0 < x <= math.pi:
        raise ValidationError("x must lie in (0, pi]")
    s, w = trapezoid_grid(x, grid_points)
    F = kernel_matrix(data, s, s)                       # F[j, i, b, a] = F_ba(s_j, t_i)
    K = (F * w[:, None, None, None]).transpose(3, 1, 2, 0).reshape(2 * grid_points, 2 * grid_points)
    return np.eye(2 * grid_points, dtype=complex) + K


def sigma_min(data: GlmData, x: float, grid_points: int) -> float:
    """Smallest singular value of the operator, measured in the discrete ``L2(0, x)`` norm.

    The trapezoid weights are symmetrized in (``W^(1/2) A W^(-1/2)``) so
    the value converges as the grid is refined.
    """
    A = nystrom_operator(data, x, grid_points)
    _, w = trapezoid_grid(x, grid_points)
    d = np.sqrt(np.concatenate([w, w]))
    B = d[:, None] * A / d[None, :]
    return float(np.linalg.svd(B, compute_uv=False)[-1])


@dataclass(frozen=True)
class SolvabilityRow:
    x: float
    sigma_min: float
    passed: bool


def solvability_check(data: GlmData, x_grid, grid_points: int = 256, floor: float = DEFAULT_FLOOR,
                      threads: int = 1) -> list[SolvabilityRow]:
    """``(x, sigma_min, sigma_min > floor)`` for each ``x``."""
    xs = [float(x) for x in x_grid]
    for x in xs:
        if not 0 < x <= math.pi:
            raise ValidationError("x values must lie in (0, pi]")

    def one(x):
        return sigma_min(data, x, grid_points)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            vals = list(ex.map(one, xs))
    else:
        vals = [one(x) for x in xs]
    return [SolvabilityRow(x, v, v > floor) for x, v in zip(xs, vals)]


def default_x_grid(count: int) -> np.ndarray:
    """``pi k / count`` for ``k = 1..count``."""
    if count < 1:
        raise ValidationError("need at least one x value")
    return math.pi * np.arange(1, count + 1) / count


def row_norms(data: GlmData, xs, grid_points: int = 257) -> np.ndarray:
    """``(int_0^pi |F(x, t)|_F^2 dt)^(1/2)`` for each ``x`` (trapezoid in ``t``)."""
    t, w = trapezoid_grid(math.pi, grid_points)
    F = kernel_matrix(data, xs, t)
    return np.sqrt(np.einsum("ijab,j->i", np.abs(F) ** 2, w))


def hermitian_form(data: GlmData, x: float, f: np.ndarray) -> tuple[complex, complex]:
    """Two evaluations of ``int_0^x int_0^x f(s)^T F(s, t) conj(f(t)) ds dt``.

    ``f`` holds samples on the trapezoid grid of ``[0, x]``, shape ``(G, 2)``.
    The first value applies the discretized kernel directly; the second is
    ``sum_n z_n |a_n|^2 - (1/pi) sum_n |b_n|^2`` with
    ``a_n = int f^T Y0(., lam_n)`` and ``b_n = int f^T Y0(., n)``.
    """
    f = np.asarray(f, dtype=complex)
    G = f.shape[0]
    s, w = trapezoid_grid(x, G)
    F = kernel_matrix(data, s, s)
    Kf = np.einsum("j,jb,jiba->ia", w, f, F)
    direct = complex(np.sum(w[:, None] * Kf * np.conj(f)))
    Yl, Yn = _basis(data, s)
    a = np.einsum("j,ja,jka->k", w, f, Yl)
    b = np.einsum("j,ja,jka->k", w, f, Yn)
    series = complex(np.sum(data.weights * np.abs(a) ** 2) - np.sum(np.abs(b) ** 2) / math.pi)
    return direct, series


def parseval_defect(samples, n_max: int) -> float:
    """``| ||f||^2 - sum_{|n| <= n_max} (1/pi) |int_0^pi <f, Y0(., n)> dt|^2 |``.

    ``samples`` has shape ``(M, 2)`` on the uniform grid of ``[0, pi]``;
    integrals use Simpson's rule.
    """
    f = np.asarray(samples, dtype=complex)
    if f.ndim != 2 or f.shape[1] != 2 or f.shape[0] < 3:
        raise ValidationError("samples must have shape (M, 2) with M >= 3")
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    t = np.linspace(0.0, math.pi, f.shape[0])
    norm2 = simpson(np.sum(np.abs(f) ** 2, axis=1), x=t)
    n = np.arange(-n_max, n_max + 1).astype(float)
    Y = free_y0(t, n)                                   # (2 n_max + 1, M, 2)
    coeff = simpson(np.einsum("ma,kma->km", f, Y), x=t, axis=-1)
    return float(abs(norm2 - np.sum(np.abs(coeff) ** 2) / math.pi))


def mode_combination(coeffs: dict, t) -> np.ndarray:
    """``sum_n coeffs[n] Y0(t, n)``, shape ``(len(t), 2)``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (2,), dtype=complex)
    for n, c in coeffs.items():
        out += c * free_y0(t, float(n))
    return out
