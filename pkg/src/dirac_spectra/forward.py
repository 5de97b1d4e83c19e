"""Monodromy matrix, characteristic determinant and eigenvalue localization.

The system ``B y' + V y = lam y`` is rewritten as ``y' = A(x, lam) y`` with

    A = [[q, -(lam + p)], [lam - p, -q]],   A @ A = (p^2 + q^2 - lam^2) I.

On each cell the potential is frozen at the midpoint and the cell
propagator is the exact exponential ``cosh(h w) I + sinh(h w)/w A`` with
``w^2 = p^2 + q^2 - lam^2``.  Every factor has unit determinant, so the
Wronskian identity ``c1 c2 + s1 s2 = 1`` holds up to rounding only.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import DEFAULT_TOLERANCES, BoundaryKind, Monodromy, PotentialGrid, SpectrumTable, Tolerances
from .errors import BoundaryTooCloseError, LocalizationError, RangeError, ValidationError, WindingError

log = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]

# lam values propagated together; bounds peak memory at ~_BATCH * steps * 64 bytes
_BATCH = 64


def _cell_coefficients(potential: PotentialGrid, steps: int):
    """Midpoint values per cell, with runs of equal values merged into one cell.

    Merging is exact: equal frozen matrices commute, so their exponentials
    multiply to the exponential over the combined length.
    """
    xm = (np.arange(steps) + 0.5) * (math.pi / steps)
    p, q = potential.at(xm)
    change = np.flatnonzero((p[1:] != p[:-1]) | (q[1:] != q[:-1])) + 1
    starts = np.concatenate([[0], change])
    lengths = np.diff(np.concatenate([starts, [steps]]))
    return p[starts], q[starts], lengths * (math.pi / steps)


def _propagate_batch(p, q, lam, h):
    """Monodromy entries for each ``lam``; returns arrays (a, b, c, d) of E = [[a, b], [c, d]]."""
    lam = lam[:, None]
    w2 = p * p + q * q - lam * lam
    hw = h * np.sqrt(w2)
    e = np.exp(hw)
    ei = 1.0 / e
    ch = 0.5 * (e + ei)
    small = np.abs(hw) < 1e-3
    with np.errstate(invalid="ignore", divide="ignore"):
        sh = np.where(small, h, 0.5 * (e - ei) * h / np.where(small, 1.0, hw))
    if np.any(small):
        z2 = hw[small] ** 2
        sh[small] = np.broadcast_to(h, hw.shape)[small] * (1.0 + z2 / 6.0 + z2 * z2 / 120.0)
    a = ch + sh * q
    b = -sh * (lam + p)
    c = sh * (lam - p)
    d = ch - sh * q
    # pairwise tree product, later cells multiply from the left
    while a.shape[1] > 1:
        if a.shape[1] % 2:
            one = np.ones((a.shape[0], 1), dtype=complex)
            zero = np.zeros_like(one)
            a = np.concatenate([a, one], axis=1)
            b = np.concatenate([b, zero], axis=1)
            c = np.concatenate([c, zero], axis=1)
            d = np.concatenate([d, one], axis=1)
        a0, b0, c0, d0 = a[:, 0::2], b[:, 0::2], c[:, 0::2], d[:, 0::2]
        a1, b1, c1, d1 = a[:, 1::2], b[:, 1::2], c[:, 1::2], d[:, 1::2]
        a, b, c, d = (a1 * a0 + b1 * c0, a1 * b0 + b1 * d0,
                      c1 * a0 + d1 * c0, c1 * b0 + d1 * d0)
    return a[:, 0], b[:, 0], c[:, 0], d[:, 0]


def monodromy_entries(potential: PotentialGrid, lam, steps: int = DEFAULT_TOLERANCES.integrator_steps) -> np.ndarray:
    """Vectorized ``E(pi, lam)``; returns an array of shape ``lam.shape + (2, 2)``."""
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    lam = np.asarray(lam, dtype=complex)
    flat = lam.ravel()
    p, q, h = _cell_coefficients(potential, steps)
    out = np.empty(flat.shape + (2, 2), dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(0, flat.size, _BATCH):
            a, b, c, d = _propagate_batch(p, q, flat[i:i + _BATCH], h)
            out[i:i + _BATCH, 0, 0] = a
            out[i:i + _BATCH, 0, 1] = b
            out[i:i + _BATCH, 1, 0] = c
            out[i:i + _BATCH, 1, 1] = d
    if not np.all(np.isfinite(out)):
        raise RangeError("non-finite monodromy entries (|Im lam| too large for double precision)")
    return out.reshape(lam.shape + (2, 2))


def propagate(potential: PotentialGrid, lam: complex, steps: int = DEFAULT_TOLERANCES.integrator_steps) -> Monodromy:
    E = monodromy_entries(potential, np.array([lam]), steps)[0]
    return Monodromy.from_matrix(E, lam)


def wronskian_defect(m: Monodromy) -> float:
    return abs(m.c1 * m.c2 + m.s1 * m.s2 - 1.0)


def char_det(potential: PotentialGrid, kind, lam, steps: int = DEFAULT_TOLERANCES.integrator_steps):
    """``(-1)^(theta+1) + (c1 + c2) / 2``; scalar in, scalar out, arrays vectorize."""
    kind = BoundaryKind.coerce(kind)
    E = monodromy_entries(potential, lam, steps)
    val = kind.sign + 0.5 * (E[..., 0, 0] + E[..., 1, 1])
    return complex(val) if np.ndim(lam) == 0 else val


def char_det_evaluator(potential: PotentialGrid, kind, steps: int = DEFAULT_TOLERANCES.integrator_steps) -> Evaluator:
    kind = BoundaryKind.coerce(kind)
    return lambda lam: char_det(potential, kind, np.asarray(lam, dtype=complex), steps)


# -- argument principle ----------------------------------------------------

def _circle(center, radius, points):
    theta = 2 * math.pi * np.arange(points) / points
    w = radius * np.exp(1j * theta)
    return center + w, w


def _winding(values: np.ndarray) -> float:
    steps = np.angle(np.roll(values, -1) / values)
    if np.max(np.abs(steps)) > 0.5 * math.pi:
        raise WindingError("argument changes too fast along the contour; increase boundary_points")
    return float(np.sum(steps) / (2 * math.pi))


def count_zeros_in_disk(evaluate: Evaluator, center: complex, radius: float,
                        boundary_points: int = DEFAULT_TOLERANCES.quadrature_points,
                        root_tol: float = DEFAULT_TOLERANCES.root_tol) -> int:
    """Number of zeros (with multiplicity) of ``evaluate`` inside the circle."""
    if boundary_points < 64:
        raise ValidationError("boundary_points must be >= 64")
    z, _ = _circle(center, radius, boundary_points)
    vals = np.asarray(evaluate(z), dtype=complex)
    return _count_from_values(vals, root_tol)


def _count_from_values(vals, root_tol):
    if np.min(np.abs(vals)) < root_tol:
        raise BoundaryTooCloseError("a zero lies on or too near the contour")
    wn = _winding(vals)
    k = round(wn)
    if abs(wn - k) > 1e-3:
        raise WindingError(f"non-integer winding number {wn:.6f}")
    return int(k)


@dataclass(frozen=True)
class EigenLocalization:
    center: complex
    radius: float
    zero_count: int
    refined_roots: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.refined_roots) != self.zero_count:
            raise ValueError("refined_roots must list each zero with multiplicity")


def _log_derivative_moments(vals, w, kmax):
    """``(1/2 pi i) \\oint w^m f'/f dz`` for m = 0..kmax from samples on a circle.

    ``f'`` on the circle comes from the Taylor coefficients recovered by FFT.
    """
    P = vals.size
    b = np.fft.fft(vals) / P                      # b_j = a_j r^j
    j = np.arange(P)
    # f'(z_k) = sum_j j a_j w_k^(j-1) = (sum_j j b_j e^{i j theta_k}) / w_k
    deriv = np.fft.ifft(j * b) * P / w
    ratio = deriv / vals
    return [complex(np.mean(w ** (m + 1) * ratio)) for m in range(kmax + 1)]


def _roots_from_moments(s, k):
    """Roots of the monic polynomial whose power sums are ``s[1..k]``."""
    e = [1.0 + 0j]
    for m in range(1, k + 1):
        acc = sum((-1) ** (i - 1) * e[m - i] * s[i] for i in range(1, m + 1))
        e.append(acc / m)
    coeffs = [(-1) ** m * e[m] for m in range(k + 1)]
    return np.roots(coeffs)


def _newton(evaluate: Evaluator, z0: complex, tol: float, maxiter: int = 30) -> complex:
    z = complex(z0)
    for _ in range(maxiter):
        h = 1e-6 * (1 + abs(z))
        f0, fp, fm = evaluate(np.array([z, z + h, z - h]))
        d = (fp - fm) / (2 * h)
        if d == 0:
            break
        step = f0 / d
        z -= step
        if abs(step) < tol * (1 + abs(z)):
            break
    return z


def refine_disk(evaluate: Evaluator, center: complex, radius: float,
                tol: Tolerances = DEFAULT_TOLERANCES) -> EigenLocalization:
    """Count the zeros in a disk and locate them.

    Power sums of the zeros come from contour integrals of ``f'/f``; simple
    zeros are then polished by Newton iteration.  Two zeros closer than
    ``sqrt(root_tol)`` are reported as one double zero at their mean, which
    is far better conditioned than either zero separately.
    """
    z, w = _circle(center, radius, tol.quadrature_points)
    vals = np.asarray(evaluate(z), dtype=complex)
    count = _count_from_values(vals, tol.root_tol)
    if count == 0:
        return EigenLocalization(complex(center), radius, 0, ())
    s = _log_derivative_moments(vals, w, count)
    roots = center + _roots_from_moments(s, count)
    if count == 2 and abs(roots[0] - roots[1]) < math.sqrt(tol.root_tol):
        mid = center + s[1] / 2
        roots = np.array([mid, mid])
    else:
        polished = []
        for r0 in roots:
            r1 = _newton(evaluate, r0, tol.root_tol)
            polished.append(r1 if abs(r1 - center) < radius else r0)
        roots = np.array(polished)
    return EigenLocalization(complex(center), radius, count, tuple(complex(r) for r in roots))


def _radius_ladder(r0: float) -> list[float]:
    return [r0] + [r for r in (0.6, 0.75, 0.9) if r > r0]


def localize(evaluate: Evaluator, center: complex, tol: Tolerances = DEFAULT_TOLERANCES,
             expected: int = 2) -> EigenLocalization:
    """Find the ``expected`` zeros near ``center``, widening the disk if needed.

    Radii stay below 1 so neighbouring disks never overlap.
    """
    last = None
    for r in _radius_ladder(tol.disk_radius):
        try:
            loc = refine_disk(evaluate, center, r, tol)
        except (BoundaryTooCloseError, WindingError) as exc:
            last = exc
            continue
        if loc.zero_count == expected:
            return loc
        last = loc
    if isinstance(last, EigenLocalization):
        raise LocalizationError(
            f"disk around {center} holds {last.zero_count} zeros at radius {last.radius}, "
            f"expected {expected}; the potential may be too large for this n range")
    raise LocalizationError(f"could not localize zeros near {center}: {last}")


def locate_spectrum(potential: PotentialGrid, kind, n_max: int, tol: Tolerances = DEFAULT_TOLERANCES,
                    steps: int | None = None, threads: int = 1) -> SpectrumTable:
    """Eigenvalue pairs near ``2n + theta`` for ``|n| <= n_max``."""
    if n_max < 0:
        raise ValidationError("n_max must be >= 0")
    kind = BoundaryKind.coerce(kind)
    evaluate = char_det_evaluator(potential, kind, steps or tol.integrator_steps)
    centers = kind.center(np.arange(-n_max, n_max + 1)).astype(float)

    def one(c):
        return localize(evaluate, complex(c), tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            locs = list(pool.map(one, centers))
    else:
        locs = [one(c) for c in centers]
    radii = sorted({loc.radius for loc in locs})
    if radii != [tol.disk_radius]:
        log.info("some disks needed radii %s", radii)
    values = np.array([loc.refined_roots for loc in locs], dtype=complex)
    return SpectrumTable(kind, values, meta={"radii": [loc.radius for loc in locs]})


def closed_form_constant_q(a: complex, kind, lam):
    """Determinant for ``p = 0, q = a``: ``(-1)^(theta+1) + cos(pi sqrt(lam^2 - a^2))``."""
    kind = BoundaryKind.coerce(kind)
    lam = np.asarray(lam, dtype=complex)
    return kind.sign + np.cos(math.pi * np.sqrt(lam * lam - a * a))


def constant_q_spectrum(a: complex, kind, N: int) -> SpectrumTable:
    """Exact eigenvalues for ``p = 0, q = a``: ``lam^2 = (2n + theta)^2 + a^2``."""
    kind = BoundaryKind.coerce(kind)
    n = np.arange(-N, N + 1)
    c = kind.center(n).astype(float)
    root = np.sqrt(c.astype(complex) ** 2 + a * a)
    vals = np.where(c[:, None] > 0, root[:, None], -root[:, None]) * np.ones((1, 2))
    if kind.theta == 0:
        vals[N] = [-np.sqrt(complex(a * a)), np.sqrt(complex(a * a))]
    return SpectrumTable(kind, vals)
