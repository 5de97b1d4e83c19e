"""Product-form determinants built from a spectrum.

For ``theta = 0``::

    Delta0(lam) = -1 + cos(pi lam)
    Delta(lam)  = -(pi^2/2) (l01 - lam)(l02 - lam) prod_{n != 0} (ln1 - lam)(ln2 - lam) / (4 n^2)

and ``Delta = Delta0 * phi`` with ``phi = prod (1 + alpha_nj)``,
``alpha_nj = eps_nj / (2n - lam)`` (``alpha_0j = -l0j / lam``).  The
antiperiodic case is the same construction centred at odd integers with
``Delta0 = 1 + cos(pi lam)`` and no special ``n = 0`` factor.

Evaluation pulls out the double zero of ``Delta0`` nearest to ``lam``
analytically (``Delta0 / (c_m - lam)^2`` is ``+-(pi^2/2) sinc^2``), which
keeps the product finite everywhere and makes every stored eigenvalue an
exact zero.  Factors beyond ``truncation_N`` are the unperturbed ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOLERANCES, BoundaryKind, SpectrumTable
from .errors import ConfigurationError, DomainError, ZeroFactorError

__all__ = [
    "DeterminantModel",
    "delta0",
    "delta0_product",
    "phi",
    "phi_direct",
    "log_phi",
    "delta_from_spectrum",
    "f_at_integers",
    "FSums",
    "pw_l2_estimate",
    "tail_bound",
]

_GAMMA_RADIUS = 0.25


@dataclass(frozen=True, eq=False)
class DeterminantModel:
    spectrum: SpectrumTable
    truncation_N: int = DEFAULT_TOLERANCES.truncation_N

    def __post_init__(self):
        if self.truncation_N < 0:
            raise ConfigurationError("truncation_N must be >= 0")
        if self.truncation_N > self.spectrum.N:
            raise ConfigurationError(
                f"truncation_N={self.truncation_N} exceeds the stored spectrum range N={self.spectrum.N}")

    @property
    def kind(self) -> BoundaryKind:
        return self.spectrum.kind

    @property
    def _rows(self) -> slice:
        N, T = self.spectrum.N, self.truncation_N
        return slice(N - T, N + T + 1)

    @property
    def n(self) -> np.ndarray:
        return np.arange(-self.truncation_N, self.truncation_N + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.spectrum.centers[self._rows]

    @property
    def values(self) -> np.ndarray:
        return self.spectrum.values[self._rows]

    @property
    def eps(self) -> np.ndarray:
        return self.spectrum.eps[self._rows]

    def evaluator(self):
        return lambda lam: delta_from_spectrum(self, lam)

    def chi(self, lam):
        """``Delta(lam) - (-1)^(theta+1)``."""
        return delta_from_spectrum(self, lam) - self.kind.sign


def delta0(kind, lam):
    """``(-1)^(theta+1) + cos(pi lam)``."""
    kind = BoundaryKind.coerce(kind)
    return kind.sign + np.cos(np.pi * np.asarray(lam, dtype=complex))


def delta0_product(kind, lam, N: int):
    """Truncated product form of ``delta0`` (pairs ``|n| <= N``), for cross-checks."""
    kind = BoundaryKind.coerce(kind)
    lam = np.asarray(lam, dtype=complex)
    n = np.arange(-N, N + 1)
    c = kind.center(n).astype(float)
    if kind.theta == 0:
        c = c[c != 0]
        lead = -(np.pi ** 2) * lam ** 2 / 2
    else:
        lead = 2.0
    fac = (c - lam[..., None]) / c
    return lead * np.prod(fac * fac, axis=-1)


def _nearest_rows(model: DeterminantModel, lam: np.ndarray) -> np.ndarray:
    """Index ``m`` of the centre ``2m + theta`` nearest to each ``lam``."""
    return np.rint((lam.real - model.kind.theta) / 2.0).astype(np.int64)


def _removed_ratio(kind: BoundaryKind, delta):
    """``Delta0(lam) / (c - lam)^2`` at ``lam = c + delta`` for a centre ``c``."""
    return kind.sign * (np.pi ** 2 / 2) * np.sinc(delta / 2) ** 2


def _factors(model: DeterminantModel, lam: np.ndarray) -> np.ndarray:
    """``(l_nj - lam) / (c_n - lam)`` for every stored pair; shape ``lam.shape + (2T+1, 2)``."""
    c = model.centers
    num = model.values - lam[..., None, None]
    den = (c - lam[..., None])[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den


# complex entries held per evaluation chunk
_CHUNK_ENTRIES = 1 << 22


def delta_from_spectrum(model: DeterminantModel, lam):
    """``Delta(lam)``, valid for every complex ``lam``."""
    scalar = np.ndim(lam) == 0
    lam = np.asarray(lam, dtype=complex)
    flat = lam.ravel()
    chunk = max(1, _CHUNK_ENTRIES // (4 * model.truncation_N + 2))
    out = np.concatenate([_delta_chunk(model, flat[i:i + chunk]) for i in range(0, max(flat.size, 1), chunk)])
    return complex(out[0]) if scalar else out.reshape(lam.shape)


def _delta_chunk(model: DeterminantModel, lam: np.ndarray) -> np.ndarray:
    kind = model.kind
    T = model.truncation_N
    m = _nearest_rows(model, lam)
    cm = kind.center(m).astype(float)
    out = _removed_ratio(kind, lam - cm)
    inside = np.abs(m) <= T
    base = (cm - lam) ** 2
    fac = _factors(model, lam)
    # drop the nearest centre's factors, they are replaced by the explicit pair
    idx = np.clip(m + T, 0, 2 * T)
    rows = np.arange(lam.size)
    fac[rows[inside], idx[inside], :] = 1.0
    pair = np.where(
        inside,
        (model.values[idx, 0] - lam) * (model.values[idx, 1] - lam),
        base,
    )
    return out * pair * np.prod(fac.reshape(lam.size, -1), axis=-1)


def _log_terms(model: DeterminantModel, lam: np.ndarray) -> np.ndarray:
    fac = _factors(model, lam)
    if np.any(fac == 0):
        raise ZeroFactorError("lam coincides with a stored eigenvalue")
    # principal branch: log(1 + z) = 0 at z = 0
    return np.log(fac)


def _check_outside_gamma(model: DeterminantModel, lam: np.ndarray):
    m = _nearest_rows(model, lam)
    d = np.abs(lam - model.kind.center(m))
    if np.any(d < _GAMMA_RADIUS):
        raise DomainError("lam lies in a disk of radius 1/4 around 2n + theta; use delta_from_spectrum")


def phi(model: DeterminantModel, lam):
    """``Delta / Delta0`` via summed principal logarithms, for ``lam`` off the disks."""
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    _check_outside_gamma(model, lam)
    W = _log_terms(model, lam).reshape(lam.size, -1).sum(axis=-1)
    out = np.exp(W)
    return complex(out[0]) if scalar else out


def log_phi(model: DeterminantModel, lam):
    """``W(lam) = sum log(1 + alpha_nj(lam))`` (principal branch termwise)."""
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    _check_outside_gamma(model, lam)
    W = _log_terms(model, lam).reshape(lam.size, -1).sum(axis=-1)
    return complex(W[0]) if scalar else W


def phi_direct(model: DeterminantModel, lam):
    """Plain partial product of ``1 + alpha_nj``; reference for :func:`phi`."""
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    out = np.prod(_factors(model, lam).reshape(lam.size, -1), axis=-1)
    return complex(out[0]) if scalar else out


def edge_l2(model: DeterminantModel) -> float:
    """l2 mass of ``eps`` over ``T/2 < |n| <= T``.

    For ``eps_n ~ C/n`` this equals the l2 mass beyond ``T`` to leading
    order, so it serves as the stand-in for the unstored tail.
    """
    T = model.truncation_N
    sel = np.abs(model.n) > T // 2
    return float(np.sqrt(np.sum(np.abs(model.eps[sel]) ** 2)))


def tail_bound(model: DeterminantModel, lam, eps_tail_l2: float | None = None) -> float:
    """Cauchy-Schwarz bound on ``sum_{|n|>T} |alpha_nj(lam)|``.

    ``eps_tail_l2`` is the l2 norm of the neglected ``eps``; by default it is
    estimated by :func:`edge_l2`.
    """
    if eps_tail_l2 is None:
        eps_tail_l2 = edge_l2(model)
    T = model.truncation_N
    theta = model.kind.theta
    lam = complex(lam)
    # sum_{|n|>T} 2/|c_n - lam|^2, summed far enough for the 1/n^2 tail, rest bounded by an integral
    K = max(4 * T, 4 * int(abs(lam)) + 16)
    n = np.concatenate([np.arange(T + 1, K + 1), -np.arange(T + 1, K + 1)])
    s = np.sum(2.0 / np.abs(2 * n + theta - lam) ** 2)
    far = K - abs(lam) / 2
    s += 2 * 2.0 / (4 * max(far, 1.0))
    return float(eps_tail_l2 * math.sqrt(s))


@dataclass(frozen=True)
class FSums:
    k: np.ndarray
    f: np.ndarray
    partial: np.ndarray          # partial[K'] = sum_{|k| <= K'} |f(k)|

    def rows(self):
        """``(k, f(k), sum_{|k'| <= |k|} |f(k')|)`` for k = -K..K."""
        for k, fk in zip(self.k, self.f):
            yield int(k), complex(fk), float(self.partial[abs(int(k))])


def f_at_integers(model: DeterminantModel, K: int) -> FSums:
    """``f(k) = Delta(k) - Delta0(k)`` for ``|k| <= K``."""
    k = np.arange(-K, K + 1)
    lam = k.astype(complex)
    d = delta_from_spectrum(model, lam)
    d0 = delta0(model.kind, lam)
    # Delta0 vanishes exactly at the centres 2n + theta
    at_center = (k - model.kind.theta) % 2 == 0
    d0 = np.where(at_center, 0.0, d0.real)
    f = d - d0
    absf = np.abs(f)
    partial = np.array([absf[K]] + [0.0] * K)
    for j in range(1, K + 1):
        partial[j] = partial[j - 1] + absf[K + j] + absf[K - j]
    return FSums(k, f, partial)


def pw_l2_estimate(model: DeterminantModel, grid_half_width: float, step: float) -> float:
    """Trapezoid estimate of ``int_{-W}^{W} |f(lam)|^2 dlam`` on the real axis."""
    if step <= 0:
        raise ValueError("step must be positive")
    npts = int(round(2 * grid_half_width / step)) + 1
    x = np.linspace(-grid_half_width, grid_half_width, npts)
    f = delta_from_spectrum(model, x.astype(complex)) - delta0(model.kind, x)
    return float(np.trapezoid(np.abs(f) ** 2, x))
