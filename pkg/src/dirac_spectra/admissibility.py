"""Finite-data checks of the spectral admissibility conditions.

A candidate spectrum ``lam_nj = 2n + theta + eps_nj`` is admissible when
``eps`` is square summable and the averages

    gamma_k = sum_n (eps_n1 + eps_n2) / (2n - 2k - 1)        (theta = 0)

are absolutely summable over ``k``.  For ``theta = 1`` the same sums are
taken around the even points ``2k`` (denominator ``2n - 2k + 1``).

Nothing here proves convergence or divergence; verdicts record the finite
evidence they were based on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BoundaryKind, SpectrumTable
from .errors import CapacityError, DomainError, InsufficientRangeError, ValidationError

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
INCONCLUSIVE = "inconclusive"

# 2**MAX_COUNTEREXAMPLE_M rows is the largest counterexample table we build
MAX_COUNTEREXAMPLE_M = 20


def epsilon_table(spectrum: SpectrumTable) -> tuple[float, np.ndarray]:
    """``sup |eps_nj|`` and partial sums ``sum_{|n| <= n'} sum_j |eps_nj|^2`` for n' = 0..N."""
    e2 = np.sum(np.abs(spectrum.eps) ** 2, axis=1)
    N = spectrum.N
    partial = np.cumsum(np.concatenate([[e2[N]], e2[N + 1:] + e2[N - 1::-1]]))
    return float(np.max(np.abs(spectrum.eps))), partial


def _denominator(kind: BoundaryKind, n, k):
    return 2 * n - 2 * np.asarray(k)[..., None] - 1 + 2 * kind.theta


def _edge_l2(spectrum: SpectrumTable) -> float:
    N = spectrum.N
    sel = np.abs(spectrum.n) > N // 2
    return float(np.sqrt(np.sum(np.abs(spectrum.eps[sel]) ** 2)))


def _tail_estimate(spectrum: SpectrumTable, k: np.ndarray) -> np.ndarray:
    """Cauchy-Schwarz estimate of the contribution of ``|n| > N``.

    The unstored ``eps`` tail is stood in for by the l2 mass on
    ``N/2 < |n| <= N`` (exact to leading order for ``eps ~ 1/n``).
    """
    N = spectrum.N
    m = 2 * np.abs(k) + 1
    # sum_{|n| > N} 1/(2n - m')^2 with |m'| <= m: first term plus integral, both sides
    gap = np.maximum(2 * (N + 1) - m, 1).astype(float)
    s = 2 * (1.0 / gap ** 2 + 1.0 / (2 * gap))
    # |eps_n1 + eps_n2|^2 <= 2 (|eps_n1|^2 + |eps_n2|^2)
    return _edge_l2(spectrum) * np.sqrt(2 * s)


@dataclass(frozen=True)
class GammaValue:
    k: int
    value: complex
    tail_estimate: float


def gamma_values(spectrum: SpectrumTable, ks, tail_tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``gamma_k`` for each ``k`` (symmetric sum over the stored ``|n| <= N``).

    Returns ``(values, tail_estimates)``.  With ``tail_tol`` set, an
    estimate above it raises :class:`InsufficientRangeError`.
    """
    ks = np.asarray(ks, dtype=np.int64)
    tails = _tail_estimate(spectrum, ks)
    if tail_tol is not None and np.any(tails > tail_tol):
        bad = int(ks[np.argmax(tails)])
        raise InsufficientRangeError(
            f"stored range N={spectrum.N} cannot certify gamma_{bad} "
            f"(tail estimate {tails.max():.3g} > {tail_tol:.3g})")
    s = spectrum.eps.sum(axis=1)
    nz = np.flatnonzero(s)
    if nz.size == 0:
        return np.zeros(ks.shape, dtype=complex), tails
    n = spectrum.n[nz]
    w = s[nz]
    out = np.zeros(ks.shape, dtype=complex)
    step = max(1, (1 << 22) // nz.size)
    for i in range(0, ks.size, step):
        kk = ks[i:i + step]
        out[i:i + step] = np.sum(w / _denominator(spectrum.kind, n, kk), axis=-1)
    return out, tails


def gamma(spectrum: SpectrumTable, k: int, tail_tol: float | None = None) -> GammaValue:
    vals, tails = gamma_values(spectrum, np.array([k]), tail_tol)
    return GammaValue(int(k), complex(vals[0]), float(tails[0]))


@dataclass
class AdmissibilityReport:
    sup_epsilon: float
    l2_partial: np.ndarray
    k: np.ndarray
    gamma: np.ndarray
    abs_gamma_partial: np.ndarray        # index K' -> sum_{|k| <= K'} |gamma_k|
    shell_sums: list                     # (lo, hi, sum_{lo < |k| <= hi} |gamma_k|)
    verdict: str
    witness: list = field(default_factory=list)
    witness_scores: list = field(default_factory=list)
    max_tail_estimate: float = 0.0

    @property
    def gamma_values(self) -> dict:
        return {int(k): complex(g) for k, g in zip(self.k, self.gamma)}

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "sup_epsilon": self.sup_epsilon,
            "l2_total": float(self.l2_partial[-1]),
            "abs_gamma_total": float(self.abs_gamma_partial[-1]),
            "max_tail_estimate": self.max_tail_estimate,
            "shells": [{"lo": lo, "hi": hi, "sum": s} for lo, hi, s in self.shell_sums],
            "witness": [int(k) for k in self.witness],
            "witness_scores": [float(x) for x in self.witness_scores],
            "gamma": [{"k": int(k), "re": g.real, "im": g.imag, "partial_sum": float(self.abs_gamma_partial[abs(int(k))])}
                      for k, g in zip(self.k, self.gamma)],
        }


def summability_report(spectrum: SpectrumTable, K: int, *, incr_tol: float = 1e-3,
                          witness_floor: float = 0.5, witness_shells: int = 4,
                          tail_tol: float | None = None) -> AdmissibilityReport:
    """Evidence on summability of ``|gamma_k|`` over ``|k| <= K``.

    The k range is cut into dyadic shells ``2^(j-1) < |k| <= 2^j``.

    * inconsistent: in each of the last ``witness_shells`` shells the peak
      ``|gamma_k|`` satisfies ``|gamma_k| log2|k| >= witness_floor``, the
      ``c / log k`` pattern that kills summability.  The peak indices are
      recorded as the witness.
    * consistent: the last shell adds less than ``incr_tol`` and no more
      than the shell before it, and the truncation tail estimates summed
      over that shell stay below ``incr_tol`` (otherwise the stored range
      cannot resolve the increment).
    * inconclusive otherwise.
    """
    if K < 1:
        raise ValidationError("K must be >= 1")
    sup, l2 = epsilon_table(spectrum)
    k = np.arange(-K, K + 1)
    g, tails = gamma_values(spectrum, k, tail_tol)
    a = np.abs(g)
    partial = np.cumsum(np.concatenate([[a[K]], a[K + 1:] + a[K - 1::-1]]))

    shells = []
    peaks = []
    lo = 0
    hi = 1
    while lo < K:
        hi = min(hi, K)
        sel = (np.abs(k) > lo) & (np.abs(k) <= hi)
        shells.append((lo, hi, float(a[sel].sum())))
        j = np.flatnonzero(sel)[np.argmax(a[sel])]
        peaks.append((int(k[j]), float(a[j])))
        lo, hi = hi, 2 * hi

    witness, scores = [], []
    verdict = INCONCLUSIVE
    tail_peaks = [pk for pk in peaks if abs(pk[0]) >= 2][-witness_shells:]
    if len(tail_peaks) == witness_shells:
        sc = [v * math.log2(abs(kk)) for kk, v in tail_peaks]
        if min(sc) >= witness_floor:
            verdict = INCONSISTENT
            witness = [kk for kk, _ in tail_peaks]
            scores = sc
    if verdict == INCONCLUSIVE and len(shells) >= 2:
        last, prev = shells[-1][2], shells[-2][2]
        lo, hi = shells[-1][0], shells[-1][1]
        sel = (np.abs(k) > lo) & (np.abs(k) <= hi)
        if last < incr_tol and last <= prev and float(tails[sel].sum()) < incr_tol:
            verdict = CONSISTENT
    return AdmissibilityReport(sup, l2, k, g, partial, shells, verdict, witness, scores,
                               float(np.max(tails)))


def s_decomposition(spectrum: SpectrumTable, lam: complex) -> tuple[complex, float]:
    """``S1 = sum alpha_nj(lam)`` and the bound ``sum |alpha_nj(lam)|^2`` on the remainder.

    For ``theta = 0`` the ``n = 0`` terms are ``alpha_0j = -lam_0j / lam``.
    """
    lam = complex(lam)
    c = spectrum.centers
    if np.any(np.abs(c - lam) == 0):
        raise DomainError(f"lam={lam} coincides with a point 2n + theta")
    alpha = spectrum.eps / (c - lam)[:, None]
    if spectrum.kind.theta == 0:
        alpha[spectrum.N] = -spectrum.values[spectrum.N] / lam
    return complex(alpha.sum()), float(np.sum(np.abs(alpha) ** 2))


def counterexample_spectrum(m_max: int, kind=0) -> SpectrumTable:
    """``eps_n1 = eps_n2 = 1/m`` at ``n = 2^m`` (1 <= m <= m_max), zero elsewhere."""
    if m_max < 1:
        raise ValidationError("m_max must be >= 1")
    if m_max > MAX_COUNTEREXAMPLE_M:
        raise CapacityError(f"m_max={m_max} exceeds the table limit {MAX_COUNTEREXAMPLE_M}")
    N = 2 ** m_max
    eps = np.zeros((2 * N + 1, 2), dtype=complex)
    for m in range(1, m_max + 1):
        eps[N + 2 ** m] = 1.0 / m
    return SpectrumTable.from_eps(kind, eps)


@dataclass(frozen=True)
class CounterexampleRow:
    p: int
    gamma: float
    sigma1: float
    sigma2: float
    sigma1_bound: float
    sigma2_bound: float
    passed: bool

    @property
    def sigma_sum(self) -> float:
        return self.sigma1 + self.sigma2


def _counterexample_terms(p: int, m):
    m = np.asarray(m, dtype=float)
    return 2.0 / (m * (2.0 ** (m + 1) - 2.0 ** (p + 1) - 1.0))


def verify_counterexample(p_min: int, p_max: int, tail_tol: float = 1e-12) -> list[CounterexampleRow]:
    """Direct summation of ``gamma_{2^p} = -2/p + sigma_p1 + sigma_p2``.

    ``sigma_p2`` is summed until a term drops below ``tail_tol``; the terms
    decay geometrically so the neglected remainder is below the last term.
    A row passes when ``|gamma| > 1/p`` and ``|sigma_p1 + sigma_p2| <= 1/p``.
    """
    if not (10 <= p_min <= p_max):
        raise ValidationError("need 10 <= p_min <= p_max")
    rows = []
    for p in range(p_min, p_max + 1):
        s1 = float(np.sum(_counterexample_terms(p, np.arange(1, p))))
        s2 = 0.0
        m = p + 1
        while True:
            t = float(_counterexample_terms(p, m))
            s2 += t
            if abs(t) < tail_tol:
                break
            m += 1
        g = -2.0 / p + s1 + s2
        ok = abs(g) > 1.0 / p and abs(s1 + s2) <= 1.0 / p
        rows.append(CounterexampleRow(p, g, s1, s2, 4 * (1 + math.log(p)) / 2 ** p, 4 / (p * 2 ** p), ok))
    return rows
