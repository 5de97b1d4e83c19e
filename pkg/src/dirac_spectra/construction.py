"""Build the pair ``(c, s)`` of entire functions from a target determinant.

Starting from ``chi(lam) = U(lam) - (-1)^(theta+1) = cos(pi lam) + f(lam)``:

* nodes ``lam_n`` (``lam_n = n`` far out, a tight cluster near
  ``N0 + 1/2`` for ``0 <= n <= N0``, odd mirror image on the negative side),
* ``s(lam) = -pi (lam_0 - lam) prod_{n != 0} (lam_n - lam) / n``,
* ``c_n`` a root of ``w^2 - 2 chi(lam_n) w + 1``,
* ``z_n = c_n / s'(lam_n)`` and ``beta_n = c_n - cos(pi lam_n)``,
* ``g(lam) = s(lam) sum beta_n / (s'(lam_n) (lam - lam_n))`` and
  ``c(lam) = cos(pi lam) + g(lam)``.

Only finitely many nodes differ from the integers, so ``s`` is evaluated as
``sin(pi lam)`` times a finite correction.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .core import DEFAULT_TOLERANCES, BoundaryKind, _frozen_array, _pairs, _unpairs
from .determinant import DeterminantModel, delta0, delta_from_spectrum
from .errors import ConstructionError, InsufficientRangeError, ValidationError
from .forward import refine_disk

log = logging.getLogger(__name__)

F_THRESHOLD = 1e-2          # |f| bound on the real axis beyond N0
CLUSTER_HALF_WIDTH = 1e-2
DISK_RADIUS = 0.1


# -- nodes -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Nodes:
    """Nodes ``lam_n`` for ``|n| <= N``; ``lam_n = n`` is implied beyond."""
    n: np.ndarray
    lam: np.ndarray
    N0: int | None = None

    def __post_init__(self):
        n = np.asarray(self.n, dtype=np.int64)
        lam = np.asarray(self.lam, dtype=float)
        if n.ndim != 1 or n.shape != lam.shape or n.size == 0:
            raise ValidationError("nodes need matching 1D index and value arrays")
        N = (n.size - 1) // 2
        if not np.array_equal(n, np.arange(-N, N + 1)):
            raise ValidationError("node indices must cover -N..N")
        if not np.all(np.isfinite(lam)):
            raise ValidationError("node values must be finite")
        if np.any(np.diff(lam) <= 0):
            raise ValidationError("nodes must be strictly increasing")
        if lam[0] <= -N - 1 or lam[-1] >= N + 1:
            raise ValidationError("stored nodes must stay inside (-N-1, N+1)")
        object.__setattr__(self, "n", _frozen_array(n, np.int64))
        object.__setattr__(self, "lam", _frozen_array(lam, float))

    @property
    def N(self) -> int:
        return (self.n.size - 1) // 2

    @property
    def perturbed(self) -> np.ndarray:
        """Indices whose node is not the integer itself."""
        return self.n[self.lam != self.n]

    def as_map(self) -> dict[int, float]:
        return {int(k): float(v) for k, v in zip(self.n, self.lam)}

    @classmethod
    def from_map(cls, nodes: Mapping[int, float], N0: int | None = None) -> "Nodes":
        keys = sorted(int(k) for k in nodes)
        return cls(np.array(keys), np.array([nodes[k] for k in keys], dtype=float), N0)


def cluster_positions(N0: int) -> np.ndarray:
    """``N0 + 1`` equispaced points strictly inside ``(N0 + 1/2 - 1/100, N0 + 1/2 + 1/100)``."""
    j = np.arange(N0 + 1)
    return N0 + 0.5 - CLUSTER_HALF_WIDTH + 2 * CLUSTER_HALF_WIDTH * (j + 1) / (N0 + 2)


def _f_samples(f: Callable, limit: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    x = np.arange(0.0, limit + step / 2, step)
    vals = np.maximum(np.abs(f(x.astype(complex))), np.abs(f(-x.astype(complex))))
    return x, vals


def find_N0(f: Callable, limit: float, step: float = 1 / 16, threshold: float = F_THRESHOLD) -> int:
    """Smallest integer ``N0`` with ``|f(lam)| < threshold`` on every real sample ``|lam| >= N0``.

    ``f`` is sampled on ``[-limit, limit]`` with the given step.
    """
    x, vals = _f_samples(f, limit, step)
    bad = np.flatnonzero(vals >= threshold)
    if bad.size == 0:
        return 0
    last = x[bad[-1]]
    N0 = int(math.floor(last)) + 1
    if N0 > limit - 1:
        raise ConstructionError(f"|f| >= {threshold} up to |lam| = {last:.4g}; sample limit {limit} too small")
    return N0


def choose_nodes(f: Callable | None, N0: int, N: int, *, sample_limit: float | None = None,
                 step: float = 1 / 16) -> Nodes:
    """Node layout for threshold ``N0`` and stored range ``|n| <= N``.

    When ``f`` is given, ``|f| < 1/100`` is checked on real samples with
    ``N0 <= |lam| <= sample_limit`` (default ``max(2N, N0 + 64)``).
    """
    if N0 < 0:
        raise ValidationError("N0 must be >= 0")
    if N < N0:
        raise ValidationError(f"N={N} must be >= N0={N0}")
    if f is not None:
        limit = sample_limit if sample_limit is not None else max(2 * N, N0 + 64)
        x, vals = _f_samples(f, limit, step)
        sel = x >= N0
        if np.any(vals[sel] >= F_THRESHOLD):
            worst = float(vals[sel].max())
            try:
                hint = f"; try N0={find_N0(f, limit, step)}"
            except ConstructionError:
                hint = ""
            raise ConstructionError(f"N0={N0} too small: |f| reaches {worst:.3g} beyond it{hint}")
    n = np.arange(-N, N + 1)
    lam = n.astype(float)
    lam[N:N + N0 + 1] = cluster_positions(N0)
    # odd mirror keeps the sequence increasing
    lam[N - N0:N] = -lam[N + N0:N:-1]
    return Nodes(n, lam, N0)


# -- s -----------------------------------------------------------------------

def _sin_over(m: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """``sin(pi lam) / (m - lam)`` without cancellation near ``lam = m``."""
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    return -sign * np.pi * np.sinc(lam - m)


def _node_value(nodes: Nodes, k: np.ndarray) -> np.ndarray:
    N = nodes.N
    return np.where(np.abs(k) <= N, nodes.lam[np.clip(k, -N, N) + N], k).astype(float)


def _s_parts(nodes: Nodes, lam: np.ndarray, m: np.ndarray | None = None) -> np.ndarray:
    """``s(lam)``, or ``s(lam) / (lam_m - lam)`` when ``m`` is given.

    With ``j`` the integer nearest to ``Re lam``,
    ``s = [sin(pi lam) / (j - lam)] (lam_j - lam) prod_{k in P, k != j} (lam_k - lam) / (k - lam)``
    where ``P`` are the perturbed indices.  Every remaining denominator is at
    least 1/2 in modulus.
    """
    j = np.rint(lam.real).astype(np.int64)
    S = _sin_over(j, lam)
    lead = _node_value(nodes, j) - lam
    P = nodes.perturbed
    if m is None:
        if P.size == 0:
            return S * lead
        r = (nodes.lam[P + nodes.N] - lam[..., None]) / (P - lam[..., None] + (P == j[..., None]))
        r = np.where(P == j[..., None], 1.0, r)
        return S * lead * np.prod(r, axis=-1)
    m = np.broadcast_to(np.asarray(m, dtype=np.int64), lam.shape)
    if P.size:
        skip = (P == j[..., None]) | (P == m[..., None])
        r = (nodes.lam[P + nodes.N] - lam[..., None]) / (P - lam[..., None] + skip)
        r = np.where(skip, 1.0, r)
        # a perturbed m != j leaves its denominator behind
        r = np.where((P == m[..., None]) & (m != j)[..., None], 1.0 / (P - lam[..., None] + (P == j[..., None])), r)
        prod = np.prod(r, axis=-1)
    else:
        prod = np.ones(lam.shape, dtype=complex)
    on_j = m == j
    m_pert = np.isin(m, P)
    with np.errstate(divide="ignore", invalid="ignore"):
        other = np.where(m_pert, S * lead * prod, S * lead * prod / (m - lam))
    return np.where(on_j, S * prod, other)


def _s_reduced(nodes: Nodes, lam, m) -> np.ndarray:
    """``s(lam) / (lam_m - lam)`` with node ``m``'s factor removed analytically."""
    lam, m = np.broadcast_arrays(np.asarray(lam, dtype=complex), np.asarray(m, dtype=np.int64))
    return _s_parts(nodes, lam, m)


def s_eval(nodes: Nodes, lam):
    """``s(lam)``; exactly zero at every node."""
    scalar = np.ndim(lam) == 0
    out = _s_parts(nodes, np.asarray(lam, dtype=complex).reshape(-1)).reshape(np.shape(lam))
    return complex(out) if scalar else out


def s_dot_at_nodes(nodes: Nodes, check: bool = True) -> np.ndarray:
    """``s'(lam_n)`` for every stored node.

    With ``check`` the sign pattern ``(-1)^n s'(lam_n) > 0`` is enforced.
    """
    sd = -_s_reduced(nodes, nodes.lam, nodes.n).real
    if check:
        sign = np.where(nodes.n % 2 == 0, 1.0, -1.0)
        bad = np.flatnonzero(~(sign * sd > 0))
        if bad.size:
            raise ConstructionError(
                f"node layout invalid: (-1)^n s'(lam_n) <= 0 at n={[int(nodes.n[i]) for i in bad[:5]]}")
    return sd


# -- quadratic ---------------------------------------------------------------

def quadratic_roots(chi):
    """Roots ``(c_plus, c_minus)`` of ``w^2 - 2 chi w + 1``.

    The larger root is formed without cancellation and the other one is its
    reciprocal.  ``c_plus`` is the root with the larger imaginary part; for
    real roots it is ``chi + sqrt(chi^2 - 1)`` on the principal branch.
    """
    scalar = np.ndim(chi) == 0
    chi = np.asarray(chi, dtype=complex)
    d = np.sqrt((chi - 1) * (chi + 1))
    a, b = chi + d, chi - d
    big = np.where(np.abs(a) >= np.abs(b), a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = 1.0 / big
    tol = 1e-14 * (1 + np.abs(chi))
    # a is the principal chi + d, decide which of (big, small) it is
    big_is_a = np.abs(a) >= np.abs(b)
    pa = np.where(big_is_a, big, small)
    pb = np.where(big_is_a, small, big)
    swap = pb.imag > pa.imag + tol
    cp = np.where(swap, pb, pa)
    cm = np.where(swap, pa, pb)
    if scalar:
        return complex(cp), complex(cm)
    return cp, cm


# -- assembly ----------------------------------------------------------------

@dataclass(frozen=True)
class DiskWarning:
    n: int
    root: str
    center: complex
    distance: float

    def to_dict(self) -> dict:
        return {"n": self.n, "root": self.root, "center": _pairs([self.center])[0], "distance": self.distance}


def select_c(nodes: Nodes, chi: Callable) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, list]:
    """``(chi_n, c_plus, c_minus, c_n, warnings)`` with ``c_n = c_plus`` for even ``n``.

    Warnings record roots outside the expected disks (``+-i`` for the
    cluster, ``(-1)^n`` beyond it).
    """
    chi_n = np.asarray(chi(nodes.lam.astype(complex)), dtype=complex)
    cp, cm = quadratic_roots(chi_n)
    even = nodes.n % 2 == 0
    c = np.where(even, cp, cm)
    N0 = nodes.N0 if nodes.N0 is not None else -1
    warnings = []
    for i, k in enumerate(nodes.n):
        if abs(k) <= N0:
            targets = (("plus", cp[i], 1j), ("minus", cm[i], -1j))
        else:
            ctr = 1.0 if k % 2 == 0 else -1.0
            targets = (("plus", cp[i], ctr), ("minus", cm[i], ctr))
        for name, root, ctr in targets:
            dist = abs(root - ctr)
            if dist >= DISK_RADIUS:
                warnings.append(DiskWarning(int(k), name, complex(ctr), float(dist)))
    if warnings:
        log.warning("%d roots outside their expected disks", len(warnings))
    return chi_n, cp, cm, c, warnings


def half_plane_margin(z) -> np.ndarray:
    """``Re z + Im z``; positive means strictly above the line ``Im = -Re``."""
    z = np.asarray(z, dtype=complex)
    return z.real + z.imag


@dataclass(frozen=True, eq=False)
class ConstructionData:
    kind: BoundaryKind
    N0: int
    n: np.ndarray
    nodes: np.ndarray
    s_dot: np.ndarray
    chi: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    c_values: np.ndarray
    z_values: np.ndarray
    beta: np.ndarray
    warnings: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", BoundaryKind.coerce(self.kind))
        size = np.asarray(self.n).size
        for name, dt in (("n", np.int64), ("nodes", float), ("s_dot", float), ("chi", complex),
                         ("c_plus", complex), ("c_minus", complex), ("c_values", complex),
                         ("z_values", complex), ("beta", complex)):
            arr = np.asarray(getattr(self, name), dtype=dt)
            if arr.shape != (size,):
                raise ValidationError(f"{name} must have {size} entries")
            object.__setattr__(self, name, _frozen_array(arr, dt))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        if np.any(np.diff(self.nodes) <= 0):
            raise ValidationError("nodes must be strictly increasing")
        sign = np.where(self.n % 2 == 0, 1.0, -1.0)
        if np.any(sign * self.s_dot <= 0):
            raise ValidationError("(-1)^n s'(lam_n) must be positive")
        if np.any(half_plane_margin(self.z_values) <= 0):
            raise ValidationError("every z_n must lie strictly above Im z = -Re z")

    @property
    def N(self) -> int:
        return (self.n.size - 1) // 2

    @property
    def node_set(self) -> Nodes:
        return Nodes(self.n, self.nodes, self.N0)

    # derived sequences, each square summable in theory
    @property
    def rho(self) -> np.ndarray:
        return self.nodes - self.n

    @property
    def tau(self) -> np.ndarray:
        return self.s_dot - np.pi * np.where(self.n % 2 == 0, 1.0, -1.0)

    @property
    def sigma(self) -> np.ndarray:
        return 1.0 / self.s_dot - np.where(self.n % 2 == 0, 1.0, -1.0) / np.pi

    @property
    def vartheta(self) -> np.ndarray:
        return self.c_values - np.where(self.n % 2 == 0, 1.0, -1.0)

    def beta_tail_l2(self) -> float:
        """l2 mass of ``beta`` on ``N/2 < |n| <= N``, standing in for the unstored tail."""
        sel = np.abs(self.n) > self.N // 2
        return float(np.sqrt(np.sum(np.abs(self.beta[sel]) ** 2)))

    def to_dict(self) -> dict:
        return {
            "theta": self.kind.theta,
            "N0": self.N0,
            "N": self.N,
            "nodes": [float(v) for v in self.nodes],
            "s_dot": [float(v) for v in self.s_dot],
            "chi": _pairs(self.chi),
            "c_plus": _pairs(self.c_plus),
            "c_minus": _pairs(self.c_minus),
            "c_values": _pairs(self.c_values),
            "z_values": _pairs(self.z_values),
            "beta": _pairs(self.beta),
            "warnings": [w.to_dict() for w in self.warnings],
            "meta": dict(self.meta),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ConstructionData":
        try:
            N = int(d["N"])
            nodes = np.asarray(d["nodes"], dtype=float)
            s_dot = np.asarray(d["s_dot"], dtype=float)
            fields = {k: _unpairs(d[k], k) for k in ("chi", "c_plus", "c_minus", "c_values", "z_values", "beta")}
            warnings = [DiskWarning(int(w["n"]), str(w["root"]), complex(*w["center"]), float(w["distance"]))
                        for w in d.get("warnings", [])]
            return cls(d["theta"], int(d["N0"]), np.arange(-N, N + 1), nodes, s_dot,
                       warnings=warnings, meta=dict(d.get("meta", {})), **fields)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed construction data: {exc!r}") from exc


def z_and_beta(nodes: np.ndarray, s_dot: np.ndarray, c_values: np.ndarray, n=None) -> tuple[np.ndarray, np.ndarray]:
    """``z_n = c_n / s'(lam_n)`` and ``beta_n = c_n - cos(pi lam_n)``.

    Raises :class:`ConstructionError` if some ``z_n`` is not strictly above
    the line ``Im z = -Re z``.
    """
    z = np.asarray(c_values, dtype=complex) / np.asarray(s_dot, dtype=float)
    beta = np.asarray(c_values, dtype=complex) - np.cos(np.pi * np.asarray(nodes, dtype=float))
    bad = np.flatnonzero(half_plane_margin(z) <= 0)
    if bad.size:
        idx = bad if n is None else np.asarray(n)[bad]
        raise ConstructionError(f"z_n not above the line Im z = -Re z at n={[int(i) for i in idx[:5]]}")
    return z, beta


def chi_from_model(model: DeterminantModel) -> Callable:
    """``chi = Delta - (-1)^(theta+1)`` for a determinant built from a spectrum."""
    return model.chi


def f_from_model(model: DeterminantModel) -> Callable:
    """``f = Delta - Delta0``."""
    return lambda lam: delta_from_spectrum(model, lam) - delta0(model.kind, lam)


def build_construction(target, N: int, N0: int | str = "auto", *, kind=None,
                       sample_limit: float | None = None) -> ConstructionData:
    """Run the full pipeline.

    ``target`` is a :class:`DeterminantModel` or a callable ``chi``; for a
    bare callable ``kind`` must be given.
    """
    if isinstance(target, DeterminantModel):
        chi = chi_from_model(target)
        kind = target.kind
    else:
        if kind is None:
            raise ValidationError("kind is required with a callable chi")
        chi = target
        kind = BoundaryKind.coerce(kind)

    def f(lam):
        return chi(lam) - np.cos(np.pi * np.asarray(lam, dtype=complex))

    limit = sample_limit if sample_limit is not None else None
    if N0 == "auto":
        N0 = find_N0(f, limit if limit is not None else max(2 * N, 64))
        if N0 > N:
            raise ConstructionError(f"sampled threshold N0={N0} exceeds the requested N={N}")
    nodes = choose_nodes(f, int(N0), N, sample_limit=limit)
    sd = s_dot_at_nodes(nodes)
    chi_n, cp, cm, c, warnings = select_c(nodes, chi)
    z, beta = z_and_beta(nodes.lam, sd, c, nodes.n)
    return ConstructionData(kind, int(N0), nodes.n, nodes.lam, sd, chi_n, cp, cm, c, z, beta,
                            tuple(warnings))


# -- interpolant ---------------------------------------------------------------

def g_tail_bound(data: ConstructionData, lam, beta_tail_l2: float | None = None) -> float:
    """Cauchy-Schwarz bound on the series terms with ``|n| > N``.

    There ``lam_n = n`` and ``|s'(n)| = pi |P(n)|`` with ``P`` close to 1; the
    unstored ``beta`` are represented by ``beta_tail_l2`` (default: the l2
    mass of the stored edge).
    """
    if beta_tail_l2 is None:
        beta_tail_l2 = data.beta_tail_l2()
    lam = complex(lam)
    N = data.N
    K = max(4 * N, 4 * int(abs(lam)) + 16)
    n = np.concatenate([np.arange(N + 1, K + 1), -np.arange(N + 1, K + 1)])
    ssum = np.sum(1.0 / np.abs(lam - n) ** 2) + 2.0 / max(K - abs(lam), 1.0)
    nodes = data.node_set
    sdn = np.abs(-_s_reduced(nodes, n.astype(float), n))
    return float(abs(s_eval(nodes, lam)) * beta_tail_l2 / sdn.min() * math.sqrt(ssum))


def g_eval(data: ConstructionData, lam, *, near_tol: float = DEFAULT_TOLERANCES.root_tol,
           tail_tol: float | None = None):
    """``g(lam) = s(lam) sum_{|n| <= N} beta_n / (s'(lam_n) (lam - lam_n))``.

    Within ``near_tol`` of a node the singular term is taken in its
    removable form, so ``g(lam_m) = beta_m``.  With ``tail_tol`` the
    truncated tail must be certified below it.
    """
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    nodes = data.node_set
    if tail_tol is not None:
        worst = max(g_tail_bound(data, x) for x in lam)
        if worst > tail_tol:
            raise InsufficientRangeError(f"g tail bound {worst:.3g} exceeds {tail_tol:.3g}; store more nodes")
    s = s_eval(nodes, lam)
    w = data.beta / data.s_dot
    diff = lam[:, None] - data.nodes[None, :]
    near = np.abs(diff) <= near_tol
    with np.errstate(divide="ignore", invalid="ignore"):
        q = s[:, None] / diff
    if np.any(near):
        r, col = np.nonzero(near)
        q[r, col] = -_s_reduced(nodes, lam[r], data.n[col])
    out = q @ w
    return complex(out[0]) if scalar else out


def c_eval(data: ConstructionData, lam, **kw):
    """``c(lam) = cos(pi lam) + g(lam)``."""
    scalar = np.ndim(lam) == 0
    lam_a = np.atleast_1d(np.asarray(lam, dtype=complex))
    out = np.cos(np.pi * lam_a) + g_eval(data, lam_a, **kw)
    return complex(out[0]) if scalar else out


@dataclass
class ConstructionReport:
    sign_alternation: bool
    half_plane: bool
    root_sum_error: float
    root_product_error: float
    g_interpolation_error: float
    c_interpolation_error: float
    min_abs_c_at_nodes: float
    zero_distances: dict        # n -> distance from lam_n to the nearest located zero of c (None: no zero nearby)
    unresolved: list            # nodes whose disk could not be resolved by winding
    separation: float
    disk_warnings: int

    @property
    def min_zero_distance(self) -> float | None:
        d = [v for v in self.zero_distances.values() if v is not None]
        return min(d) if d else None

    @property
    def disjoint_zeros(self) -> bool:
        d = self.min_zero_distance
        return self.min_abs_c_at_nodes > 0 and (d is None or d >= self.separation)

    @property
    def passed(self) -> bool:
        return self.sign_alternation and self.half_plane and self.disjoint_zeros

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "sign_alternation": self.sign_alternation,
            "half_plane": self.half_plane,
            "root_sum_error": self.root_sum_error,
            "root_product_error": self.root_product_error,
            "g_interpolation_error": self.g_interpolation_error,
            "c_interpolation_error": self.c_interpolation_error,
            "min_abs_c_at_nodes": self.min_abs_c_at_nodes,
            "disjoint_zeros": self.disjoint_zeros,
            "separation": self.separation,
            "min_zero_distance": self.min_zero_distance,
            "zero_distances": {str(k): v for k, v in self.zero_distances.items()},
            "unresolved": [int(k) for k in self.unresolved],
            "disk_warnings": self.disk_warnings,
        }


def verify_construction(data: ConstructionData, *, separation: float = 1e-8,
                        disk_radius: float = 0.05, winding_nodes: int | None = 16) -> ConstructionReport:
    """Check the invariants of assembled data and that ``c`` and ``s`` share no zero.

    Zeros of ``c`` are located by contour integrals on disks of radius
    ``min(disk_radius, 0.4 * local node gap)`` around the ``winding_nodes``
    nodes of smallest ``|n|`` (all nodes when ``None``); they must stay at
    least ``separation`` away from the node.
    """
    sign = np.where(data.n % 2 == 0, 1.0, -1.0)
    scale = 1 + np.abs(data.chi)
    rsum = float(np.max(np.abs(data.c_plus + data.c_minus - 2 * data.chi) / scale))
    rprod = float(np.max(np.abs(data.c_plus * data.c_minus - 1)))
    g = g_eval(data, data.nodes.astype(complex))
    c = c_eval(data, data.nodes.astype(complex))
    gerr = float(np.max(np.abs(g - data.beta)))
    cerr = float(np.max(np.abs(c - data.c_values)))
    gaps = np.diff(data.nodes)
    local = np.minimum(np.concatenate([[np.inf], gaps]), np.concatenate([gaps, [np.inf]]))
    order = np.argsort(np.abs(data.n), kind="stable")
    if winding_nodes is not None:
        order = order[:winding_nodes]
    dist, unresolved = {}, []
    for i in sorted(order):
        r = min(disk_radius, 0.4 * local[i])
        ctr = complex(data.nodes[i])
        try:
            loc = refine_disk(lambda z: c_eval(data, z), ctr, r)
        except ArithmeticError:
            unresolved.append(int(data.n[i]))
            continue
        dist[int(data.n[i])] = min((abs(z - ctr) for z in loc.refined_roots), default=None)
    return ConstructionReport(
        sign_alternation=bool(np.all(sign * data.s_dot > 0)),
        half_plane=bool(np.all(half_plane_margin(data.z_values) > 0)),
        root_sum_error=rsum,
        root_product_error=rprod,
        g_interpolation_error=gerr,
        c_interpolation_error=cerr,
        min_abs_c_at_nodes=float(np.min(np.abs(c))),
        zero_distances=dist,
        unresolved=unresolved,
        separation=separation,
        disk_warnings=len(data.warnings),
    )
