"""Schmidt spectra of bipartite pure states.

A :class:`Spectrum` is stored in compressed form: the distinct weights in
strictly decreasing order together with their multiplicities.  Tensor powers
of few-level spectra (``powers(0.5)`` to the 200th power, say) then stay
small, because the k-fold product of an m-level spectrum has at most
``C(k + m - 1, m - 1)`` distinct values.

Truncation is explicit.  Every operation that drops weight records the
dropped probability in ``mass_deficit`` so that downstream results can carry
an error bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InvalidInputError, UnsupportedInputError

DEFAULT_PRUNE = 1e-12
DEFAULT_CAP = 2**20
ATOL = 1e-12
# relative tolerance used to merge numerically coincident weights
MERGE_RTOL = 1e-12


class Estimate(NamedTuple):
    """A computed value with an additive error bound from truncation."""

    value: float
    bound: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sorted, normalized Schmidt spectrum.

    Attributes
    ----------
    values : np.ndarray
        Distinct strictly positive weights, strictly decreasing.
    counts : np.ndarray
        Multiplicity of each value (float64 holding integers; multiplicities of
        large tensor powers exceed the int64 range).
    mass_deficit : float
        Probability removed by truncation. ``sum(weights) + mass_deficit == 1``.
    full_dim : int
        Dimension of the untruncated spectrum. Used to bound the entropy of
        the dropped tail.
    """

    values: np.ndarray
    counts: np.ndarray
    mass_deficit: float = 0.0
    full_dim: int = 0

    @property
    def n_classes(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        """Number of retained Schmidt coefficients (with multiplicity)."""
        return int(round(float(self.counts.sum())))

    @property
    def weights(self) -> np.ndarray:
        """Expanded, non-increasing weight vector."""
        return np.repeat(self.values, self.counts.astype(np.int64))

    @property
    def is_exact(self) -> bool:
        return self.mass_deficit == 0.0

    @property
    def mass(self) -> float:
        return float(np.dot(self.values, self.counts))

    @property
    def is_pure(self) -> bool:
        return self.n_classes == 1 and self.counts[0] == 1

    @property
    def is_uniform(self) -> bool:
        return self.n_classes == 1

    def allclose(self, other: "Spectrum", atol: float = 1e-10) -> bool:
        """Entrywise comparison of the padded, sorted weight vectors."""
        lengths, a, b = aligned_segments(self, other)
        return bool(np.all(np.abs(a - b) <= atol))

    def __repr__(self) -> str:
        if self.n_classes <= 6:
            body = ", ".join(
                f"{v:.6g}" + (f"x{int(c)}" if c != 1 else "")
                for v, c in zip(self.values, self.counts)
            )
        else:
            body = f"{self.n_classes} classes, max {self.values[0]:.6g}"
        tail = f", deficit={self.mass_deficit:.3g}" if self.mass_deficit else ""
        return f"Spectrum([{body}]{tail})"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _canonical(values: np.ndarray, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort descending and merge numerically equal values, conserving mass."""
    keep = (values > 0) & (counts > 0)
    values, counts = values[keep], counts[keep]
    if values.size == 0:
        return values, counts
    order = np.argsort(-values, kind="stable")
    values, counts = values[order], counts[order]
    new = np.ones(values.size, dtype=bool)
    new[1:] = (values[:-1] - values[1:]) > MERGE_RTOL * values[:-1]
    if new.all():
        return values, counts
    group = np.cumsum(new) - 1
    mass = np.bincount(group, weights=values * counts)
    merged = np.bincount(group, weights=counts)
    return mass / merged, merged


def from_classes(
    values: Iterable[float],
    counts: Iterable[float] | None = None,
    mass_deficit: float = 0.0,
    full_dim: int | None = None,
) -> Spectrum:
    """Build a spectrum from (value, multiplicity) classes without renormalizing."""
    v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
    c = np.ones_like(v) if counts is None else np.asarray(
        list(counts) if not isinstance(counts, np.ndarray) else counts, dtype=np.float64
    )
    v, c = _canonical(v, c)
    if v.size == 0:
        raise InvalidInputError("spectrum has no positive weight")
    if full_dim is None:
        full_dim = int(round(float(c.sum())))
    return Spectrum(_freeze(v), _freeze(c), float(mass_deficit), int(full_dim))


def make_spectrum(weights: Iterable[float]) -> Spectrum:
    """Normalize, sort and drop zeros.

    Raises
    ------
    InvalidInputError
        If any weight is negative or non-finite, or all weights are zero.
    """
    w = np.asarray([float(x) for x in weights], dtype=np.float64)
    if w.size == 0 or not np.all(np.isfinite(w)):
        raise InvalidInputError("weights must be a non-empty list of finite numbers")
    if np.any(w < 0):
        raise InvalidInputError("weights must be non-negative")
    total = w.sum()
    if total <= 0:
        raise InvalidInputError("at least one weight must be positive")
    return from_classes(w / total, full_dim=int(np.count_nonzero(w)))


def point_mass() -> Spectrum:
    return from_classes([1.0])


def uniform(n: int) -> Spectrum:
    """Maximally entangled spectrum of Schmidt rank ``n``."""
    if n < 1:
        raise InvalidInputError("uniform spectrum needs n >= 1")
    return from_classes([1.0 / n], [float(n)], full_dim=n)


def powers(lam: float) -> Spectrum:
    """Two-level spectrum ``[1, lam] / (1 + lam)``."""
    if not 0 < lam <= 1:
        raise InvalidInputError("Powers parameter must lie in (0, 1]")
    return make_spectrum([1.0, lam])


def _prune(
    values: np.ndarray, counts: np.ndarray, delta: float, cap: int
) -> tuple[np.ndarray, np.ndarray, float]:
    """Drop the smallest weights, at most ``delta`` mass, then enforce ``cap`` classes.

    Returns the kept classes and the dropped mass.  The largest weight is
    never dropped.
    """
    dropped = 0.0
    if delta > 0 and values.size:
        masses = values * counts
        tail = np.cumsum(masses[::-1])[::-1]
        fits = np.nonzero(tail[1:] <= delta)[0]
        if fits.size:
            cut = int(fits[0]) + 1
            dropped = float(tail[cut])
            values, counts = values[:cut], counts[:cut]
        # whole-class removal is exhausted; trim members of the last class
        k = min(math.floor((delta - dropped) / values[-1]), counts[-1] - 1)
        if k > 0:
            counts = counts.copy()
            counts[-1] -= k
            dropped += float(k * values[-1])
    if values.size > cap:
        dropped += float(np.dot(values[cap:], counts[cap:]))
        values, counts = values[:cap], counts[:cap]
    return values, counts, dropped


def prune(s: Spectrum, delta: float = DEFAULT_PRUNE, cap: int = DEFAULT_CAP) -> Spectrum:
    """Truncate the tail of ``s`` (see :func:`tensor` for the rule)."""
    v, c, dropped = _prune(np.array(s.values), np.array(s.counts), delta, cap)
    if dropped == 0.0:
        return s
    return Spectrum(_freeze(v), _freeze(c), s.mass_deficit + dropped, s.full_dim)


def tensor(
    s: Spectrum, t: Spectrum, prune: float = DEFAULT_PRUNE, cap: int = DEFAULT_CAP
) -> Spectrum:
    """Schmidt spectrum of the product state.

    The products ``s_i * t_j`` are sorted and the smallest are dropped until at
    most ``prune`` probability is removed; at most ``cap`` distinct values are
    kept (anything beyond the cap is also dropped and the excess shows up in
    ``mass_deficit``).
    """
    if not 0 <= prune < 1:
        raise InvalidInputError("prune threshold must lie in [0, 1)")
    # rows of the outer product are sorted runs; put the longer side along rows
    a, b = (s, t) if s.n_classes <= t.n_classes else (t, s)
    values = np.multiply.outer(a.values, b.values).ravel()
    counts = np.multiply.outer(a.counts, b.counts).ravel()
    # products below the float range carry no representable mass
    values, counts = _canonical(values, np.where(np.isfinite(counts), counts, 0.0))
    values, counts, dropped = _prune(values, counts, prune, cap)
    inherited = s.mass_deficit + t.mass_deficit - s.mass_deficit * t.mass_deficit
    deficit = inherited + dropped
    return Spectrum(_freeze(values), _freeze(counts), deficit, s.full_dim * t.full_dim)


def tensor_power(
    s: Spectrum, k: int, prune: float = DEFAULT_PRUNE, cap: int = DEFAULT_CAP
) -> Spectrum:
    """k-fold tensor power with pruning applied after every factor."""
    if k < 0:
        raise InvalidInputError("tensor power needs k >= 0")
    out = point_mass()
    for _ in range(k):
        out = tensor(out, s, prune=prune, cap=cap)
    return out


def _unit_counts(s: Spectrum) -> bool:
    return bool(s.counts[0] == 1 and s.counts.max() == 1)


def aligned_segments(p: Spectrum, q: Spectrum) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Align two sorted step functions.

    Returns ``(lengths, a, b)`` such that on consecutive index blocks of the
    given lengths the padded sorted weight vectors of ``p`` and ``q`` are
    constant with values ``a`` and ``b`` (zero past a spectrum's support).
    """
    if _unit_counts(p) and _unit_counts(q):
        n = max(p.n_classes, q.n_classes)
        a = np.zeros(n)
        b = np.zeros(n)
        a[: p.n_classes] = p.values
        b[: q.n_classes] = q.values
        return np.ones(n), a, b
    ca = np.cumsum(p.counts)
    cb = np.cumsum(q.counts)
    ends = np.union1d(ca, cb)
    starts = np.concatenate(([0.0], ends[:-1]))
    lengths = ends - starts
    ia = np.searchsorted(ca, starts, side="right")
    ib = np.searchsorted(cb, starts, side="right")
    a = np.where(ia < ca.size, p.values[np.minimum(ia, ca.size - 1)], 0.0)
    b = np.where(ib < cb.size, q.values[np.minimum(ib, cb.size - 1)], 0.0)
    return lengths, a, b


def sorted_fidelity(p: Spectrum, q: Spectrum) -> Estimate:
    """Maximal overlap of two bipartite pure states under local unitaries.

    ``F = sum_i sqrt(p_i q_i)`` over the padded, sorted weight vectors.  The
    untruncated value lies in ``[value, value + bound]`` with
    ``bound = sqrt(deficit_p) + sqrt(deficit_q)``.
    """
    lengths, a, b = aligned_segments(p, q)
    value = float(np.dot(lengths, np.sqrt(a) * np.sqrt(b)))
    bound = math.sqrt(p.mass_deficit) + math.sqrt(q.mass_deficit)
    return Estimate(min(value, 1.0), bound)


def entropy(s: Spectrum, base: str | float = "nat") -> Estimate:
    """Entanglement entropy ``-sum p log p``.

    ``base`` is ``"nat"`` (natural log) or ``"bit"`` (log base 2); a number is
    used as the logarithm base directly.  The bound is the largest entropy the
    truncated tail can carry, ``d log(D / d)`` for deficit ``d`` spread over at
    most ``D = full_dim`` entries.
    """
    scale = _log_scale(base)
    value = -float(np.dot(s.counts, s.values * np.log(s.values)))
    d = s.mass_deficit
    bound = d * math.log(max(s.full_dim, 1) / d) if d > 0 else 0.0
    return Estimate(max(value, 0.0) / scale, max(bound, 0.0) / scale)


def _log_scale(base: str | float) -> float:
    if base in ("nat", "e", "nats"):
        return 1.0
    if base in ("bit", "bits", 2, 2.0):
        return math.log(2.0)
    if isinstance(base, (int, float)) and base > 1:
        return math.log(base)
    raise InvalidInputError(f"unsupported logarithm base {base!r}")


def _lorenz(p: Spectrum, q: Spectrum) -> tuple[np.ndarray, np.ndarray]:
    lengths, a, b = aligned_segments(p, q)
    return np.cumsum(lengths * a), np.cumsum(lengths * b)


def majorizes(p: Spectrum, q: Spectrum, atol: float = ATOL) -> bool:
    """True iff ``p`` majorizes ``q``: every partial sum of ``p`` dominates ``q``'s.

    The Lorenz curves are piecewise linear between class boundaries, so
    comparing at the aligned block ends is exact.
    """
    if not (p.is_exact and q.is_exact):
        raise UnsupportedInputError("majorization needs exact spectra (zero mass_deficit)")
    cp, cq = _lorenz(p, q)
    return bool(np.all(cp >= cq - atol))


def vector_distance(fidelity: float) -> float:
    """``sqrt(2 - 2F)``: distance between optimally aligned unit vectors."""
    return math.sqrt(max(0.0, 2.0 - 2.0 * fidelity))


def trace_distance(fidelity: float) -> float:
    """``2 sqrt(1 - F^2)``: trace-norm distance of the corresponding pure states."""
    return 2.0 * math.sqrt(max(0.0, 1.0 - fidelity * fidelity))


def check_invariants(s: Spectrum, atol: float = ATOL) -> None:
    """Raise ``AssertionError`` if ``s`` violates the spectrum invariants."""
    assert s.values.ndim == 1 and s.values.shape == s.counts.shape
    assert np.all(s.values > 0), "weights must be strictly positive"
    assert np.all(np.diff(s.values) < 0), "values must be strictly decreasing"
    assert np.all(s.counts >= 1) and np.all(s.counts == np.round(s.counts))
    assert 0.0 <= s.mass_deficit < 1.0
    assert abs(s.mass + s.mass_deficit - 1.0) <= atol * max(1.0, math.sqrt(s.n_classes))
