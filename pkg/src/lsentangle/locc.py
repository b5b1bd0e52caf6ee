"""Pure-state LOCC conversion between bipartite states given by Schmidt spectra.

Direction convention: a source ``p`` converts exactly into a target ``q``
iff ``p`` is majorized by ``q``.  Approximate conversion uses the optimal
deterministic strategy: convert ``p`` into the reachable spectrum closest to
``q`` and report the overlap.  Every function here works on the compressed
step-function form of the spectra, so targets such as a uniform spectrum on
``2**60`` levels are cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .embezzlement import FamilyCheck, _labelled, scan_family_from_top
from .errors import InvalidInputError, UnsupportedInputError
from .spectra import Spectrum, aligned_segments, majorizes, uniform


def _require_exact(*spectra: Spectrum) -> None:
    for s in spectra:
        if not s.is_exact:
            raise UnsupportedInputError(
                f"LOCC conversion needs exact spectra (mass_deficit={s.mass_deficit:.3g})"
            )


def convertible(p: Spectrum, q: Spectrum) -> bool:
    """True iff the pure state with spectrum ``p`` converts exactly to ``q`` by LOCC.

    Examples
    --------
    >>> from lsentangle.spectra import make_spectrum
    >>> convertible(make_spectrum([0.5, 0.5]), make_spectrum([0.8, 0.2]))
    True
    >>> convertible(make_spectrum([0.7, 0.3]), make_spectrum([0.5, 0.5]))
    False
    """
    _require_exact(p, q)
    return majorizes(q, p)


@dataclass(frozen=True)
class OptimalConversion:
    """Best reachable state for an approximate conversion.

    ``lengths``, ``source`` and ``target`` are the aligned step functions of
    the two spectra; ``reachable`` holds the per-index weight of the optimal
    intermediate spectrum on each block; ``witness`` is the index where the
    leading block of the optimizer ends.
    """

    fidelity: float
    witness: int
    lengths: np.ndarray
    reachable: np.ndarray
    target: np.ndarray


def optimal_conversion(p: Spectrum, q: Spectrum) -> OptimalConversion:
    """Optimal approximate conversion ``p -> q``.

    Works backwards from the tail.  With ``E_x(l)`` the tail mass of ``x``
    from index ``l`` on and ``end`` the start of the part already fixed, the
    next block start is the ``l`` minimising

        r(l) = (E_p(l) - E_p(end)) / (E_q(l) - E_q(end)),

    and on ``[l, end)`` the reachable spectrum is ``r * q``.  The result
    majorizes ``p`` and maximizes ``sum sqrt(p' q)`` among such spectra.
    A ratio of block-linear functions is monotone inside a block, so only
    block boundaries need to be tested.
    """
    lengths, a, b = aligned_segments(p, q)
    nseg = lengths.size
    # tail masses at every block boundary, tail[i] = mass of blocks i..end
    tail_p = np.concatenate((np.cumsum((lengths * a)[::-1])[::-1], [0.0]))
    tail_q = np.concatenate((np.cumsum((lengths * b)[::-1])[::-1], [0.0]))
    scale = np.zeros(nseg)
    end = nseg
    starts = []
    while end > 0:
        num = tail_p[:end] - tail_p[end]
        den = tail_q[:end] - tail_q[end]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(den > 0, num / den, np.inf)
        start = int(np.argmin(ratio))
        if not np.isfinite(ratio[start]):
            # target has no weight left: the rest of the source can go anywhere
            start = 0
            scale[:end] = 0.0
        else:
            scale[start:end] = ratio[start]
        starts.append(start)
        end = start
    reachable = scale * b
    fid = float(np.dot(lengths, np.sqrt(reachable) * np.sqrt(b)))
    bounds = np.concatenate(([0.0], np.cumsum(lengths)))
    witness = int(bounds[starts[-2]]) if len(starts) > 1 else int(bounds[-1])
    return OptimalConversion(min(fid, 1.0), witness, lengths, reachable, b)


def max_conversion_fidelity(p: Spectrum, q: Spectrum) -> float:
    """Largest overlap with ``q`` of a state LOCC-reachable from ``p``.

    The overlap is the sorted fidelity ``sum sqrt(p'_i q_i)``.  The mean
    squared overlap of any LOCC protocol is at most the square of this value.

    Examples
    --------
    >>> from lsentangle.spectra import make_spectrum
    >>> round(max_conversion_fidelity(make_spectrum([1]), make_spectrum([1, 1])), 5)
    0.70711
    """
    _require_exact(p, q)
    if majorizes(q, p):
        return 1.0
    return optimal_conversion(p, q).fidelity


def _bell_cap(p: Spectrum, eps: float) -> int:
    # overlap with the uniform spectrum on 2**k levels is at most sqrt(rank / 2**k)
    return max(0, int(math.floor(math.log2(p.dim / (1.0 - eps) ** 2) + 1e-12)))


def distillable_bells(p: Spectrum, eps: float) -> int:
    """Largest ``k`` such that ``k`` Bell pairs are reachable from ``p`` to fidelity ``1 - eps``.

    Every ``k`` up to the rank bound ``2**k <= rank / (1 - eps)**2`` is
    tested, so the answer does not rely on monotonicity in ``k``.
    """
    if not 0 < eps < 1:
        raise InvalidInputError("eps must lie in (0, 1)")
    _require_exact(p)
    best = 0
    for k in range(1, _bell_cap(p, eps) + 1):
        if max_conversion_fidelity(p, uniform(2**k)) >= 1.0 - eps:
            best = k
    return best


@dataclass(frozen=True)
class ConversionReport:
    feasible_exact: bool
    max_fidelity: float
    bell_count: int
    eps: float
    witness: int | None = None

    def as_dict(self) -> dict:
        return {
            "feasible_exact": self.feasible_exact,
            "max_fidelity": self.max_fidelity,
            "bell_count": self.bell_count,
            "eps": self.eps,
            "witness": self.witness,
        }


def conversion_report(p: Spectrum, q: Spectrum, eps: float = 0.05) -> ConversionReport:
    """Convertibility, optimal fidelity and Bell count of ``p`` in one record."""
    feasible = convertible(p, q)
    if feasible:
        fid, witness = 1.0, None
    else:
        opt = optimal_conversion(p, q)
        fid, witness = opt.fidelity, opt.witness
    return ConversionReport(feasible, fid, distillable_bells(p, eps), eps, witness)


def finite_size_distillation_check(
    family: Mapping[int, Spectrum] | Sequence[Spectrum],
    target: Spectrum,
    eps: float,
) -> FamilyCheck:
    """Smallest index ``L0`` such that ``target`` is reachable to fidelity
    ``1 - eps`` from every tested member with index ``>= L0``.

    ``errors`` holds ``1 - F`` for each evaluated member.
    """
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    items = _labelled(family)

    def passes(member: Spectrum) -> tuple[bool, float]:
        f = max_conversion_fidelity(member, target)
        return f >= 1.0 - eps, 1.0 - f

    return scan_family_from_top(items, passes)
