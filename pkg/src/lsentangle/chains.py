"""One-dimensional entanglement diagnostics.

Two chains are covered:

* the half-filled free-fermion (XX) chain, whose interval spectra follow
  from the two-point function restricted to the interval;
* colored Motzkin walks, whose midpoint Schmidt spectrum follows from exact
  path counts.

Both produce :class:`~lsentangle.spectra.Spectrum` objects plus entropy
scaling fits.  Nothing here assigns a factor type: the spectra are not
constant-tail sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CapExceededError, InvalidInputError
from .spectra import DEFAULT_CAP, DEFAULT_PRUNE, Spectrum, from_classes, point_mass, tensor

XX_CAP = 512
MOTZKIN_CAP = 2048
DEGENERATE_TOL = 1e-15


# --------------------------------------------------------------------------- #
# Free fermions at half filling
# --------------------------------------------------------------------------- #
def xx_correlation(ell: int) -> np.ndarray:
    """``C_jk = sin(pi (j - k) / 2) / (pi (j - k))`` with ``C_jj = 1/2`` on ``ell`` sites."""
    r = np.subtract.outer(np.arange(ell), np.arange(ell)).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        C = np.sin(np.pi * r / 2) / (np.pi * r)
    C[np.diag_indices(ell)] = 0.5
    return C


def _check_ell(ell: int, cap: int) -> None:
    if ell < 1:
        raise InvalidInputError("interval length must be >= 1")
    if ell > cap:
        raise CapExceededError(f"interval length {ell} exceeds cap {cap}")


def xx_occupations(ell: int, cap: int = XX_CAP) -> np.ndarray:
    """Mode occupations ``nu_k`` in ``[0, 1]``, ascending."""
    _check_ell(ell, cap)
    return np.clip(np.linalg.eigvalsh(xx_correlation(ell)), 0.0, 1.0)


def _binary_entropy(nu: np.ndarray) -> np.ndarray:
    nu = nu[(nu > DEGENERATE_TOL) & (nu < 1 - DEGENERATE_TOL)]
    return -(nu * np.log(nu) + (1 - nu) * np.log1p(-nu))


def xx_entropy(ell: int, cap: int = XX_CAP) -> float:
    """Interval entanglement entropy in nats, summed over modes without truncation."""
    return float(_binary_entropy(xx_occupations(ell, cap)).sum())


def xx_interval_spectrum(
    ell: int, cap: int = XX_CAP, prune: float = DEFAULT_PRUNE, spectrum_cap: int = DEFAULT_CAP
) -> Spectrum:
    """Schmidt spectrum ``(x)_k [nu_k, 1 - nu_k]`` of an interval of ``ell`` sites.

    Modes with ``nu`` within ``1e-15`` of 0 or 1 are pure and skipped.  The
    product is pruned as in :func:`~lsentangle.spectra.tensor`.
    """
    nu = xx_occupations(ell, cap)
    out = point_mass()
    # most mixed modes first keeps pruning decisions stable
    for v in sorted(nu, key=lambda x: abs(x - 0.5)):
        if min(v, 1 - v) <= DEGENERATE_TOL:
            continue
        out = tensor(out, from_classes([v, 1 - v], full_dim=2), prune=prune, cap=spectrum_cap)
    return out


def ratio_gaps(s: Spectrum, window: float = 10.0) -> float:
    """Largest gap between sorted distinct ``ln(p_max / p_i)`` inside ``[0, window]``.

    Shrinking gaps as the interval grows indicate ratios filling the line
    densely.  This is a consistency indicator only.
    """
    logs = np.log(s.values[0] / s.values)
    logs = np.unique(logs[logs <= window])
    edges = np.concatenate((logs, [window]))
    return float(np.max(np.diff(edges))) if edges.size > 1 else window


# --------------------------------------------------------------------------- #
# Colored Motzkin walks
# --------------------------------------------------------------------------- #
def motzkin_prefix_counts(n: int, s: int) -> list[int]:
    """``N[h]``: colored Motzkin prefixes of length ``n`` ending at height ``h``
    with a fixed colour word for the ``h`` unmatched up steps.

    Recurrence ``N(n+1, h) = N(n, h) + N(n, h-1) + s N(n, h+1)``: a flat step,
    an up step whose colour is fixed by the word, or a down step closing a
    pair whose colour is free.
    """
    if n < 0 or s < 1:
        raise InvalidInputError("need n >= 0 and s >= 1")
    N = [1] + [0] * n
    for step in range(n):
        nxt = [0] * (n + 1)
        for h in range(step + 2 if step + 2 <= n + 1 else n + 1):
            acc = N[h]
            if h >= 1:
                acc += N[h - 1]
            if h + 1 <= n:
                acc += s * N[h + 1]
            nxt[h] = acc
        N = nxt
    return N


def motzkin_walk_count(L: int, s: int) -> int:
    """Number of s-colored Motzkin walks of length ``L``."""
    N = motzkin_prefix_counts(L, s)
    return N[0]


@dataclass(frozen=True)
class MotzkinClasses:
    """Exact class data of a midpoint cut: height ``h`` has ``s**h`` Schmidt
    values, each ``N[h]**2 / Z``."""

    L: int
    s: int
    prefix_counts: tuple[int, ...]
    total: int

    def block_sizes(self) -> list[tuple[int, int]]:
        """Sorted ``(left, right)`` sizes of every block, one per colour word."""
        out = []
        for h, n in enumerate(self.prefix_counts):
            if n:
                out.extend([(n, n)] * (self.s**h))
        return sorted(out)


def motzkin_classes(L: int, s: int, cap: int = MOTZKIN_CAP) -> MotzkinClasses:
    if L < 2 or L % 2:
        raise InvalidInputError("Motzkin length L must be even and >= 2")
    if s < 1:
        raise InvalidInputError("colour count s must be >= 1")
    if L > cap:
        raise CapExceededError(f"length {L} exceeds counting cap {cap}")
    N = motzkin_prefix_counts(L // 2, s)
    total = sum(s**h * n * n for h, n in enumerate(N))
    return MotzkinClasses(L, s, tuple(N), total)


def motzkin_spectrum(L: int, s: int, cap: int = MOTZKIN_CAP) -> Spectrum:
    """Midpoint Schmidt spectrum of the uniform superposition of colored Motzkin walks.

    Weights are exact ratios of big integers rounded once to floating point;
    classes whose weight underflows are dropped and their exact mass goes to
    ``mass_deficit``.

    Examples
    --------
    >>> motzkin_spectrum(2, 1).weights.tolist()
    [0.5, 0.5]
    """
    mc = motzkin_classes(L, s, cap)
    values, counts = [], []
    lost = Fraction(0)
    for h, n in enumerate(mc.prefix_counts):
        if n == 0:
            continue
        w = Fraction(n * n, mc.total)
        v = float(w)
        if v == 0.0 or s**h > 2**1000:
            lost += w * s**h
            continue
        values.append(v)
        counts.append(float(s**h))
    full = sum(s**h for h, n in enumerate(mc.prefix_counts) if n)
    return from_classes(values, counts, mass_deficit=float(lost), full_dim=full)


def motzkin_entropy(L: int, s: int, cap: int = MOTZKIN_CAP) -> float:
    """Midpoint entropy in nats, ``-sum_h s^h w_h ln w_h`` with ``w_h = N_h^2 / Z``."""
    mc = motzkin_classes(L, s, cap)
    lnZ = _log_int(mc.total)
    S = 0.0
    for h, n in enumerate(mc.prefix_counts):
        if n == 0:
            continue
        lw = 2 * _log_int(n) - lnZ
        # s^h w_h computed in log space so no term overflows
        S -= math.exp(h * math.log(s) + lw) * lw
    return S


def _log_int(n: int) -> float:
    """Natural log of a positive big integer."""
    bits = n.bit_length()
    if bits < 1000:
        return math.log(n)
    shift = bits - 60
    return math.log(n >> shift) + shift * math.log(2)


# --------------------------------------------------------------------------- #
# Fits
# --------------------------------------------------------------------------- #
FIT_MODES = ("log", "sqrt")


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit ``S = slope * f(L) + offset``; ``residual`` is the RMS error."""

    mode: str
    slope: float
    offset: float
    residual: float

    def as_dict(self) -> dict:
        return {"mode": self.mode, "slope": self.slope, "offset": self.offset, "residual": self.residual}


def _validate_samples(samples: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise InvalidInputError("need at least 3 (length, entropy) samples")
    x, y = arr[:, 0], arr[:, 1]
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise InvalidInputError("lengths must be positive and strictly increasing")
    return x, y


def _lstsq(feature: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    A = np.column_stack((feature, np.ones_like(feature)))
    if np.linalg.matrix_rank(A) < 2:
        raise InvalidInputError("degenerate design matrix")
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ np.array([a, b]) - y) ** 2)))
    return float(a), float(b), res


def entropy_scaling_fit(samples: Sequence[tuple[float, float]], mode: str = "log") -> ScalingFit:
    """Fit ``S = a ln L + b`` (``mode="log"``) or ``S = a sqrt(L) + b`` (``mode="sqrt"``).

    >>> import math
    >>> fit = entropy_scaling_fit([(n, 0.5 * math.log(n) + 1) for n in (2, 4, 8)])
    >>> round(fit.slope, 12), round(fit.offset, 12)
    (0.5, 1.0)
    """
    x, y = _validate_samples(samples)
    if mode == "log":
        feature = np.log(x)
    elif mode == "sqrt":
        feature = np.sqrt(x)
    else:
        raise InvalidInputError(f"mode must be one of {FIT_MODES}")
    return ScalingFit(mode, *_lstsq(feature, y))


def power_law_exponent(samples: Sequence[tuple[float, float]]) -> ScalingFit:
    """Exponent ``alpha`` of ``S ~ c L^alpha`` from a log-log fit (``slope = alpha``)."""
    x, y = _validate_samples(samples)
    if np.any(y <= 0):
        raise InvalidInputError("power-law fit needs positive entropies")
    return ScalingFit("power", *_lstsq(np.log(x), np.log(y)))
