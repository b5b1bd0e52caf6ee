"""Finite-truncation probes of embezzlement of entanglement.

A resource state with Schmidt spectrum ``r`` embezzles a target ``t`` to
error ``err`` when ``r (x) |00>`` and ``r (x) t`` are ``err``-close after the
best local unitaries.  The best overlap is the sorted fidelity of the two
Schmidt spectra, so everything here reduces to spectra.

Two distances are available:

``"vector"``
    ``sqrt(2 - 2F)``, the norm distance of optimally aligned state vectors.
    Bounded by ``sqrt(2)``.
``"trace"``
    ``2 sqrt(1 - F^2)``, the trace-norm distance of the pure states.
    Bounded by 2.  The closed form ``2(1 - sqrt(lam)) / (1 + sqrt(lam))``
    for the worst-case embezzlement capability of III_lam sectors is stated
    in this norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError
from .spectra import (
    DEFAULT_CAP,
    DEFAULT_PRUNE,
    Estimate,
    Spectrum,
    make_spectrum,
    sorted_fidelity,
    tensor,
    tensor_power,
    trace_distance,
    vector_distance,
)

METRICS: dict[str, Callable[[float], float]] = {
    "vector": vector_distance,
    "trace": trace_distance,
}

GOLDEN = (math.sqrt(5) - 1) / 2


def _distance(metric: str) -> Callable[[float], float]:
    try:
        return METRICS[metric]
    except KeyError:
        raise InvalidInputError(f"unknown metric {metric!r}; use 'vector' or 'trace'") from None


def vdh_spectrum(N: int) -> Spectrum:
    """van Dam-Hayden resource: weights proportional to ``1/j`` for ``j = 1..N``."""
    if N < 1:
        raise InvalidInputError("van Dam-Hayden spectrum needs N >= 1")
    return make_spectrum(1.0 / np.arange(1, N + 1, dtype=np.float64))


def embezzlement_error(
    resource: Spectrum,
    target: Spectrum,
    metric: str = "vector",
    prune: float = DEFAULT_PRUNE,
    cap: int = DEFAULT_CAP,
) -> Estimate:
    """Error of ``resource (x) |00> -> resource (x) target`` under local unitaries.

    The bound is the width of the error interval implied by the truncation
    deficits of ``resource`` and of the product spectrum.
    """
    dist = _distance(metric)
    if _direct_ok(resource, target, cap):
        fid = _direct_fidelity(resource, target)
    else:
        shifted = tensor(resource, target, prune=prune, cap=cap)
        fid = sorted_fidelity(resource, shifted)
    err = dist(fid.value)
    best = dist(min(1.0, fid.value + fid.bound))
    return Estimate(err, err - best)


def _direct_ok(resource: Spectrum, target: Spectrum, cap: int) -> bool:
    return (
        resource.n_classes * target.dim <= 4 * cap
        and resource.counts.max() == 1
        and target.dim <= 64
    )


def _direct_fidelity(resource: Spectrum, target: Spectrum) -> Estimate:
    """Sorted fidelity of ``resource`` with ``resource (x) target`` without truncation.

    Each target weight scales the sorted resource into a sorted run; a stable
    sort merges the runs in linear time.
    """
    v = resource.values
    runs = np.concatenate([v * w for w in target.weights])
    shifted = np.sort(runs, kind="stable")[::-1][: v.size]
    value = float(np.dot(np.sqrt(v), np.sqrt(shifted)))
    bound = math.sqrt(resource.mass_deficit) * 2
    return Estimate(min(value, 1.0), bound)


@dataclass(frozen=True)
class WorstCase:
    error: float
    target: tuple[float, ...]
    evaluations: int


def _golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def worst_case_error(
    resource: Spectrum,
    n: int = 2,
    grid: int = 64,
    metric: str = "vector",
    refine_tol: float = 1e-6,
    seed: int = 0,
    prune: float = DEFAULT_PRUNE,
    cap: int = DEFAULT_CAP,
) -> WorstCase:
    """Largest embezzlement error over target spectra of dimension ``n``.

    For ``n = 2`` the targets ``[q, 1-q]`` are scanned on ``grid`` equally
    spaced points of ``q in [1/2, 1]`` and the best grid point is refined by
    golden-section search to ``refine_tol``.  For ``n > 2``, ``grid`` targets
    are drawn from the flat Dirichlet distribution with a fixed seed, plus
    the uniform target.  Grid values are always kept, so the result never
    decreases when a grid is replaced by one containing it.
    """
    if n < 2:
        raise InvalidInputError("target dimension must be >= 2")
    if grid < 2:
        raise InvalidInputError("grid needs at least 2 points")
    calls = 0

    def err_of(weights) -> float:
        nonlocal calls
        calls += 1
        return embezzlement_error(resource, make_spectrum(weights), metric, prune, cap).value

    if n == 2:
        qs = np.linspace(0.5, 1.0, grid)
        errs = np.array([err_of([q, 1.0 - q]) for q in qs])
        i = int(np.argmax(errs))
        best_q, best = float(qs[i]), float(errs[i])
        lo, hi = qs[max(i - 1, 0)], qs[min(i + 1, grid - 1)]
        q, e = _golden_max(lambda x: err_of([x, 1.0 - x]), lo, hi, refine_tol)
        if e > best:
            best_q, best = q, e
        return WorstCase(best, (best_q, 1.0 - best_q), calls)

    rng = np.random.default_rng(seed)
    samples = np.vstack([np.full(n, 1.0 / n), rng.dirichlet(np.ones(n), size=grid)])
    errs = [err_of(w) for w in samples]
    i = int(np.argmax(errs))
    target = tuple(sorted(samples[i].tolist(), reverse=True))
    return WorstCase(float(errs[i]), target, calls)


def kappa_formula(lam: float) -> float:
    """Worst-case embezzlement capability ``2(1 - sqrt(lam))/(1 + sqrt(lam))`` (trace norm)."""
    if not 0 < lam <= 1:
        raise InvalidInputError("lambda must lie in (0, 1]")
    r = math.sqrt(lam)
    return 2 * (1 - r) / (1 + r)


@dataclass(frozen=True)
class KappaEstimate:
    """Worst-case embezzlement error of the product-state probe ``rho^(x)k``."""

    kappa: float
    k: int
    n: int
    metric: str
    worst_target: tuple[float, ...]
    deficit: float
    error_bound: float
    reliable: bool
    grid: int

    def as_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "k": self.k,
            "n": self.n,
            "metric": self.metric,
            "worst_target": list(self.worst_target),
            "deficit": self.deficit,
            "error_bound": self.error_bound,
            "reliable": self.reliable,
            "grid": self.grid,
            "probe": "product-state probe",
        }


def kappa_estimate(
    rho: Spectrum,
    k: int,
    n: int = 2,
    grid: int = 64,
    metric: str = "vector",
    deficit_bound: float = 1e-9,
    prune: float = DEFAULT_PRUNE,
    cap: int = DEFAULT_CAP,
    seed: int = 0,
    resource: Spectrum | None = None,
) -> KappaEstimate:
    """Estimate of kappa from the k-fold product resource ``rho^(x)k``.

    Runs whose truncation deficit exceeds ``deficit_bound`` are flagged
    ``reliable=False``.  ``resource`` may pass a precomputed tensor power.
    """
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    if resource is None:
        resource = tensor_power(rho, k, prune=prune, cap=cap)
    worst = worst_case_error(resource, n, grid, metric, seed=seed, prune=prune, cap=cap)
    target = make_spectrum(worst.target)
    bound = embezzlement_error(resource, target, metric, prune, cap).bound
    return KappaEstimate(
        kappa=worst.error,
        k=k,
        n=n,
        metric=metric,
        worst_target=worst.target,
        deficit=resource.mass_deficit,
        error_bound=bound,
        reliable=resource.mass_deficit <= deficit_bound,
        grid=grid,
    )


def kappa_series(
    rho: Spectrum,
    ks: Sequence[int],
    n: int = 2,
    grid: int = 64,
    metric: str = "vector",
    deficit_bound: float = 1e-9,
    prune: float = DEFAULT_PRUNE,
    cap: int = DEFAULT_CAP,
    seed: int = 0,
) -> list[KappaEstimate]:
    """kappa_k for increasing ``ks``, reusing the tensor power between steps."""
    ks = sorted(set(int(k) for k in ks))
    out = []
    resource = None
    done = 0
    for k in ks:
        step = tensor_power(rho, k - done, prune=prune, cap=cap)
        resource = step if resource is None else tensor(resource, step, prune=prune, cap=cap)
        done = k
        out.append(
            kappa_estimate(rho, k, n, grid, metric, deficit_bound, prune, cap, seed, resource=resource)
        )
    return out


@dataclass(frozen=True)
class Convergence:
    estimate: float
    last_step: float
    steps: tuple[float, ...] = field(default=())


def convergence(series: Sequence[KappaEstimate]) -> Convergence:
    """Last value of a kappa series and its successive differences."""
    values = [s.kappa for s in series]
    steps = tuple(abs(b - a) for a, b in zip(values, values[1:]))
    return Convergence(values[-1], steps[-1] if steps else math.inf, steps)


def _labelled(family: Mapping[int, Spectrum] | Sequence[Spectrum]) -> list[tuple[int, Spectrum]]:
    if isinstance(family, Mapping):
        items = sorted(family.items())
    else:
        items = list(enumerate(family))
    if not items:
        raise InvalidInputError("family must be non-empty")
    return items


@dataclass(frozen=True)
class FamilyCheck:
    """Result of a scan over an indexed family of resources.

    ``threshold_index`` is the smallest index from which every tested index
    passes, or ``None``.  ``errors`` holds the evaluated values, keyed by
    index; indices below the last failure are not evaluated.
    """

    threshold_index: int | None
    errors: dict[int, float]


def scan_family_from_top(
    items: list[tuple[int, Spectrum]], passes: Callable[[Spectrum], tuple[bool, float]]
) -> FamilyCheck:
    """Find the smallest index ``L0`` with every ``L >= L0`` passing.

    Scans from the largest index down and stops at the first failure; the
    answer only depends on where that failure sits.
    """
    errors: dict[int, float] = {}
    threshold = None
    for label, member in reversed(items):
        ok, value = passes(member)
        errors[label] = value
        if not ok:
            break
        threshold = label
    return FamilyCheck(threshold, dict(sorted(errors.items())))


def embezzling_family_check(
    family: Mapping[int, Spectrum] | Sequence[Spectrum],
    n: int,
    eps: float,
    grid: int = 64,
    metric: str = "vector",
    seed: int = 0,
) -> FamilyCheck:
    """Smallest index ``L*`` whose worst-case error (dimension-``n`` targets) is
    at most ``eps`` for ``L*`` and every larger tested index."""
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    items = _labelled(family)
    if eps >= 2:
        return FamilyCheck(items[0][0], {})

    def passes(member: Spectrum) -> tuple[bool, float]:
        e = worst_case_error(member, n, grid, metric, seed=seed).error
        return e <= eps, e

    return scan_family_from_top(items, passes)
