"""Factor types of constant-tail ITPFI products and their composition.

The ITPFI factor built from a constant sequence of one-site states with
spectrum ``s`` has a type fixed by the multiplicative group generated by the
ratios ``s_i / s_j``:

* a single distinct weight of multiplicity one gives type I,
* a single distinct weight of multiplicity ``m >= 2`` gives II_1,
* a cyclic ratio group ``lambda**Z`` gives III_lambda,
* a dense ratio group gives III_1.

Irrationality cannot be decided in floating point.  A log-ratio quotient
counts as rational when a continued-fraction convergent with a bounded
denominator reproduces it to a fixed tolerance; the criterion used is stored
on every classification result.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import UnsupportedInputError
from .spectra import Spectrum


@dataclass(frozen=True)
class RationalityCriterion:
    depth: int = 20
    tol: float = 1e-12
    max_denominator: int = 10**4
    # relative tolerance of the real-valued Euclidean GCD
    gcd_tol: float = 1e-9

    def as_dict(self) -> dict:
        return {
            "depth": self.depth,
            "tol": self.tol,
            "max_denominator": self.max_denominator,
            "gcd_tol": self.gcd_tol,
        }


DEFAULT_CRITERION = RationalityCriterion()


class Kind(enum.Enum):
    I_FINITE = "I_n"
    I_INFINITE = "I_inf"
    II_1 = "II_1"
    II_INFINITE = "II_inf"
    III_0 = "III_0"
    III_LAMBDA = "III_lambda"
    III_1 = "III_1"
    UNDETERMINED = "undetermined"


_FAMILY = {
    Kind.I_FINITE: "I",
    Kind.I_INFINITE: "I",
    Kind.II_1: "II",
    Kind.II_INFINITE: "II",
    Kind.III_0: "III",
    Kind.III_LAMBDA: "III",
    Kind.III_1: "III",
}


@dataclass(frozen=True)
class FactorType:
    """Type label of a factor.

    ``n`` is set for ``I_FINITE``, ``lam`` for ``III_LAMBDA`` and ``reason``
    for ``UNDETERMINED``.
    """

    kind: Kind
    n: int | None = None
    lam: float | None = None
    reason: str = ""
    criterion: RationalityCriterion = field(default=DEFAULT_CRITERION, compare=False)

    def __post_init__(self):
        if self.kind is Kind.I_FINITE and (self.n is None or self.n < 1):
            raise ValueError("I_n needs a positive integer n")
        if self.kind is Kind.III_LAMBDA and not (self.lam is not None and 0 < self.lam < 1):
            raise ValueError("III_lambda needs lambda in (0, 1)")
        if self.kind is Kind.UNDETERMINED and not self.reason:
            raise ValueError("Undetermined needs a reason")

    @property
    def family(self) -> str | None:
        return _FAMILY.get(self.kind)

    @property
    def determined(self) -> bool:
        return self.kind is not Kind.UNDETERMINED

    @property
    def label(self) -> str:
        if self.kind is Kind.I_FINITE:
            return f"I_{self.n}"
        if self.kind is Kind.III_LAMBDA:
            return f"III_{self.lam:.12g}"
        if self.kind is Kind.UNDETERMINED:
            return "Undetermined"
        return self.kind.value

    def same_subtype(self, other: "FactorType", lam_tol: float = 1e-9) -> bool:
        """Equality of the isomorphism class, with ``lam`` compared to ``lam_tol``."""
        if self.kind is not other.kind:
            return False
        if self.kind is Kind.III_LAMBDA:
            return abs(self.lam - other.lam) <= lam_tol
        if self.kind is Kind.I_FINITE:
            return self.n == other.n
        return True

    def rank(self) -> tuple:
        """Sort key for the resourcefulness order I < II < III_0 < III_lambda < III_1.

        Within III_lambda a larger lambda is more resourceful.  Finite type I
        ranks below I_inf and II_1 below II_inf.
        """
        order = {
            Kind.I_FINITE: 0,
            Kind.I_INFINITE: 1,
            Kind.II_1: 2,
            Kind.II_INFINITE: 3,
            Kind.III_0: 4,
            Kind.III_LAMBDA: 5,
            Kind.III_1: 6,
        }
        if not self.determined:
            raise ValueError("Undetermined types are not ordered")
        return (order[self.kind], self.lam or 0.0, self.n or 0)

    def as_dict(self) -> dict:
        out = {"type": self.label, "family": self.family, "kind": self.kind.value}
        if self.n is not None:
            out["n"] = self.n
        if self.lam is not None:
            out["lambda"] = self.lam
        if self.reason:
            out["reason"] = self.reason
        out["rationality_criterion"] = self.criterion.as_dict()
        return out

    def __str__(self) -> str:
        return self.label


def type_I(n: int | None = None) -> FactorType:
    return FactorType(Kind.I_INFINITE) if n is None else FactorType(Kind.I_FINITE, n=n)


def type_II(infinite: bool = False) -> FactorType:
    return FactorType(Kind.II_INFINITE if infinite else Kind.II_1)


def type_III(lam: float = 1.0) -> FactorType:
    if lam == 1.0:
        return FactorType(Kind.III_1)
    if lam == 0.0:
        return FactorType(Kind.III_0)
    return FactorType(Kind.III_LAMBDA, lam=lam)


def undetermined(reason: str) -> FactorType:
    return FactorType(Kind.UNDETERMINED, reason=reason)


def continued_fraction(x: float, depth: int) -> list[int]:
    """Partial quotients of ``x`` (at most ``depth`` of them)."""
    coeffs = []
    for _ in range(depth):
        a = math.floor(x)
        coeffs.append(a)
        frac = x - a
        if frac < 1e-15:
            break
        x = 1.0 / frac
    return coeffs


def convergents(coeffs: Sequence[int]):
    h0, h1 = 1, coeffs[0]
    k0, k1 = 0, 1
    yield h1, k1
    for a in coeffs[1:]:
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield h1, k1


def rationality_test(
    x: float,
    y: float,
    depth: int = 20,
    tol: float = 1e-12,
    max_denominator: int = 10**4,
) -> tuple[int, int] | None:
    """Detect ``x / y ~ p / q`` with small coprime ``p, q``.

    Walks the continued-fraction convergents of ``x / y`` up to ``depth``
    terms and returns the first ``(p, q)`` with ``|x/y - p/q| < tol`` and
    ``q <= max_denominator``; ``None`` if there is none.
    """
    if not (x > 0 and y > 0):
        raise ValueError("rationality_test needs positive arguments")
    r = x / y
    for p, q in convergents(continued_fraction(r, depth)):
        if q > max_denominator:
            break
        if abs(r - p / q) < tol:
            return p, q
    return None


def real_gcd(a: float, b: float, tol: float = 1e-9) -> float:
    """Largest ``g`` with ``a`` and ``b`` integer multiples of ``g`` (Euclid, relative ``tol``)."""
    a, b = abs(a), abs(b)
    eps = tol * max(a, b)
    while b > eps:
        r = math.fmod(a, b)
        if r > b - eps:
            r = 0.0
        a, b = b, r
    return a


@dataclass(frozen=True)
class RatioGroup:
    """Additive group generated by the log-ratios of a spectrum.

    ``structure`` is ``"trivial"``, ``"cyclic"`` (generated by ``step``) or
    ``"dense"``.
    """

    generators: tuple[float, ...]
    structure: str
    step: float | None = None

    def as_dict(self) -> dict:
        out = {"structure": self.structure, "generators": list(self.generators)}
        if self.step is not None:
            out["step"] = self.step
        return out


def _dedup(xs: Sequence[float], rtol: float) -> list[float]:
    out: list[float] = []
    for x in sorted(xs):
        if not out or x - out[-1] > rtol * x:
            out.append(x)
    return out


def group_from_logs(
    logs: Sequence[float], criterion: RationalityCriterion = DEFAULT_CRITERION
) -> RatioGroup:
    """Classify the subgroup of (R, +) generated by positive reals ``logs``."""
    gens = _dedup([g for g in logs if g > 0], criterion.gcd_tol)
    if not gens:
        return RatioGroup((), "trivial")
    base = gens[0]
    for g in gens[1:]:
        hit = rationality_test(
            g, base, criterion.depth, criterion.tol, criterion.max_denominator
        )
        if hit is None:
            return RatioGroup(tuple(gens), "dense")
    step = gens[0]
    for g in gens[1:]:
        step = real_gcd(step, g, criterion.gcd_tol)
    for g in gens:
        m = g / step
        if abs(m - round(m)) > criterion.gcd_tol * max(1.0, m):
            return RatioGroup(tuple(gens), "dense")
    return RatioGroup(tuple(gens), "cyclic", step)


def ratio_group(s: Spectrum, criterion: RationalityCriterion = DEFAULT_CRITERION) -> RatioGroup:
    """Ratio group of the weights of ``s``.

    The generators are ``log(s_max / s_i)`` over the distinct weights; they
    generate every pairwise log-ratio.
    """
    if not s.is_exact:
        raise UnsupportedInputError("ratio group needs an exact spectrum")
    logs = np.log(s.values[0] / s.values[1:])
    return group_from_logs(logs.tolist(), criterion)


def classify_itpfi(
    s: Spectrum,
    ambient_properly_infinite: bool = False,
    criterion: RationalityCriterion = DEFAULT_CRITERION,
) -> FactorType:
    """Type of the ITPFI factor of the constant sequence ``s, s, s, ...``.

    With ``ambient_properly_infinite`` the factor is tensored with I_inf
    (a region with an infinite interior), which promotes I_n to I_inf and
    II_1 to II_inf.
    """
    if not s.is_exact:
        raise UnsupportedInputError("classification needs an exact spectrum (mass_deficit = 0)")
    if s.n_classes == 1:
        if s.counts[0] == 1:
            t = type_I(None if ambient_properly_infinite else 1)
        else:
            t = type_II(infinite=ambient_properly_infinite)
        return FactorType(t.kind, t.n, t.lam, criterion=criterion)
    group = ratio_group(s, criterion)
    if group.structure == "cyclic":
        return FactorType(Kind.III_LAMBDA, lam=math.exp(-group.step), criterion=criterion)
    return FactorType(Kind.III_1, criterion=criterion)


def classify_sequence(
    sequence: Sequence[Spectrum],
    ambient_properly_infinite: bool = False,
    min_tail: int = 2,
    atol: float = 1e-12,
    criterion: RationalityCriterion = DEFAULT_CRITERION,
) -> FactorType:
    """Classify a finite sequence read as ``prefix + (tail repeated forever)``.

    The tail is the longest constant suffix; it must have at least
    ``min_tail`` entries.  The prefix is a finite modification and does not
    enter the result.
    """
    if not sequence:
        return undetermined("empty sequence")
    last = sequence[-1]
    n = 1
    while n < len(sequence) and sequence[-1 - n].allclose(last, atol):
        n += 1
    if n < min_tail:
        return undetermined("non-constant tail out of scope")
    return classify_itpfi(last, ambient_properly_infinite, criterion)


def _merge_lambda(lam: float, mu: float, criterion: RationalityCriterion) -> FactorType:
    a, b = -math.log(lam), -math.log(mu)
    group = group_from_logs([a, b], criterion)
    if group.structure == "dense":
        return FactorType(Kind.III_1, criterion=criterion)
    return FactorType(Kind.III_LAMBDA, lam=math.exp(-group.step), criterion=criterion)


def compose(
    t1: FactorType, t2: FactorType, criterion: RationalityCriterion = DEFAULT_CRITERION
) -> FactorType:
    """Type of the tensor product of two AFD factors of the given types."""
    if not (t1.determined and t2.determined):
        reason = t1.reason if not t1.determined else t2.reason
        return undetermined(f"undetermined input: {reason}")
    k1, k2 = t1.kind, t2.kind
    if Kind.III_1 in (k1, k2):
        return FactorType(Kind.III_1, criterion=criterion)
    if k1 is Kind.III_LAMBDA and k2 is Kind.III_LAMBDA:
        return _merge_lambda(t1.lam, t2.lam, criterion)
    if Kind.III_0 in (k1, k2):
        other = t2 if k1 is Kind.III_0 else t1
        if other.family == "III":
            return undetermined("III_0 composed with type III is out of scope")
        return FactorType(Kind.III_0, criterion=criterion)
    if k1 is Kind.III_LAMBDA or k2 is Kind.III_LAMBDA:
        lam = t1.lam if k1 is Kind.III_LAMBDA else t2.lam
        return FactorType(Kind.III_LAMBDA, lam=lam, criterion=criterion)
    infinite = Kind.I_INFINITE in (k1, k2) or Kind.II_INFINITE in (k1, k2)
    if t1.family == "II" or t2.family == "II":
        return FactorType(Kind.II_INFINITE if infinite else Kind.II_1, criterion=criterion)
    if infinite:
        return FactorType(Kind.I_INFINITE, criterion=criterion)
    return FactorType(Kind.I_FINITE, n=t1.n * t2.n, criterion=criterion)


def compose_all(types: Sequence[FactorType]) -> FactorType:
    out = types[0]
    for t in types[1:]:
        out = compose(out, t)
    return out


GOLDEN_RATIO = (1 + math.sqrt(5)) / 2
LAMBDA_FIBONACCI = 1 / GOLDEN_RATIO
LAMBDA_ISING = 0.5
