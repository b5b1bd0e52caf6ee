"""Entangled-pair lattice models ``H(rho) = -sum_e P_e(rho)`` on small hypercubic lattices.

Every site carries ``2D`` virtual spins of dimension ``m``.  Slot ``2a`` of a
site points along ``+axis a`` and slot ``2a + 1`` along ``-axis a``; the edge
from site ``v`` to its ``+a`` neighbour ``w`` pairs ``(v, 2a)`` with
``(w, 2a + 1)``.  The edge carries the canonical purification
``|psi> = sum_i sqrt(rho_i) |i>|i>`` and ``P_e = |psi><psi|`` on the pair.
With open boundaries, slots with no partner are dangling and sit in the
reference state ``|1>`` (basis index 0 here).

Global virtual-spin index: ``site_index * 2D + slot``, sites in row-major
order of their coordinates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CapExceededError, InvalidInputError, UnsupportedInputError
from .factor_types import DEFAULT_CRITERION, FactorType, RationalityCriterion, classify_itpfi
from .spectra import Spectrum, from_classes, make_spectrum, tensor, tensor_power

ED_CAP = 2**16
DENSE_CAP = 2**12
BOUNDARIES = ("open", "periodic")


@dataclass(frozen=True)
class Edge:
    """Pair of virtual spins ``(site, slot)`` joined along ``axis``."""

    a: int
    b: int
    axis: int

    def spins(self, d: int) -> tuple[int, int]:
        return (self.a * d + 2 * self.axis, self.b * d + 2 * self.axis + 1)


@dataclass(frozen=True)
class LatticeModel:
    """``H(rho)`` on a ``D``-dimensional box of sites.

    Parameters
    ----------
    D : int
        Lattice dimension.
    extent : tuple of int
        Number of sites along each axis.
    boundary : {"open", "periodic"}
    m : int
        Virtual-spin dimension, at least ``len(rho)``.
    rho : Spectrum
        Eigenvalues of the edge density matrix (exact).
    """

    D: int
    extent: tuple[int, ...]
    boundary: str
    m: int
    rho: Spectrum

    @property
    def d(self) -> int:
        return 2 * self.D

    @property
    def n_sites(self) -> int:
        return math.prod(self.extent)

    @property
    def n_spins(self) -> int:
        return self.n_sites * self.d

    @property
    def site_dim(self) -> int:
        return self.m**self.d

    @property
    def full_dim(self) -> int:
        return self.m**self.n_spins

    @cached_property
    def sites(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(n) for n in self.extent)))

    def site_index(self, coord: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(coord), self.extent))

    @cached_property
    def edges(self) -> list[Edge]:
        out = []
        for v, coord in enumerate(self.sites):
            for axis in range(self.D):
                nxt = list(coord)
                nxt[axis] += 1
                if nxt[axis] == self.extent[axis]:
                    if self.boundary == "open":
                        continue
                    nxt[axis] = 0
                out.append(Edge(v, self.site_index(nxt), axis))
        return out

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def paired_spins(self) -> list[int]:
        return sorted(s for e in self.edges for s in e.spins(self.d))

    @property
    def sector_dim(self) -> int:
        return self.m ** len(self.paired_spins)

    def degree(self, site: int) -> int:
        return sum((e.a == site) + (e.b == site) for e in self.edges)

    @cached_property
    def psi(self) -> np.ndarray:
        """Edge state ``sum_i sqrt(rho_i) |ii>`` as an ``m*m`` vector."""
        w = np.zeros(self.m)
        w[: self.rho.dim] = self.rho.weights
        v = np.zeros((self.m, self.m))
        v[np.arange(self.m), np.arange(self.m)] = np.sqrt(w)
        return v.ravel()

    @property
    def projector(self) -> np.ndarray:
        return np.outer(self.psi, self.psi)

    def to_record(self) -> dict:
        """Descriptor with fields ``dimension, extent, boundary, m, rho``."""
        return {
            "dimension": self.D,
            "extent": list(self.extent),
            "boundary": self.boundary,
            "m": self.m,
            "rho": self.rho.weights.tolist(),
        }

    @classmethod
    def from_record(cls, record: dict) -> "LatticeModel":
        try:
            return build_model(
                record["dimension"], record["extent"], record.get("boundary", "open"),
                record["m"], make_spectrum(record["rho"]),
            )
        except KeyError as exc:
            raise InvalidInputError(f"lattice descriptor lacks field {exc.args[0]!r}") from None


def build_model(
    D: int, extent: Sequence[int] | int, boundary: str, m: int, rho: Spectrum | Sequence[float]
) -> LatticeModel:
    """Validate the geometry and return a :class:`LatticeModel`.

    >>> build_model(1, [3], "open", 2, [0.5, 0.5]).n_edges
    2
    """
    if D < 1:
        raise InvalidInputError("dimension D must be >= 1")
    extent = (int(extent),) * D if np.isscalar(extent) else tuple(int(n) for n in extent)
    if len(extent) != D:
        raise InvalidInputError(f"extent has {len(extent)} entries for D={D}")
    if any(n < 1 for n in extent):
        raise InvalidInputError("every extent must be >= 1")
    if boundary not in BOUNDARIES:
        raise InvalidInputError(f"boundary must be one of {BOUNDARIES}")
    if boundary == "periodic" and any(n < 2 for n in extent):
        raise InvalidInputError("periodic axes need extent >= 2 (no self-edges)")
    if m < 2:
        raise InvalidInputError("virtual-spin dimension m must be >= 2")
    if not isinstance(rho, Spectrum):
        rho = make_spectrum(rho)
    if not rho.is_exact:
        raise UnsupportedInputError("edge spectrum must be exact")
    if rho.dim > m:
        raise InvalidInputError(f"rho has rank {rho.dim} > m = {m}")
    model = LatticeModel(D, extent, boundary, int(m), rho)
    if model.n_edges == 0:
        raise InvalidInputError("extent too small to contain an edge")
    return model


# --------------------------------------------------------------------------- #
# Operators
# --------------------------------------------------------------------------- #
@dataclass(frozen=True)
class LocalTerm:
    """Operator ``matrix`` acting on the virtual spins ``spins`` (in that order)."""

    spins: tuple[int, ...]
    matrix: np.ndarray = field(compare=False)


def edge_terms(model: LatticeModel) -> list[LocalTerm]:
    P = model.projector
    return [LocalTerm(e.spins(model.d), P) for e in model.edges]


def embed(op, positions: Sequence[int], n: int, m: int) -> sp.csr_matrix:
    """Sparse ``op (x) 1`` on ``n`` spins of dimension ``m``, ``op`` on ``positions``."""
    k = len(positions)
    rest = [i for i in range(n) if i not in positions]
    big = sp.kron(sp.csr_matrix(op), sp.identity(m ** (n - k), format="csr"), format="csr")
    order = list(positions) + rest
    # basis index in the natural order -> index in the ``order`` layout
    perm = np.arange(m**n).reshape((m,) * n).transpose(order).ravel()
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return big[inv][:, inv].tocsr()


def _check_cap(dim: int, cap: int, what: str) -> None:
    if dim > cap:
        raise CapExceededError(f"{what} dimension {dim} exceeds cap {cap}; use the analytic pathway")


def terms_commute(terms: Sequence[LocalTerm], m: int, atol: float = 1e-12) -> bool:
    """Float check of ``[A, B] = 0`` for every pair, on the union of supports."""
    for s, t in itertools.combinations(terms, 2):
        support = sorted(set(s.spins) | set(t.spins))
        loc = {x: i for i, x in enumerate(support)}
        a = embed(s.matrix, [loc[x] for x in s.spins], len(support), m)
        b = embed(t.matrix, [loc[x] for x in t.spins], len(support), m)
        c = a @ b - b @ a
        if c.nnz and abs(c).max() > atol:
            return False
    return True


def exact_weights(rho: Spectrum, max_denominator: int = 10**12) -> list[Fraction]:
    """Rational weights close to ``rho`` that sum to exactly 1."""
    fr = [Fraction(float(w)).limit_denominator(max_denominator) for w in rho.weights]
    total = sum(fr)
    return [f / total for f in fr]


def exact_projector(model: LatticeModel):
    """``|psi><psi|`` in exact arithmetic (square roots of rational weights)."""
    import sympy

    w = exact_weights(model.rho) + [Fraction(0)] * (model.m - model.rho.dim)
    amp = [sympy.sqrt(sympy.Rational(f.numerator, f.denominator)) for f in w]
    vec = sympy.zeros(model.m * model.m, 1)
    for i in range(model.m):
        vec[i * model.m + i] = amp[i]
    return vec * vec.T


def _exact_embed(mat, positions: Sequence[int], n: int, m: int):
    import sympy

    dim = m**n
    out = sympy.zeros(dim, dim)
    k = len(positions)
    for row in range(dim):
        digits = np.unravel_index(row, (m,) * n)
        local_r = int(np.ravel_multi_index([digits[p] for p in positions], (m,) * k))
        for local_c in range(m**k):
            val = mat[local_r, local_c]
            if val == 0:
                continue
            cd = list(digits)
            for p, x in zip(positions, np.unravel_index(local_c, (m,) * k)):
                cd[p] = int(x)
            out[row, int(np.ravel_multi_index(cd, (m,) * n))] = val
    return out


def exact_terms_commute(terms: Sequence[tuple[tuple[int, ...], object]], m: int) -> bool:
    """Exact commutation of sympy matrices on the union of their supports."""
    import sympy

    for (s_sp, s_mat), (t_sp, t_mat) in itertools.combinations(terms, 2):
        support = sorted(set(s_sp) | set(t_sp))
        loc = {x: i for i, x in enumerate(support)}
        a = _exact_embed(s_mat, [loc[x] for x in s_sp], len(support), m)
        b = _exact_embed(t_mat, [loc[x] for x in t_sp], len(support), m)
        c = (a * b - b * a).applyfunc(sympy.nsimplify)
        if not c.is_zero_matrix:
            return False
    return True


def commuting_check(
    model: LatticeModel,
    mode: str = "explicit",
    cap: int = ED_CAP,
    extra_terms: Iterable[LocalTerm] = (),
) -> bool:
    """Do all edge projectors (plus ``extra_terms``) commute?

    ``mode="explicit"`` builds every term as a sparse matrix on the full
    Hilbert space (dimension ``m**(n_sites * 2D)``, refused above ``cap``)
    and checks commutators in floating point.  ``mode="exact"`` checks each
    pair symbolically on the union of its supports; it has no size limit.
    """
    terms = edge_terms(model) + list(extra_terms)
    if mode == "explicit":
        _check_cap(model.full_dim, cap, "Hilbert space")
        n = model.n_spins
        mats = [embed(t.matrix, t.spins, n, model.m) for t in terms]
        for a, b in itertools.combinations(mats, 2):
            c = a @ b - b @ a
            if c.nnz and abs(c).max() > 1e-12:
                return False
        return True
    if mode == "exact":
        import sympy

        P = exact_projector(model)
        ex = [(t.spins, P) for t in edge_terms(model)]
        ex += [(t.spins, sympy.Matrix(t.matrix).applyfunc(sympy.nsimplify)) for t in extra_terms]
        return exact_terms_commute(ex, model.m)
    raise InvalidInputError("mode must be 'explicit' or 'exact'")


# --------------------------------------------------------------------------- #
# Exact diagonalization in the paired sector
# --------------------------------------------------------------------------- #
def sector_hamiltonian(model: LatticeModel, cap: int = ED_CAP, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``H(rho)`` on the paired virtual spins, dangling spins fixed to ``|1>``.

    Sector spins keep their global order, so edge terms act on non-adjacent
    tensor factors.
    """
    _check_cap(model.full_dim, cap, "Hilbert space")
    _check_cap(model.sector_dim, dense_cap, "paired-sector")
    spins = model.paired_spins
    loc = {s: i for i, s in enumerate(spins)}
    H = sp.csr_matrix((model.sector_dim, model.sector_dim))
    P = model.projector
    for e in model.edges:
        H = H - embed(P, [loc[s] for s in e.spins(model.d)], len(spins), model.m)
    return H.toarray()


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of ``H(rho)`` grouped into levels.

    ``levels`` maps each eigenvalue to its multiplicity; ``gap`` is the
    distance from the ground level to the next one.
    """

    levels: dict
    ground_energy: object
    ground_degeneracy: int
    gap: object
    integer: bool
    exact: bool

    def as_dict(self) -> dict:
        return {
            "levels": {str(k): v for k, v in sorted(self.levels.items())},
            "ground_energy": str(self.ground_energy) if self.exact else self.ground_energy,
            "ground_degeneracy": self.ground_degeneracy,
            "gap": str(self.gap) if self.exact else self.gap,
            "integer": self.integer,
            "exact": self.exact,
        }


def _report(levels: dict, exact: bool) -> SpectrumReport:
    keys = sorted(levels)
    gap = keys[1] - keys[0] if len(keys) > 1 else (Fraction(0) if exact else 0.0)
    integer = all(Fraction(k).denominator == 1 for k in keys) if exact else True
    return SpectrumReport(dict(sorted(levels.items())), keys[0], levels[keys[0]], gap, integer, exact)


def hamiltonian_spectrum_small(
    model: LatticeModel,
    exact: bool = False,
    cap: int = ED_CAP,
    dense_cap: int = DENSE_CAP,
    atol: float = 1e-9,
) -> SpectrumReport:
    """Spectrum of ``H(rho)`` on the paired sector.

    Floating-point mode diagonalizes the dense sector Hamiltonian; levels are
    grouped within ``atol`` and ``integer`` tells whether every level lies
    within ``atol`` of an integer.  Exact mode certifies, in rational and
    algebraic arithmetic, that the edge projector is idempotent with trace 1
    and that all edge projectors commute; the levels then follow exactly:
    ``-k`` with multiplicity ``C(E, k) (m^2 - 1)^(E - k)``.
    """
    _check_cap(model.full_dim, cap, "Hilbert space")
    if exact:
        import sympy

        P = exact_projector(model)
        if (P * P - P).applyfunc(sympy.simplify) != sympy.zeros(*P.shape):
            raise AssertionError("edge projector is not idempotent")
        if sympy.simplify(P.trace()) != 1:
            raise AssertionError("edge projector does not have rank 1")
        if not commuting_check(model, mode="exact"):
            return _report({}, True)
        E, r = model.n_edges, model.m**2 - 1
        levels = {Fraction(-k): math.comb(E, k) * r ** (E - k) for k in range(E + 1)}
        return _report(levels, True)
    evals = np.linalg.eigvalsh(sector_hamiltonian(model, cap, dense_cap))
    levels: dict[float, int] = {}
    rounded = np.round(evals)
    integer = bool(np.all(np.abs(evals - rounded) <= atol))
    groups = np.split(evals, np.flatnonzero(np.diff(evals) > atol) + 1)
    for g in groups:
        levels[float(np.round(g.mean(), 9)) + 0.0] = int(g.size)
    rep = _report(levels, False)
    return SpectrumReport(rep.levels, rep.ground_energy, rep.ground_degeneracy, rep.gap, integer, False)


def ground_state(model: LatticeModel, cap: int = ED_CAP, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Ground vector of the sector Hamiltonian by dense diagonalization."""
    evals, evecs = np.linalg.eigh(sector_hamiltonian(model, cap, dense_cap))
    if evals.size > 1 and evals[1] - evals[0] < 1e-9:
        raise AssertionError("ground state is degenerate")
    return evecs[:, 0]


def frustration_free_defect(model: LatticeModel, vector: np.ndarray | None = None) -> float:
    """``max_e || P_e v - v ||`` for the ground vector ``v`` (0 when frustration-free)."""
    v = ground_state(model) if vector is None else vector
    loc = {s: i for i, s in enumerate(model.paired_spins)}
    n = len(model.paired_spins)
    worst = 0.0
    for e in model.edges:
        P = embed(model.projector, [loc[s] for s in e.spins(model.d)], n, model.m)
        worst = max(worst, float(np.linalg.norm(P @ v - v)))
    return worst


def _schmidt_split(model: LatticeModel, vector: np.ndarray, left_spins: set[int]) -> np.ndarray:
    spins = model.paired_spins
    n = len(spins)
    lpos = [i for i, s in enumerate(spins) if s in left_spins]
    rpos = [i for i, s in enumerate(spins) if s not in left_spins]
    t = vector.reshape((model.m,) * n).transpose(lpos + rpos)
    mat = t.reshape(model.m ** len(lpos), -1)
    w = np.linalg.svd(mat, compute_uv=False) ** 2
    w = np.sort(w / w.sum())[::-1]
    return w[w > 1e-14]


def _site_spins(model: LatticeModel, sites: Iterable[int]) -> set[int]:
    return {v * model.d + j for v in sites for j in range(model.d)}


# --------------------------------------------------------------------------- #
# Reduced states, boundaries, classification
# --------------------------------------------------------------------------- #
def default_site(model: LatticeModel) -> int:
    """A site of maximal degree (first in row-major order)."""
    degs = [model.degree(v) for v in range(model.n_sites)]
    return int(np.argmax(degs))


def site_reduced_state(model: LatticeModel, site: int | None = None) -> Spectrum:
    """Spectrum of the reduced state of one site: ``rho`` tensored once per incident edge.

    Dangling slots are pure and contribute nothing.  ``site`` defaults to a
    site of maximal degree, which is every site for periodic boundaries.
    """
    v = default_site(model) if site is None else int(site)
    if not 0 <= v < model.n_sites:
        raise InvalidInputError(f"site {v} outside the lattice")
    return tensor_power(model.rho, model.degree(v), prune=0.0) if model.degree(v) else from_classes([1.0], [1.0])


def site_reduced_state_ed(model: LatticeModel, site: int | None = None) -> np.ndarray:
    """Same spectrum from the partial trace of the ED ground vector (sorted weights)."""
    v = default_site(model) if site is None else int(site)
    return _schmidt_split(model, ground_state(model), _site_spins(model, [v]))


@dataclass(frozen=True)
class Region:
    """A set of site indices of a model and the edges that cross its border."""

    sites: frozenset[int]
    boundary_edges: tuple[Edge, ...]

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_edges)


def make_region(model: LatticeModel, sites: Iterable) -> Region:
    """Region from site indices or coordinate tuples; must be nonempty and proper."""
    idx = set()
    for s in sites:
        idx.add(model.site_index(s) if isinstance(s, (tuple, list)) else int(s))
    if any(not 0 <= v < model.n_sites for v in idx):
        raise InvalidInputError("region contains a site outside the lattice")
    if not idx or len(idx) == model.n_sites:
        raise InvalidInputError("improper region: it must be nonempty and not the whole lattice")
    cut = tuple(e for e in model.edges if (e.a in idx) != (e.b in idx))
    return Region(frozenset(idx), cut)


def complement(model: LatticeModel, region: Region) -> Region:
    return make_region(model, set(range(model.n_sites)) - region.sites)


@dataclass(frozen=True)
class BoundarySpectrum:
    rho: Spectrum
    n_boundary: int
    schmidt: Spectrum


def boundary_spectrum(model: LatticeModel, region: Region | Iterable) -> BoundarySpectrum:
    """Edge spectrum, cut size ``|dA|`` and the cut's Schmidt spectrum ``rho^(x)|dA|``."""
    if not isinstance(region, Region):
        region = make_region(model, region)
    k = region.n_boundary
    schmidt = tensor_power(model.rho, k, prune=0.0) if k else from_classes([1.0], [1.0])
    return BoundarySpectrum(model.rho, k, schmidt)


def boundary_spectrum_ed(model: LatticeModel, region: Region | Iterable) -> np.ndarray:
    """Schmidt weights across the region's border from the ED ground vector."""
    if not isinstance(region, Region):
        region = make_region(model, region)
    return _schmidt_split(model, ground_state(model), _site_spins(model, region.sites))


def classify_region(
    model: LatticeModel,
    region_is_properly_infinite: bool = True,
    criterion: RationalityCriterion = DEFAULT_CRITERION,
) -> FactorType:
    """Type of a half-infinite region's algebra, from the edge spectrum alone."""
    return classify_itpfi(model.rho, ambient_properly_infinite=region_is_properly_infinite,
                          criterion=criterion)


def stack(model1: LatticeModel, model2: LatticeModel) -> LatticeModel:
    """Site-by-site tensor product: ``m = m1 m2`` and ``rho = rho1 (x) rho2``."""
    geo1 = (model1.D, model1.extent, model1.boundary)
    geo2 = (model2.D, model2.extent, model2.boundary)
    if geo1 != geo2:
        raise InvalidInputError(f"cannot stack lattices with geometry {geo1} and {geo2}")
    rho = tensor(model1.rho, model2.rho, prune=0.0)
    return build_model(model1.D, model1.extent, model1.boundary, model1.m * model2.m, rho)
