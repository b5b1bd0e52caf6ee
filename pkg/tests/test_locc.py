import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from lsentangle import locc, spectra
from lsentangle.errors import InvalidInputError, UnsupportedInputError
from lsentangle.oracles import qubit_protocol_oracle

from conftest import spectrum_st


def _convex_oracle(p, q):
    """max sum sqrt(x q) over sorted x majorizing p, solved by SLSQP from several starts."""
    n = max(len(p), len(q))
    p = np.pad(np.sort(p)[::-1], (0, n - len(p)))
    q = np.pad(np.sort(q)[::-1], (0, n - len(q)))
    cp = np.cumsum(p)
    cons = [{"type": "eq", "fun": lambda x: x.sum() - 1}]
    cons += [{"type": "ineq", "fun": lambda x, k=k: np.cumsum(x)[k] - cp[k]} for k in range(n - 1)]
    cons += [{"type": "ineq", "fun": lambda x, k=k: x[k] - x[k + 1]} for k in range(n - 1)]
    f = lambda x: -np.sum(np.sqrt(np.clip(x, 0, None) * q))
    best = 0.0
    for x0 in (p, (p + q) / 2, np.maximum(p, q) / np.maximum(p, q).sum()):
        res = optimize.minimize(f, x0, method="SLSQP", bounds=[(0, 1)] * n, constraints=cons,
                                options={"ftol": 1e-14, "maxiter": 500})
        if res.success:
            best = max(best, -res.fun)
    return best


# convertibility ---------------------------------------------------------------
def test_convertible_examples():
    bell = spectra.uniform(2)
    assert locc.convertible(bell, spectra.make_spectrum([0.9, 0.1]))
    assert locc.convertible(bell, spectra.point_mass())
    assert not locc.convertible(spectra.make_spectrum([0.7, 0.3]), bell)


def test_convertible_needs_exact_spectra():
    s = spectra.tensor_power(spectra.powers(0.1), 30, prune=1e-6)
    with pytest.raises(UnsupportedInputError):
        locc.convertible(s, spectra.point_mass())
    with pytest.raises(UnsupportedInputError):
        locc.max_conversion_fidelity(s, spectra.point_mass())


@given(spectrum_st(max_dim=4), spectrum_st(max_dim=4))
def test_convertible_is_majorization_by_target(p, q):
    assert locc.convertible(p, q) == spectra.majorizes(q, p)


@given(spectrum_st(max_dim=5))
def test_uniform_source_reaches_every_spectrum_of_same_rank(q):
    assert locc.convertible(spectra.uniform(q.dim), q)


# optimal fidelity ---------------------------------------------------------------
def test_fidelity_examples():
    assert locc.max_conversion_fidelity(spectra.point_mass(), spectra.uniform(2)) == pytest.approx(
        math.sqrt(0.5), abs=1e-15)
    assert locc.max_conversion_fidelity(spectra.uniform(2), spectra.make_spectrum([0.8, 0.2])) == 1.0


def test_fidelity_frozen_qubit_value():
    # [0.7, 0.3] -> Bell: best reachable is the source itself
    p = spectra.make_spectrum([0.7, 0.3])
    f = locc.max_conversion_fidelity(p, spectra.uniform(2))
    assert f == pytest.approx(math.sqrt(0.35) + math.sqrt(0.15), abs=1e-14)
    assert f == pytest.approx(0.97891, abs=1e-5)


def test_fidelity_matches_convex_oracle(rng):
    for _ in range(25):
        n = int(rng.integers(2, 5))
        p = rng.dirichlet(np.ones(n))
        q = rng.dirichlet(np.ones(n) * 0.5)
        got = locc.max_conversion_fidelity(spectra.make_spectrum(p), spectra.make_spectrum(q))
        assert got == pytest.approx(_convex_oracle(p, q), abs=1e-6)


def test_reachable_spectrum_majorizes_source(rng):
    for _ in range(20):
        p = spectra.make_spectrum(rng.dirichlet(np.ones(4)))
        q = spectra.make_spectrum(rng.dirichlet(np.ones(4)))
        opt = locc.optimal_conversion(p, q)
        reach = spectra.from_classes(opt.reachable[opt.reachable > 0],
                                     opt.lengths[opt.reachable > 0])
        assert locc.convertible(p, reach)
        assert spectra.sorted_fidelity(reach, q).value == pytest.approx(opt.fidelity, abs=1e-12)
        assert 0 <= opt.witness <= 4


@given(spectrum_st(max_dim=4), spectrum_st(max_dim=4))
def test_fidelity_at_least_direct_overlap(p, q):
    # doing nothing is a valid protocol
    f = locc.max_conversion_fidelity(p, q)
    assert f >= spectra.sorted_fidelity(p, q).value - 1e-12
    assert f <= 1.0


def test_agrees_with_qubit_protocol_oracle(rng):
    for _ in range(8):
        p = np.sort(rng.dirichlet([1, 1]))[::-1]
        q = np.sort(rng.dirichlet([1, 1]))[::-1]
        P, Q = spectra.make_spectrum(p), spectra.make_spectrum(q)
        opt = qubit_protocol_oracle(p, q)
        assert opt.convertible == locc.convertible(P, Q)
        assert opt.mean_sq_fidelity == pytest.approx(locc.max_conversion_fidelity(P, Q) ** 2, abs=1e-3)


# Bell distillation ------------------------------------------------------------
def test_distillable_bells_examples():
    assert locc.distillable_bells(spectra.uniform(2), 0.1) == 1
    assert locc.distillable_bells(spectra.point_mass(), 0.1) == 0
    assert locc.distillable_bells(spectra.uniform(16), 0.01) == 4


def test_distillable_bells_validation():
    with pytest.raises(InvalidInputError):
        locc.distillable_bells(spectra.uniform(2), 0.0)


@pytest.mark.parametrize("L, frozen", [(1, 1), (5, 4), (10, 9), (20, 17), (40, 35), (60, 53)])
def test_bells_from_powers_products_frozen(L, frozen):
    p = spectra.tensor_power(spectra.powers(0.5), L, prune=0)
    assert locc.distillable_bells(p, 0.05) == frozen


@pytest.mark.parametrize("L", [2, 3, 4])
def test_bells_match_convex_oracle(L):
    p = spectra.tensor_power(spectra.powers(0.5), L, prune=0)
    k = locc.distillable_bells(p, 0.05)
    w = p.weights
    assert _convex_oracle(w, np.full(2**k, 2.0**-k)) >= 0.95 - 1e-6
    if 2 ** (k + 1) <= 2 * w.size:
        assert _convex_oracle(w, np.full(2 ** (k + 1), 2.0 ** -(k + 1))) < 0.95


def test_conversion_report_consistency():
    p = spectra.make_spectrum([0.7, 0.3])
    rep = locc.conversion_report(p, spectra.uniform(2), eps=0.05)
    assert not rep.feasible_exact and rep.bell_count == 1 and rep.witness is not None
    ok = locc.conversion_report(spectra.uniform(2), p)
    assert ok.feasible_exact and ok.max_fidelity == 1.0
    assert set(rep.as_dict()) == {"feasible_exact", "max_fidelity", "bell_count", "eps", "witness"}


# finite-size distillation -------------------------------------------------------
def test_finite_size_distillation_powers_family():
    family = {L: spectra.tensor_power(spectra.powers(0.5), L, prune=0) for L in range(1, 21)}
    chk = locc.finite_size_distillation_check(family, spectra.uniform(2), 0.05)
    assert chk.threshold_index == 1
    assert all(v <= 0.05 for v in chk.errors.values())


def test_finite_size_distillation_trivial_cases():
    family = [spectra.point_mass()] * 4
    assert locc.finite_size_distillation_check(family, spectra.point_mass(), 0.1).threshold_index == 0
    assert locc.finite_size_distillation_check(family, spectra.uniform(2), 0.1).threshold_index is None


def test_finite_size_distillation_threshold_beyond_start():
    family = {L: spectra.tensor_power(spectra.powers(0.5), L, prune=0) for L in range(1, 13)}
    chk = locc.finite_size_distillation_check(family, spectra.uniform(8), 0.05)
    L0 = chk.threshold_index
    assert L0 is not None and L0 > 1
    assert chk.errors[L0 - 1] > 0.05


@given(st.floats(0.01, 0.5))
def test_bell_count_consistent_with_fidelity(eps):
    p = spectra.tensor_power(spectra.powers(0.5), 6, prune=0)
    k = locc.distillable_bells(p, eps)
    assert locc.max_conversion_fidelity(p, spectra.uniform(2**k)) >= 1 - eps
