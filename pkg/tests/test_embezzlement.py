import math
from math import comb

import numpy as np
import pytest

from lsentangle import embezzlement as emb
from lsentangle import spectra
from lsentangle.errors import InvalidInputError

from conftest import assert_quoted


def _dense_error(resource, target, metric="vector"):
    """Independent oracle: explicit sorted vectors, no class compression."""
    a = np.sort(np.kron(resource, target))[::-1]
    b = np.zeros_like(a)
    b[: len(resource)] = np.sort(resource)[::-1]
    F = float(np.sqrt(a * b).sum())
    return math.sqrt(max(0.0, 2 - 2 * F)) if metric == "vector" else 2 * math.sqrt(max(0.0, 1 - F * F))


def _two_pointer_fidelity(xs, ys):
    """Independent oracle on (value, multiplicity) lists sorted by value, descending."""
    xs, ys = [list(c) for c in xs], [list(c) for c in ys]
    i = j = 0
    F = 0.0
    while i < len(xs) and j < len(ys):
        n = min(xs[i][1], ys[j][1])
        F += n * math.sqrt(xs[i][0]) * math.sqrt(ys[j][0])
        xs[i][1] -= n
        ys[j][1] -= n
        i += xs[i][1] == 0
        j += ys[j][1] == 0
    return F


def _powers_product_error(lam, k, q):
    """Trace-norm error of Powers(lam)^k against target (q, 1-q) from binomial classes."""
    p0, p1 = 1 / (1 + lam), lam / (1 + lam)
    res = [(p0 ** (k - j) * p1**j, comb(k, j)) for j in range(k + 1)]
    prod = sorted([(v * t, c) for v, c in res for t in (q, 1 - q)], key=lambda x: -x[0])
    F = _two_pointer_fidelity(prod, res)
    return 2 * math.sqrt(max(0.0, 1 - F * F))


# resources ------------------------------------------------------------------
@pytest.mark.parametrize("N, expected", [(1, [1.0]), (2, [2 / 3, 1 / 3]), (3, [6 / 11, 3 / 11, 2 / 11])])
def test_vdh_spectrum(N, expected):
    np.testing.assert_allclose(emb.vdh_spectrum(N).weights, expected, atol=1e-15)


def test_vdh_spectrum_rejects_zero():
    with pytest.raises(InvalidInputError):
        emb.vdh_spectrum(0)


# embezzlement error ---------------------------------------------------------
def test_trivial_target_costs_nothing():
    r = emb.vdh_spectrum(7)
    assert emb.embezzlement_error(r, spectra.point_mass()).value == pytest.approx(0, abs=1e-7)


def test_product_resource_against_bell():
    e = emb.embezzlement_error(spectra.point_mass(), spectra.uniform(2)).value
    assert e == pytest.approx(math.sqrt(2 - 2 * math.sqrt(0.5)), abs=1e-12)
    assert e == pytest.approx(0.76537, abs=1e-5)


@pytest.mark.parametrize("k", [1, 3, 10, 20])
def test_uniform_resources_do_not_embezzle(k):
    e = emb.embezzlement_error(spectra.uniform(2**k), spectra.uniform(2)).value
    assert e == pytest.approx(0.76537, abs=1e-5)


@pytest.mark.parametrize("metric", ["vector", "trace"])
def test_error_matches_dense_oracle(rng, metric):
    for _ in range(10):
        r = rng.dirichlet(np.ones(int(rng.integers(1, 9))))
        t = rng.dirichlet(np.ones(int(rng.integers(2, 4))))
        got = emb.embezzlement_error(spectra.make_spectrum(r), spectra.make_spectrum(t), metric).value
        assert got == pytest.approx(_dense_error(r, t, metric), abs=1e-12)


def test_direct_and_generic_paths_agree():
    r = emb.vdh_spectrum(50)
    t = spectra.make_spectrum([0.6, 0.4])
    direct = emb.embezzlement_error(r, t).value
    # resource with a duplicated weight forces the class-based path
    generic = emb.embezzlement_error(spectra.make_spectrum(r.weights.tolist()), t).value
    assert direct == pytest.approx(generic, abs=1e-13)


def test_unknown_metric_rejected():
    with pytest.raises(InvalidInputError):
        emb.embezzlement_error(spectra.uniform(2), spectra.uniform(2), metric="bures")


# worst case -------------------------------------------------------------------
@pytest.mark.parametrize("N, frozen", [(2, 0.6249194282075651), (16, 0.4733172022276898), (256, 0.35823146475985507)])
def test_vdh_worst_case_frozen(N, frozen):
    # frozen against a 2001-point dense scan (same maximizer, the Bell target)
    wc = emb.worst_case_error(emb.vdh_spectrum(N))
    assert wc.error == pytest.approx(frozen, abs=1e-12)
    w = 1 / np.arange(1, N + 1)
    w /= w.sum()
    dense = max(_dense_error(w, [q, 1 - q]) for q in np.linspace(0.5, 1, 2001))
    assert wc.error == pytest.approx(dense, abs=1e-9)


def test_worst_case_three_level_targets():
    wc = emb.worst_case_error(emb.vdh_spectrum(16), n=3)
    assert len(wc.target) == 3
    assert wc.error >= emb.worst_case_error(emb.vdh_spectrum(16), n=2).error


# kappa ------------------------------------------------------------------------
def test_kappa_formula_values(source_text):
    assert_quoted(source_text, r"2\frac{1-\sqrt\lambda}{1+\sqrt\lambda}")
    assert emb.kappa_formula(0.25) == pytest.approx(2 / 3, abs=1e-15)
    assert emb.kappa_formula(1.0) == 0
    assert emb.kappa_formula(0.5) == pytest.approx(0.34315, abs=1e-5)
    with pytest.raises(InvalidInputError):
        emb.kappa_formula(0.0)


def test_kappa_series_frozen_against_binomial_oracle():
    exact = emb.kappa_series(spectra.powers(0.5), [50, 100], metric="trace", prune=0)
    pruned = emb.kappa_series(spectra.powers(0.5), [50, 100], metric="trace")
    frozen = [0.4519629155040526, 0.3791971]
    for est, approx, value in zip(exact, pruned, frozen):
        assert est.kappa == pytest.approx(value, abs=1e-7)
        q = est.worst_target[0]
        assert est.kappa == pytest.approx(_powers_product_error(0.5, est.k, q), abs=1e-12)
        # the default pruning stays inside its reported error bar
        assert approx.reliable
        assert abs(approx.kappa - est.kappa) <= approx.error_bound


def test_kappa_series_decreases_toward_formula():
    series = emb.kappa_series(spectra.powers(0.5), [25, 50, 100, 200], metric="trace")
    values = [e.kappa for e in series]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert abs(values[-1] - emb.kappa_formula(0.5)) < 0.01
    conv = emb.convergence(series)
    assert conv.estimate == values[-1] and conv.last_step == pytest.approx(values[-2] - values[-1])


def test_kappa_estimate_as_dict():
    d = emb.kappa_estimate(spectra.powers(0.25), 10).as_dict()
    assert d["k"] == 10 and d["metric"] == "vector" and len(d["worst_target"]) == 2


# family checks ----------------------------------------------------------------
def test_vdh_family_threshold():
    family = {L: emb.vdh_spectrum(2**L) for L in range(1, 13)}
    chk = emb.embezzling_family_check(family, n=2, eps=0.5)
    assert chk.threshold_index is not None
    errs = [chk.errors[L] for L in sorted(chk.errors)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_large_eps_returns_first_index():
    family = {3: spectra.point_mass(), 4: spectra.point_mass()}
    assert emb.embezzling_family_check(family, 2, eps=2.0).threshold_index == 3


def test_constant_uniform_family_never_qualifies():
    chk = emb.embezzling_family_check([spectra.uniform(2**j) for j in range(1, 6)], 2, eps=0.1)
    assert chk.threshold_index is None
    assert min(chk.errors.values()) == pytest.approx(0.76537, abs=1e-5)


def test_family_check_validation():
    with pytest.raises(InvalidInputError):
        emb.embezzling_family_check([], 2, 0.3)
    with pytest.raises(InvalidInputError):
        emb.embezzling_family_check([spectra.uniform(2)], 2, 0.0)
