import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lsentangle import factor_types as ft
from lsentangle import spectra
from lsentangle.errors import UnsupportedInputError

from conftest import assert_quoted, spectrum_st

PHI = (1 + math.sqrt(5)) / 2


# rationality test and ratio groups -----------------------------------------
@pytest.mark.parametrize("x, y, expected", [
    (math.log(2), math.log(4), (1, 2)),
    (math.log(3), math.log(9), (1, 2)),
    (math.log(8), math.log(4), (3, 2)),
])
def test_rationality_test_detects_small_ratios(x, y, expected):
    assert ft.rationality_test(x, y) == expected


def test_golden_log_ratio_is_not_rational(source_text):
    assert_quoted(source_text, r"$\log(\phi)/\log(2)$ being rational would imply that $\phi$ is rational")
    assert ft.rationality_test(math.log(PHI), math.log(2), depth=20, tol=1e-12) is None


def test_rationality_test_rejects_nonpositive():
    with pytest.raises(ValueError):
        ft.rationality_test(0.0, 1.0)


def test_continued_fraction_of_golden_ratio():
    assert ft.continued_fraction(PHI, 10) == [1] * 10


@pytest.mark.parametrize("raw, structure, step", [
    ([1], "trivial", None),
    ([0.25] * 4, "trivial", None),
    ([2, 1], "cyclic", math.log(2)),
    ([4, 2, 1], "cyclic", math.log(2)),
    ([8, 2, 1], "cyclic", math.log(2)),
    ([9, 3, 1], "cyclic", math.log(3)),
])
def test_ratio_group_structure(raw, structure, step):
    g = ft.ratio_group(spectra.make_spectrum(raw))
    assert g.structure == structure
    if step is not None:
        assert g.step == pytest.approx(step, rel=1e-12)


def test_ratio_group_dense_for_incommensurate_logs():
    # [1, a, a b] with a = 1/2, b = 1/3: log-ratios ln 2 and ln 6, ratio irrational
    g = ft.ratio_group(spectra.make_spectrum([1, 0.5, 0.5 / 3]))
    assert g.structure == "dense"
    assert g.step is None


def test_ratio_group_generators_deduplicated():
    g = ft.ratio_group(spectra.make_spectrum([4, 2, 2, 1]))
    assert len(g.generators) == 2
    assert all(x > 0 for x in g.generators)


def test_ratio_group_needs_exact_spectrum():
    s = spectra.tensor_power(spectra.powers(0.1), 30, prune=1e-6)
    with pytest.raises(UnsupportedInputError):
        ft.ratio_group(s)


# classification ------------------------------------------------------------
def test_maximally_mixed_is_II1(source_text):
    assert_quoted(source_text, r"factor results whenever $\rho$ is maximally mixed")
    assert ft.classify_itpfi(spectra.uniform(2)).kind is ft.Kind.II_1
    assert ft.classify_itpfi(spectra.uniform(5)).kind is ft.Kind.II_1


def test_pure_is_type_I(source_text):
    assert_quoted(source_text, r"If each $\rho_{A,i}$ is pure")
    t = ft.classify_itpfi(spectra.point_mass())
    assert t.family == "I" and t.kind is ft.Kind.I_FINITE and t.n == 1


@pytest.mark.parametrize("lam", [0.1, 0.25, 0.5, 1 / PHI, 0.9])
def test_powers_spectrum_is_III_lambda(lam):
    t = ft.classify_itpfi(spectra.powers(lam))
    assert t.kind is ft.Kind.III_LAMBDA
    assert abs(t.lam - lam) <= 1e-9


def test_two_thirds_one_third_is_III_half():
    t = ft.classify_itpfi(spectra.make_spectrum([2 / 3, 1 / 3]))
    assert t.same_subtype(ft.type_III(0.5))


def test_three_level_spectrum_with_ln2_ln3_is_III1():
    # log-ratios ln 2 and ln 3
    assert ft.classify_itpfi(spectra.make_spectrum([6, 3, 2])).kind is ft.Kind.III_1


def test_properly_infinite_ambient():
    assert ft.classify_itpfi(spectra.point_mass(), True).kind is ft.Kind.I_INFINITE
    assert ft.classify_itpfi(spectra.uniform(2), True).kind is ft.Kind.II_INFINITE
    assert ft.classify_itpfi(spectra.powers(0.5), True).same_subtype(ft.type_III(0.5))


def test_classify_sequence_ignores_finite_prefix():
    prefix = [spectra.uniform(3), spectra.make_spectrum([0.9, 0.1])]
    tail = [spectra.powers(0.25)] * 3
    assert ft.classify_sequence(prefix + tail).same_subtype(ft.type_III(0.25))


def test_classify_sequence_without_constant_tail_is_undetermined():
    seq = [spectra.powers(x) for x in (0.1, 0.2, 0.3)]
    t = ft.classify_sequence(seq)
    assert t.kind is ft.Kind.UNDETERMINED and t.reason


def test_factor_type_validation():
    with pytest.raises(ValueError):
        ft.FactorType(ft.Kind.III_LAMBDA, lam=1.0)
    with pytest.raises(ValueError):
        ft.FactorType(ft.Kind.I_FINITE, n=0)
    with pytest.raises(ValueError):
        ft.FactorType(ft.Kind.UNDETERMINED)


def test_labels_and_order():
    assert ft.type_I(3).label == "I_3"
    assert ft.type_III(0.5).label == "III_0.5"
    ordered = [ft.type_I(2), ft.type_I(), ft.type_II(), ft.type_II(True), ft.type_III(0.0),
               ft.type_III(0.25), ft.type_III(0.5), ft.type_III()]
    assert sorted(ordered, key=ft.FactorType.rank) == ordered


def test_as_dict_records_rationality_criterion():
    d = ft.classify_itpfi(spectra.powers(0.5)).as_dict()
    assert d["type"].startswith("III_") and d["rationality_criterion"]["max_denominator"] == 10**4


# composition ---------------------------------------------------------------
def test_I_infinite_with_II1_is_II_infinite(source_text):
    assert_quoted(source_text, r"Since ${\mathrm{I}}_\infty \otimes {\mathrm{II}}_1 \cong {\mathrm{II}}_\infty$")
    assert ft.compose(ft.type_I(), ft.type_II()).kind is ft.Kind.II_INFINITE


def test_incommensurate_lambdas_give_III1(source_text):
    assert_quoted(source_text, r"\log(\lambda)/\log(\mu)$ is irrational")
    assert ft.compose(ft.type_III(0.5), ft.type_III(1 / 3)).kind is ft.Kind.III_1


def test_fib_ising_stacking_is_III1(source_text):
    assert_quoted(source_text, r"$\lambda_{\textup{Fib}}=\phi^{-1}$")
    assert_quoted(source_text, r"$\lambda_{\textup{Ising}}=1/2$")
    fib = ft.classify_itpfi(spectra.powers(ft.LAMBDA_FIBONACCI))
    ising = ft.classify_itpfi(spectra.powers(ft.LAMBDA_ISING))
    assert ft.compose(fib, ising).kind is ft.Kind.III_1


def test_commensurate_lambdas_merge():
    # merged group generated by ln 2 and 2 ln 2 is cyclic with step ln 2
    assert ft.compose(ft.type_III(0.5), ft.type_III(0.25)).same_subtype(ft.type_III(0.5))
    # ln 4 and ln 8 generate step ln 2
    assert ft.compose(ft.type_III(0.25), ft.type_III(0.125)).same_subtype(ft.type_III(0.5))


def test_compose_finite_and_trivial_cases():
    assert ft.compose(ft.type_I(2), ft.type_I(3)).n == 6
    assert ft.compose(ft.type_I(2), ft.type_II()).kind is ft.Kind.II_1
    assert ft.compose(ft.type_III(0.0), ft.type_II()).kind is ft.Kind.III_0
    assert ft.compose(ft.type_III(0.0), ft.type_III(0.5)).kind is ft.Kind.UNDETERMINED
    assert ft.compose(ft.undetermined("x"), ft.type_I()).kind is ft.Kind.UNDETERMINED


@given(spectrum_st(max_dim=3), spectrum_st(max_dim=3))
def test_compose_agrees_with_classifying_the_product(s, t):
    lhs = ft.compose(ft.classify_itpfi(s), ft.classify_itpfi(t))
    rhs = ft.classify_itpfi(spectra.tensor(s, t, prune=0))
    if lhs.kind is ft.Kind.I_FINITE:
        assert rhs.kind is ft.Kind.I_FINITE
    else:
        assert lhs.same_subtype(rhs, lam_tol=1e-9)


@given(spectrum_st(max_dim=4), st.lists(st.integers(1, 6), max_size=4))
def test_finite_type_I_factors_leave_type_unchanged(s, ns):
    base = ft.classify_itpfi(s, ambient_properly_infinite=True)
    out = base
    for n in ns:
        out = ft.compose(out, ft.type_I(n))
    assert out.same_subtype(base)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_compose_is_symmetric(a, b):
    x = ft.compose(ft.type_III(a), ft.type_III(b))
    y = ft.compose(ft.type_III(b), ft.type_III(a))
    assert x.same_subtype(y)
