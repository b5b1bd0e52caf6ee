"""Acceptance criteria, runnable from ``lsentangle verify`` and from pytest.

Each criterion is a function ``(seed) -> (passed, details)``; ``details`` holds
only reproducible numbers so that repeated runs serialize identically.
Runtime budgets are checked by the caller.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import chains, embezzlement, factor_types as ft, lattice, locc, oracles, spectra
from .records import ExperimentRecord

PHI_INV = ft.LAMBDA_FIBONACCI


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    budget_s: float
    check: Callable[[int], tuple[bool, dict]]


# --------------------------------------------------------------------------- #
def classifier_anchors(seed: int) -> tuple[bool, dict]:
    out = {
        "[0.5,0.5]": ft.classify_itpfi(spectra.make_spectrum([0.5, 0.5])).label,
        "[1]": ft.classify_itpfi(spectra.make_spectrum([1])).label,
    }
    ok = out["[0.5,0.5]"] == "II_1" and ft.classify_itpfi(spectra.make_spectrum([1])).family == "I"
    lam_err = {}
    for lam in (0.1, 0.25, 0.5, PHI_INV):
        t = ft.classify_itpfi(spectra.powers(lam))
        err = abs(t.lam - lam) if t.kind is ft.Kind.III_LAMBDA else math.inf
        lam_err[repr(lam)] = err
        ok &= err <= 1e-9
    # weights 1 : 1/2 : 1/3 give log-ratios ln 2 and ln 3
    dense = ft.classify_itpfi(spectra.make_spectrum([1, 1 / 2, 1 / 3]))
    out.update(lambda_errors=lam_err, log_ratio_pair_ln2_ln3=dense.label)
    ok &= dense.kind is ft.Kind.III_1
    return bool(ok), out


def _random_spectrum(rng: np.random.Generator) -> spectra.Spectrum:
    kind = rng.integers(5)
    if kind == 0:
        return spectra.point_mass()
    if kind == 1:
        return spectra.uniform(int(rng.integers(2, 6)))
    if kind == 2:
        return spectra.powers(float(rng.uniform(0.05, 0.95)))
    if kind == 3:
        # commensurate three-level spectrum: weights 1, x^a, x^b
        x = float(rng.uniform(0.2, 0.8))
        a, b = sorted(rng.choice(np.arange(1, 5), 2, replace=False))
        return spectra.make_spectrum([1, x**a, x**b])
    return spectra.make_spectrum(rng.dirichlet(np.ones(3)))


def _same_up_to_finite(a: ft.FactorType, b: ft.FactorType) -> bool:
    # a finite type I factor changes I_n into I_(n k); the subtype is the kind
    if a.kind is ft.Kind.I_FINITE:
        return b.kind is ft.Kind.I_FINITE
    return a.same_subtype(b)


def finite_modification(seed: int) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    failures = []
    kinds: dict[str, int] = {}
    for case in range(100):
        s = _random_spectrum(rng)
        t = ft.classify_itpfi(s)
        kinds[t.kind.value] = kinds.get(t.kind.value, 0) + 1
        ns = [int(n) for n in rng.integers(1, 7, size=int(rng.integers(1, 5)))]
        composed = t
        for n in ns:
            composed = ft.compose(composed, ft.type_I(n))
        prefix = [spectra.make_spectrum(rng.dirichlet(np.ones(int(rng.integers(1, 4)))))
                  for _ in range(len(ns))]
        reclassified = ft.classify_sequence(prefix + [s] * 3)
        if not (_same_up_to_finite(t, composed) and _same_up_to_finite(t, reclassified)):
            failures.append({"case": case, "type": t.label, "composed": composed.label,
                             "reclassified": reclassified.label})
    return not failures, {"cases": 100, "failures": failures, "kinds": dict(sorted(kinds.items()))}


def composition_oracle(seed: int) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    pairs = [(float(a), float(b)) for a, b in rng.uniform(0.05, 0.95, size=(20, 2))]
    designed = [(0.5, 0.25), (0.5, 0.125), (0.25, 0.125), (1 / 9, 1 / 27), (0.3, 0.09),
                (0.6, 0.6**1.5), (PHI_INV, 0.5), (0.5, 1 / 3)]
    rows = []
    ok = True
    for lam, mu in pairs + designed:
        s1, s2 = spectra.powers(lam), spectra.powers(mu)
        composed = ft.compose(ft.classify_itpfi(s1), ft.classify_itpfi(s2))
        direct = ft.classify_itpfi(spectra.tensor(s1, s2, prune=0.0))
        agree = composed.same_subtype(direct)
        ok &= agree
        rows.append({"lambda": lam, "mu": mu, "composed": composed.label, "direct": direct.label,
                     "agree": agree})
    half_quarter = ft.compose(ft.type_III(0.5), ft.type_III(0.25))
    fib_ising = ft.compose(ft.classify_itpfi(spectra.powers(PHI_INV)),
                           ft.classify_itpfi(spectra.powers(ft.LAMBDA_ISING)))
    ok &= half_quarter.same_subtype(ft.type_III(0.5)) and fib_ising.kind is ft.Kind.III_1
    return bool(ok), {"pairs": rows, "III_1/2 x III_1/4": half_quarter.label,
                      "Fib x Ising": fib_ising.label}


KAPPA_KS = [50, 100, 200, 400, 800]


def kappa_convergence(seed: int) -> tuple[bool, dict]:
    details = {}
    ok = True
    for lam in (0.5, 0.25):
        series = embezzlement.kappa_series(spectra.powers(lam), KAPPA_KS, metric="trace", seed=seed)
        kappa = series[-1].kappa
        target = embezzlement.kappa_formula(lam)
        good = abs(kappa - target) <= 0.05 and all(s.reliable for s in series)
        ok &= good
        details[f"lambda={lam}"] = {"series": [s.kappa for s in series], "ks": KAPPA_KS,
                                    "target": target, "deviation": abs(kappa - target),
                                    "last_step": abs(series[-1].kappa - series[-2].kappa),
                                    "max_deficit": max(s.deficit for s in series)}
    uni = [embezzlement.worst_case_error(spectra.uniform(2**k)).error for k in range(0, 21)]
    ref = math.sqrt(2 - math.sqrt(2))
    dev = max(abs(u - ref) for u in uni)
    ok &= dev <= 0.01
    details["uniform"] = {"dims": "2^0..2^20", "kappa": uni, "max_deviation": dev, "reference": ref}
    return bool(ok), details


def vdh_family(seed: int) -> tuple[bool, dict]:
    family = {L: embezzlement.vdh_spectrum(2**L) for L in range(1, 21)}
    errors = [embezzlement.worst_case_error(family[L], seed=seed).error for L in range(1, 21)]
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    check = embezzlement.embezzling_family_check(family, 2, 0.3, seed=seed)
    ok = decreasing and errors[-1] < 0.3 and check.threshold_index is not None
    return bool(ok), {"errors": errors, "strictly_decreasing": decreasing,
                      "L_star": check.threshold_index}


def locc_oracle(seed: int) -> tuple[bool, dict]:
    from .cli import oracle_comparison

    res = oracle_comparison(50, seed)
    ok = res["boolean_agreement"] == 50 and res["max_fidelity_error"] <= 1e-3
    return bool(ok), {k: v for k, v in res.items() if k != "rows"}


def finite_size_distillation(seed: int) -> tuple[bool, dict]:
    family, cur = {}, spectra.point_mass()
    for L in range(1, 61):
        cur = spectra.tensor(cur, spectra.powers(0.5), prune=0.0)
        family[L] = cur
    bell = spectra.uniform(2)
    check = locc.finite_size_distillation_check(family, bell, 0.05)
    L0 = check.threshold_index
    fids = [locc.max_conversion_fidelity(family[L], bell) for L in family]
    persists = L0 is not None and all(f >= 0.95 for L, f in zip(family, fids) if L >= L0)
    bells = [locc.distillable_bells(family[L], 0.05) for L in family]
    monotone = all(b >= a for a, b in zip(bells, bells[1:]))
    # unbounded growth at finite size: every window of 5 steps gains a Bell pair
    growing = all(bells[i + 5] > bells[i] for i in range(len(bells) - 5))
    ok = persists and monotone and growing
    return bool(ok), {"L0": L0, "feasible_from_L0": persists, "bells": bells,
                      "monotone": monotone, "grows_every_5": growing}


def _lattice_report(model: lattice.LatticeModel, region, rng) -> tuple[bool, dict]:
    rep = lattice.hamiltonian_spectrum_small(model)
    exact = lattice.hamiltonian_spectrum_small(model, exact=True)
    site_dev = float(np.max(np.abs(lattice.site_reduced_state_ed(model)
                                   - lattice.site_reduced_state(model).weights)))
    bs = lattice.boundary_spectrum(model, region)
    w = lattice.boundary_spectrum_ed(model, region)
    ref = bs.schmidt.weights
    bnd_dev = float(np.max(np.abs(w - ref))) if w.size == ref.size else math.inf
    levels = rep.as_dict()["levels"]
    same = []
    for _ in range(5):
        rho = spectra.make_spectrum(rng.dirichlet(np.ones(model.m)))
        other = lattice.build_model(model.D, model.extent, model.boundary, model.m, rho)
        r2 = lattice.hamiltonian_spectrum_small(other)
        same.append(r2.as_dict()["levels"] == levels and r2.gap == rep.gap)
    ok = (rep.integer and rep.ground_degeneracy == 1 and abs(rep.gap - 1) <= 1e-9
          and exact.gap == 1 and exact.ground_degeneracy == 1
          and {float(k): v for k, v in exact.levels.items()} == rep.levels
          and site_dev <= 1e-10 and bnd_dev <= 1e-10 and all(same)
          and lattice.commuting_check(model))
    return bool(ok), {"levels": levels, "exact_gap": str(exact.gap), "unique_ground": rep.ground_degeneracy == 1,
                      "site_deviation": site_dev, "boundary_edges": bs.n_boundary,
                      "boundary_deviation": bnd_dev, "gap_same_for_random_rho": same}


def lattice_exactness(seed: int) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    chain = lattice.build_model(1, [3], "open", 2, [0.5, 0.5])
    ok1, d1 = _lattice_report(chain, lattice.make_region(chain, [0]), rng)
    square = lattice.build_model(2, [2, 2], "open", 2, [0.7, 0.3])
    ok2, d2 = _lattice_report(square, lattice.make_region(square, [(0, 0), (0, 1)]), rng)
    return ok1 and ok2, {"chain_3": d1, "square_2x2": d2}


def critical_scaling(seed: int) -> tuple[bool, dict]:
    lengths = [32, 45, 64, 91, 128, 181, 256]
    fit = chains.entropy_scaling_fit([(ell, chains.xx_entropy(ell)) for ell in lengths], "log")
    inc = chains.xx_entropy(256) - chains.xx_entropy(128)
    ok = abs(fit.slope - 1 / 3) <= 0.03 and abs(inc - math.log(2) / 3) <= 0.03
    return bool(ok), {"fit": fit.as_dict(), "lengths": lengths, "S(256)-S(128)": inc}


def supercritical_scaling(seed: int) -> tuple[bool, dict]:
    enum = {}
    ok = True
    for L in range(2, 13, 2):
        blocks = chains.motzkin_classes(L, 2).block_sizes() == oracles.motzkin_block_counts(L, 2)
        dev = float(np.max(np.abs(chains.motzkin_spectrum(L, 2).weights
                                  - oracles.motzkin_midpoint_spectrum(L, 2))))
        enum[str(L)] = {"blocks_equal": blocks, "max_deviation": dev}
        ok &= blocks and dev <= 1e-12
    lengths = [16, 24, 32, 48, 64, 96, 128, 192, 256]
    samples = [(L, chains.motzkin_entropy(L, 2)) for L in lengths]
    power = chains.power_law_exponent(samples)
    fs = chains.entropy_scaling_fit(samples, "sqrt")
    fl = chains.entropy_scaling_fit(samples, "log")
    ok &= 0.4 <= power.slope <= 0.6 and fs.residual < fl.residual
    return bool(ok), {"enumeration": enum, "exponent": power.slope,
                      "sqrt_residual": fs.residual, "log_residual": fl.residual}


CRITERIA = [
    Criterion(1, "classifier anchors", 1.0, classifier_anchors),
    Criterion(2, "finite-modification invariance", 10.0, finite_modification),
    Criterion(3, "composition / oracle agreement", 30.0, composition_oracle),
    Criterion(4, "kappa convergence", 300.0, kappa_convergence),
    Criterion(5, "embezzling family", 60.0, vdh_family),
    Criterion(6, "LOCC oracle equivalence", 120.0, locc_oracle),
    Criterion(7, "finite-size distillation", 60.0, finite_size_distillation),
    Criterion(8, "lattice exactness", 120.0, lattice_exactness),
    Criterion(9, "critical scaling", 30.0, critical_scaling),
    Criterion(10, "supercritical scaling", 120.0, supercritical_scaling),
]


def run_criterion(c: Criterion, seed: int = 0) -> ExperimentRecord:
    t0 = time.perf_counter()
    passed, details = c.check(seed)
    rec = ExperimentRecord("acceptance", {"criterion": c.number, "name": c.name, "budget_s": c.budget_s},
                           details, {"budget_s": c.budget_s}, seed, bool(passed))
    rec.runtime_ms = int(round(1000 * (time.perf_counter() - t0)))
    return rec


def run_acceptance(seed: int = 0, only=None, exact: bool = True) -> list[ExperimentRecord]:
    """Run the criteria (all, or those in ``only``) in order."""
    records = []
    for c in CRITERIA:
        if only and c.number not in only:
            continue
        records.append(run_criterion(c, seed))
    return records
