"""Command-line driver: ``lsentangle <command> [--config FILE] [--out DIR] ...``.

Commands ``classify``, ``kappa``, ``lattice``, ``chain`` and ``locc`` read a
YAML or JSON config (a mapping, or a mapping with a ``runs`` list of
mappings), run one experiment per mapping and append the records to
``<out>/results.jsonl``.  ``verify`` runs the acceptance suite.  Without
``--config`` each command runs a built-in default config.

Config keys
-----------
Spectra may be given in any config as ``weights: [..]`` (numbers or
fraction strings such as ``"1/3"``), ``lambda: x`` (two-level
``[1, x]/(1+x)``; ``x`` may be ``fibonacci`` or ``ising``), ``uniform: n``
or ``vdh: N``.

classify
    spectrum keys, ``ambient`` (bool), optional ``compose_with`` (spectrum)
kappa
    ``lambda``, ``ks`` (list), ``n``, ``grid``, ``metrics``, ``compare_metric``,
    ``tol``, ``deficit_bound``, optional ``resource: uniform`` with ``ks`` as
    ``log2`` of the dimension
lattice
    ``model`` (descriptor with ``dimension, extent, boundary, m, rho``),
    ``region`` (list of site coordinates), ``stack_with`` (descriptor),
    ``random_rho`` (count), ``ed`` (bool)
chain
    ``kind: xx`` with ``lengths``, ``ell_ref``; or ``kind: motzkin`` with
    ``s``, ``lengths``, ``enumerate_max``
locc
    ``mode: pairs`` with ``pairs: [{source, target}]`` and ``eps``;
    ``mode: family`` with ``lambda``, ``L_max``, ``target``, ``eps``;
    ``mode: oracle`` with ``instances``

Exit codes: 0 success, 1 a check inside a run failed, 2 bad config.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import chains, embezzlement, factor_types, lattice, locc, oracles, spectra
from .errors import LSEntangleError
from .records import ExperimentRecord, append_records

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


# --------------------------------------------------------------------------- #
# Config helpers
# --------------------------------------------------------------------------- #
def load_config(path: str | os.PathLike | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return data


def _number(x: Any) -> float:
    if isinstance(x, bool):
        raise ConfigError(f"expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigError(f"expected a number, got {x!r}")


_NAMED_LAMBDA = {"fibonacci": factor_types.LAMBDA_FIBONACCI, "ising": factor_types.LAMBDA_ISING}


def _lambda(x: Any) -> float:
    if isinstance(x, str) and x.lower() in _NAMED_LAMBDA:
        return _NAMED_LAMBDA[x.lower()]
    return _number(x)


def spectrum_from(cfg: Any) -> spectra.Spectrum:
    """Spectrum from a config value (mapping with one spectrum key, or a list)."""
    if isinstance(cfg, list):
        return spectra.make_spectrum([_number(w) for w in cfg])
    if not isinstance(cfg, dict):
        raise ConfigError(f"cannot read a spectrum from {cfg!r}")
    if "weights" in cfg:
        return spectrum_from(cfg["weights"])
    if "lambda" in cfg:
        return spectra.powers(_lambda(cfg["lambda"]))
    if "uniform" in cfg:
        return spectra.uniform(int(cfg["uniform"]))
    if "vdh" in cfg:
        return embezzlement.vdh_spectrum(int(cfg["vdh"]))
    raise ConfigError("spectrum needs one of: weights, lambda, uniform, vdh")


def _describe(s: spectra.Spectrum, limit: int = 64) -> dict:
    out = {"n_classes": s.n_classes, "dim": s.dim, "mass_deficit": s.mass_deficit}
    if s.dim <= limit:
        out["weights"] = s.weights.tolist()
    return out


# --------------------------------------------------------------------------- #
# Experiments
# --------------------------------------------------------------------------- #
def run_classify(config: dict, seed: int = 0, exact: bool = False) -> ExperimentRecord:
    """Factor type, ratio group and rationality metadata of one spectrum."""
    s = spectrum_from(config)
    ambient = bool(config.get("ambient", False))
    crit = factor_types.RationalityCriterion(
        max_denominator=int(config.get("max_denominator", factor_types.DEFAULT_CRITERION.max_denominator))
    )
    t = factor_types.classify_itpfi(s, ambient, crit)
    group = factor_types.ratio_group(s, crit)
    outputs = {
        "type": t.label,
        "family": t.family,
        "lambda": t.lam,
        "factor_type": t.as_dict(),
        "ratio_group": group.as_dict(),
    }
    passed = None
    if "compose_with" in config:
        s2 = spectrum_from(config["compose_with"])
        t2 = factor_types.classify_itpfi(s2, ambient, crit)
        composed = factor_types.compose(t, t2, crit)
        direct = factor_types.classify_itpfi(spectra.tensor(s, s2, prune=0.0), ambient, crit)
        passed = composed.same_subtype(direct)
        outputs.update(compose_with=t2.label, composed=composed.label, classified_product=direct.label)
    if "expect" in config:
        passed = (passed is not False) and t.label == str(config["expect"])
    params = {"spectrum": _describe(s), "ambient": ambient}
    return ExperimentRecord("classify", params, outputs, {"rationality": crit.as_dict()}, seed, passed)


def run_kappa(config: dict, seed: int = 0, exact: bool = False) -> ExperimentRecord:
    """kappa_k series of the product-state probe against the closed-form target."""
    uniform_resource = config.get("resource") == "uniform"
    lam = 1.0 if uniform_resource else _lambda(config.get("lambda", 0.5))
    if not 0 < lam <= 1:
        raise ConfigError("lambda must lie in (0, 1]")
    ks = [int(k) for k in config.get("ks", [50, 100, 200, 400])]
    if not ks or min(ks) < 1:
        raise ConfigError("ks must be a non-empty list of positive integers")
    n = int(config.get("n", 2))
    grid = int(config.get("grid", 64))
    metrics = list(config.get("metrics", ["vector", "trace"]))
    compare = config.get("compare_metric", "trace")
    tol = float(config.get("tol", 0.05))
    bound = float(config.get("deficit_bound", 1e-9))
    for m in metrics + [compare]:
        if m not in embezzlement.METRICS:
            raise ConfigError(f"unknown metric {m!r}")
    if compare not in metrics:
        metrics.append(compare)

    series: dict[str, list] = {}
    table = []
    for metric in metrics:
        if uniform_resource:
            rows = [
                embezzlement.kappa_estimate(spectra.powers(1.0), k, n, grid, metric, bound, seed=seed,
                                            resource=spectra.uniform(2**k))
                for k in ks
            ]
        else:
            rows = embezzlement.kappa_series(spectra.powers(lam), ks, n, grid, metric, bound, seed=seed)
        series[metric] = [r.as_dict() for r in rows]
        table.extend({"metric": metric, "k": r.k, "kappa": r.kappa, "deficit": r.deficit,
                      "reliable": r.reliable} for r in rows)

    target = embezzlement.kappa_formula(lam)
    converged = {m: series[m][-1]["kappa"] for m in metrics}
    steps = {m: abs(series[m][-1]["kappa"] - series[m][-2]["kappa"]) if len(ks) > 1 else None
             for m in metrics}
    reliable = all(r["reliable"] for m in metrics for r in series[m])
    outputs = {
        "series": series,
        "converged": converged,
        "last_step": steps,
        "formula_target": target,
        "deviation": abs(converged[compare] - target),
        "reliable": reliable,
        "probe": "product-state probe",
    }
    if lam == 1.0:
        # the probe for lambda = 1 is the uniform (II_1) spectrum, not a III_1 state
        outputs["probe_applicable"] = False
        passed = None
    else:
        outputs["probe_applicable"] = True
        passed = bool(outputs["deviation"] <= tol and reliable)
    params = {"lambda": lam, "ks": ks, "n": n, "grid": grid, "metrics": metrics,
              "compare_metric": compare, "resource": "uniform" if uniform_resource else "powers"}
    tolerances = {"tol": tol, "deficit_bound": bound, "prune": spectra.DEFAULT_PRUNE,
                  "cap": spectra.DEFAULT_CAP, "refine_tol": 1e-6}
    return ExperimentRecord("kappa", params, outputs, tolerances, seed, passed, table=table)


def _model(desc: Any) -> lattice.LatticeModel:
    if not isinstance(desc, dict):
        raise ConfigError("lattice model must be a mapping")
    desc = dict(desc)
    desc["rho"] = spectrum_from(desc.get("rho", [0.5, 0.5])).weights.tolist()
    return lattice.LatticeModel.from_record(desc)


def run_lattice(config: dict, seed: int = 0, exact: bool = False) -> ExperimentRecord:
    """Build ``H(rho)``, check commutation and the spectrum, classify a region."""
    model = _model(config.get("model", {"dimension": 1, "extent": [3], "boundary": "open", "m": 2,
                                        "rho": [0.5, 0.5]}))
    exact = exact or bool(config.get("exact", False))
    ed = bool(config.get("ed", True)) and model.sector_dim <= lattice.DENSE_CAP \
        and model.full_dim <= lattice.ED_CAP
    atol = float(config.get("atol", 1e-10))
    outputs: dict[str, Any] = {
        "n_sites": model.n_sites,
        "n_edges": model.n_edges,
        "site_dim": model.site_dim,
        "degrees": [model.degree(v) for v in range(model.n_sites)],
    }
    mode = "explicit" if model.full_dim <= lattice.ED_CAP else "exact"
    outputs["commuting"] = lattice.commuting_check(model, mode=mode)
    outputs["commuting_mode"] = mode
    checks = [outputs["commuting"]]
    site = lattice.site_reduced_state(model)
    outputs["site_spectrum"] = _describe(site)
    if exact:
        rep = lattice.hamiltonian_spectrum_small(model, exact=True)
        outputs["exact_spectrum"] = rep.as_dict()
        checks.append(rep.gap == 1 and rep.ground_degeneracy == 1 and rep.integer)
    table = []
    if ed:
        rep = lattice.hamiltonian_spectrum_small(model)
        outputs["spectrum"] = rep.as_dict()
        checks.append(rep.integer and rep.ground_degeneracy == 1 and abs(rep.gap - 1) <= 1e-9
                      and abs(rep.ground_energy + model.n_edges) <= 1e-9)
        table = [{"energy": e, "multiplicity": k} for e, k in rep.levels.items()]
        dev = float(np.max(np.abs(lattice.site_reduced_state_ed(model) - site.weights)))
        outputs["site_ed_deviation"] = dev
        outputs["frustration_free_defect"] = lattice.frustration_free_defect(model)
        checks += [dev <= atol, outputs["frustration_free_defect"] <= 1e-12]
        rng = np.random.default_rng(seed)
        gaps = []
        for _ in range(int(config.get("random_rho", 0))):
            rho = spectra.make_spectrum(rng.dirichlet(np.ones(model.m)))
            other = lattice.build_model(model.D, model.extent, model.boundary, model.m, rho)
            r2 = lattice.hamiltonian_spectrum_small(other)
            gaps.append({"rho": rho.weights.tolist(), "gap": r2.gap, "levels": r2.as_dict()["levels"]})
        if gaps:
            outputs["random_rho"] = gaps
            checks.append(all(g["levels"] == rep.as_dict()["levels"] for g in gaps))
    if "region" in config:
        region = lattice.make_region(model, [tuple(c) for c in config["region"]])
        bs = lattice.boundary_spectrum(model, region)
        outputs["boundary_edges"] = bs.n_boundary
        outputs["boundary_schmidt"] = _describe(bs.schmidt)
        if ed:
            w = lattice.boundary_spectrum_ed(model, region)
            ref = bs.schmidt.weights
            dev = float(np.max(np.abs(w - ref))) if w.size == ref.size else math.inf
            outputs["boundary_ed_deviation"] = dev
            checks.append(dev <= atol)
    properly_infinite = bool(config.get("properly_infinite", True))
    outputs["region_type"] = lattice.classify_region(model, properly_infinite).label
    if "stack_with" in config:
        other = _model(config["stack_with"])
        st = lattice.stack(model, other)
        t_st = lattice.classify_region(st, properly_infinite)
        t_comp = factor_types.compose(lattice.classify_region(model, properly_infinite),
                                      lattice.classify_region(other, properly_infinite))
        outputs["stacked"] = {"m": st.m, "type": t_st.label, "composed": t_comp.label}
        checks.append(t_st.same_subtype(t_comp))
    params = {"model": model.to_record(), "region": config.get("region"), "exact": exact, "ed": ed,
              "stack_with": config.get("stack_with")}
    tolerances = {"atol": atol, "ed_cap": lattice.ED_CAP, "dense_cap": lattice.DENSE_CAP}
    return ExperimentRecord("lattice", params, outputs, tolerances, seed, all(checks), table=table)


def run_chain(config: dict, seed: int = 0, exact: bool = False) -> ExperimentRecord:
    """Entropy scaling of the XX chain or of colored Motzkin walks."""
    kind = config.get("kind", "xx")
    if kind == "xx":
        lengths = [int(x) for x in config.get("lengths", [32, 45, 64, 91, 128, 181, 256])]
        ell_ref = int(config.get("ell_ref", 128))
        tol = float(config.get("slope_tol", 0.03))
        samples = [(ell, chains.xx_entropy(ell)) for ell in lengths]
        fit = chains.entropy_scaling_fit(samples, "log")
        doubling = chains.xx_entropy(2 * ell_ref) - chains.xx_entropy(ell_ref)
        outputs = {"fit_log": fit.as_dict(), "doubling_increment": doubling,
                   "doubling_target": math.log(2) / 3}
        passed = abs(fit.slope - 1 / 3) <= tol and abs(doubling - math.log(2) / 3) <= tol
        params = {"kind": kind, "lengths": lengths, "ell_ref": ell_ref}
        tolerances = {"slope_tol": tol, "cap": chains.XX_CAP}
    elif kind == "motzkin":
        s = int(config.get("s", 2))
        lengths = [int(x) for x in config.get("lengths", [16, 24, 32, 48, 64, 96, 128, 192, 256])]
        enum_max = int(config.get("enumerate_max", 12))
        lo, hi = config.get("exponent_range", [0.4, 0.6])
        samples = [(L, chains.motzkin_entropy(L, s)) for L in lengths]
        fit_sqrt = chains.entropy_scaling_fit(samples, "sqrt")
        fit_log = chains.entropy_scaling_fit(samples, "log")
        power = chains.power_law_exponent(samples)
        enum = {}
        for L in range(2, enum_max + 1, 2):
            blocks = chains.motzkin_classes(L, s).block_sizes() == oracles.motzkin_block_counts(L, s)
            dev = float(np.max(np.abs(chains.motzkin_spectrum(L, s).weights
                                      - oracles.motzkin_midpoint_spectrum(L, s))))
            enum[str(L)] = {"blocks_equal": blocks, "max_deviation": dev}
        outputs = {"fit_sqrt": fit_sqrt.as_dict(), "fit_log": fit_log.as_dict(),
                   "exponent": power.slope, "enumeration": enum}
        passed = (lo <= power.slope <= hi and fit_sqrt.residual < fit_log.residual
                  and all(e["blocks_equal"] and e["max_deviation"] <= 1e-12 for e in enum.values()))
        params = {"kind": kind, "s": s, "lengths": lengths, "enumerate_max": enum_max}
        tolerances = {"exponent_range": [lo, hi], "enumeration_atol": 1e-12, "cap": chains.MOTZKIN_CAP}
    else:
        raise ConfigError("chain kind must be 'xx' or 'motzkin'")
    table = [{"length": L, "entropy": S} for L, S in samples]
    return ExperimentRecord("chain", params, outputs, tolerances, seed, bool(passed), table=table)


def _random_qubit_pair(rng: np.random.Generator) -> tuple[list[float], list[float]]:
    a, b = np.sort(rng.uniform(0.5, 1.0, 2))
    return ([float(a), float(1 - a)], [float(b), float(1 - b)]) if rng.random() < 0.5 else \
        ([float(b), float(1 - b)], [float(a), float(1 - a)])


def oracle_comparison(instances: int, seed: int) -> dict:
    """Compare convertibility and fidelity with the qubit protocol oracle."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(instances):
        p, q = _random_qubit_pair(rng)
        sp_, sq_ = spectra.make_spectrum(p), spectra.make_spectrum(q)
        conv = locc.convertible(sp_, sq_)
        fid = locc.max_conversion_fidelity(sp_, sq_)
        opt = oracles.qubit_protocol_oracle(p, q)
        rows.append({"source": p, "target": q, "convertible": conv, "oracle_convertible": opt.convertible,
                     "fidelity_sq": fid**2, "oracle_value": opt.mean_sq_fidelity})
    agree = sum(r["convertible"] == r["oracle_convertible"] for r in rows)
    err = max(abs(r["fidelity_sq"] - r["oracle_value"]) for r in rows)
    return {"instances": instances, "boolean_agreement": agree, "max_fidelity_error": err,
            "n_convertible": sum(r["convertible"] for r in rows), "rows": rows}


def run_locc(config: dict, seed: int = 0, exact: bool = False) -> ExperimentRecord:
    """Convertibility reports, finite-size distillation scans or the oracle comparison."""
    mode = config.get("mode", "family")
    eps = float(config.get("eps", 0.05))
    table = []
    if mode == "pairs":
        pairs = config.get("pairs") or [{"source": [0.5, 0.5], "target": [0.8, 0.2]},
                                        {"source": [0.7, 0.3], "target": [0.5, 0.5]}]
        reports = []
        for pair in pairs:
            rep = locc.conversion_report(spectrum_from(pair["source"]), spectrum_from(pair["target"]), eps)
            reports.append(rep.as_dict())
        outputs = {"reports": reports}
        params = {"mode": mode, "pairs": pairs, "eps": eps}
        passed = None
    elif mode == "family":
        lam = _lambda(config.get("lambda", 0.5))
        L_max = int(config.get("L_max", 60))
        target = spectrum_from(config.get("target", [0.5, 0.5]))
        base = spectra.powers(lam)
        family, cur = {}, spectra.point_mass()
        for L in range(1, L_max + 1):
            cur = spectra.tensor(cur, base, prune=0.0)
            family[L] = cur
        check = locc.finite_size_distillation_check(family, target, eps)
        fids = {L: locc.max_conversion_fidelity(s, target) for L, s in family.items()}
        bells = {L: locc.distillable_bells(s, eps) for L, s in family.items()}
        L0 = check.threshold_index
        persists = L0 is not None and all(fids[L] >= 1 - eps for L in family if L >= L0)
        monotone = all(bells[L + 1] >= bells[L] for L in range(1, L_max))
        outputs = {"L0": L0, "feasible_from_L0": persists, "bells": bells,
                   "bells_monotone": monotone, "fidelity": fids}
        table = [{"L": L, "fidelity": fids[L], "bells": bells[L]} for L in family]
        params = {"mode": mode, "lambda": lam, "L_max": L_max, "target": target.weights.tolist(), "eps": eps}
        passed = persists and monotone
    elif mode == "oracle":
        n = int(config.get("instances", 50))
        res = oracle_comparison(n, seed)
        outputs = {k: v for k, v in res.items() if k != "rows"}
        table = res["rows"]
        params = {"mode": mode, "instances": n}
        passed = res["boolean_agreement"] == n and res["max_fidelity_error"] <= 1e-3
    else:
        raise ConfigError("locc mode must be 'pairs', 'family' or 'oracle'")
    return ExperimentRecord("locc", params, outputs, {"eps": eps, "oracle_fidelity_tol": 1e-3}, seed,
                            passed, table=table)


RUNNERS: dict[str, Callable[..., ExperimentRecord]] = {
    "classify": run_classify,
    "kappa": run_kappa,
    "lattice": run_lattice,
    "chain": run_chain,
    "locc": run_locc,
}

DEFAULT_CONFIGS: dict[str, dict] = {
    "classify": {"runs": [{"weights": [0.5, 0.5]}, {"weights": [1]}, {"weights": [1, 0.5, "1/3"]},
                          {"lambda": 0.5}, {"lambda": "fibonacci", "compose_with": {"lambda": "ising"}}]},
    "kappa": {"runs": [{"lambda": 0.5}, {"lambda": 0.25}]},
    "lattice": {"runs": [
        {"model": {"dimension": 1, "extent": [3], "boundary": "open", "m": 2, "rho": [0.5, 0.5]},
         "region": [[0]], "random_rho": 5},
        {"model": {"dimension": 2, "extent": [2, 2], "boundary": "open", "m": 2, "rho": [0.7, 0.3]},
         "region": [[0, 0], [1, 0]], "random_rho": 5},
    ]},
    "chain": {"runs": [{"kind": "xx"}, {"kind": "motzkin", "s": 2}]},
    "locc": {"runs": [{"mode": "pairs"}, {"mode": "family"}]},
}


_SPECTRUM_KEYS = {"weights", "lambda", "uniform", "vdh"}
CONFIG_KEYS: dict[str, set[str]] = {
    "classify": _SPECTRUM_KEYS | {"ambient", "compose_with", "expect", "max_denominator"},
    "kappa": {"lambda", "resource", "ks", "n", "grid", "metrics", "compare_metric", "tol", "deficit_bound"},
    "lattice": {"model", "region", "stack_with", "random_rho", "ed", "exact", "atol", "properly_infinite"},
    "chain": {"kind", "s", "lengths", "ell_ref", "slope_tol", "enumerate_max", "exponent_range"},
    "locc": {"mode", "eps", "pairs", "lambda", "L_max", "target", "instances"},
}


def _check_keys(name: str, run: dict) -> None:
    unknown = sorted(set(run) - CONFIG_KEYS[name])
    if unknown:
        raise ConfigError(f"unknown {name} config keys: {', '.join(unknown)}")


def _timed(job: tuple[str, dict, int, bool]) -> ExperimentRecord:
    name, cfg, seed, exact = job
    t0 = time.perf_counter()
    rec = RUNNERS[name](cfg, seed=seed, exact=exact)
    rec.runtime_ms = int(round(1000 * (time.perf_counter() - t0)))
    return rec


def run_experiments(name: str, config: dict, seed: int, workers: int, exact: bool) -> list[ExperimentRecord]:
    runs = config.get("runs", [config]) if config else DEFAULT_CONFIGS[name]["runs"]
    if not isinstance(runs, list) or not all(isinstance(r, dict) for r in runs):
        raise ConfigError("'runs' must be a list of mappings")
    base = {k: v for k, v in config.items() if k != "runs"}
    jobs = [(name, {**base, **r}, seed, exact) for r in runs]
    for _, cfg, _, _ in jobs:
        _check_keys(name, cfg)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_timed, jobs))
    return [_timed(j) for j in jobs]


# --------------------------------------------------------------------------- #
# Entry point
# --------------------------------------------------------------------------- #
def _common_flags(suppress: bool) -> argparse.ArgumentParser:
    """Global flags; the subcommand copy uses SUPPRESS so it keeps values given before it."""
    common = argparse.ArgumentParser(add_help=False)

    def default(value):
        return argparse.SUPPRESS if suppress else value

    common.add_argument("--config", default=default(None), help="YAML or JSON config file")
    common.add_argument("--out", default=default("results"), help="output directory (default: ./results)")
    common.add_argument("--seed", type=int, default=default(0), help="random seed (default: 0)")
    common.add_argument("--workers", type=int, default=default(os.cpu_count() or 1),
                        help="worker processes for multi-run configs (default: number of cores)")
    common.add_argument("--exact", action="store_true", default=default(False),
                        help="use exact arithmetic where supported")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsentangle", description=__doc__.splitlines()[0],
                                     parents=[_common_flags(False)])
    sub_flags = _common_flags(True)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in RUNNERS.items():
        sub.add_parser(name, parents=[sub_flags], help=fn.__doc__.splitlines()[0])
    v = sub.add_parser("verify", parents=[sub_flags], help="run the acceptance criteria")
    v.add_argument("--only", type=int, nargs="*", help="run only these criterion numbers")
    return parser


def _over_budget(r: ExperimentRecord) -> bool:
    budget = r.params.get("budget_s") if r.experiment == "acceptance" else None
    return budget is not None and r.runtime_ms > 1000 * budget


def _print_table(records: list[ExperimentRecord]) -> None:
    for r in records:
        status = {True: "PASS", False: "FAIL", None: "----"}[r.passed]
        if _over_budget(r):
            status = "SLOW"
        if r.experiment == "acceptance":
            label = f"{r.params['criterion']:>2}. {r.params['name']}"
            budget = f" / {r.params['budget_s']:g} s"
        else:
            label = str(r.params.get("kind") or r.params.get("mode") or "")
            budget = ""
        print(f"{status}  {r.experiment:<10} {label:<36} {r.runtime_ms:>8d} ms{budget}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        if args.command == "verify":
            from .acceptance import run_acceptance

            records = run_acceptance(seed=args.seed, only=args.only, exact=True)
        else:
            cfg = load_config(args.config)
            records = run_experiments(args.command, cfg, args.seed, max(1, args.workers), args.exact)
    except (ConfigError, LSEntangleError, ValueError, KeyError, TypeError) as exc:
        print(f"lsentangle: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    append_records(out, records)
    _print_table(records)
    failed = any(r.passed is False or _over_budget(r) for r in records)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
