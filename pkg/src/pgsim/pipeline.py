"""End-to-end recipe: plan, synthesize, verify.

The recipe mirrors the modelling workflow: (1) marginals and target
correlation structures, prescribed or fitted from data; (2) a
transformation grid and fitted curve per marginal (per pair, for the
multivariate case); (3) the parent-Gaussian correlation structure from
the curve; (4) a Gaussian generator fitted to it; (5) the quantile
transform of the generated Gaussian series.  Verification compares the
synthetic sample against the prescribed targets and produces a report
with raw numbers plus thresholded pass/fail flags.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from . import ctf as ctf_mod
from .correlations import (
    CorrelationModel,
    acs_from_dict,
    empirical_acs,
    empirical_cross_corr,
    fit_acs,
)
from .errors import InfeasibleCorrelationError, SpecError
from .gaussian import ArModel, Mar1Model, SumAr1Model, fit_ar, fit_mar1, fit_sum_ar1
from .marginals import Marginal, MixedMarginal, fit_marginal, marginal_from_dict

__all__ = [
    "RecipeOptions",
    "Thresholds",
    "ProcessSpec",
    "MultiProcessSpec",
    "UnivariatePlan",
    "MultivariatePlan",
    "RecipePlan",
    "SynthesisResult",
    "VerificationReport",
    "plan_univariate",
    "plan_multivariate",
    "build_plan",
    "synthesize",
    "verify",
    "run_recipe",
    "parse_spec",
]


@dataclass
class RecipeOptions:
    ar_cutoff: float = 1e-3
    ar_cap: int = 5000
    nodes: int | None = None
    grid_check: bool = True
    burn_in: int | None = None

    def to_dict(self):
        return {
            "ar_cutoff": self.ar_cutoff,
            "ar_cap": self.ar_cap,
            "nodes": self.nodes,
            "grid_check": self.grid_check,
            "burn_in": self.burn_in,
        }


@dataclass
class Thresholds:
    cdf_gap: float = 0.005
    atom_sigma: float = 3.0
    acs_abs: float = 0.02
    acs_lags: int = 10
    ccs_abs: float = 0.03

    def to_dict(self):
        return {
            "cdf_gap": self.cdf_gap,
            "atom_sigma": self.atom_sigma,
            "acs_abs": self.acs_abs,
            "acs_lags": self.acs_lags,
            "ccs_abs": self.ccs_abs,
        }


@dataclass
class ProcessSpec:
    """One target process: marginal + correlation structure + generator."""

    label: str
    marginal: Marginal
    acs: CorrelationModel | None = None
    generator: tuple = ("ar", None)  # ("ar", order|None) or ("sum_ar1", k)
    ctf_family: str | None = None
    season: int = 0

    def default_ctf_family(self):
        if self.ctf_family:
            return self.ctf_family
        return "kumaraswamy" if self.marginal.is_discrete else "rational"

    def to_dict(self):
        d = {
            "label": self.label,
            "marginal": self.marginal.to_dict(),
            "generator": {"type": self.generator[0]},
            "season": self.season,
        }
        if self.generator[1] is not None:
            key = "order" if self.generator[0] == "ar" else "components"
            d["generator"][key] = self.generator[1]
        if self.acs is not None:
            d["acs"] = self.acs.to_dict()
        if self.ctf_family:
            d["ctf_family"] = self.ctf_family
        return d


@dataclass
class MultiProcessSpec:
    """A season's worth of cross-correlated processes."""

    processes: list
    K0: np.ndarray
    K1: np.ndarray

    def __post_init__(self):
        n = len(self.processes)
        self.K0 = np.asarray(self.K0, dtype=float)
        self.K1 = np.asarray(self.K1, dtype=float)
        if self.K0.shape != (n, n) or self.K1.shape != (n, n):
            raise SpecError("cross matrices must be n x n for n processes")
        if not np.allclose(self.K0, self.K0.T, atol=1e-10):
            raise SpecError("K0 must be symmetric")
        if not np.allclose(np.diag(self.K0), 1.0, atol=1e-10):
            raise SpecError("K0 must have unit diagonal")
        for i, p in enumerate(self.processes):
            if p.acs is not None:
                implied = float(p.acs(1.0))
                if abs(implied - self.K1[i, i]) > 1e-6:
                    raise SpecError(
                        f"process {p.label!r}: K1 diagonal {self.K1[i, i]} does not "
                        f"match its ACS lag-1 value {implied:.6f}"
                    )


@dataclass
class UnivariatePlan:
    spec: ProcessSpec
    grid: ctf_mod.TransformGrid
    curve: ctf_mod.CtfCurve
    pgacs: np.ndarray  # parent-Gaussian ACS, lags 1..p
    model: object  # ArModel or SumAr1Model

    @property
    def order(self):
        return len(self.pgacs)

    def to_dict(self):
        return {
            "process": self.spec.to_dict(),
            "ctf": self.curve.to_dict(),
            "grid": {
                "rho_z": [float(v) for v in self.grid.rho_z],
                "rho_x": [float(v) for v in self.grid.rho_x],
            },
            "pgacs": [float(v) for v in self.pgacs],
            "generator": self.model.to_dict(),
        }


@dataclass
class MultivariatePlan:
    spec: MultiProcessSpec
    auto_curves: list
    cross_curves: dict  # (i, j) with i < j -> CtfCurve
    rho_max: np.ndarray
    KZ0: np.ndarray
    KZ1: np.ndarray
    model: Mar1Model
    grids: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "processes": [p.to_dict() for p in self.spec.processes],
            "K0_target": self.spec.K0.tolist(),
            "K1_target": self.spec.K1.tolist(),
            "auto_ctfs": [c.to_dict() for c in self.auto_curves],
            "cross_ctfs": {
                f"{i},{j}": c.to_dict() for (i, j), c in self.cross_curves.items()
            },
            "rho_max": self.rho_max.tolist(),
            "KZ0": self.KZ0.tolist(),
            "KZ1": self.KZ1.tolist(),
            "generator": self.model.to_dict(),
        }


def plan_univariate(spec, options=None):
    """Steps 2-4 for a single process: curve, parent-Gaussian ACS, generator.

    The AR order is the smallest lag at which the parent-Gaussian ACS
    falls below ``options.ar_cutoff`` (default 1e-3), capped at
    ``options.ar_cap``; an explicit order in the generator spec wins.
    """
    options = options or RecipeOptions()
    if spec.acs is None:
        raise SpecError(f"process {spec.label!r}: univariate planning needs an ACS")
    grid = ctf_mod.build_grid(
        spec.marginal, nodes=options.nodes, check=options.grid_check
    )
    curve = ctf_mod.fit_ctf(grid, spec.default_ctf_family())

    kind, size = spec.generator
    cap = int(options.ar_cap)
    taus = np.arange(1, cap + 1, dtype=float)
    pgacs_full = np.atleast_1d(curve.apply(np.clip(spec.acs(taus), 0.0, 1.0)))

    if kind == "ar":
        if size is not None:
            p = int(size)
        else:
            below = pgacs_full < options.ar_cutoff
            p = int(np.argmax(below)) + 1 if below.any() else cap
        pgacs = pgacs_full[:p]
        model = fit_ar(pgacs, p)
    elif kind == "sum_ar1":
        k = int(size or 3)
        below = pgacs_full < options.ar_cutoff
        L = min(int(np.argmax(below)) + 1 if below.any() else cap, 1000)
        pgacs = pgacs_full[:L]
        model = fit_sum_ar1(pgacs, k)
    else:
        raise SpecError(f"unknown generator kind {kind!r}")
    return UnivariatePlan(spec, grid, curve, pgacs, model)


def plan_multivariate(mspec, options=None):
    """Pairwise transformation curves, parent matrices and the MAR(1) fit.

    Raises InfeasibleCorrelationError naming the offending pair if any
    target exceeds the pair's maximum feasible cross-correlation.
    """
    options = options or RecipeOptions()
    procs = mspec.processes
    n = len(procs)
    auto_curves = []
    grids = {}
    for i, p in enumerate(procs):
        g = ctf_mod.build_grid(p.marginal, nodes=options.nodes, check=options.grid_check)
        grids[(i, i)] = g
        auto_curves.append(ctf_mod.fit_ctf(g, p.default_ctf_family()))

    cross_curves = {}
    rho_max = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            g = ctf_mod.build_grid(
                procs[i].marginal,
                procs[j].marginal,
                kind="cross",
                nodes=options.nodes,
                check=options.grid_check,
            )
            grids[(i, j)] = g
            c = ctf_mod.fit_ctf(g, "cross")
            cross_curves[(i, j)] = c
            rho_max[i, j] = rho_max[j, i] = c.rho_max

    KZ0 = np.eye(n)
    KZ1 = np.zeros((n, n))
    for i in range(n):
        KZ1[i, i] = float(auto_curves[i].apply(mspec.K1[i, i]))
        for j in range(i + 1, n):
            curve = cross_curves[(i, j)]
            pair = (procs[i].label, procs[j].label)
            for value, name in (
                (mspec.K0[i, j], "lag-0"),
                (mspec.K1[i, j], "lag-1"),
                (mspec.K1[j, i], "lag-1"),
            ):
                if value > curve.rho_max:
                    raise InfeasibleCorrelationError(
                        f"{name} target {value:.4g} for pair {pair[0]}-{pair[1]} "
                        f"exceeds rho_max = {curve.rho_max:.4g}",
                        target=float(value),
                        limit=float(curve.rho_max),
                        pair=pair,
                    )
            KZ0[i, j] = KZ0[j, i] = float(curve.apply(mspec.K0[i, j]))
            KZ1[i, j] = float(curve.apply(mspec.K1[i, j]))
            KZ1[j, i] = float(curve.apply(mspec.K1[j, i]))

    model = fit_mar1(KZ0, KZ1)
    return MultivariatePlan(mspec, auto_curves, cross_curves, rho_max, KZ0, KZ1, model, grids)


@dataclass
class RecipePlan:
    """Planned recipe for all seasons; ready to synthesize."""

    labels: list
    seasons: int
    season_length: int | None
    univariate: list | None  # [season][process] -> UnivariatePlan
    multivariate: list | None  # [season] -> MultivariatePlan
    options: RecipeOptions
    thresholds: Thresholds
    n: int = 0
    seed: int = 0

    @property
    def is_multivariate(self):
        return self.multivariate is not None

    def process_specs(self, season=0):
        if self.is_multivariate:
            return self.multivariate[season].spec.processes
        return [p.spec for p in self.univariate[season]]

    def to_dict(self):
        d = {
            "labels": self.labels,
            "n": self.n,
            "seed": self.seed,
            "seasons": self.seasons,
            "season_length": self.season_length,
            "options": self.options.to_dict(),
            "thresholds": self.thresholds.to_dict(),
        }
        if self.is_multivariate:
            d["plan"] = [m.to_dict() for m in self.multivariate]
        else:
            d["plan"] = [[u.to_dict() for u in row] for row in self.univariate]
        return d


@dataclass
class SynthesisResult:
    series: dict  # label -> array
    gaussian: dict  # label -> array
    season_index: np.ndarray | None = None

    def to_matrix(self, labels):
        return np.column_stack([self.series[k] for k in labels])


def _season_blocks(n, seasons, season_length):
    """Yield (season, start, stop) covering 0..n."""
    if seasons == 1:
        yield 0, 0, n
        return
    L = season_length
    start = 0
    block = 0
    while start < n:
        stop = min(start + L, n)
        yield block % seasons, start, stop
        start = stop
        block += 1


def synthesize(plan, n=None, seed=None):
    """Step 5: generate parent-Gaussian series and quantile-transform them.

    Per-process streams use independent generators spawned from the
    master seed (numpy SeedSequence.spawn), so the result is
    deterministic given (plan, n, seed) and independent processes can in
    principle be generated concurrently.
    """
    n = int(n if n is not None else plan.n)
    seed = plan.seed if seed is None else seed
    if n < 1:
        raise SpecError("synthesize: n must be >= 1")
    labels = plan.labels
    season_idx = np.empty(n, dtype=int)
    for s, a, b in _season_blocks(n, plan.seasons, plan.season_length):
        season_idx[a:b] = s

    gaussian = {}
    series = {}
    if plan.is_multivariate:
        rng = np.random.default_rng(seed)
        nproc = len(labels)
        z = np.empty((n, nproc))
        state = None
        # transient: run the first season's model before emitting
        burn = plan.options.burn_in
        burn = 1000 if burn is None else int(burn)
        _, state = plan.multivariate[0].model.simulate_block(burn, rng, None)
        for s, a, b in _season_blocks(n, plan.seasons, plan.season_length):
            block, state = plan.multivariate[s].model.simulate_block(b - a, rng, state)
            z[a:b] = block
        for i, lab in enumerate(labels):
            gaussian[lab] = z[:, i]
    else:
        children = np.random.SeedSequence(seed).spawn(len(labels))
        for i, lab in enumerate(labels):
            rng = np.random.default_rng(children[i])
            models = [plan.univariate[s][i].model for s in range(plan.seasons)]
            if plan.seasons == 1 and isinstance(models[0], SumAr1Model):
                gaussian[lab] = models[0].simulate(n, rng)
                continue
            burn = plan.options.burn_in
            if burn is None:
                burn = max(*(m.default_burn_in() for m in models), 1000) if isinstance(
                    models[0], ArModel
                ) else 1000
            z = np.empty(n)
            if isinstance(models[0], ArModel):
                _, state = models[0].simulate_block(burn, rng, None)
            else:
                state = None
            for s, a, b in _season_blocks(n, plan.seasons, plan.season_length):
                if isinstance(models[s], ArModel):
                    block, state = models[s].simulate_block(b - a, rng, state)
                else:
                    block = models[s].simulate(b - a, rng)
                z[a:b] = block
            gaussian[lab] = z

    for i, lab in enumerate(labels):
        z = gaussian[lab]
        x = np.empty(n)
        for s in range(plan.seasons):
            mask = season_idx == s
            if not mask.any():
                continue
            marg = plan.process_specs(s)[i].marginal
            x[mask] = marg.quantile(sc.ndtr(z[mask]), clamp=True)
        series[lab] = x
    return SynthesisResult(series, gaussian, season_idx if plan.seasons > 1 else None)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def _cdf_gap_continuous(sample, marginal):
    xs = np.sort(sample)
    F = np.atleast_1d(marginal.cdf(xs))
    n = len(xs)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def _distribution_check(marginal, x, thresholds):
    out = {"atoms": [], "cdf_gap": None, "ok": True}
    n = len(x)
    if isinstance(marginal, MixedMarginal):
        p0 = marginal.p0
        obs = float(np.mean(x == 0.0))
        se = np.sqrt(p0 * (1 - p0) / n)
        ok = abs(obs - p0) <= thresholds.atom_sigma * se
        out["atoms"].append(
            {"value": 0.0, "expected": p0, "observed": obs, "se": se, "ok": bool(ok)}
        )
        pos = x[x > 0]
        if len(pos) > 10:
            gap = _cdf_gap_continuous(pos, marginal.continuous)
            out["cdf_gap"] = gap
            out["ok"] = bool(ok and gap < thresholds.cdf_gap)
        else:
            out["ok"] = bool(ok)
    elif marginal.is_discrete:
        checked_ok = True
        gap = 0.0
        cum_t = 0.0
        cum_o = 0.0
        for value, prob in marginal.atoms():
            cum_t += prob
            obs = float(np.mean(x == value))
            cum_o += obs
            gap = max(gap, abs(cum_o - cum_t))
            if prob * n < 10:
                continue
            se = np.sqrt(prob * (1 - prob) / n)
            ok = abs(obs - prob) <= thresholds.atom_sigma * se
            checked_ok = checked_ok and ok
            out["atoms"].append(
                {"value": value, "expected": prob, "observed": obs, "se": se,
                 "ok": bool(ok)}
            )
        out["cdf_gap"] = gap
        out["ok"] = bool(checked_ok)
    else:
        gap = _cdf_gap_continuous(x, marginal)
        out["cdf_gap"] = gap
        out["ok"] = bool(gap < thresholds.cdf_gap)
    return out


def _acs_check(spec, x, thresholds, lag1_target=None):
    L = thresholds.acs_lags
    emp = empirical_acs(x, min(L, len(x) // 4))[1:]
    if spec.acs is not None:
        target = np.atleast_1d(spec.acs(np.arange(1.0, len(emp) + 1)))
    elif lag1_target is not None:
        target = np.array([lag1_target])
        emp = emp[:1]
    else:
        return None
    err = float(np.max(np.abs(emp - target)))
    return {
        "lags": list(range(1, len(emp) + 1)),
        "target": [float(v) for v in target],
        "empirical": [float(v) for v in emp],
        "max_abs_err": err,
        "ok": bool(err <= thresholds.acs_abs),
    }


@dataclass
class VerificationReport:
    processes: list
    cross: dict | None
    thresholds: Thresholds

    @property
    def ok(self):
        all_ok = all(
            p["distribution"]["ok"] and (p["acs"] is None or p["acs"]["ok"])
            for p in self.processes
        )
        if self.cross is not None:
            all_ok = all_ok and self.cross["ok"]
        return bool(all_ok)

    def to_dict(self):
        return {
            "ok": self.ok,
            "thresholds": self.thresholds.to_dict(),
            "processes": self.processes,
            "cross": self.cross,
        }


def verify(spec, series, thresholds=None, season_index=None):
    """Compare a synthetic sample against its target spec.

    ``spec`` may be a ProcessSpec with a single 1-D series, or a
    MultiProcessSpec with a dict label -> series (or a 2-D array in
    process order).  Returns a VerificationReport; raising is reserved
    for structural mismatches, not statistical failures.
    """
    thresholds = thresholds or Thresholds()
    if isinstance(spec, ProcessSpec):
        x = np.asarray(series, dtype=float)
        if x.ndim != 1 or len(x) < 30:
            raise SpecError("verify: need a 1-D series of at least 30 values")
        entry = {
            "label": spec.label,
            "n": len(x),
            "distribution": _distribution_check(spec.marginal, x, thresholds),
            "acs": _acs_check(spec, x, thresholds),
        }
        return VerificationReport([entry], None, thresholds)

    if isinstance(spec, MultiProcessSpec):
        labels = [p.label for p in spec.processes]
        if isinstance(series, dict):
            missing = [k for k in labels if k not in series]
            if missing:
                raise SpecError(f"verify: series missing processes {missing}")
            cols = [np.asarray(series[k], dtype=float) for k in labels]
        else:
            arr = np.asarray(series, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != len(labels):
                raise SpecError("verify: series matrix does not match process count")
            cols = [arr[:, i] for i in range(arr.shape[1])]
        nuniq = {len(c) for c in cols}
        if len(nuniq) != 1:
            raise SpecError("verify: series lengths differ between processes")

        entries = []
        for p, x in zip(spec.processes, cols):
            entries.append(
                {
                    "label": p.label,
                    "n": len(x),
                    "distribution": _distribution_check(p.marginal, x, thresholds),
                    "acs": _acs_check(p, x, thresholds, lag1_target=None),
                }
            )
        n = len(cols[0])
        K0_emp = np.eye(len(labels))
        K1_emp = np.zeros((len(labels), len(labels)))
        for i in range(len(labels)):
            K1_emp[i, i] = empirical_cross_corr(cols[i], cols[i], 1)
            for j in range(len(labels)):
                if i != j:
                    K0_emp[i, j] = empirical_cross_corr(cols[i], cols[j], 0)
                    K1_emp[i, j] = empirical_cross_corr(cols[i], cols[j], 1)
        err0 = float(np.max(np.abs(K0_emp - spec.K0)))
        err1 = float(np.max(np.abs(K1_emp - spec.K1)))
        cross = {
            "K0_target": spec.K0.tolist(),
            "K0_empirical": K0_emp.tolist(),
            "K1_target": spec.K1.tolist(),
            "K1_empirical": K1_emp.tolist(),
            "max_abs_err_K0": err0,
            "max_abs_err_K1": err1,
            "ok": bool(max(err0, err1) <= thresholds.ccs_abs),
            "n": n,
        }
        return VerificationReport(entries, cross, thresholds)

    raise SpecError(f"verify: unsupported spec type {type(spec).__name__}")


def verify_plan(plan, result, thresholds=None):
    """Verify a synthesis result against the plan it came from.

    Seasonal plans are verified per (process, season) on that season's
    values; the correlation check then covers lag-1 within seasons only.
    """
    thresholds = thresholds or plan.thresholds
    if plan.seasons == 1:
        if plan.is_multivariate:
            return verify(plan.multivariate[0].spec, result.series, thresholds)
        reports = [
            verify(p.spec, result.series[p.spec.label], thresholds)
            for p in plan.univariate[0]
        ]
        return VerificationReport(
            [r.processes[0] for r in reports], None, thresholds
        )
    entries = []
    for s in range(plan.seasons):
        mask = result.season_index == s
        for pspec in plan.process_specs(s):
            x = result.series[pspec.label][mask]
            entries.append(
                {
                    "label": pspec.label,
                    "season": s,
                    "n": int(mask.sum()),
                    "distribution": _distribution_check(pspec.marginal, x, thresholds),
                    "acs": None,
                }
            )
    return VerificationReport(entries, None, thresholds)


# ---------------------------------------------------------------------------
# spec files
# ---------------------------------------------------------------------------

def _parse_generator(d):
    if d is None:
        return ("ar", None)
    kind = d.get("type", "ar")
    if kind == "ar":
        return ("ar", d.get("order"))
    if kind == "sum_ar1":
        return ("sum_ar1", d.get("components", 3))
    raise SpecError(f"unknown generator type {kind!r}")


def _parse_process(d, base_dir=None):
    label = d.get("label")
    if not label:
        raise SpecError("every process needs a label")
    if "data" in d:
        path = d["data"]
        if base_dir is not None:
            import os

            path = os.path.join(base_dir, path) if not os.path.isabs(path) else path
        try:
            data = np.loadtxt(path, delimiter=",", skiprows=int(d.get("skiprows", 0)))
        except OSError as e:
            raise SpecError(f"process {label!r}: cannot read data file {path}: {e}") from e
        if data.ndim > 1:
            data = data[:, int(d.get("column", 0))]
        marginal = fit_marginal(
            data,
            d.get("marginal_family", "GenGamma"),
            mixed=bool(d.get("mixed", False)),
            method=d.get("fit_method", "lmoments"),
        )
        max_lag = int(d.get("max_lag", min(len(data) // 3, 100)))
        emp = empirical_acs(data, max_lag)
        acs = fit_acs(emp[1:], d.get("acs_family", "WeibullACS"))
    else:
        if "marginal" not in d:
            raise SpecError(f"process {label!r}: needs 'marginal' or 'data'")
        mdict = dict(d["marginal"])
        if "p0" in d and "p0" not in mdict:
            mdict["p0"] = d["p0"]
        marginal = marginal_from_dict(mdict)
        acs = acs_from_dict(d["acs"]) if "acs" in d else None
    return ProcessSpec(
        label=label,
        marginal=marginal,
        acs=acs,
        generator=_parse_generator(d.get("generator")),
        ctf_family=d.get("ctf_family"),
        season=int(d.get("season", 0)),
    )


def parse_spec(doc, base_dir=None):
    """Parse a recipe spec document (dict) into specs + run parameters.

    Returns (processes-by-season, cross-by-season-or-None, meta) where
    meta carries n, seed, seasons, season_length, thresholds, options.
    """
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a JSON object")
    if "processes" not in doc or not doc["processes"]:
        raise SpecError("spec needs a nonempty 'processes' list")
    procs = [_parse_process(p, base_dir) for p in doc["processes"]]

    seasons_doc = doc.get("seasons") or {}
    m = int(seasons_doc.get("count", 1))
    season_length = seasons_doc.get("length")
    if m > 1 and not season_length:
        raise SpecError("seasonal specs need seasons.length")

    by_season = [[] for _ in range(m)]
    for p in procs:
        if not (0 <= p.season < m):
            raise SpecError(f"process {p.label!r}: season {p.season} out of range")
        by_season[p.season].append(p)
    labels0 = [p.label for p in by_season[0]]
    for s in range(1, m):
        if [p.label for p in by_season[s]] != labels0:
            raise SpecError("all seasons must define the same processes in order")
    if len(set(labels0)) != len(labels0):
        raise SpecError("duplicate process labels")

    cross = doc.get("cross")
    cross_by_season = None
    if cross is not None:
        entries = cross if isinstance(cross, list) else [cross] * m
        if len(entries) != m:
            raise SpecError("cross must be one object or one per season")
        cross_by_season = []
        for e in entries:
            try:
                cross_by_season.append((np.asarray(e["K0"], float), np.asarray(e["K1"], float)))
            except (KeyError, TypeError) as exc:
                raise SpecError("cross needs K0 and K1 matrices") from exc

    thr = Thresholds(**doc.get("thresholds", {}))
    opt_doc = doc.get("options", {})
    options = RecipeOptions(
        ar_cutoff=float(opt_doc.get("ar_cutoff", 1e-3)),
        ar_cap=int(opt_doc.get("ar_cap", 5000)),
        nodes=opt_doc.get("nodes"),
        grid_check=bool(opt_doc.get("grid_check", True)),
        burn_in=opt_doc.get("burn_in"),
    )
    meta = {
        "n": int(doc.get("n", 10000)),
        "seed": int(doc.get("seed", 0)),
        "seasons": m,
        "season_length": season_length and int(season_length),
        "thresholds": thr,
        "options": options,
    }
    return by_season, cross_by_season, meta


def build_plan(doc, base_dir=None, overrides=None):
    """Parse a spec document and run all planning steps."""
    by_season, cross_by_season, meta = parse_spec(doc, base_dir)
    options = meta["options"]
    if overrides:
        for k, v in overrides.items():
            if v is not None:
                setattr(options, k, v)
    labels = [p.label for p in by_season[0]]
    if cross_by_season is not None:
        multi = []
        for s, procs in enumerate(by_season):
            K0, K1 = cross_by_season[s]
            multi.append(plan_multivariate(MultiProcessSpec(procs, K0, K1), options))
        univ = None
    else:
        multi = None
        univ = [[plan_univariate(p, options) for p in procs] for procs in by_season]
    return RecipePlan(
        labels=labels,
        seasons=meta["seasons"],
        season_length=meta["season_length"],
        univariate=univ,
        multivariate=multi,
        options=options,
        thresholds=meta["thresholds"],
        n=meta["n"],
        seed=meta["seed"],
    )


def run_recipe(doc, out_dir, seed=None, overrides=None, base_dir=None,
               render=True, figure_format="png"):
    """Execute the whole recipe and write artifacts into ``out_dir``.

    Writes plan.json, series.csv, report.json, plotdata/*.csv and, when
    ``render`` is set, figures/*.png (or .svg).  Returns
    (plan, result, report).
    """
    import os

    plan = build_plan(doc, base_dir=base_dir, overrides=overrides)
    if seed is not None:
        plan.seed = int(seed)
    result = synthesize(plan, plan.n, plan.seed)
    report = verify_plan(plan, result)

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "plan.json"), "w", encoding="utf-8") as f:
        json.dump(plan.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    _write_series_csv(os.path.join(out_dir, "series.csv"), plan.labels, result)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")

    from . import report as report_mod

    report_mod.write_plotdata(plan, result, report, os.path.join(out_dir, "plotdata"))
    if render:
        report_mod.render_figures(
            plan, result, report, os.path.join(out_dir, "figures"), fmt=figure_format
        )
    return plan, result, report


def _write_series_csv(path, labels, result):
    cols = [result.series[k] for k in labels]
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(labels) + "\n")
        for row in zip(*cols):
            f.write(",".join(f"{v:.10g}" for v in row) + "\n")
