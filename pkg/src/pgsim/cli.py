"""Command-line interface.

Subcommands: simulate (full recipe), plan (steps 1-4 only), ctf
(transformation-grid workbench), fit (marginal + ACS estimation from a
series), verify (check a series against a spec).

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 verification failure.  Errors go to stderr as a single parseable line
``pgsim: error <code>: <message>``; stdout carries summaries only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import ctf as ctf_mod
from . import pipeline
from .correlations import empirical_acs, fit_acs
from .errors import NumericalError, PgsimError, SpecError
from .marginals import fit_marginal, marginal_from_dict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _fail(code, message):
    print(f"pgsim: error {code}: {message}", file=sys.stderr)
    return code


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise SpecError(f"spec not found: {path}") from None
    except json.JSONDecodeError as e:
        raise SpecError(f"invalid JSON in {path}: {e}") from None


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _overrides(args):
    return {"nodes": args.nodes, "ar_cap": args.ar_cap}


def _summary(args, obj):
    if args.format == "json":
        print(json.dumps(obj, sort_keys=True))
    else:
        print(",".join(f"{k}={v}" for k, v in obj.items()))


def cmd_simulate(args):
    doc = _load_json(args.spec)
    fmt = "svg" if args.svg else "png"
    plan, result, report = pipeline.run_recipe(
        doc,
        args.out,
        seed=args.seed,
        overrides=_overrides(args),
        base_dir=os.path.dirname(os.path.abspath(args.spec)),
        figure_format=fmt,
    )
    for entry in report.processes:
        dist_ok = entry["distribution"]["ok"]
        acs = entry["acs"]
        _summary(
            args,
            {
                "process": entry["label"],
                "distribution_ok": dist_ok,
                "acs_ok": True if acs is None else acs["ok"],
            },
        )
    _summary(args, {"ok": report.ok, "out": args.out})
    return EXIT_OK


def cmd_plan(args):
    doc = _load_json(args.spec)
    plan = pipeline.build_plan(
        doc,
        base_dir=os.path.dirname(os.path.abspath(args.spec)),
        overrides=_overrides(args),
    )
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "plan.json"), plan.to_dict())
    if plan.is_multivariate:
        for m in plan.multivariate:
            labels = [p.label for p in m.spec.processes]
            for (i, j), curve in m.cross_curves.items():
                _summary(
                    args,
                    {
                        "pair": f"{labels[i]}-{labels[j]}",
                        "rho_max": round(curve.rho_max, 6),
                    },
                )
    else:
        for row in plan.univariate:
            for u in row:
                _summary(args, {"process": u.spec.label, "ar_order": u.order})
    return EXIT_OK


def cmd_ctf(args):
    doc = _load_json(args.spec)
    if "marginal" not in doc:
        raise SpecError("ctf spec needs a 'marginal' object")
    m1 = marginal_from_dict(doc["marginal"])
    m2 = marginal_from_dict(doc["marginal2"]) if doc.get("marginal2") else None
    kind = doc.get("kind") or ("cross" if m2 is not None else "auto")
    grid = ctf_mod.build_grid(m1, m2, kind=kind, nodes=args.nodes)
    family = doc.get("family") or ("cross" if kind == "cross" else None)
    if family is None:
        family = "kumaraswamy" if m1.is_discrete else "rational"
    curve = ctf_mod.fit_ctf(grid, family)

    os.makedirs(args.out, exist_ok=True)
    # extra workbench abscissae land in the CSV; the fit stays on the
    # standard grid
    extras = [float(r) for r in doc.get("rho_z", [])]
    if extras:
        mk = m2 if m2 is not None else m1
        rz = np.concatenate([grid.rho_z, extras])
        rx = np.concatenate(
            [grid.rho_x,
             [ctf_mod.ccti_evaluate(m1, mk, r, nodes=args.nodes) for r in extras]]
        )
        order = np.argsort(rz)
        full = ctf_mod.TransformGrid(rz[order], rx[order], kind=kind)
        full.to_csv(os.path.join(args.out, "grid.csv"))
    else:
        grid.to_csv(os.path.join(args.out, "grid.csv"))
    _write_json(os.path.join(args.out, "curve.json"), curve.to_dict())
    hi = curve.rho_max if curve.family == "cross" else 1.0
    rx = np.linspace(0.0, hi, 201)
    with open(os.path.join(args.out, "curve_samples.csv"), "w", encoding="utf-8") as f:
        f.write("rho_x,rho_z\n")
        for a, b in zip(rx, np.atleast_1d(curve.apply(rx))):
            f.write(f"{a:.10g},{b:.10g}\n")

    import matplotlib.pyplot as plt  # report module sets the Agg backend

    from . import report as report_mod  # noqa: F401

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(grid.rho_x, grid.rho_z, "o", color="0.45", label="grid")
    ax.plot(rx, np.atleast_1d(curve.apply(rx)), color="#b4461e", label=curve.family)
    ax.plot([0, 1], [0, 1], ":", color="0.7", lw=0.8)
    ax.set_xlabel("rho_x")
    ax.set_ylabel("rho_z")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(args.out, f"ctf.{'svg' if args.svg else 'png'}"), dpi=130)
    plt.close(fig)

    out = {"family": curve.family, "b": round(curve.b, 6), "c": round(curve.c, 6),
           "residual_rms": round(curve.residual_rms, 8)}
    if curve.family == "cross":
        out["rho_max"] = round(curve.rho_max, 6)
    _summary(args, out)
    return EXIT_OK


def cmd_fit(args):
    doc = _load_json(args.spec)
    if "data" not in doc:
        raise SpecError("fit spec needs a 'data' path")
    path = doc["data"]
    if not os.path.isabs(path):
        path = os.path.join(os.path.dirname(os.path.abspath(args.spec)), path)
    import warnings

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # loadtxt warns on empty input
            data = np.loadtxt(path, delimiter=",", skiprows=int(doc.get("skiprows", 0)))
    except OSError as e:
        raise SpecError(f"cannot read data file {path}: {e}") from None
    except ValueError as e:
        raise SpecError(f"cannot parse data file {path}: {e}") from None
    if data.size == 0:
        raise SpecError(f"data file {path} is empty")
    if data.ndim > 1:
        data = data[:, int(doc.get("column", 0))]

    os.makedirs(args.out, exist_ok=True)
    marginal = fit_marginal(
        data,
        doc.get("marginal_family", "GenGamma"),
        mixed=bool(doc.get("mixed", False)),
        method=doc.get("fit_method", "lmoments"),
    )
    out = marginal.to_dict()
    try:
        from .marginals import model_lmoments, sample_lmoments

        positive = data[data > 0] if out.get("p0") else data
        lam_hat = sample_lmoments(positive, 2)
        base = marginal.continuous if out.get("p0") else marginal
        lam_fit = model_lmoments(base, 2)
        out["lmoment_residuals"] = [float(a - b) for a, b in zip(lam_fit, lam_hat)]
    except PgsimError:
        pass
    _write_json(os.path.join(args.out, "marginal.json"), out)

    max_lag = int(doc.get("max_lag", min(len(data) // 3, 100)))
    emp = empirical_acs(data, max_lag)
    with open(os.path.join(args.out, "acs_empirical.csv"), "w", encoding="utf-8") as f:
        f.write("lag,rho\n")
        for k, r in enumerate(emp):
            f.write(f"{k},{r:.10g}\n")
    acs = fit_acs(emp[1:], doc.get("acs_family", "WeibullACS"))
    lags = np.arange(1.0, max_lag + 1)
    resid = float(np.sqrt(np.mean((np.atleast_1d(acs(lags)) - emp[1:]) ** 2)))
    _write_json(
        os.path.join(args.out, "acs.json"),
        {**acs.to_dict(), "residual_rms": resid},
    )
    _summary(args, {"marginal": repr(marginal), "acs": repr(acs),
                    "acs_residual_rms": round(resid, 8)})
    return EXIT_OK


def cmd_verify(args):
    doc = _load_json(args.spec)
    if args.series is None:
        raise SpecError("verify needs --series pointing at a CSV file")
    try:
        with open(args.series, encoding="utf-8") as f:
            header = f.readline().strip().split(",")
        data = np.loadtxt(args.series, delimiter=",", skiprows=1)
    except OSError as e:
        raise SpecError(f"cannot read series file {args.series}: {e}") from None
    except ValueError as e:
        raise SpecError(f"cannot parse series file {args.series}: {e}") from None
    if data.ndim == 1:
        data = data[:, None]

    by_season, cross, meta = pipeline.parse_spec(
        doc, base_dir=os.path.dirname(os.path.abspath(args.spec))
    )
    procs = by_season[0]
    series = {}
    for p in procs:
        if p.label not in header:
            raise SpecError(f"series file has no column for process {p.label!r}")
        series[p.label] = data[:, header.index(p.label)]

    if cross is not None:
        spec = pipeline.MultiProcessSpec(procs, *cross[0])
        report = pipeline.verify(spec, series, meta["thresholds"])
    elif len(procs) == 1:
        report = pipeline.verify(procs[0], series[procs[0].label], meta["thresholds"])
    else:
        parts = [pipeline.verify(p, series[p.label], meta["thresholds"]) for p in procs]
        report = pipeline.VerificationReport(
            [r.processes[0] for r in parts], None, meta["thresholds"]
        )

    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "report.json"), report.to_dict())
    from . import report as report_mod

    report_mod.render_verify_figures(
        report.processes, procs, series, os.path.join(args.out, "figures"),
        fmt="svg" if args.svg else "png",
    )
    _summary(args, {"ok": report.ok, "out": args.out})
    return EXIT_OK if report.ok else EXIT_VERIFY


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pgsim",
        description="Simulate processes with arbitrary marginals and "
        "correlation structures through a parent-Gaussian transform.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("simulate", cmd_simulate, "run the full recipe and write artifacts"),
        ("plan", cmd_plan, "plan only: curves, parent ACS, generator"),
        ("ctf", cmd_ctf, "build a transformation grid and fit a curve"),
        ("fit", cmd_fit, "fit a marginal and an ACS to a data series"),
        ("verify", cmd_verify, "verify a series against a spec"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--spec", required=True, help="JSON spec file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--nodes", type=int, default=None,
                       help="quadrature nodes per axis")
        p.add_argument("--ar-cap", type=int, default=None, dest="ar_cap",
                       help="maximum AR order")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="stdout summary format")
        p.add_argument("--svg", action="store_true",
                       help="render figures as SVG instead of PNG")
        if name == "verify":
            p.add_argument("--series", default=None, help="series CSV to check")
        p.set_defaults(func=fn)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except SpecError as e:
        return _fail(EXIT_CONFIG, str(e))
    except NumericalError as e:
        return _fail(EXIT_NUMERICAL, str(e))
    except PgsimError as e:
        return _fail(EXIT_NUMERICAL, str(e))
    except OSError as e:
        return _fail(EXIT_CONFIG, str(e))


if __name__ == "__main__":
    sys.exit(main())
