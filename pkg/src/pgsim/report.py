"""Plot-data CSV emission and matplotlib figure rendering.

Every figure has a CSV twin under plotdata/ carrying the same numbers,
so downstream tooling never has to scrape pixels.  Figures are rendered
with the Agg backend straight to files; SVG output uses a fixed hash
salt so repeated runs produce identical bytes.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "pgsim"

import matplotlib.pyplot as plt
import numpy as np

from .correlations import empirical_acs

_PREVIEW = 600  # points of the series shown in the preview panel


def _csv(path, header, columns):
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for row in zip(*cols):
            f.write(",".join(f"{v:.10g}" for v in row) + "\n")


def _acs_plot_lags(plan):
    base = max(50, 2 * plan.thresholds.acs_lags)
    if not plan.is_multivariate:
        base = max(base, min(max(u.order for row in plan.univariate for u in row), 400))
    return base


def write_plotdata(plan, result, report, out_dir):
    """plotdata/*.csv for each figure panel."""
    os.makedirs(out_dir, exist_ok=True)
    labels = plan.labels
    n = len(next(iter(result.series.values())))
    lagmax = min(_acs_plot_lags(plan), n // 4)
    rho_x_samples = np.linspace(0.0, 1.0, 201)

    for s in range(plan.seasons):
        suffix = f"_s{s}" if plan.seasons > 1 else ""
        specs = plan.process_specs(s)
        for i, lab in enumerate(labels):
            spec = specs[i]
            if plan.is_multivariate:
                mp = plan.multivariate[s]
                grid = mp.grids[(i, i)]
                curve = mp.auto_curves[i]
            else:
                up = plan.univariate[s][i]
                grid, curve = up.grid, up.curve
            _csv(
                os.path.join(out_dir, f"{lab}{suffix}_ctf_grid.csv"),
                ["rho_z", "rho_x"],
                [grid.rho_z, grid.rho_x],
            )
            rx = rho_x_samples
            if curve.family == "cross":
                rx = np.linspace(0.0, curve.rho_max, 201)
            _csv(
                os.path.join(out_dir, f"{lab}{suffix}_ctf_curve.csv"),
                ["rho_x", "rho_z"],
                [rx, np.atleast_1d(curve.apply(rx))],
            )

            if plan.seasons > 1:
                x = result.series[lab][result.season_index == s]
                z = result.gaussian[lab][result.season_index == s]
            else:
                x = result.series[lab]
                z = result.gaussian[lab]
            if spec.acs is not None:
                lags = np.arange(1, lagmax + 1, dtype=float)
                target = np.atleast_1d(spec.acs(lags))
                pg = np.atleast_1d(curve.apply(np.clip(target, 0.0, 1.0)))
                emp_x = empirical_acs(x, lagmax)[1:]
                emp_z = empirical_acs(z, lagmax)[1:]
                _csv(
                    os.path.join(out_dir, f"{lab}{suffix}_acs.csv"),
                    ["lag", "target_rho_x", "pg_rho_z", "empirical_x", "empirical_z"],
                    [lags, target, pg, emp_x, emp_z],
                )

            u = (np.arange(1, len(x) + 1) - 0.5) / len(x)
            keep = np.unique(
                np.linspace(0, len(x) - 1, min(len(x), 2000)).astype(int)
            )
            _csv(
                os.path.join(out_dir, f"{lab}{suffix}_distribution.csv"),
                ["prob", "empirical_quantile", "target_quantile"],
                [
                    u[keep],
                    np.sort(x)[keep],
                    np.atleast_1d(spec.marginal.quantile(u[keep], clamp=True)),
                ],
            )

    if plan.is_multivariate:
        rows_i, rows_j, rows_lag, rows_t, rows_e = [], [], [], [], []
        cross = report.cross
        if cross is not None:
            for lag, tkey, ekey in (
                (0, "K0_target", "K0_empirical"),
                (1, "K1_target", "K1_empirical"),
            ):
                T = np.asarray(cross[tkey])
                E = np.asarray(cross[ekey])
                for i in range(len(labels)):
                    for j in range(len(labels)):
                        rows_i.append(i)
                        rows_j.append(j)
                        rows_lag.append(lag)
                        rows_t.append(T[i, j])
                        rows_e.append(E[i, j])
            _csv(
                os.path.join(out_dir, "cross_matrices.csv"),
                ["i", "j", "lag", "target", "empirical"],
                [rows_i, rows_j, rows_lag, rows_t, rows_e],
            )


def render_figures(plan, result, report, out_dir, fmt="png"):
    """Render one verification figure per process plus a cross-correlation
    panel for multivariate runs."""
    os.makedirs(out_dir, exist_ok=True)
    labels = plan.labels
    n = len(next(iter(result.series.values())))
    lagmax = min(_acs_plot_lags(plan), n // 4)

    for s in range(plan.seasons):
        suffix = f"_s{s}" if plan.seasons > 1 else ""
        specs = plan.process_specs(s)
        for i, lab in enumerate(labels):
            spec = specs[i]
            if plan.is_multivariate:
                mp = plan.multivariate[s]
                grid = mp.grids[(i, i)]
                curve = mp.auto_curves[i]
            else:
                up = plan.univariate[s][i]
                grid, curve = up.grid, up.curve
            if plan.seasons > 1:
                x = result.series[lab][result.season_index == s]
                z = result.gaussian[lab][result.season_index == s]
            else:
                x = result.series[lab]
                z = result.gaussian[lab]

            fig, axes = plt.subplots(2, 2, figsize=(10, 7))
            ax = axes[0, 0]
            ax.plot(x[:_PREVIEW], lw=0.7, color="#27597a")
            ax.set_title(f"{lab}: synthetic series (first {min(len(x), _PREVIEW)})")
            ax.set_xlabel("t")

            ax = axes[0, 1]
            ax.plot(grid.rho_x, grid.rho_z, "o", ms=5, color="0.45", label="grid")
            rx = np.linspace(0, 1 if curve.family != "cross" else curve.rho_max, 200)
            ax.plot(rx, np.atleast_1d(curve.apply(rx)), color="#b4461e",
                    label=f"{curve.family} (b={curve.b:.3g}, c={curve.c:.3g})")
            ax.plot([0, 1], [0, 1], ":", color="0.7", lw=0.8)
            ax.set_xlabel(r"target correlation $\rho_X$")
            ax.set_ylabel(r"parent-Gaussian $\rho_Z$")
            ax.legend(fontsize=8)
            ax.set_title("correlation transformation")

            ax = axes[1, 0]
            u = (np.arange(1, len(x) + 1) - 0.5) / len(x)
            keep = np.unique(np.linspace(0, len(x) - 1, min(len(x), 800)).astype(int))
            ax.plot(
                np.atleast_1d(spec.marginal.quantile(u[keep], clamp=True)),
                np.sort(x)[keep],
                ".", ms=2.5, color="#27597a",
            )
            lims = ax.get_xlim()
            ax.plot(lims, lims, ":", color="0.6", lw=0.8)
            ax.set_xlabel("target quantile")
            ax.set_ylabel("empirical quantile")
            ax.set_title("distribution check")

            ax = axes[1, 1]
            if spec.acs is not None:
                lags = np.arange(1, lagmax + 1, dtype=float)
                target = np.atleast_1d(spec.acs(lags))
                pg = np.atleast_1d(curve.apply(np.clip(target, 0, 1)))
                ax.plot(lags, target, color="#7a1f1f", label=r"target $\rho_X$")
                ax.plot(lags, pg, color="#e8a33d", label=r"parent $\rho_Z$")
                ax.plot(lags, empirical_acs(x, lagmax)[1:], ".", ms=3,
                        color="#27597a", label="empirical X")
                ax.plot(lags, empirical_acs(z, lagmax)[1:], ".", ms=3,
                        color="0.5", label="empirical Z")
                ax.set_xlabel("lag")
                ax.set_ylabel("correlation")
                ax.legend(fontsize=8)
            else:
                ax.axis("off")
            ax.set_title("correlation structure")

            fig.tight_layout()
            fig.savefig(os.path.join(out_dir, f"{lab}{suffix}.{fmt}"), dpi=130)
            plt.close(fig)

    if plan.is_multivariate and report.cross is not None:
        cross = report.cross
        fig, ax = plt.subplots(figsize=(5, 5))
        for lag, tkey, ekey, marker in (
            (0, "K0_target", "K0_empirical", "o"),
            (1, "K1_target", "K1_empirical", "s"),
        ):
            T = np.asarray(cross[tkey]).ravel()
            E = np.asarray(cross[ekey]).ravel()
            ax.plot(T, E, marker, ms=5, label=f"lag {lag}", alpha=0.8)
        ax.plot([0, 1], [0, 1], ":", color="0.6", lw=0.8)
        ax.set_xlabel("target cross-correlation")
        ax.set_ylabel("empirical cross-correlation")
        ax.legend()
        ax.set_title("cross-correlation check")
        fig.tight_layout()
        fig.savefig(os.path.join(out_dir, f"cross_correlations.{fmt}"), dpi=130)
        plt.close(fig)


def render_verify_figures(entries, specs, series, out_dir, fmt="png"):
    """Distribution + ACS panels for a bare verify run (no plan available)."""
    os.makedirs(out_dir, exist_ok=True)
    for spec in specs:
        x = np.asarray(series[spec.label], dtype=float)
        fig, axes = plt.subplots(1, 2, figsize=(9, 4))
        ax = axes[0]
        u = (np.arange(1, len(x) + 1) - 0.5) / len(x)
        keep = np.unique(np.linspace(0, len(x) - 1, min(len(x), 800)).astype(int))
        ax.plot(
            np.atleast_1d(spec.marginal.quantile(u[keep], clamp=True)),
            np.sort(x)[keep],
            ".", ms=2.5, color="#27597a",
        )
        lims = ax.get_xlim()
        ax.plot(lims, lims, ":", color="0.6", lw=0.8)
        ax.set_title(f"{spec.label}: distribution")
        ax = axes[1]
        if spec.acs is not None:
            L = min(50, len(x) // 4)
            lags = np.arange(1, L + 1, dtype=float)
            ax.plot(lags, np.atleast_1d(spec.acs(lags)), color="#7a1f1f", label="target")
            ax.plot(lags, empirical_acs(x, L)[1:], ".", color="#27597a", label="empirical")
            ax.legend(fontsize=8)
        else:
            ax.axis("off")
        ax.set_title("correlation structure")
        fig.tight_layout()
        fig.savefig(os.path.join(out_dir, f"verify_{spec.label}.{fmt}"), dpi=130)
        plt.close(fig)
