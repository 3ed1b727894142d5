"""Figure rendering for the CLI report path.

Figures are written next to the delimited output as PNG files.  Rendering is
headless (Agg) and optional at the CLI level; the numerical library never
imports this module.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update({
    "figure.figsize": (6.0, 3.8),
    "figure.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.bbox": "tight",
})


def _save(fig, path: str) -> str:
    fig.savefig(path)
    plt.close(fig)
    return path


def weights_figure(weights, path: str, title: str = "digit weights") -> str:
    w = np.asarray(weights, dtype=float)
    ks = np.arange(1, len(w) + 1)
    fig, ax = plt.subplots()
    pos = w > 0
    if pos.sum() > 1:
        ax.loglog(ks[pos], w[pos], "o-", ms=3, lw=0.8)
    else:
        ax.stem(ks, w)
    ax.set_xlabel("digit k")
    ax.set_ylabel("$p_k$")
    ax.set_title(title)
    return _save(fig, path)


def tail_figure(weights, fit, dimension: float, path: str) -> str:
    """Log-log weights with the fitted line and the slope implied by 2d."""
    w = np.asarray(weights, dtype=float)
    ks = np.arange(1, len(w) + 1)
    fig, ax = plt.subplots()
    ax.loglog(ks, w, "o", ms=2.5, label="$p_k$")
    if fit is not None:
        lo, hi = fit.fit_range
        xs = np.linspace(np.log(lo), np.log(hi), 50)
        ax.plot(np.exp(xs), np.exp(fit.slope * xs + fit.intercept), "-",
                lw=1.5, label=f"fit slope {fit.slope:.4f}")
        anchor = fit.slope * np.log(lo) + fit.intercept
        ax.plot(np.exp(xs), np.exp(-2 * dimension * (xs - np.log(lo)) + anchor), "--",
                lw=1.0, label=f"slope $-2d$ = {-2 * dimension:.4f}")
    ax.set_xlabel("digit k")
    ax.set_ylabel("$p_k$")
    ax.legend()
    ax.set_title("tail power law")
    return _save(fig, path)


def convergence_figure(history, path: str) -> str:
    fig, ax = plt.subplots()
    ax.semilogy(np.maximum(np.asarray(history, dtype=float), 1e-18), ".-", lw=0.8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("criticality residual")
    ax.set_title("optimizer convergence")
    return _save(fig, path)


def sweep_figure(ns, dimensions, D_estimate, path: str) -> str:
    fig, ax = plt.subplots()
    ax.semilogx(ns, dimensions, "o-", base=2, label="$d_n$")
    if D_estimate == D_estimate:  # skip NaN
        ax.axhline(D_estimate, color="k", ls="--", lw=0.9,
                   label=f"extrapolated D = {D_estimate:.6f}")
    ax.set_xlabel("alphabet size n")
    ax.set_ylabel("max dimension on the n-simplex")
    ax.legend()
    ax.set_title("dimension sweep")
    return _save(fig, path)


def diagnostics_figure(contraction, correlation, pressure, path: str) -> str:
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2))
    ax = axes[0]
    ax.plot(contraction.sup_ratios, "o", ms=3, label=r"vs $\|w\|_\infty$")
    ax.plot(contraction.deriv_ratios, "s", ms=3, label=r"vs $\|w'\|_\infty$")
    ax.axhline(0.25, color="r", ls="--", lw=0.9)
    ax.set_xlabel("battery index")
    ax.set_ylabel(r"$\|(L^2 w)'\|_\infty$ ratio")
    ax.legend(fontsize=7)
    ax.set_title("derivative contraction")

    ax = axes[1]
    ms = np.arange(1, len(correlation.certificates) + 1)
    ax.semilogy(ms, np.maximum(correlation.certificates, 1e-18), ".-", lw=0.8,
                label="certificate $c_m$")
    if correlation.direct:
        dm = sorted(correlation.direct)
        ax.semilogy(dm, [max(abs(correlation.direct[m]), 1e-18) for m in dm], "x",
                    ms=6, label="direct estimate")
    ax.set_xlabel("m")
    ax.legend(fontsize=7)
    ax.set_title("correlation decay")

    ax = axes[2]
    ax.plot(pressure.t_grid, pressure.logs, "o-", ms=4)
    ax.set_xlabel("t")
    ax.set_ylabel("P(t)")
    ax.set_title(f"pressure probe: P'(0) = {pressure.d1:.8f}")
    fig.tight_layout()
    return _save(fig, path)
