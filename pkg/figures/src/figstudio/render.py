"""The five figure kinds.

Every renderer draws only what the run files contain: fit lines come from
the slope/intercept columns persisted in results.csv, captions quote those
fields verbatim, and the source manifest hash is embedded in both the PNG
metadata and the caption sidecar.  Rendering is deterministic: same inputs
and tool versions give byte-identical files.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .jobs import FigureDataError, FigureJob, RunData, load_run

FIGURE_KINDS = ("truncation", "convergence", "conservation", "bilinear",
                "nonsqueezing")

_FIGSIZE = (6.0, 4.0)


def render(job: FigureJob) -> tuple:
    """Render one figure; returns (image_path, caption_path)."""
    if job.kind not in FIGURE_KINDS:
        raise FigureDataError(f"unknown figure kind {job.kind!r}")
    data = load_run(job.run_dir)
    fig, caption_fields = _RENDERERS[job.kind](data, job.style)
    dpi = int(job.style.get("dpi", 150))
    metadata = {"Source-Manifest-SHA256": data.manifest_sha256}
    fig.savefig(job.out_path, dpi=dpi, metadata=metadata)
    plt.close(fig)

    caption_path = job.out_path + ".caption.txt"
    lines = [f"kind: {job.kind}"]
    lines += [f"{key}: {value}" for key, value in caption_fields]
    lines.append(f"manifest_sha256: {data.manifest_sha256}")
    with open(caption_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return job.out_path, caption_path


def _new_axes(style, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if style.get("title"):
        ax.set_title(style["title"])
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _maybe_fit_line(ax, xs, data: RunData):
    """Overlay exp(intercept) * x^slope using the persisted fit columns."""
    if "slope" not in data.result_columns or len(xs) < 2:
        return None, None
    slope_raw = data.column("slope")[0]
    intercept_raw = data.column("intercept")[0]
    slope, intercept = float(slope_raw), float(intercept_raw)
    if math.isnan(slope):
        return slope_raw, intercept_raw
    lo, hi = min(xs), max(xs)
    line_y = [math.exp(intercept) * lo**slope, math.exp(intercept) * hi**slope]
    ax.plot([lo, hi], line_y, "-", color="C1",
            label=f"fit slope {float(slope_raw):.3g}")
    ax.legend()
    return slope_raw, intercept_raw


def _render_truncation(data: RunData, style):
    ns = data.floats("N")
    errors = data.floats("error")
    fig, ax = _new_axes(style, "cutoff N", "sup-in-time flow difference")
    ax.loglog(ns, errors, "o", color="C0")
    ax.set_xticks(ns, [str(int(n)) for n in ns])
    slope_raw, intercept_raw = _maybe_fit_line(ax, ns, data)
    fields = [("slope", slope_raw), ("intercept", intercept_raw)]
    return fig, fields


def _render_convergence(data: RunData, style):
    dts = data.floats("dt")
    errors = data.floats("error")
    fig, ax = _new_axes(style, "time step", "error vs fine reference")
    ax.loglog(dts, errors, "s", color="C0")
    slope_raw, intercept_raw = _maybe_fit_line(ax, dts, data)
    fields = [("slope", slope_raw), ("intercept", intercept_raw)]
    return fig, fields


def _render_conservation(data: RunData, style):
    times = [row["t"] for row in data.series]
    masses = [row["mass"] for row in data.series]
    if not times:
        raise FigureDataError(
            f"{os.path.join(data.run_dir, 'series.jsonl')}: no samples to plot")
    fig, ax = _new_axes(style, "time", "relative drift")
    if len(times) == 1:
        ax.plot(times, [0.0], "o", color="C0", label="mass (single sample)")
        ax.legend()
    else:
        m0 = masses[0]
        mass_drift = [abs(m - m0) / abs(m0) for m in masses]
        ax.semilogy(times, [max(d, 1e-18) for d in mass_drift],
                    "-", color="C0", label="mass")
        hs = [row.get("hamiltonian") for row in data.series]
        if all(h is not None for h in hs):
            h0 = hs[0]
            h_drift = [max(abs(h - h0) / abs(h0), 1e-18) for h in hs]
            ax.semilogy(times, h_drift, "-", color="C1", label="energy")
        ax.legend()
    fields = [("max_mass_drift", data.column("max_mass_drift")[0])]
    return fig, fields


def _render_bilinear(data: RunData, style):
    ratios = [row["ratio"] for row in data.series]
    n_maxes = [row["N_max"] for row in data.series]
    fig, ax = _new_axes(style, "N_max", "Z/(Y*Y) ratio")
    ax.loglog(n_maxes, ratios, ".", color="C0", alpha=0.5, label="samples")
    agg_n = data.floats("N_max")
    agg_max = data.floats("max_ratio")
    ax.loglog(agg_n, agg_max, "o", color="C3", label="per-N max")
    ticks = sorted(set(int(n) for n in n_maxes))
    ax.set_xticks(ticks, [str(t) for t in ticks])
    slope_raw = data.column("slope")[0]
    intercept_raw = data.column("intercept")[0]
    slope, intercept = float(slope_raw), float(intercept_raw)
    if not math.isnan(slope):
        lo, hi = min(agg_n), max(agg_n)
        ax.plot([lo, hi],
                [math.exp(intercept) * lo**slope, math.exp(intercept) * hi**slope],
                "-", color="C1", label=f"fit slope {slope:.3g}")
    ax.legend()
    fields = [("slope", slope_raw), ("intercept", intercept_raw),
              ("spearman", data.column("spearman")[0])]
    return fig, fields


def _render_nonsqueezing(data: RunData, style):
    ks = data.column("mode")
    ratios = data.floats("ratio")
    fig, ax = _new_axes(style, "tracked mode", "covering radius ratio r_k(T)/R")
    ax.bar(range(len(ks)), ratios, color="C0", width=0.6)
    ax.set_xticks(range(len(ks)), [f"k={k}" for k in ks])
    ax.axhline(1.0, color="C3", linestyle="--", linewidth=1.0)
    lo = min(0.0, min(ratios) - 0.05)
    ax.set_ylim(lo, max(1.1, max(ratios) + 0.05))
    fields = [("min_ratio", data.column("min_ratio")[0]),
              ("radius", data.column("radius")[0])]
    return fig, fields


_RENDERERS = {
    "truncation": _render_truncation,
    "convergence": _render_convergence,
    "conservation": _render_conservation,
    "bilinear": _render_bilinear,
    "nonsqueezing": _render_nonsqueezing,
}
