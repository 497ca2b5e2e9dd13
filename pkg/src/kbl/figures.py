"""Figure rendering for the report path.

Every report-producing command saves PNG figures next to its JSON/CSV output:
distance sweeps as log-scale decay curves, contours and continuation paths
over the spectrum in the complex plane.  Rendering is headless (Agg) and
deliberately plain; the CSV tables remain the quantitative artifact.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = [
    "render_distance_figure",
    "render_contour_figure",
    "render_path_figure",
    "render_report_figures",
]

_DPI = 150


def render_distance_figure(path: str, table: dict, title: str) -> str:
    """Semilog decay curves d_m vs m, one line per (norm, dimension) pair."""
    rows = table["rows"]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    groups: dict[tuple, list] = {}
    for m, d, norm, dim in rows:
        groups.setdefault((str(norm), int(dim)), []).append((int(m), float(d)))
    for (norm, dim), pts in sorted(groups.items()):
        pts.sort()
        ms = [p[0] for p in pts]
        ds = [max(p[1], 1e-18) for p in pts]
        ax.semilogy(ms, ds, marker="o", markersize=3, label=f"p={norm}, N={dim}")
    ax.set_xlabel("Krylov order m")
    ax.set_ylabel("distance to span")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def render_contour_figure(path: str, center, radius: float, nodes: int, spectrum, title: str) -> str:
    """Quadrature nodes of a circle contour and the operator spectrum."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    cx, cy = float(center[0]), float(center[1])
    ax.plot(cx + radius * np.cos(theta), cy + radius * np.sin(theta), ".", markersize=2, label="nodes")
    if spectrum:
        spec = np.asarray(spectrum, dtype=float)
        ax.plot(spec[:, 0], spec[:, 1], "x", color="tab:red", label="spectrum")
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def render_path_figure(path: str, plan: dict, spectrum, title: str) -> str:
    """Continuation polyline, covering-ball centres and the spectrum."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    verts = np.asarray(plan["vertices"], dtype=float)
    centers = np.asarray(plan["centers"], dtype=float)
    ax.plot(verts[:, 0], verts[:, 1], "-", color="tab:blue", label="path")
    ax.plot(centers[:, 0], centers[:, 1], ".", color="tab:blue", markersize=4)
    for cx, cy in centers:
        ax.add_patch(
            plt.Circle((cx, cy), plan["radius"], fill=False, color="tab:blue", alpha=0.25)
        )
    if spectrum:
        spec = np.asarray(spectrum, dtype=float)
        ax.plot(spec[:, 0], spec[:, 1], "x", color="tab:red", label="spectrum")
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def render_report_figures(stem: str, report: dict, out_dir: str) -> list[str]:
    """Render the figure specs a report carries; returns the files written."""
    import os

    written = []
    for i, spec in enumerate(report.get("figures", [])):
        kind = spec.get("kind")
        suffix = spec.get("table", kind) or kind
        path = os.path.join(out_dir, f"{stem}_{suffix}_{i}.png" if i else f"{stem}_{suffix}.png")
        title = report.get("title", stem)
        if kind == "distances" and spec.get("table") in report.get("tables", {}):
            written.append(
                render_distance_figure(path, report["tables"][spec["table"]], title)
            )
        elif kind == "contour":
            written.append(
                render_contour_figure(
                    path, spec["center"], spec["radius"], spec["nodes"], spec.get("spectrum"), title
                )
            )
        elif kind == "path":
            written.append(render_path_figure(path, spec["plan"], spec.get("spectrum"), title))
    return written
