"""Artifact emission: delimited tables, matplotlib figures, and run manifests.

CSV bytes are deterministic for a fixed seed and thread count: floats are
formatted with a fixed precision and rows are written in a canonical order.
Figures are diagnostic SVG renderings written next to the tables.
"""

from __future__ import annotations

import json
import os
import time

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMA_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")
    return path


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


def write_manifest(out_dir, command, params, files, status="ok", error=None):
    """Always written, even on failure, with the failure reason."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": {k: str(v) for k, v in sorted(params.items())},
        "files": sorted(os.path.basename(f) for f in files),
        "status": status,
    }
    if error is not None:
        payload["error"] = str(error)
    path = os.path.join(out_dir, "manifest.json")
    write_json(path, payload)
    return path


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def rotation_figure(path, estimate, periodic=None, title=""):
    """Cloud plus hull polygon, with the periodic-vector hull overlaid."""
    fig, ax = plt.subplots(figsize=(5, 5))
    pts = estimate.points
    if pts.shape[1] == 1:
        pts = np.column_stack([pts[:, 0], np.zeros(len(pts))])
    ax.scatter(pts[:, 0], pts[:, 1], s=12, alpha=0.6, label="cloud")
    hull = estimate.hull.vertices
    if hull.shape[1] == 1:
        hull = np.column_stack([hull[:, 0], np.zeros(len(hull))])
    if len(hull) > 1:
        closed = np.vstack([hull, hull[:1]])
        ax.plot(closed[:, 0], closed[:, 1], "k-", lw=1.2, label="hull")
    if periodic is not None and len(periodic.points):
        ppts = periodic.points
        if ppts.shape[1] == 1:
            ppts = np.column_stack([ppts[:, 0], np.zeros(len(ppts))])
        ax.scatter(ppts[:, 0], ppts[:, 1], marker="x", c="tab:red", s=30,
                   label="periodic vectors")
        ph = periodic.hull.vertices
        if ph.shape[1] == 1:
            ph = np.column_stack([ph[:, 0], np.zeros(len(ph))])
        if len(ph) > 1:
            closed = np.vstack([ph, ph[:1]])
            ax.plot(closed[:, 0], closed[:, 1], "r--", lw=1.0, label="periodic hull")
    ax.set_xlabel("v1")
    ax.set_ylabel("v2")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def scaling_figure(path, estimate, title=""):
    """h(eps) against -log eps with the fitted mdim slope."""
    fig, ax = plt.subplots(figsize=(5, 4))
    x = -np.log(estimate.eps_grid)
    ax.plot(x, estimate.rates, "o-", label="h(eps)")
    coeff = np.polyfit(x, estimate.rates, 1)
    ax.plot(x, np.polyval(coeff, x), "--",
            label=f"slope {estimate.mdim_slope:.3f}")
    ax.set_xlabel("-log eps")
    ax.set_ylabel("growth rate")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def wild_figure(path, times, averages, targets=None, title=""):
    """Running-average trajectory with the schedule's checkpoint targets."""
    fig, ax = plt.subplots(figsize=(6, 4))
    avg = np.atleast_2d(np.asarray(averages))
    if avg.shape[0] != len(times):
        avg = avg.T
    for d in range(avg.shape[1]):
        ax.plot(times, avg[:, d], lw=1.0, label=f"average[{d}]")
    if targets is not None:
        t_times, t_vals = targets
        ax.plot(t_times, t_vals, "rx", ms=6, label="targets")
    ax.set_xscale("log")
    ax.set_xlabel("time")
    ax.set_ylabel("Birkhoff average")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def chain_recurrence_figure(path, grid, title=""):
    """Recurrent boxes colored by component."""
    fig, ax = plt.subplots(figsize=(5, 2.5 if grid.dim == 1 else 5))
    if grid.dim == 1:
        for ci, comp in enumerate(grid.components):
            xs = sorted(comp)
            ax.scatter([(i + 0.5) / grid.boxes for i in xs], [0] * len(xs), s=8,
                       label=f"component {ci}{' (isolated)' if grid.isolated[ci] else ''}")
        ax.set_ylim(-1, 1)
        ax.set_yticks([])
        ax.set_xlabel("circle coordinate")
    else:
        img = np.full((grid.boxes, grid.boxes), np.nan)
        for ci, comp in enumerate(grid.components):
            for (i, j) in comp:
                img[j, i] = ci
        ax.imshow(img, origin="lower", extent=(0, 1, 0, 1), interpolation="nearest")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    ax.set_title(title)
    if grid.dim == 1:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
