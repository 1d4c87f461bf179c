"""Figure emission for the report paths.

All figures are written to files (SVG by default, any matplotlib format
by extension).  Outputs are timestamp-free unless explicitly requested,
so reruns of the same config are byte-identical.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (8.0, 5.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 11,
    "svg.hashsalt": "oscillat",
}


def _save(fig, path, with_timestamp=False):
    meta = None if with_timestamp else {"Date": None}
    kwargs = {"bbox_inches": "tight"}
    if str(path).endswith(".svg"):
        kwargs["metadata"] = meta
    fig.savefig(path, **kwargs)
    plt.close(fig)


def plot_field(xs, values, path, oracle=None, label="maximal field",
               title=None, with_timestamp=False):
    """Field values vs position, with an optional oracle overlay."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(xs, values, lw=1.2, label=label)
        if oracle is not None:
            ok = np.isfinite(oracle)
            ax.plot(np.asarray(xs)[ok], np.asarray(oracle)[ok], "--", lw=1.0,
                    label="closed form")
        ax.set_xlabel("x")
        ax.legend(frameon=False)
        if title:
            ax.set_title(title)
        _save(fig, path, with_timestamp)


def plot_function_pair(xs, f_vals, g_vals, path, labels=("f", "g"),
                       title=None, with_timestamp=False):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(xs, f_vals, lw=1.2, label=labels[0])
        ax.plot(xs, g_vals, lw=1.2, label=labels[1])
        ax.set_xlabel("x")
        ax.legend(frameon=False)
        if title:
            ax.set_title(title)
        _save(fig, path, with_timestamp)


def plot_profile(xs, ys, path, xlabel, ylabel, logx=False, logy=False,
                 reference=None, title=None, with_timestamp=False):
    """Scalar profile (e.g. oscillation modulus vs radius)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(xs, ys, "o-", lw=1.2, label=ylabel)
        if reference is not None:
            ref_y, ref_label = reference
            ax.plot(xs, ref_y, "--", lw=1.0, label=ref_label)
            ax.legend(frameon=False)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        _save(fig, path, with_timestamp)
