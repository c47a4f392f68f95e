"""SVG figures for finished runs (matplotlib, non-interactive backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bounds import BOUNDS, normalized_ratios  # noqa: E402
from .conslaw import rarefaction_profile  # noqa: E402

# fixed metadata and id salt keep the SVG bytes reproducible
_SVG_META = {"Date": None, "Creator": None}
_SVG_RC = {"svg.hashsalt": "khmix"}


def plot_profiles(z, times, ubar, U: float, path) -> Path:
    """``u_bar / U`` against the self-similar variable ``z / (U t)``, with the rarefaction fan."""
    fig, ax = plt.subplots(figsize=(6, 4))
    cmap = plt.get_cmap("viridis")
    positive = [(t, u) for t, u in zip(times, ubar) if t > 0]
    for i, (t, u) in enumerate(positive):
        ax.plot(z / (U * t), u / U, color=cmap(i / max(len(positive) - 1, 1)), lw=1.0,
                label=f"t = {t:.3g}")
    xi = np.linspace(-1.0, 1.0, 401)
    ax.plot(xi, rarefaction_profile(xi, 1.0, 1.0), "k--", lw=1.5, label="rarefaction")
    ax.set_xlim(-1.0, 1.0)
    ax.set_xlabel("z / (U t)")
    ax.set_ylabel("u_bar / U")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    path = Path(path)
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def plot_ratios(series, U: float, path) -> Path:
    """``l/(Ut)``, ``E/(U^2 t)``, ``D/(U^2 t)`` against ``t`` with their bounds."""
    t, ratios = normalized_ratios(series, U)
    fig, ax = plt.subplots(figsize=(6, 4))
    for (q, r), color in zip(ratios.items(), ("C0", "C1", "C2")):
        ax.plot(t, r, color=color, label=q)
        ax.axhline(BOUNDS[q], color=color, ls=":", lw=1)
    ax.set_xlabel("t")
    ax.set_ylabel("normalized ratio")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path
