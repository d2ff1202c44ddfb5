"""Chart rendering: observed bars with fitted expected counts overlaid.

Figure files go through matplotlib's Agg backend, so no display is needed;
the text chart needs no graphics stack at all.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .em import FitResult
from .types import FrequencyTable

_MODEL_STYLE = {
    "cmp_mixture": dict(color="tab:red", marker="o"),
    "poisson_mixture": dict(color="tab:blue", marker="s"),
    "single_cmp": dict(color="tab:red", marker="o"),
    "single_poisson": dict(color="tab:blue", marker="s"),
}


def render_chart(data: FrequencyTable, fits: Sequence[FitResult], path: str | Path) -> None:
    """Save a bar chart of the data with each fit's expected counts on top.

    The output format follows the file extension (svg, png, pdf, ...).
    """
    xs = data.support.values()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(xs, data.counts, color="0.8", edgecolor="0.4", label="observed")
    for fit in fits:
        style = _MODEL_STYLE.get(fit.model_kind, dict(marker="x"))
        ax.plot(xs, fit.expected_counts, label=fit.model_kind, markersize=5, **style)
    if data.labels is not None:
        ax.set_xticks(xs)
        ax.set_xticklabels(data.labels, rotation=30, ha="right", fontsize=8)
    else:
        ax.set_xticks(xs)
    ax.set_xlabel("value")
    ax.set_ylabel("count")
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(str(path), dpi=150)
    plt.close(fig)


def text_chart(data: FrequencyTable, fits: Sequence[FitResult] = (), width: int = 40) -> str:
    """Unicode bar chart of the observed counts, fits listed alongside."""
    peak = max(int(data.counts.max()), 1)
    names = [fit.model_kind for fit in fits]
    lines = []
    header = f"{'value':>12}  {'count':>7}  chart"
    if names:
        header += "   (" + ", ".join(names) + ")"
    lines.append(header)
    for i, value in enumerate(data.support.values()):
        label = data.labels[i] if data.labels is not None else str(value)
        count = int(data.counts[i])
        bar = "█" * max(round(width * count / peak), 1 if count else 0)
        line = f"{label[:12]:>12}  {count:>7}  {bar}"
        if fits:
            line += "   (" + ", ".join(f"{fit.expected_counts[i]:.1f}" for fit in fits) + ")"
        lines.append(line)
    return "\n".join(lines) + "\n"
