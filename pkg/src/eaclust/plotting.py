"""Static SVG scatterplots of a labeling."""
from __future__ import annotations

import numpy as np

MARKERS = ("o", "s", "^", "D", "v", "P", "X", "*", "<", ">")


def scatter_svg(x, y, labels, path, xlabel: str = "", ylabel: str = "") -> int:
    """Write a scatterplot with one color/marker pair per label value.

    The output is byte-identical for identical input: element ids are hashed
    from a fixed salt and no creation date is embedded.

    Returns:
        Number of distinct labels drawn.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("no labels to plot")
    groups = list(dict.fromkeys(labels.tolist()))
    colors = plt.get_cmap("tab10").colors
    with matplotlib.rc_context({"svg.hashsalt": "eaclust", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6, 5))
        for k, g in enumerate(groups):
            idx = labels == g
            ax.scatter(x[idx], y[idx], s=18, color=colors[k % len(colors)], marker=MARKERS[k % len(MARKERS)],
                       label=str(g))
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(groups) > 1:
            ax.legend(title="group", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return len(groups)
