"""Accuracy-grid report: CSV ground truth and a heatmap image with the
k = depth + 2 staircase overlay."""

import csv


def staircase_depth(k):
    """Smallest depth expected to solve L_k: the staircase sits at k = depth+2."""
    return max(1, k - 2)


def write_csv(cells, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "depth", "bin", "accuracy"])
        for cell in sorted(cells, key=lambda c: (c.bin, c.k, c.depth)):
            writer.writerow([cell.k, cell.depth, cell.bin,
                             f"{cell.accuracy:.2f}"])


def render_heatmap(cells, path, bin_name=None):
    """One grid per bin (or just bin_name): depth rows x k columns; missing
    cells stay blank; the staircase line marks k = depth + 2."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    bins = sorted({c.bin for c in cells}) if bin_name is None else [bin_name]
    fig, axes = plt.subplots(1, len(bins), squeeze=False,
                             figsize=(5 * len(bins), 4))
    for ax, b in zip(axes[0], bins):
        sub = [c for c in cells if c.bin == b]
        ks = sorted({c.k for c in sub})
        depths = sorted({c.depth for c in sub})
        grid = np.full((len(depths), len(ks)), np.nan)
        for c in sub:
            grid[depths.index(c.depth), ks.index(c.k)] = c.accuracy
        im = ax.imshow(grid, vmin=0, vmax=100, cmap="viridis", origin="lower")
        for (row, col), val in np.ndenumerate(grid):
            if not np.isnan(val):
                ax.text(col, row, f"{val:.0f}", ha="center", va="center",
                        color="white", fontsize=8)
        # staircase: cells with depth >= k - 2 are expected solvable
        for col, k in enumerate(ks):
            boundary = staircase_depth(k)
            if boundary in depths:
                row = depths.index(boundary)
                ax.plot([col - 0.5, col + 0.5], [row - 0.5, row - 0.5],
                        color="black", linewidth=2)
                ax.plot([col - 0.5, col - 0.5], [row - 0.5, row + 0.5],
                        color="black", linewidth=2)
        ax.set_xticks(range(len(ks)), [str(k) for k in ks])
        ax.set_yticks(range(len(depths)), [str(d) for d in depths])
        ax.set_xlabel("k")
        ax.set_ylabel("depth")
        ax.set_title(f"whole-sequence accuracy, bin {b}")
    fig.colorbar(im, ax=axes[0][-1])
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
