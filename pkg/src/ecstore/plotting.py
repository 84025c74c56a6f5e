"""Static figures for benchmark output (PNG via the Agg backend)."""

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.2),
    "figure.dpi": 100,
    "savefig.bbox": "tight",
    "svg.hashsalt": "ecstore",
}


def _mean_by(rows, key):
    groups = defaultdict(list)
    for row in rows:
        groups[key(row)].append(row["total_s"])
    return {k: sum(v) / len(v) for k, v in groups.items()}


def scaling_figure(rows, scenario, path):
    """Bar per thread count for k+c, with whole-file and split-file reference lines."""
    k, m = scenario.k, scenario.m
    coded = _mean_by([r for r in rows if (r["k"], r["m"]) == (k, m)], lambda r: r["threads"])
    whole = _mean_by([r for r in rows if (r["k"], r["m"]) == (1, 1)], lambda r: r["direction"])
    split = _mean_by([r for r in rows if (r["k"], r["m"]) == (k, k) and k != m], lambda r: r["direction"])
    direction = rows[0]["direction"] if rows else "put"

    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        threads = sorted(coded)
        ax.bar([str(t) for t in threads], [coded[t] for t in threads], color="tab:blue",
               label=f"{k} + {m - k} coding chunks")
        if direction in whole:
            ax.axhline(whole[direction], color="black", linestyle="--", linewidth=1, label="whole file")
        if direction in split:
            ax.axhline(split[direction], color="grey", linestyle=":", linewidth=1.5,
                       label=f"split in {k}, no coding")
        size_mb = scenario.size_bytes / 1e6
        verb = "upload" if direction == "put" else "download"
        ax.set_title(f"{scenario.name}: {verb} of {size_mb:g} MB")
        ax.set_xlabel("worker threads")
        ax.set_ylabel("time [s]")
        ax.legend(loc="upper right", frameon=False)
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return path
