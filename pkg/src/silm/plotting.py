"""Sum-rate curves of a sweep rendered to an image file."""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 4.5

STYLE = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "figure.dpi": 150,
}

AXIS_LABELS = {
    "rho_db": r"inter-cell gain $\rho$ [dB]",
    "snr_db": "SNR [dB]",
    "K": "users per cell $K$",
}

METRIC_LABELS = {
    "R_DL": "downlink sum-rate [bit/channel use]",
    "R_UL": "uplink sum-rate [bit/channel use]",
    "R_total": "sum-rate [bit/channel use]",
}

MARKERS = "osd^v<>ph*"


def plot_sweep(result, fname, metric=None):
    """One curve per series with standard-error bars; returns the figure path."""
    metric = metric or result.spec.metric
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for i, exp in enumerate(result.experiments()):
            x, mean, se = result.series_curve(exp, metric)
            label = exp.split("/", 1)[-1]
            ax.errorbar(x, mean, yerr=np.nan_to_num(se), marker=MARKERS[i % len(MARKERS)],
                        capsize=2, label=label)
        ax.set_xlabel(AXIS_LABELS[result.spec.axis])
        ax.set_ylabel(METRIC_LABELS[metric])
        ax.set_title(f"{result.spec.name} ({result.spec.trials} trials)")
        ax.grid(True, lw=0.4, alpha=0.5)
        ax.legend(loc="best", frameon=False)
        fig.savefig(fname, bbox_inches="tight")
        plt.close(fig)
    return fname
