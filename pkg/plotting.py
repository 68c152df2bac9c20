import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from scipy.spatial import ConvexHull  # noqa: E402

from models import HodgeSpectrum  # noqa: E402
from polytope import NewtonPolytope  # noqa: E402
from report_manager import ReportManager  # noqa: E402
from settings import create_logger  # noqa: E402

logger = create_logger(__name__)


def _draw_polytope(ax, polytope: NewtonPolytope) -> None:
    points = np.array(polytope.vertices, dtype=float)
    if polytope.nvars == 1:
        xs = points[:, 0]
        ax.plot([xs.min(), xs.max()], [0, 0], color="tab:blue")
        ax.scatter(xs, np.zeros_like(xs), color="tab:blue", zorder=3)
        ax.set_yticks([])
    else:
        order = ConvexHull(points).vertices
        cycle = np.append(order, order[0])
        ax.fill(points[order, 0], points[order, 1], alpha=0.25, color="tab:blue")
        ax.plot(points[cycle, 0], points[cycle, 1], color="tab:blue")
        ax.scatter(points[:, 0], points[:, 1], color="tab:blue", zorder=3)
        ax.set_aspect("equal")
    ax.scatter([0], [0], marker="x", color="black", zorder=4)
    ax.set_title("Δ(f)")
    ax.grid(True, linewidth=0.3)


def _draw_spectrum(ax, spectrum: HodgeSpectrum) -> None:
    levels = [float(level.numerator) / float(level.denominator) for level, _ in spectrum.entries]
    mults = [mult for _, mult in spectrum.entries]
    ax.bar(levels, mults, width=0.08, color="tab:orange")
    ax.set_xticks(levels)
    ax.set_xticklabels([ReportManager.format_rational(level) for level, _ in spectrum.entries])
    ax.set_xlabel("λ")
    ax.set_ylabel("dim Gr^λ")
    ax.set_title(f"spectrum ({spectrum.route})")


def plot_report(path: str, polytope: NewtonPolytope, spectrum: HodgeSpectrum = None) -> None:
    """SVG with the Newton polytope (n ≤ 2) and a spectrum bar chart."""
    panels = []
    if polytope.nvars <= 2 and polytope.is_full_dimensional:
        panels.append(lambda ax: _draw_polytope(ax, polytope))
    if spectrum is not None:
        panels.append(lambda ax: _draw_spectrum(ax, spectrum))
    if not panels:
        logger.warning("nothing to plot for n = %s", polytope.nvars)
        return
    fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 4), squeeze=False)
    for draw, ax in zip(panels, axes[0]):
        draw(ax)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info("plot written to %s", path)
