"""CSV plot data and PNG figures for suite reports.

matplotlib is imported only when a figure is rendered, so the numerical core
and CSV output work without it.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .io import atomic_write


def series_csv(series: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([series.get("xlabel", "x"), series.get("ylabel", "value")])
    for x, y in zip(series["x"], series["y"]):
        writer.writerow([repr(float(x)), repr(float(y))])
    return buf.getvalue()


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_series(path, series: dict, title: str = "") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    try:
        ax.plot(series["x"], series["y"], "o-", lw=1.2, ms=4)
        if series.get("logy") and all(y > 0 for y in series["y"]):
            ax.set_yscale("log")
        ax.set_xlabel(series.get("xlabel", "x"))
        ax.set_ylabel(series.get("ylabel", "value"))
        if title:
            ax.set_title(title, fontsize=9)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(f".{path.name}.tmp")
        fig.savefig(tmp, dpi=120, format="png")
        tmp.replace(path)
    finally:
        plt.close(fig)
    return path


def emit_plots(results, directory, png: bool = True) -> list[str]:
    """Write one CSV (and optionally one PNG) per series; returns file names relative to ``directory``."""
    directory = Path(directory)
    written = []
    for result in results:
        for name, series in sorted(result.series.items()):
            stem = f"criterion{result.number:02d}_{name}".replace(".", "p")
            atomic_write(directory / f"{stem}.csv", series_csv(series))
            written.append(f"{stem}.csv")
            if png:
                render_series(directory / f"{stem}.png", series, f"criterion {result.number}: {name}")
                written.append(f"{stem}.png")
    return written
