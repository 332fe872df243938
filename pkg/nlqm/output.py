"""Deterministic CSV, JSON and SVG writers."""
import json
import logging
import os

import numpy as np
import pandas as pd
from matplotlib.figure import Figure
from werkzeug.utils import secure_filename

logger = logging.getLogger(__name__)


def output_path(out_dir, name, label=None, index=None):
    """``out_dir/[label-]name[-index]``; the label is sanitized for use in a filename."""
    os.makedirs(out_dir, exist_ok=True)
    stem, ext = os.path.splitext(name)
    if index is not None:
        stem = f"{stem}-{index}"
    if label:
        safe = secure_filename(label)
        if safe:
            stem = f"{safe}-{stem}"
    return os.path.join(out_dir, stem + ext)


def write_csv(path, columns):
    frame = pd.DataFrame({key: np.asarray(value) for key, value in columns.items()})
    # pandas writes floats with repr, which round-trips
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    logger.info("wrote %s", path)
    return path


def _save_svg(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info("wrote %s", path)
    return path


def line_plot(path, x, series, xlabel, ylabel=None, title=None):
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    for label, values in series.items():
        ax.plot(x, values, label=label, linewidth=1.2)
    ax.set_xlabel(xlabel)
    if ylabel:
        ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    return _save_svg(fig, path)


def orbit_plot(path, u, v, fit=None, title=None):
    fig = Figure(figsize=(5, 5))
    ax = fig.add_subplot()
    ax.plot(u, v, linewidth=1.0, label="<X(t)>")
    if fit is not None and not fit.degenerate:
        theta = np.linspace(0.0, 2.0 * np.pi, 361)
        ax.plot(fit.R1 * np.cos(theta), fit.R2 * np.sin(theta), linestyle="--", linewidth=0.8, label="fit")
        ax.plot([0.0], [0.0], marker="+", color="k")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("e1")
    ax.set_ylabel("e2")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save_svg(fig, path)
