"""Human-readable clause patterns.

A convolution clause renders as a ``W x W`` grid per layer, one character per
filter cell:

    1   the pixel literal is included
    0   the negated pixel literal is included
    *   neither (the cell may take any value)
    X   both (contradiction; the clause can never fire)

followed by one interval line per axis, ``lo < X <= hi``, in 1-based patch
coordinates.  The interval is read off the included position literals: a
plain bit ``t`` demands ``coord <= t``, a negated one ``coord > t``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .classifier import MulticlassModel

_CELL = {(False, False): "*", (True, False): "1", (False, True): "0", (True, True): "X"}


@dataclass
class ClausePattern:
    class_index: int
    polarity: int
    clause_index: int
    weight: int
    grid: list[str]
    x_range: Optional[tuple[int, int]]
    y_range: Optional[tuple[int, int]]

    def render(self) -> str:
        lines = list(self.grid)
        if self.x_range is not None:
            lines.append(f"{self.x_range[0]} < X <= {self.x_range[1]}")
            lines.append(f"{self.y_range[0]} < Y <= {self.y_range[1]}")
        return "\n".join(lines)


def _interval(pos_incl: np.ndarray, neg_incl: np.ndarray, thresholds: np.ndarray,
              origins: np.ndarray) -> tuple[int, int]:
    lo = int(thresholds[neg_incl].max()) + 1 if neg_incl.any() else 0
    hi = int(thresholds[pos_incl].min()) + 1 if pos_incl.any() else int(origins.max()) + 1
    return lo, hi


def in_interval(coord: int, interval: tuple[int, int]) -> bool:
    """Whether a 0-based patch origin lies in a rendered (1-based) interval."""
    lo, hi = interval
    return lo < coord + 1 <= hi


def grid_from_included(included: np.ndarray, model: MulticlassModel) -> list[str]:
    layout = model.layout
    o = layout.n_features
    wx, wy = layout.window
    n_pix = layout.n_pixel_features
    pos = included[:n_pix].reshape(layout.Z, wy, wx)
    neg = included[o:o + n_pix].reshape(layout.Z, wy, wx)
    return ["".join(_CELL[(bool(pos[z, y, x]), bool(neg[z, y, x]))] for x in range(wx))
            for z in range(layout.Z) for y in range(wy)]


def clause_to_pattern(model: MulticlassModel, class_index: int, polarity: int,
                      clause_index: int) -> ClausePattern:
    bank = model.class_model(class_index).bank(polarity)
    included = bank.states[clause_index] > bank.n_states
    p = 0 if polarity > 0 else 1
    weight = int(model.weights[class_index, p, clause_index])
    layout = model.layout
    x_range = y_range = None
    if layout.positional:
        o = layout.n_features
        n_pix = layout.n_pixel_features
        tx = len(layout.thresholds_x)
        xs = slice(n_pix, n_pix + tx)
        ys = slice(n_pix + tx, o)
        x_range = _interval(included[xs], included[o:][xs], layout.thresholds_x, layout.origins_x)
        y_range = _interval(included[ys], included[o:][ys], layout.thresholds_y, layout.origins_y)
    return ClausePattern(class_index, polarity, clause_index, weight,
                         grid_from_included(included, model), x_range, y_range)


def included_from_grid(grid: list[str], model: MulticlassModel) -> np.ndarray:
    """Inverse of the grid rendering: the pixel-literal inclusion vector (position literals left 0)."""
    layout = model.layout
    o = layout.n_features
    wx, wy = layout.window
    if len(grid) != layout.Z * wy or any(len(row) != wx for row in grid):
        raise ValueError("grid does not match the filter shape")
    included = np.zeros(2 * o, dtype=bool)
    for r, row in enumerate(grid):
        for x, ch in enumerate(row):
            k = r * wx + x
            if ch not in "01*X":
                raise ValueError(f"unexpected grid character {ch!r}")
            included[k] = ch in "1X"
            included[o + k] = ch in "0X"
    return included


def top_clauses(model: MulticlassModel, class_index: int, polarity: int, k: int) -> list[int]:
    """Indices of the ``k`` heaviest clauses, ties by lower index."""
    w = model.weights[class_index, 0 if polarity > 0 else 1]
    k = max(0, min(k, w.shape[0]))
    order = np.lexsort((np.arange(w.shape[0]), -w.astype(np.int64)))
    return [int(j) for j in order[:k]]


def export_report(model: MulticlassModel, top_k: int, path=None, X_test=None) -> str:
    """Top-``k`` clauses per class and polarity as text, or CSV if ``path`` ends in ``.csv``.

    Firing rates are measured on ``X_test`` when given, otherwise left blank.
    Returns the report and writes it to ``path`` if one is given.
    """
    rates = None
    if X_test is not None and len(X_test):
        rates = model.clause_outputs(X_test).mean(axis=0)
    rows = []
    for c in range(model.n_classes):
        for polarity in (1, -1):
            for j in top_clauses(model, c, polarity, top_k):
                pat = clause_to_pattern(model, c, polarity, j)
                rate = None if rates is None else float(rates[c, 0 if polarity > 0 else 1, j])
                rows.append((pat, rate))

    as_csv = path is not None and str(path).endswith(".csv")
    if as_csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "polarity", "clause", "weight", "firing_rate",
                    "x_lo", "x_hi", "y_lo", "y_hi", "pattern"])
        for pat, rate in rows:
            xr = pat.x_range or ("", "")
            yr = pat.y_range or ("", "")
            w.writerow([pat.class_index, "+" if pat.polarity > 0 else "-", pat.clause_index, pat.weight,
                        "" if rate is None else f"{rate:.4f}", *xr, *yr, "/".join(pat.grid)])
        text = buf.getvalue()
    else:
        lines = [f"# clause report: classes={model.n_classes} "
                 f"clauses_per_polarity={model.params.clauses_per_polarity} top_k={top_k}"]
        for pat, rate in rows:
            rate_s = "-" if rate is None else f"{rate:.4f}"
            lines.append("")
            lines.append(f"## class={pat.class_index} polarity={'+' if pat.polarity > 0 else '-'} "
                         f"clause={pat.clause_index} weight={pat.weight} firing_rate={rate_s}")
            lines.append(pat.render())
        text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
