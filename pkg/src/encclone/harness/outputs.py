"""CSV and plot-data emission.  Floats are written with repr, so output is byte-stable."""

from __future__ import annotations

import csv
import io
import os
from typing import Sequence

SCHEMAS = {
    "exp1": ("n", "N_qubits", "L2q_bsm", "Fe_bsm", "sigma_bsm", "L2q_pom", "Fe_pom", "sigma_pom"),
    "exp2": ("n", "N_qubits", "scenario", "S", "sigma", "S_exact"),
    "exp3": ("n", "l", "strategy", "extra", "N_qubits", "clones", "virtual_clones", "key_size",
             "L2q", "N2q", "Fe", "sigma", "method"),
    "exp4": ("r", "N_qubits", "L2q", "N2q", "Fr", "sigma", "Fr_exact", "label"),
    "corr-scan": ("n", "stage", "role") + tuple(f"T{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)),
    "mixedness": ("n", "stage", "role", "bloch_x", "bloch_y", "bloch_z", "purity"),
}

# (x column, y column, sigma column) for the plot-data file
PLOT_AXES = {
    "exp1": ("L2q_bsm", "Fe_bsm", "sigma_bsm"),
    "exp2": ("n", "S", "sigma"),
    "exp3": ("N_qubits", "Fe", "sigma"),
    "exp4": ("r", "Fr", "sigma"),
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def validate_rows(experiment: str, rows: Sequence[dict]) -> None:
    cols = set(SCHEMAS[experiment])
    for row in rows:
        missing = cols - set(row)
        if missing:
            raise ValueError(f"{experiment} row lacks columns {sorted(missing)}")
        for key in ("sigma", "sigma_bsm", "sigma_pom"):
            if key in row and not row[key] >= 0:
                raise ValueError(f"negative {key} in {experiment} row")


def render_csv(experiment: str, rows: Sequence[dict]) -> str:
    validate_rows(experiment, rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = SCHEMAS[experiment]
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def render_plot_data(experiment: str, rows: Sequence[dict]) -> str | None:
    """Whitespace-separated x y sigma triples, sorted by x (then by series)."""
    if experiment not in PLOT_AXES:
        return None
    xk, yk, sk = PLOT_AXES[experiment]
    series = "scenario" if experiment == "exp2" else None
    pts = sorted(rows, key=lambda r: (r[xk], str(r.get(series, "")) if series else ""))
    lines = [f"# {xk} {yk} {sk}" + (f" {series}" if series else "")]
    for r in pts:
        line = f"{_fmt(r[xk])} {_fmt(r[yk])} {_fmt(r[sk])}"
        if series:
            line += f" {r[series]}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def emit_outputs(rows: Sequence[dict], experiment: str, out: str | None) -> list[str]:
    """Write the CSV (and plot data when defined); returns written paths.

    With ``out`` None the CSV goes to stdout.
    """
    if not rows:
        raise ValueError("no rows to write")
    text = render_csv(experiment, rows)
    plot = render_plot_data(experiment, rows)
    if out is None:
        print(text, end="")
        return []
    d = os.path.dirname(os.path.abspath(out))
    os.makedirs(d, exist_ok=True)
    with open(out, "w", newline="") as fh:
        fh.write(text)
    written = [out]
    if plot is not None:
        root, _ = os.path.splitext(out)
        ppath = root + ".plot.dat"
        with open(ppath, "w") as fh:
            fh.write(plot)
        written.append(ppath)
    return written
