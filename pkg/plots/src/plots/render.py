"""Load the four treebroadcast CSV kinds and render them.

Schemas (headers must match exactly):

  series:     level,x,y,z,u,v,w,se_x,se_y,se_z,se_u,se_v,se_w
  trajectory: iter,X,Z
  phase:      lambda1,lambda2,classification
  threshold:  param,lambda1_star
"""

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMAS = {
    "series": [
        "level", "x", "y", "z", "u", "v", "w",
        "se_x", "se_y", "se_z", "se_u", "se_v", "se_w",
    ],
    "trajectory": ["iter", "X", "Z"],
    "phase": ["lambda1", "lambda2", "classification"],
    "threshold": ["param", "lambda1_star"],
}
KINDS = tuple(SCHEMAS)

CLASS_COLORS = {
    "ORIGIN": "#4878d0",
    "ESCAPE": "#d65f5f",
    "NONZERO_FIXED": "#6acc64",
    "AMBIGUOUS": "#b8b8b8",
}


class SchemaError(ValueError):
    """Input CSV does not match the schema of the requested kind."""


@dataclass(frozen=True)
class PlotSpec:
    """One figure: which schema to read, from where, to where."""

    kind: str
    input: str
    output: str
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    logy: bool = False
    d: int = 2  # branching factor for the d*lambda^2 = 1 reference
    dpi: int = 150
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise SchemaError(
                f"unknown kind {self.kind!r}; expected one of {sorted(SCHEMAS)}"
            )


def load_table(path: str, kind: str) -> dict[str, list]:
    """Parse a CSV against the schema for `kind`; returns column lists.

    Numeric columns become floats; `classification` stays a string.
    Raises SchemaError naming the offending column.
    """
    schema = SCHEMAS[kind]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {schema}")
        for want, got in zip(schema, header):
            if want != got:
                raise SchemaError(
                    f"{path}: expected column {want!r}, found {got!r}"
                )
        if len(header) < len(schema):
            raise SchemaError(
                f"{path}: missing column {schema[len(header)]!r}"
            )
        if len(header) > len(schema):
            raise SchemaError(
                f"{path}: unexpected column {header[len(schema)]!r}"
            )
        cols: dict[str, list] = {name: [] for name in schema}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(schema):
                raise SchemaError(
                    f"{path}:{lineno}: {len(row)} cells, expected {len(schema)}"
                )
            for name, cell in zip(schema, row):
                if name == "classification":
                    cols[name].append(cell)
                    continue
                try:
                    cols[name].append(float(cell))
                except ValueError:
                    raise SchemaError(
                        f"{path}:{lineno}: column {name!r} has "
                        f"non-numeric value {cell!r}"
                    ) from None
    return cols


def _plot_series(ax, cols, spec):
    level = cols["level"]
    for name, style in (("x", "-o"), ("z", "-s")):
        vals = cols[name]
        if spec.logy:
            vals = [abs(v) for v in vals]
        ax.plot(level, vals, style, ms=3, label=name)
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel or "level")
    ax.set_ylabel(spec.ylabel or ("|moment|" if spec.logy else "x"))
    ax.legend()


def _plot_trajectory(ax, cols, spec):
    ax.plot(cols["X"], cols["Z"], "-o", ms=3, label="orbit")
    if cols["X"]:
        ax.plot([cols["X"][0]], [cols["Z"][0]], "g^", label="start")
        ax.plot([cols["X"][-1]], [cols["Z"][-1]], "rv", label="end")
    ax.set_xlabel(spec.xlabel or "X")
    ax.set_ylabel(spec.ylabel or "Z")
    ax.legend()


def _plot_phase(ax, cols, spec):
    l1 = np.array(cols["lambda1"])
    l2 = np.array(cols["lambda2"])
    for cls in CLASS_COLORS:
        mask = np.array([c == cls for c in cols["classification"]])
        if mask.any():
            ax.scatter(
                l1[mask], l2[mask], c=CLASS_COLORS[cls], label=cls,
                marker="s", s=60,
            )
    ks = 1 / math.sqrt(spec.d)
    ax.axvline(ks, color="k", ls="--", lw=1, label=f"d lambda^2 = 1")
    if l2.size and l2.max() >= ks:
        ax.axhline(ks, color="k", ls="--", lw=1)
    ax.set_xlabel(spec.xlabel or "lambda1")
    ax.set_ylabel(spec.ylabel or "lambda2")
    ax.legend(fontsize="small")


def _plot_threshold(ax, cols, spec):
    ax.plot(cols["param"], cols["lambda1_star"], "-o", ms=4, label="lambda1*")
    ax.axhline(
        1 / math.sqrt(spec.d), color="k", ls="--", lw=1, label="1/sqrt(d)"
    )
    ax.set_xlabel(spec.xlabel or "param")
    ax.set_ylabel(spec.ylabel or "lambda1*")
    ax.legend()


_RENDERERS = {
    "series": _plot_series,
    "trajectory": _plot_trajectory,
    "phase": _plot_phase,
    "threshold": _plot_threshold,
}


def render(spec: PlotSpec):
    """Render one figure and write it to spec.output.

    Returns the matplotlib Figure so callers (and tests) can inspect
    the plotted data through the artist layer.
    """
    cols = load_table(spec.input, spec.kind)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    _RENDERERS[spec.kind](ax, cols, spec)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=spec.dpi)
    return fig
