"""Built-in problem catalog.

Each entry is a JSON-ready dict in the problem-file schema, so the shipped
problems exercise exactly the same loading path as user files.  The
lineup: a zero-gap workhorse (fenchel_abs), the grid-unbounded linear
instance (example52), an instance whose restriction is recovered exactly
by biconjugation (affine_recovery), a two-point indicator whose hull
differs from it (two_point_nonconvex), a dual grid with the attaining
multiplier removed (truncated_dual), and the open-epigraph set that fails
functional representability (open_epigraph_eset).
"""

from __future__ import annotations

from econvex import problemio

__all__ = ["PROBLEMS", "names", "entry", "load"]


def _leq_zero_set():
    return {"dim": 1, "constraints": [{"a": ["1"], "b": "0", "strict": False}]}


def _geq_zero_set():
    return {"dim": 1, "constraints": [{"a": ["-1"], "b": "0", "strict": False}]}


def _point_set(c):
    return {
        "dim": 1,
        "constraints": [
            {"a": ["1"], "b": str(c), "strict": False},
            {"a": ["-1"], "b": str(-c), "strict": False},
        ],
    }


def _range_grid(lo, hi, count):
    return {"lo": str(lo), "hi": str(hi), "count": count}


FENCHEL_ABS = {
    "kind": "problem",
    "name": "fenchel_abs",
    "x_dim": 1,
    "y_dim": 1,
    "backend": "rational",
    "phi": {
        "op": "sum",
        "terms": [
            {"op": "abs", "arg": {"op": "affine", "x": ["1"]}},
            {"op": "indicator", "set": _leq_zero_set(), "rows": [{"x": ["1"], "y": ["1"]}]},
        ],
    },
    "grids": {
        "x": _range_grid(-5, 5, 11),
        "y": _range_grid(-5, 5, 11),
        "ystar": ["-1", "0", "1"],
        "vstar": ["0"],
        "alpha": ["1"],
        "xstar": ["-2", "-1", "0", "1", "2"],
        "ustar": ["0"],
    },
}

EXAMPLE52 = {
    "kind": "problem",
    "name": "example52",
    "x_dim": 1,
    "y_dim": 1,
    "backend": "rational",
    "phi": {
        "op": "sum",
        "terms": [
            {"op": "affine", "x": ["1"]},
            {"op": "indicator", "set": _leq_zero_set(), "rows": [{"x": ["1"], "y": ["1"]}]},
        ],
    },
    "grids": {
        "x": _range_grid(-5, 5, 11),
        "y": _range_grid(-5, 5, 11),
        "ystar": ["-1", "0", "1"],
        "vstar": ["0", "1"],
        "alpha": ["1"],
        "xstar": ["-1", "0", "1"],
        "ustar": ["0"],
    },
}

AFFINE_RECOVERY = {
    "kind": "problem",
    "name": "affine_recovery",
    "x_dim": 1,
    "y_dim": 1,
    "backend": "rational",
    "phi": {
        "op": "sum",
        "terms": [
            {"op": "affine", "x": ["1"]},
            {"op": "indicator", "set": _geq_zero_set(), "rows": [{"x": ["1"], "y": ["1"]}]},
        ],
    },
    "grids": {
        "x": _range_grid(-5, 5, 11),
        "y": _range_grid(-5, 5, 11),
        "ystar": ["-1", "0", "1"],
        "vstar": ["0", "-1"],
        "alpha": ["1"],
        "xstar": ["0", "1"],
        "ustar": ["0", "-1"],
    },
}

TWO_POINT_NONCONVEX = {
    "kind": "problem",
    "name": "two_point_nonconvex",
    "x_dim": 1,
    "y_dim": 1,
    "backend": "rational",
    "phi": {
        "op": "min",
        "terms": [
            {"op": "indicator", "set": _point_set(-1), "rows": [{"x": ["1"], "y": ["1"]}]},
            {"op": "indicator", "set": _point_set(1), "rows": [{"x": ["1"], "y": ["1"]}]},
        ],
    },
    "grids": {
        "x": _range_grid(-2, 2, 9),
        "y": _range_grid(-2, 2, 9),
        "ystar": ["-1", "0", "1"],
        "vstar": ["0"],
        "alpha": ["1"],
        "xstar": ["-1", "-1/2", "0", "1/2", "1"],
        "ustar": ["0"],
    },
}

TRUNCATED_DUAL = {
    "kind": "problem",
    "name": "truncated_dual",
    "x_dim": 1,
    "y_dim": 1,
    "backend": "rational",
    "phi": FENCHEL_ABS["phi"],
    "grids": {
        "x": _range_grid(-5, 5, 11),
        "y": _range_grid(-5, 5, 11),
        # The attaining multipliers (y* = 0 for the optimum, y* = 1 for the
        # steep projected points) are deliberately missing.
        "ystar": ["-1"],
        "vstar": ["0"],
        "alpha": ["1"],
        "xstar": ["-2", "-1", "0", "1", "2"],
        "ustar": ["0"],
    },
}

OPEN_EPIGRAPH_ESET = {
    "kind": "eset",
    "name": "open_epigraph_eset",
    "set": {"dim": 2, "constraints": [{"a": ["1", "-1"], "b": "0", "strict": True}]},
}

PROBLEMS = {
    "fenchel_abs": FENCHEL_ABS,
    "example52": EXAMPLE52,
    "affine_recovery": AFFINE_RECOVERY,
    "two_point_nonconvex": TWO_POINT_NONCONVEX,
    "truncated_dual": TRUNCATED_DUAL,
    "open_epigraph_eset": OPEN_EPIGRAPH_ESET,
}


def names():
    return sorted(PROBLEMS)


def entry(name: str) -> dict:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise problemio.InputError(f"no catalog entry named {name!r}") from None


def load(name: str):
    """Parse a catalog entry through the problem-file loader."""
    return problemio.loads(problemio.save_text(entry(name)))
