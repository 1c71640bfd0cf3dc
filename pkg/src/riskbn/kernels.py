"""Hot numeric kernels for factor arithmetic.

Two interchangeable backends: numba ``@njit`` stride loops (default) and a
pure-numpy broadcast path.  Select with the environment variable
``RISKBN_BACKEND=numpy|numba`` (consulted on every call).  ``benchmarks/``
compares the two.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


def backend() -> str:
    """Active backend: the env var is consulted on every call, so tests can
    flip it without re-importing."""
    requested = os.environ.get("RISKBN_BACKEND", "numba").lower()
    return "numba" if _HAVE_NUMBA and requested != "numpy" else "numpy"


def _strides_for(cards: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Row-major strides of a sub-scope inside a larger scope.

    ``positions[k]`` is the axis in the output scope occupied by the k-th
    variable of the sub-scope; the returned stride maps a flat output index
    to the flat sub-scope index contribution of that axis.
    """
    n = len(cards)
    out_strides = np.ones(n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        out_strides[i] = out_strides[i + 1] * cards[i + 1]
    sub_cards = cards[positions]
    sub_strides = np.ones(len(positions), dtype=np.int64)
    for k in range(len(positions) - 2, -1, -1):
        sub_strides[k] = sub_strides[k + 1] * sub_cards[k + 1]
    # stride of output axis `positions[k]` expressed in sub-scope flat units
    gather = np.zeros(n, dtype=np.int64)
    for k, p in enumerate(positions):
        gather[p] = sub_strides[k]
    return gather, out_strides


def _gather_index(out_cards: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Flat index into the sub-scope table for every flat output index."""
    gather, out_strides = _strides_for(out_cards, positions)
    size = int(np.prod(out_cards)) if len(out_cards) else 1
    idx = np.zeros(size, dtype=np.int64)
    for axis in range(len(out_cards)):
        if gather[axis] == 0:
            continue
        coord = (np.arange(size) // out_strides[axis]) % out_cards[axis]
        idx += coord * gather[axis]
    return idx


if _HAVE_NUMBA:

    @njit(cache=True)
    def _mul_gather_nb(out, a, b, a_idx, b_idx):  # pragma: no cover - jitted
        for i in range(out.shape[0]):
            out[i] = a[a_idx[i]] * b[b_idx[i]]

    @njit(cache=True)
    def _sum_groups_nb(out, vals, group):  # pragma: no cover - jitted
        for i in range(vals.shape[0]):
            out[group[i]] += vals[i]


def multiply_tables(a_flat: np.ndarray, b_flat: np.ndarray,
                    out_cards: np.ndarray, a_pos: np.ndarray, b_pos: np.ndarray,
                    force: str | None = None) -> np.ndarray:
    """Pointwise product of two tables aligned into a common output scope.

    ``a_pos``/``b_pos`` give, per input variable, its axis in the output
    scope (variables of the output scope are row-major, last fastest).
    """
    size = int(np.prod(out_cards)) if len(out_cards) else 1
    a_idx = _gather_index(out_cards, a_pos)
    b_idx = _gather_index(out_cards, b_pos)
    out = np.empty(size, dtype=np.float64)
    if (force or backend()) == "numba":
        _mul_gather_nb(out, a_flat, b_flat, a_idx, b_idx)
    else:
        np.multiply(a_flat[a_idx], b_flat[b_idx], out=out)
    return out


def sum_out(vals_flat: np.ndarray, cards: np.ndarray, keep_pos: np.ndarray,
            force: str | None = None) -> np.ndarray:
    """Sum a table down to the sub-scope given by ``keep_pos`` (axes kept,
    in their output order)."""
    group = _gather_index(cards, keep_pos)
    out_size = int(np.prod(cards[keep_pos])) if len(keep_pos) else 1
    out = np.zeros(out_size, dtype=np.float64)
    if (force or backend()) == "numba":
        _sum_groups_nb(out, vals_flat, group)
    else:
        np.add.at(out, group, vals_flat)
    return out
