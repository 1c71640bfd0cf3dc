"""Discrete variables, CPTs, evidence, and the factor algebra.

Tables are dense float64 arrays in row-major layout, last variable fastest.
Factors are immutable values and every operation is a pure function, so
they are safe to use from concurrent queries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    CardinalityMismatch,
    ConflictingEvidence,
    StateOutOfRange,
    VariableNotInScope,
    ZeroMass,
)

ROW_SUM_EXACT = 1e-9   # rows must sum to 1 within this
ROW_SUM_REPAIR = 1e-6  # rows off by more than EXACT but within this are renormalized

# running tally of table cells touched by product/marginalize; used to check
# that filtering cost does not grow with the length of the evidence stream
op_counts = {"cells": 0}


@dataclass(frozen=True)
class Variable:
    """Named discrete variable with ordered state labels.

    Cardinality 1 is legal and models degenerate point-mass quantities.
    """

    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        if len(self.states) < 1:
            raise ValueError(f"variable {self.name!r} needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"variable {self.name!r} has duplicate state labels")

    @property
    def card(self) -> int:
        return len(self.states)

    def state_index(self, label_or_index) -> int:
        if isinstance(label_or_index, (int, np.integer)):
            i = int(label_or_index)
        else:
            try:
                i = self.states.index(str(label_or_index))
            except ValueError:
                raise StateOutOfRange(
                    f"unknown state {label_or_index!r} for variable {self.name!r}",
                    locus=self.name,
                ) from None
        if not 0 <= i < self.card:
            raise StateOutOfRange(
                f"state index {i} out of range for variable {self.name!r}", locus=self.name
            )
        return i


def binary(name: str) -> Variable:
    return Variable(name, ("0", "1"))


class Cpt:
    """Conditional probability table: one probability row over the child's
    states per parent configuration, row-major over ``parents`` with the
    last parent fastest."""

    __slots__ = ("child", "parents", "rows")

    def __init__(self, child: Variable, parents: tuple[Variable, ...], rows):
        rows = np.asarray(rows, dtype=np.float64)
        n_rows = int(np.prod([p.card for p in parents])) if parents else 1
        if rows.shape != (n_rows, child.card):
            raise ValueError(
                f"CPT for {child.name!r} must have shape ({n_rows}, {child.card}), "
                f"got {rows.shape}"
            )
        if np.any(rows < 0) or not np.all(np.isfinite(rows)):
            raise ValueError(f"CPT for {child.name!r} has negative or non-finite entries")
        sums = rows.sum(axis=1)
        err = np.abs(sums - 1.0)
        if np.any(err > ROW_SUM_REPAIR):
            bad = int(np.argmax(err))
            raise ValueError(
                f"CPT row {bad} for {child.name!r} sums to {sums[bad]:.9f}, not 1"
            )
        if np.any(err > ROW_SUM_EXACT):
            rows = rows / sums[:, None]
        self.child = child
        self.parents = tuple(parents)
        self.rows = rows
        self.rows.setflags(write=False)

    def row(self, parent_states: tuple[int, ...]) -> np.ndarray:
        cards = [p.card for p in self.parents]
        idx = 0
        for s, c in zip(parent_states, cards):
            idx = idx * c + s
        return self.rows[idx]

    def __repr__(self):
        ps = ", ".join(p.name for p in self.parents)
        return f"Cpt({self.child.name} | {ps})"


class Factor:
    """Non-negative table over an ordered scope of variables."""

    __slots__ = ("scope", "values")

    def __init__(self, scope: tuple[Variable, ...], values):
        scope = tuple(scope)
        values = np.asarray(values, dtype=np.float64)
        shape = tuple(v.card for v in scope)
        values = values.reshape(shape)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("factor values must be non-negative and finite")
        if len({v.name for v in scope}) != len(scope):
            raise ValueError("factor scope has a repeated variable")
        self.scope = scope
        self.values = values
        self.values.setflags(write=False)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.scope)

    def var(self, name: str) -> Variable:
        for v in self.scope:
            if v.name == name:
                return v
        raise VariableNotInScope(f"{name!r} not in factor scope", locus=name)

    def total(self) -> float:
        return float(self.values.sum())

    def aligned_values(self, scope: tuple[Variable, ...]) -> np.ndarray:
        """Values transposed to match another ordering of the same scope."""
        perm = [self.names.index(v.name) for v in scope]
        return self.values.transpose(perm)

    def __repr__(self):
        return f"Factor({', '.join(self.names)})"


def ones_factor(scope: tuple[Variable, ...]) -> Factor:
    shape = tuple(v.card for v in scope) or (1,)
    f = Factor(scope, np.ones(shape) if scope else np.ones(()))
    return f


def scalar_factor(value: float = 1.0) -> Factor:
    return Factor((), np.asarray(value, dtype=np.float64))


def factor_from_cpt(cpt: Cpt) -> Factor:
    scope = cpt.parents + (cpt.child,)
    return Factor(scope, cpt.rows.reshape(tuple(v.card for v in scope)))


def product(a: Factor, b: Factor) -> Factor:
    for v in a.scope:
        for w in b.scope:
            if v.name == w.name and v.card != w.card:
                raise CardinalityMismatch(
                    f"variable {v.name!r} has cardinality {v.card} vs {w.card}", locus=v.name
                )
    a_names = a.names
    out_scope = a.scope + tuple(v for v in b.scope if v.name not in a_names)
    out_names = [v.name for v in out_scope]
    out_cards = np.array([v.card for v in out_scope], dtype=np.int64)
    a_pos = np.array([out_names.index(n) for n in a_names], dtype=np.int64)
    b_pos = np.array([out_names.index(v.name) for v in b.scope], dtype=np.int64)
    vals = kernels.multiply_tables(a.values.ravel(), b.values.ravel(), out_cards, a_pos, b_pos)
    op_counts["cells"] += vals.size
    return Factor(out_scope, vals)


def marginalize(f: Factor, out: set[str] | list[str]) -> Factor:
    out = {o if isinstance(o, str) else o.name for o in out}
    names = f.names
    missing = out - set(names)
    if missing:
        raise VariableNotInScope(f"cannot marginalize {sorted(missing)}: not in scope")
    keep = [i for i, n in enumerate(names) if n not in out]
    cards = np.array([v.card for v in f.scope], dtype=np.int64)
    vals = kernels.sum_out(f.values.ravel(), cards, np.array(keep, dtype=np.int64))
    op_counts["cells"] += f.values.size
    return Factor(tuple(f.scope[i] for i in keep), vals)


def marginalize_to(f: Factor, keep: list[str]) -> Factor:
    """Marginalize down to ``keep`` (result scope in current scope order)."""
    return marginalize(f, set(f.names) - set(keep))


class Evidence:
    """Per-variable observations: hard state indices or soft likelihood vectors.

    A variable may carry hard or soft evidence, never both.
    """

    __slots__ = ("hard", "soft")

    def __init__(self, hard: dict[str, int] | None = None,
                 soft: dict[str, np.ndarray] | None = None):
        self.hard = dict(hard or {})
        self.soft = {}
        for name, vec in (soft or {}).items():
            vec = np.asarray(vec, dtype=np.float64)
            if np.any(vec < 0) or not np.all(np.isfinite(vec)) or not np.any(vec > 0):
                raise ValueError(
                    f"soft evidence on {name!r} must be non-negative, finite, not all zero"
                )
            self.soft[name] = vec
        overlap = set(self.hard) & set(self.soft)
        if overlap:
            raise ConflictingEvidence(
                f"hard and soft evidence on the same variable(s): {sorted(overlap)}"
            )

    @property
    def names(self) -> set[str]:
        return set(self.hard) | set(self.soft)

    def __bool__(self):
        return bool(self.hard) or bool(self.soft)

    def restricted(self, names) -> "Evidence":
        names = set(names)
        return Evidence(
            {k: v for k, v in self.hard.items() if k in names},
            {k: v for k, v in self.soft.items() if k in names},
        )

    def merged(self, other: "Evidence") -> "Evidence":
        overlap = self.names & other.names
        if overlap:
            raise ConflictingEvidence(f"evidence conflicts on {sorted(overlap)}")
        return Evidence({**self.hard, **other.hard}, {**self.soft, **other.soft})

    def to_json(self) -> dict:
        out: dict = {}
        for k, v in self.hard.items():
            out[k] = int(v)
        for k, vec in self.soft.items():
            out[k] = [float(x) for x in vec]
        return out

    @staticmethod
    def from_json(obj: dict, variables=None) -> "Evidence":
        """Parse ``{var: state-index | state-label | likelihood-list}``.

        With ``variables`` given (a name-to-Variable mapping or an iterable
        of Variables), string values are resolved against state labels and
        vector lengths are checked.
        """
        if variables is not None and not isinstance(variables, dict):
            variables = {v.name: v for v in variables}
        hard: dict[str, int] = {}
        soft: dict[str, np.ndarray] = {}
        for name, val in obj.items():
            var = variables.get(name) if variables else None
            if isinstance(val, list):
                vec = np.asarray(val, dtype=np.float64)
                if var is not None and len(vec) != var.card:
                    raise CardinalityMismatch(
                        f"likelihood for {name!r} has length {len(vec)}, expected {var.card}",
                        locus=name,
                    )
                soft[name] = vec
            elif var is not None:
                hard[name] = var.state_index(val)
            else:
                hard[name] = int(val)
        return Evidence(hard, soft)


def reduce(f: Factor, ev: Evidence) -> Factor:
    """Apply evidence: hard observations select a slice and drop the
    variable; soft likelihoods scale entries and keep the variable.
    Evidence on variables outside the scope is ignored."""
    vals = f.values
    scope = list(f.scope)
    for name, state in ev.hard.items():
        for axis, v in enumerate(scope):
            if v.name == name:
                idx = v.state_index(state)
                vals = np.take(vals, idx, axis=axis)
                scope.pop(axis)
                break
    for name, vec in ev.soft.items():
        for axis, v in enumerate(scope):
            if v.name == name:
                if len(vec) != v.card:
                    raise CardinalityMismatch(
                        f"likelihood for {name!r} has length {len(vec)}, expected {v.card}",
                        locus=name,
                    )
                shape = [1] * len(scope)
                shape[axis] = v.card
                vals = vals * vec.reshape(shape)
                break
    return Factor(tuple(scope), vals)


def normalize(f: Factor) -> tuple[Factor, float]:
    """Scale to total mass 1; returns the prior mass as the constant."""
    mass = f.total()
    if mass <= 0.0:
        raise ZeroMass("factor has zero total mass (impossible evidence)")
    return Factor(f.scope, f.values / mass), mass
