"""Candidate terms and one-hot design matrices with interaction crossing.

A term is either a base categorical feature or an unordered pair of features
(a second-order cross). Crossed terms are encoded over the level pairs that
actually occur in the data; each term drops one reference level so the
design stays full rank alongside the intercept.
"""

from collections.abc import Iterable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .tabular import DataTable, Schema

__all__ = [
    "Term",
    "ModelSpec",
    "DesignColumn",
    "DesignMatrix",
    "enumerate_terms",
    "normalize_spec",
    "build_design",
]


@dataclass(frozen=True)
class Term:
    """A base feature or a canonical (sorted) pair of distinct features."""

    features: tuple[str, ...]

    def __post_init__(self):
        if len(self.features) not in (1, 2):
            raise ValueError("a term names one feature or a pair of features")
        if len(self.features) == 2:
            a, b = self.features
            if a == b:
                raise ValueError(f"cannot cross feature {a!r} with itself")
            if a > b:
                raise ValueError("cross terms must store features in sorted order")

    @staticmethod
    def base(feature: str) -> "Term":
        return Term((feature,))

    @staticmethod
    def cross(a: str, b: str) -> "Term":
        return Term(tuple(sorted((a, b))))

    @property
    def is_cross(self) -> bool:
        return len(self.features) == 2

    @property
    def name(self) -> str:
        return "*".join(self.features)

    @property
    def sort_key(self) -> tuple:
        # bases before crosses, lexicographic within each group
        return (len(self.features), self.features)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ModelSpec:
    """A normalized set of terms; the intercept is always implied here.

    Normalized means no base term whose feature already participates in a
    cross term of the set (redundant: the cross columns span the base's
    indicator space).
    """

    terms: frozenset[Term]
    include_intercept: bool = True

    def __post_init__(self):
        crossed = {f for t in self.terms if t.is_cross for f in t.features}
        for t in self.terms:
            if not t.is_cross and t.features[0] in crossed:
                raise ValueError(
                    f"base term {t.name!r} is redundant with a cross term; "
                    "use normalize_spec"
                )

    @property
    def sorted_terms(self) -> tuple[Term, ...]:
        """Terms in encoding order: bases first, then crosses, lexicographic."""
        return tuple(sorted(self.terms, key=lambda t: t.sort_key))


def enumerate_terms(schema: Schema) -> list[Term]:
    """All base terms plus all pairwise cross terms, canonically ordered."""
    names = sorted(schema.feature_names)
    terms = [Term.base(f) for f in names]
    terms.extend(
        Term.cross(names[i], names[j])
        for i in range(len(names))
        for j in range(i + 1, len(names))
    )
    return terms


def normalize_spec(terms: Iterable[Term]) -> ModelSpec:
    """Drop base terms whose feature appears in any cross term. Idempotent."""
    terms = set(terms)
    crossed = {f for t in terms if t.is_cross for f in t.features}
    kept = frozenset(t for t in terms if t.is_cross or t.features[0] not in crossed)
    return ModelSpec(terms=kept)


class DesignColumn(NamedTuple):
    term: Term | None  # None marks the intercept
    label: str


@dataclass(frozen=True)
class DesignMatrix:
    """Dense 0/1 design with a leading intercept and per-column provenance."""

    values: np.ndarray  # (n, p) float64
    columns: tuple[DesignColumn, ...]
    target_name: str

    def __post_init__(self):
        if self.values.shape[1] != len(self.columns):
            raise ValueError("values/columns width mismatch")
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def term_columns(self, term: Term) -> list[int]:
        """Indices of the indicator columns encoding one term."""
        idx = [j for j, col in enumerate(self.columns) if col.term == term]
        if not idx:
            raise KeyError(f"term {term.name!r} not in design")
        return idx

    def indices_for_terms(self, terms: Iterable[Term]) -> list[int]:
        """Intercept plus the column blocks of ``terms`` in canonical order."""
        idx = [0]
        for t in sorted(set(terms), key=lambda t: t.sort_key):
            idx.extend(self.term_columns(t))
        return idx


def _encode_base(table: DataTable, term: Term) -> tuple[np.ndarray, list[str]]:
    feature = term.features[0]
    fi = table.schema.feature_index(feature)
    levels = table.schema.levels(feature)
    codes = table.rows[:, fi]
    # reference level = first level in schema order
    block = (codes[:, None] == np.arange(1, len(levels))).astype(np.float64)
    labels = [f"{feature}={lvl}" for lvl in levels[1:]]
    return block, labels


def _encode_cross(table: DataTable, term: Term) -> tuple[np.ndarray, list[str]]:
    fa, fb = term.features
    ia, ib = table.schema.feature_index(fa), table.schema.feature_index(fb)
    la, lb = table.schema.levels(fa), table.schema.levels(fb)
    codes = table.rows[:, ia] * len(lb) + table.rows[:, ib]
    observed = np.unique(codes)  # sorted by (level_a, level_b) schema order
    # first observed pair is the reference
    block = (codes[:, None] == observed[1:]).astype(np.float64)
    labels = [
        f"{fa}*{fb}={la[c // len(lb)]}:{lb[c % len(lb)]}" for c in observed[1:]
    ]
    return block, labels


def build_design(
    table: DataTable, spec: ModelSpec | Iterable[Term]
) -> DesignMatrix:
    """One-hot encode a term collection against a table.

    Accepts a normalized ModelSpec or any iterable of terms (the greedy
    searches encode all bases and all crosses together, which a normalized
    spec cannot express). Column order: intercept, then term blocks in
    canonical order (bases first, lexicographic; then crosses).
    """
    if isinstance(spec, ModelSpec):
        if not spec.include_intercept and not spec.terms:
            raise ValueError("empty spec with intercept disabled")
        terms = spec.sorted_terms
    else:
        terms = tuple(sorted(set(spec), key=lambda t: t.sort_key))
    known = set(table.schema.feature_names)
    for t in terms:
        for f in t.features:
            if f not in known:
                raise KeyError(f"term {t.name!r} references unknown feature {f!r}")

    blocks = [np.ones((table.n, 1))]
    columns: list[DesignColumn] = [DesignColumn(None, "Intercept")]
    for t in terms:
        block, labels = _encode_cross(table, t) if t.is_cross else _encode_base(table, t)
        blocks.append(block)
        columns.extend(DesignColumn(t, lab) for lab in labels)
    values = np.ascontiguousarray(np.hstack(blocks))
    return DesignMatrix(
        values=values, columns=tuple(columns), target_name=table.schema.target
    )
