"""Formula strings: ``TARGET ~ T1 + T2 + ...`` with terms ``F`` or ``FA*FB``.

Only this flat grammar is accepted (plus ``1`` for the intercept-only
model); nesting and higher-order products are rejected. Parsed term sets
are normalized under the base-vs-cross redundancy rule.
"""

import re
from collections.abc import Iterable

from .design import ModelSpec, Term, normalize_spec
from .tabular import Schema

__all__ = ["FormulaError", "parse_formula", "render_formula"]

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class FormulaError(ValueError):
    """Formula syntax or lookup error, carrying the 1-based column offset."""

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


def render_formula(target: str, terms: Iterable[Term]) -> str:
    """Canonical formula text; terms sorted by their feature names."""
    ordered = sorted(set(terms), key=lambda t: t.features)
    rhs = " + ".join(t.name for t in ordered) if ordered else "1"
    return f"{target} ~ {rhs}"


def _parse_name(token: str, offset: int, schema: Schema | None) -> str:
    if not _NAME.match(token):
        raise FormulaError(f"invalid feature name {token!r}", offset)
    if schema is not None and token not in schema.feature_names:
        raise FormulaError(
            f"unknown feature {token!r} "
            f"(available: {', '.join(schema.feature_names)})",
            offset,
        )
    return token


def parse_formula(text: str, schema: Schema | None = None) -> tuple[str, ModelSpec]:
    """Parse a formula into (target name, normalized ModelSpec).

    If ``schema`` is given, feature names are validated against it and the
    target must match the schema target. Errors report the 1-based column
    position within ``text``.
    """
    if text.count("~") != 1:
        raise FormulaError("expected exactly one '~'", text.find("~") + 1 or 1)
    tilde = text.index("~")
    target = text[:tilde].strip()
    if not _NAME.match(target):
        raise FormulaError(f"invalid target name {target!r}", 1)
    if schema is not None and target != schema.target:
        raise FormulaError(
            f"target {target!r} does not match table target {schema.target!r}", 1
        )

    terms: set[Term] = set()
    pos = tilde + 1
    rhs = text[tilde + 1 :]
    if not rhs.strip():
        raise FormulaError("empty right-hand side", tilde + 2)
    for piece in rhs.split("+"):
        token = piece.strip()
        offset = pos + piece.index(token) + 1 if token else pos + 1
        if not token:
            raise FormulaError("empty term", offset)
        if token == "1":
            pass  # intercept is always present
        elif "*" in token:
            parts = token.split("*")
            if len(parts) != 2:
                raise FormulaError(
                    "only second-order interactions are supported", offset
                )
            a = _parse_name(parts[0].strip(), offset, schema)
            b_off = offset + token.index("*") + 1
            b = _parse_name(parts[1].strip(), b_off, schema)
            if a == b:
                raise FormulaError(f"cannot cross {a!r} with itself", offset)
            terms.add(Term.cross(a, b))
        else:
            terms.add(Term.base(_parse_name(token, offset, schema)))
        pos += len(piece) + 1
    return target, normalize_spec(terms)
