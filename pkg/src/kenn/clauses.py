"""First-order clause knowledge: parsing, validation, canonical form.

Knowledge files are line-based (UTF-8, LF). Each non-blank, non-comment
line is one clause::

    weight ':' literal (',' literal)*

``weight`` is either a non-negative decimal (fixed) or ``_`` (learnable).
A literal is an optional negation prefix ``n``, a predicate name, and an
argument list ``(x)``, ``(y)`` or ``(x,y)``. Lines starting with ``#`` and
blank lines are ignored.

Predicates are not inferred from the file: callers declare the unary and
binary predicate catalogs up front, which fixes the column layout of the
pre-activation matrices independently of knowledge edits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

__all__ = [
    "ClauseParseError",
    "PredicateSymbol",
    "Literal",
    "FixedWeight",
    "LearnableWeight",
    "ClauseKind",
    "Clause",
    "Knowledge",
    "parse_knowledge",
    "canonical_string",
    "grounding_count",
    "homophily_rules",
]

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

# One literal: name, '(', var [, var] ')'. Variables are matched loosely so
# that a bad variable gets a targeted error instead of a generic one.
_LITERAL_RE = re.compile(
    r"\s*(?P<name>[A-Za-z][A-Za-z0-9_]*)\s*"
    r"\(\s*(?P<a0>[A-Za-z_][A-Za-z0-9_]*)\s*"
    r"(?:,\s*(?P<a1>[A-Za-z_][A-Za-z0-9_]*)\s*)?\)\s*"
)

DEFAULT_LEARNABLE_INIT = 0.5


class ClauseParseError(ValueError):
    """Structured knowledge-file error with a code and a 1-based position."""

    def __init__(self, code: str, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {code}: {message}")
        self.code = code
        self.line = line
        self.column = column


@dataclass(frozen=True)
class PredicateSymbol:
    name: str
    arity: int

    def __post_init__(self):
        if not _NAME_RE.match(self.name):
            raise ValueError(f"bad predicate name {self.name!r}")
        if self.arity not in (1, 2):
            raise ValueError(f"arity must be 1 or 2, got {self.arity}")


@dataclass(frozen=True)
class Literal:
    """A possibly negated predicate applied to variables x and/or y."""

    predicate: PredicateSymbol
    negated: bool
    args: tuple[str, ...]

    def __post_init__(self):
        if self.predicate.arity == 1 and self.args not in (("x",), ("y",)):
            raise ValueError(f"unary literal args must be (x) or (y), got {self.args}")
        if self.predicate.arity == 2 and self.args != ("x", "y"):
            raise ValueError(f"binary literal args must be (x,y), got {self.args}")

    def __str__(self) -> str:
        prefix = "n" if self.negated else ""
        return f"{prefix}{self.predicate.name}({','.join(self.args)})"


@dataclass(frozen=True)
class FixedWeight:
    value: float

    def __post_init__(self):
        if not (self.value >= 0.0):
            raise ValueError(f"fixed clause weight must be >= 0, got {self.value}")


@dataclass(frozen=True)
class LearnableWeight:
    init: float = DEFAULT_LEARNABLE_INIT

    def __post_init__(self):
        if not (self.init > 0.0):
            raise ValueError(f"learnable weight init must be > 0, got {self.init}")


class ClauseKind(Enum):
    UNARY = "unary"
    BINARY = "binary"


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals with a weight spec.

    ``kind`` is derived: a clause is unary iff every literal is a unary
    predicate applied to x; any use of y or of a binary predicate makes it
    binary (grounded over node pairs).
    """

    literals: tuple[Literal, ...]
    weight: FixedWeight | LearnableWeight
    kind: ClauseKind = field(init=False)

    def __post_init__(self):
        if not self.literals:
            raise ValueError("clause has no literals")
        seen = set()
        for lit in self.literals:
            key = (lit.predicate.name, lit.negated, lit.args)
            if key in seen:
                raise ValueError(f"repeated literal {lit}")
            seen.add(key)
        unary_x_only = all(
            lit.predicate.arity == 1 and lit.args == ("x",) for lit in self.literals
        )
        kind = ClauseKind.UNARY if unary_x_only else ClauseKind.BINARY
        object.__setattr__(self, "kind", kind)

    def __str__(self) -> str:
        return canonical_string(self)


@dataclass(frozen=True)
class Knowledge:
    """Parsed clause set plus the predicate catalogs that fix column order."""

    clauses: tuple[Clause, ...]
    unary_catalog: dict[str, int]
    binary_catalog: dict[str, int]
    unary_clause_indices: tuple[int, ...] = field(init=False)
    binary_clause_indices: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        for clause in self.clauses:
            for lit in clause.literals:
                name, arity = lit.predicate.name, lit.predicate.arity
                catalog = self.unary_catalog if arity == 1 else self.binary_catalog
                other = self.binary_catalog if arity == 1 else self.unary_catalog
                if name not in catalog or name in other:
                    raise ValueError(f"predicate {name}/{arity} not in its catalog")
        unary = tuple(
            i for i, c in enumerate(self.clauses) if c.kind is ClauseKind.UNARY
        )
        binary = tuple(
            i for i, c in enumerate(self.clauses) if c.kind is ClauseKind.BINARY
        )
        object.__setattr__(self, "unary_clause_indices", unary)
        object.__setattr__(self, "binary_clause_indices", binary)

    @property
    def num_unary_predicates(self) -> int:
        return len(self.unary_catalog)

    @property
    def num_binary_predicates(self) -> int:
        return len(self.binary_catalog)

    def unary_clauses(self) -> list[Clause]:
        return [self.clauses[i] for i in self.unary_clause_indices]

    def binary_clauses(self) -> list[Clause]:
        return [self.clauses[i] for i in self.binary_clause_indices]


def _build_catalogs(
    declared_unary: list[str], declared_binary: list[str]
) -> tuple[dict[str, int], dict[str, int]]:
    for name in list(declared_unary) + list(declared_binary):
        if not _NAME_RE.match(name):
            raise ClauseParseError("BadPredicateName", f"bad predicate name {name!r}")
    if len(set(declared_unary)) != len(declared_unary):
        raise ClauseParseError("DuplicatePredicate", "duplicate unary predicate")
    if len(set(declared_binary)) != len(declared_binary):
        raise ClauseParseError("DuplicatePredicate", "duplicate binary predicate")
    overlap = set(declared_unary) & set(declared_binary)
    if overlap:
        raise ClauseParseError(
            "DuplicatePredicate",
            f"predicates declared both unary and binary: {sorted(overlap)}",
        )
    unary = {name: i for i, name in enumerate(declared_unary)}
    binary = {name: i for i, name in enumerate(declared_binary)}
    return unary, binary


def _resolve_predicate(
    token: str,
    unary: dict[str, int],
    binary: dict[str, int],
    line: int,
    column: int,
) -> tuple[PredicateSymbol, bool]:
    """Map a literal name token to (predicate, negated).

    A token is first tried verbatim against the catalogs; only if that
    fails is a leading ``n`` interpreted as negation. Declared names
    therefore always win over the negation reading.
    """
    for name, negated in ((token, False), (token[1:], True)):
        if negated and (not token.startswith("n") or not name):
            continue
        if name in unary:
            return PredicateSymbol(name, 1), negated
        if name in binary:
            return PredicateSymbol(name, 2), negated
    raise ClauseParseError(
        "UnknownPredicate", f"predicate {token!r} is not declared", line, column
    )


def _parse_weight(text: str, line: int) -> FixedWeight | LearnableWeight:
    token = text.strip()
    if token == "_":
        return LearnableWeight()
    try:
        value = float(token)
    except ValueError:
        value = float("nan")
    if not (value == value and abs(value) != float("inf")) or value < 0.0:
        raise ClauseParseError(
            "MalformedWeight",
            f"weight must be a non-negative decimal or '_', got {token!r}",
            line,
            1,
        )
    return FixedWeight(value)


def _parse_literals(
    body: str,
    offset: int,
    unary: dict[str, int],
    binary: dict[str, int],
    line: int,
) -> tuple[Literal, ...]:
    literals: list[Literal] = []
    seen: set[tuple] = set()
    pos = 0
    while True:
        column = offset + pos + 1
        match = _LITERAL_RE.match(body, pos)
        if match is None:
            raise ClauseParseError(
                "MalformedLiteral",
                f"expected a literal at {body[pos:pos + 20]!r}",
                line,
                column,
            )
        args = tuple(a for a in (match.group("a0"), match.group("a1")) if a)
        for arg in args:
            if arg not in ("x", "y"):
                raise ClauseParseError(
                    "BadVariable", f"variable must be x or y, got {arg!r}", line, column
                )
        predicate, negated = _resolve_predicate(
            match.group("name"), unary, binary, line, column
        )
        if len(args) != predicate.arity:
            raise ClauseParseError(
                "ArityMismatch",
                f"{predicate.name} takes {predicate.arity} argument(s), got {len(args)}",
                line,
                column,
            )
        if predicate.arity == 2 and args != ("x", "y"):
            raise ClauseParseError(
                "BadVariable",
                f"binary literal arguments must be (x,y), got ({','.join(args)})",
                line,
                column,
            )
        key = (predicate.name, negated, args)
        if key in seen:
            raise ClauseParseError(
                "RepeatedLiteral",
                f"literal {('n' if negated else '') + predicate.name}"
                f"({','.join(args)}) occurs twice",
                line,
                column,
            )
        seen.add(key)
        literals.append(Literal(predicate, negated, args))
        pos = match.end()
        if pos == len(body):
            return tuple(literals)
        if body[pos] != ",":
            raise ClauseParseError(
                "MalformedLiteral",
                f"expected ',' between literals, got {body[pos]!r}",
                line,
                offset + pos + 1,
            )
        pos += 1


def parse_knowledge(
    text: str,
    declared_unary: list[str],
    declared_binary: list[str],
) -> Knowledge:
    """Parse a knowledge file into clauses plus catalogs.

    Clause order follows file order; catalogs follow declaration order.
    Raises :class:`ClauseParseError` (with line/column) on any violation;
    inputs are never silently repaired.
    """
    unary, binary = _build_catalogs(declared_unary, declared_binary)
    clauses: list[Clause] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        colon = raw.find(":")
        if colon < 0:
            raise ClauseParseError(
                "MalformedWeight", "missing ':' after the weight", lineno, 1
            )
        weight = _parse_weight(raw[:colon], lineno)
        body = raw[colon + 1 :].strip()
        if not body:
            raise ClauseParseError("EmptyClause", "clause has no literals", lineno, colon + 2)
        literals = _parse_literals(
            raw[colon + 1 :], colon + 1, unary, binary, lineno
        )
        clauses.append(Clause(literals, weight))
    return Knowledge(tuple(clauses), unary, binary)


def canonical_string(clause: Clause) -> str:
    """Deterministic one-line form; round-trips through the parser."""
    if isinstance(clause.weight, LearnableWeight):
        weight = "_"
    else:
        weight = repr(clause.weight.value)
    return f"{weight}:{','.join(str(lit) for lit in clause.literals)}"


def grounding_count(
    knowledge: Knowledge, num_constants: int, num_edges: int
) -> tuple[int, int]:
    """(unary, binary) grounding totals: |K_U|*constants and |K_B|*edges."""
    if num_constants < 0 or num_edges < 0:
        raise ValueError("counts must be >= 0")
    return (
        len(knowledge.unary_clause_indices) * num_constants,
        len(knowledge.binary_clause_indices) * num_edges,
    )


def homophily_rules(
    class_names: list[str], relation: str = "Cite", weight: str = "_"
) -> str:
    """Knowledge text stating that related nodes share each class label.

    One clause per class T: ``nT(x),n<relation>(x,y),T(y)``.
    """
    lines = [f"{weight}:n{t}(x),n{relation}(x,y),{t}(y)" for t in class_names]
    return "\n".join(lines) + "\n"
