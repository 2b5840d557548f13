"""Gather/scatter index structures that ground binary clauses over edges.

Each binary clause is grounded once per listed edge (x bound to the
source, y to the destination). The index records, per literal, which row
of the unary or binary pre-activation matrix feeds that literal in every
grounding, and the same arrays route residues back. A grounded atom that
occurs in several groundings keeps one entry per occurrence; the
consumers sum them with a scatter-add.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clauses import Clause, Knowledge
from .graphs import GraphData

__all__ = [
    "LiteralSite",
    "ClauseGrounding",
    "GroundingIndex",
    "build_grounding_index",
    "grounding_index_from_edges",
]


@dataclass(frozen=True)
class LiteralSite:
    """Where one literal of a grounded clause reads from and writes back.

    kind is "unary" (rows index the node matrix) or "binary" (rows index
    the edge matrix); position records which variable the literal binds
    ("x", "y", or "xy" for binary predicates).
    """

    kind: str
    column: int
    position: str
    rows: np.ndarray
    negated: bool


@dataclass(frozen=True)
class ClauseGrounding:
    clause_index: int
    clause: Clause
    sites: tuple[LiteralSite, ...]

    @property
    def num_groundings(self) -> int:
        return 0 if not self.sites else int(self.sites[0].rows.shape[0])


@dataclass(frozen=True)
class GroundingIndex:
    num_constants: int
    num_edges: int
    groundings: tuple[ClauseGrounding, ...]

    @property
    def total_grounding_rows(self) -> int:
        return sum(g.num_groundings for g in self.groundings)

    def unary_occurrence_counts(self, num_unary_columns: int) -> np.ndarray:
        """How often each grounded unary atom occurs across all groundings.

        Equivalent to scattering all-ones residues: entry (a, P) counts
        the (clause, position) occurrences of P(a).
        """
        counts = np.zeros((self.num_constants, num_unary_columns))
        for grounding in self.groundings:
            for site in grounding.sites:
                if site.kind == "unary":
                    np.add.at(counts[:, site.column], site.rows, 1.0)
        return counts


def grounding_index_from_edges(
    knowledge: Knowledge, edges: np.ndarray, num_constants: int
) -> GroundingIndex:
    """Build the index for an explicit (G, 2) edge array."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= num_constants):
        raise ValueError("edge endpoint out of range")
    num_groundings = edges.shape[0]
    src, dst = edges[:, 0], edges[:, 1]
    edge_rows = np.arange(num_groundings, dtype=np.int64)

    groundings = []
    for ci in knowledge.binary_clause_indices:
        clause = knowledge.clauses[ci]
        sites = []
        for lit in clause.literals:
            if lit.predicate.arity == 1:
                position = lit.args[0]
                sites.append(
                    LiteralSite(
                        kind="unary",
                        column=knowledge.unary_catalog[lit.predicate.name],
                        position=position,
                        rows=src if position == "x" else dst,
                        negated=lit.negated,
                    )
                )
            else:
                sites.append(
                    LiteralSite(
                        kind="binary",
                        column=knowledge.binary_catalog[lit.predicate.name],
                        position="xy",
                        rows=edge_rows,
                        negated=lit.negated,
                    )
                )
        groundings.append(ClauseGrounding(ci, clause, tuple(sites)))
    return GroundingIndex(num_constants, num_groundings, tuple(groundings))


def build_grounding_index(
    knowledge: Knowledge, data: GraphData, edge_subset=None
) -> GroundingIndex:
    """Index the binary clauses of ``knowledge`` over (a subset of) the
    graph's edges; an empty subset yields an empty index."""
    if edge_subset is None:
        edges = data.edges
    else:
        edges = data.edges[np.asarray(edge_subset, dtype=np.int64)]
    return grounding_index_from_edges(knowledge, edges, data.num_constants)
