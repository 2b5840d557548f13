"""Graph data: constants, features, labels, edges, splits, synthetic graphs.

Node files are TSV with one row per node, ``id <TAB> f_0 ... f_{n-1}
<TAB> label``; edge files are TSV with ``src <TAB> dst``. Node ids must be
exactly 0..m-1 (any order). Blank lines and ``#`` comments are skipped in
both.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

__all__ = [
    "GraphData",
    "Split",
    "SplitMode",
    "load_graph",
    "make_split",
    "synth_citation_graph",
    "dense_pairs",
    "random_edges",
]


class SplitMode(Enum):
    INDUCTIVE = "inductive"
    TRANSDUCTIVE = "transductive"

    @classmethod
    def coerce(cls, value) -> "SplitMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def _as_edges(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"edges must be (E, 2), got {arr.shape}")
    return arr


@dataclass
class GraphData:
    """Node features/labels plus an edge list with given relation truths.

    labels is one-hot over the unary class predicates (rows sum to 1);
    binary_given holds one truth value in [0, 1] per (edge, binary
    predicate). Immutable by convention once constructed.
    """

    features: np.ndarray
    labels: np.ndarray
    edges: np.ndarray
    binary_given: np.ndarray
    allow_self_loops: bool = False

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        self.edges = _as_edges(self.edges)
        self.binary_given = np.asarray(self.binary_given, dtype=np.float64)
        m = self.features.shape[0]
        if self.labels.shape[0] != m:
            raise ValueError("features and labels disagree on node count")
        if self.labels.size and not np.allclose(self.labels.sum(axis=1), 1.0):
            raise ValueError("label rows must sum to 1 (single-topic one-hot)")
        if self.binary_given.shape[0] != self.edges.shape[0]:
            raise ValueError("binary_given must have one row per edge")
        if self.edges.size:
            if self.edges.min() < 0 or self.edges.max() >= m:
                raise ValueError("edge endpoint out of range")
            if not self.allow_self_loops and (
                self.edges[:, 0] == self.edges[:, 1]
            ).any():
                raise ValueError("self-loop present (pass allow_self_loops=True)")

    @property
    def num_constants(self) -> int:
        return self.features.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def node_classes(self) -> np.ndarray:
        return self.labels.argmax(axis=1)


@dataclass
class Split:
    """Train/test node partition plus the edge subsets each phase may see."""

    train_nodes: np.ndarray
    test_nodes: np.ndarray
    mode: SplitMode
    train_edges: np.ndarray
    eval_edges: np.ndarray

    def __post_init__(self):
        self.train_nodes = np.asarray(self.train_nodes, dtype=np.int64)
        self.test_nodes = np.asarray(self.test_nodes, dtype=np.int64)
        self.train_edges = np.asarray(self.train_edges, dtype=np.int64)
        self.eval_edges = np.asarray(self.eval_edges, dtype=np.int64)
        if np.intersect1d(self.train_nodes, self.test_nodes).size:
            raise ValueError("train and test nodes overlap")


def _parse_catalog(catalog) -> dict[str, int]:
    if isinstance(catalog, dict):
        return dict(catalog)
    return {name: i for i, name in enumerate(catalog)}


def _data_lines(path: Path):
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").split("\n"), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped


def load_graph(
    node_file,
    edge_file,
    unary_catalog,
    binary_catalog,
    symmetrize: bool = False,
    allow_self_loops: bool = False,
) -> GraphData:
    """Read TSV node/edge files into a GraphData.

    Every listed edge gets truth value 1.0 in each declared binary
    predicate column (presence means the relation holds). With
    ``symmetrize`` the reverse of each edge is appended unless that exact
    pair is already listed. Duplicate edges are kept with a warning.
    """
    unary = _parse_catalog(unary_catalog)
    binary = _parse_catalog(binary_catalog)
    node_path, edge_path = Path(node_file), Path(edge_file)

    rows: dict[int, tuple[list[float], str]] = {}
    width = None
    for lineno, line in _data_lines(node_path):
        fields = line.split("\t")
        if len(fields) < 3:
            raise ValueError(
                f"{node_path.name}:{lineno}: need id, features, label (tab-separated)"
            )
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ValueError(
                f"{node_path.name}:{lineno}: ragged row "
                f"({len(fields)} fields, expected {width})"
            )
        node_id = int(fields[0])
        label = fields[-1]
        if label not in unary:
            raise ValueError(f"{node_path.name}:{lineno}: unknown label {label!r}")
        if node_id in rows:
            raise ValueError(f"{node_path.name}:{lineno}: duplicate node id {node_id}")
        rows[node_id] = ([float(v) for v in fields[1:-1]], label)

    m = len(rows)
    if set(rows) != set(range(m)):
        raise ValueError(f"{node_path.name}: node ids must be exactly 0..{m - 1}")
    n = width - 2
    features = np.zeros((m, n))
    labels = np.zeros((m, len(unary)))
    for node_id, (feat, label) in rows.items():
        features[node_id] = feat
        labels[node_id, unary[label]] = 1.0

    edge_list: list[tuple[int, int]] = []
    seen_edges: set[tuple[int, int]] = set()
    for lineno, line in _data_lines(edge_path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(f"{edge_path.name}:{lineno}: need 'src<TAB>dst'")
        src, dst = int(fields[0]), int(fields[1])
        if not (0 <= src < m and 0 <= dst < m):
            raise ValueError(
                f"{edge_path.name}:{lineno}: endpoint out of range for {m} nodes"
            )
        if (src, dst) in seen_edges:
            warnings.warn(
                f"{edge_path.name}:{lineno}: duplicate edge ({src}, {dst}) kept",
                stacklevel=2,
            )
        seen_edges.add((src, dst))
        edge_list.append((src, dst))

    if symmetrize:
        for src, dst in list(edge_list):
            if src != dst and (dst, src) not in seen_edges:
                seen_edges.add((dst, src))
                edge_list.append((dst, src))

    edges = _as_edges(edge_list)
    binary_given = np.ones((edges.shape[0], len(binary)))
    return GraphData(
        features, labels, edges, binary_given, allow_self_loops=allow_self_loops
    )


def make_split(
    data: GraphData, train_fraction: float, mode, seed: int
) -> Split:
    """Deterministic class-balanced split; edge subsets follow the mode.

    Train class counts differ by at most one. In inductive mode, training
    sees only edges inside the train set and evaluation only edges inside
    the test set (cross edges are dropped); in transductive mode both
    phases see every edge.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    mode = SplitMode.coerce(mode)
    rng = np.random.default_rng(seed)
    m = data.num_constants
    classes = data.node_classes
    num_classes = data.labels.shape[1]
    total = int(round(train_fraction * m))
    total = min(max(total, 1), m - 1)
    base, extra = divmod(total, num_classes)
    quotas = np.full(num_classes, base, dtype=np.int64)
    quotas[rng.permutation(num_classes)[:extra]] += 1

    train_parts = []
    for c in range(num_classes):
        members = np.flatnonzero(classes == c)
        if quotas[c] > members.size:
            raise ValueError(
                f"class {c} has {members.size} nodes, cannot draw {quotas[c]} "
                "for a balanced train set"
            )
        train_parts.append(rng.choice(members, size=quotas[c], replace=False))
    train_nodes = np.sort(np.concatenate(train_parts))
    in_train = np.zeros(m, dtype=bool)
    in_train[train_nodes] = True
    test_nodes = np.flatnonzero(~in_train)

    src, dst = data.edges[:, 0], data.edges[:, 1]
    if mode is SplitMode.TRANSDUCTIVE:
        all_edges = np.arange(data.num_edges, dtype=np.int64)
        train_edges = eval_edges = all_edges
    else:
        train_edges = np.flatnonzero(in_train[src] & in_train[dst])
        eval_edges = np.flatnonzero(~in_train[src] & ~in_train[dst])
    return Split(train_nodes, test_nodes, mode, train_edges, eval_edges)


def synth_citation_graph(
    num_nodes: int,
    num_classes: int,
    feature_dim: int,
    p_in: float,
    p_out: float,
    seed: int,
    feature_on: float = 0.3,
    feature_off: float = 0.05,
    num_binary_predicates: int = 1,
) -> GraphData:
    """Desk-scale citation-style graph with controllable homophily.

    Nodes are split evenly across classes. Each class owns a block of
    feature dimensions activated with probability ``feature_on`` (others
    with ``feature_off``). Each ordered pair (a, b), a != b, becomes an
    edge with probability ``p_in`` when the classes match and ``p_out``
    otherwise, so p_in > p_out gives homophily and p_in < p_out gives an
    anti-homophilous graph.
    """
    for name, p in (
        ("p_in", p_in),
        ("p_out", p_out),
        ("feature_on", feature_on),
        ("feature_off", feature_off),
    ):
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"{name} must be in [0, 1], got {p}")
    if num_nodes % num_classes != 0:
        raise ValueError("num_nodes must be divisible by num_classes")
    rng = np.random.default_rng(seed)

    per_class = num_nodes // num_classes
    classes = np.repeat(np.arange(num_classes), per_class)
    block = feature_dim // num_classes
    on_prob = np.full((num_nodes, feature_dim), feature_off)
    for c in range(num_classes):
        lo, hi = c * block, (c + 1) * block
        on_prob[classes == c, lo:hi] = feature_on
    features = (rng.random((num_nodes, feature_dim)) < on_prob).astype(np.float64)

    labels = np.zeros((num_nodes, num_classes))
    labels[np.arange(num_nodes), classes] = 1.0

    same = classes[:, None] == classes[None, :]
    edge_prob = np.where(same, p_in, p_out)
    np.fill_diagonal(edge_prob, 0.0)
    edges = np.argwhere(rng.random((num_nodes, num_nodes)) < edge_prob)
    binary_given = np.ones((edges.shape[0], num_binary_predicates))
    return GraphData(features, labels, _as_edges(edges), binary_given)


def dense_pairs(num_nodes: int, include_self: bool = True) -> np.ndarray:
    """All ordered pairs over the constants (m*m rows, or m*(m-1) without
    the diagonal)."""
    a = np.repeat(np.arange(num_nodes, dtype=np.int64), num_nodes)
    b = np.tile(np.arange(num_nodes, dtype=np.int64), num_nodes)
    pairs = np.stack([a, b], axis=1)
    if not include_self:
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    return pairs


def random_edges(num_nodes: int, num_edges: int, seed: int) -> np.ndarray:
    """Uniform random ordered pairs with distinct endpoints (for benchmarks)."""
    rng = np.random.default_rng(seed)
    src = rng.integers(0, num_nodes, size=num_edges)
    offset = rng.integers(1, num_nodes, size=num_edges)
    dst = (src + offset) % num_nodes
    return np.stack([src, dst], axis=1).astype(np.int64)
