"""Recursive structural feature learning with redundancy pruning.

Primitives (degree, wedge, triangle, egonet, core) seed the feature set;
neighbor-aggregation operators grow it iteratively; vertical log binning plus
an agreement threshold builds a feature graph whose connected components are
collapsed to their earliest member. Descriptors record how to rebuild every
surviving column on any other graph.

Aggregations sort neighbor values before reducing, so equal value multisets
produce bitwise-equal results; feature rows of automorphically equivalent
nodes are therefore exactly equal, not merely close.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph

PRIMITIVE_KINDS = (
    "degree",
    "weighted-degree",
    "wedge-count",
    "triangle-count",
    "egonet-internal-edges",
    "egonet-external-edges",
    "core-number",
    "in-degree",
    "out-degree",
)
OPERATOR_KINDS = ("sum", "mean", "max", "min", "mode")

DEFAULT_PRIMITIVES = (
    "degree",
    "weighted-degree",
    "wedge-count",
    "triangle-count",
    "egonet-internal-edges",
    "egonet-external-edges",
    "core-number",
)
DEFAULT_OPERATORS = ("sum", "mean")


@dataclass(frozen=True)
class FeatureDescriptor:
    """Reproducible recipe for one feature column.

    kind "primitive" names a structural primitive; "composite" applies an
    aggregation operator to the column of an earlier descriptor (base id);
    "attribute" passes through an externally supplied column by index.
    """

    id: int
    kind: str
    primitive: str | None = None
    operator: str | None = None
    base: int | None = None
    attribute: int | None = None
    iteration: int = 0

    def __post_init__(self):
        if self.kind == "primitive":
            if self.primitive not in PRIMITIVE_KINDS:
                raise ValueError(f"unknown primitive {self.primitive!r}")
        elif self.kind == "composite":
            if self.operator not in OPERATOR_KINDS:
                raise ValueError(f"unknown operator {self.operator!r}")
            if self.base is None or self.base < 0 or self.base >= self.id:
                raise ValueError("composite base id must precede its own id")
        elif self.kind == "attribute":
            if self.attribute is None or self.attribute < 0:
                raise ValueError("attribute descriptor needs a column index")
        else:
            raise ValueError(f"unknown descriptor kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Non-negative node-by-feature values plus the recipes that made them.

    iteration_sizes records the surviving feature count after each pruning
    round when produced by learn_features (index 0 = pruned primitives).
    """

    values: np.ndarray
    descriptors: tuple[FeatureDescriptor, ...]
    iteration_sizes: tuple[int, ...] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        if values.shape[1] != len(self.descriptors):
            raise ValueError("one descriptor per column required")
        if values.size and (not np.isfinite(values).all() or (values < 0).any()):
            raise ValueError("feature values must be finite and non-negative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "descriptors", tuple(self.descriptors))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def f(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class BinnedColumn:
    """Vertical log-bin assignment of one column."""

    bins: tuple[int, ...]
    bin_count: int
    fraction: float


@dataclass(frozen=True)
class FeatureGraph:
    """Similarity graph over feature ids; stored edges have sim >= lam."""

    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    similarity: dict[tuple[int, int], float]
    threshold: float


@dataclass(frozen=True, eq=False)
class FeatureLearnConfig:
    primitives: tuple[str, ...] = DEFAULT_PRIMITIVES
    operators: tuple[str, ...] = DEFAULT_OPERATORS
    bin_fraction: float = 0.5
    threshold: float = 1.0
    maxiter: int = 10
    similarity: str = "binned-agreement"
    tiebreak: str = "earliest"
    attributes: np.ndarray | None = None


def _triangle_counts(g: Graph) -> np.ndarray:
    adj = [set(nbrs) for nbrs in g.neighbors]
    undirected = {(min(e), max(e)) for e in g.edges}
    tri = np.zeros(g.n)
    for u, v in undirected:
        common = len(adj[u] & adj[v])
        tri[u] += common
        tri[v] += common
    # each triangle at a node is counted once per incident triangle edge
    return tri / 2.0


def _core_numbers(g: Graph) -> np.ndarray:
    deg = [len(nbrs) for nbrs in g.neighbors]
    adj = [set(nbrs) for nbrs in g.neighbors]
    removed = [False] * g.n
    core = [0] * g.n
    level = 0
    for _ in range(g.n):
        u = min((x for x in range(g.n) if not removed[x]), key=lambda x: deg[x])
        level = max(level, deg[u])
        core[u] = level
        removed[u] = True
        for v in adj[u]:
            if not removed[v]:
                deg[v] -= 1
    return np.array(core, dtype=float)


def compute_primitive(g: Graph, kind: str) -> np.ndarray:
    """Evaluate a structural primitive at every node.

    All values are non-negative and depend only on the graph up to
    relabeling. in/out-degree require directed=True; plain degree counts all
    adjacent nodes on either graph kind.
    """
    if kind not in PRIMITIVE_KINDS:
        raise ValueError(f"unknown primitive {kind!r}")
    if kind in ("in-degree", "out-degree") and not g.directed:
        raise ValueError(f"{kind} requires a directed graph")
    if kind == "degree":
        return np.array([len(nbrs) for nbrs in g.neighbors], dtype=float)
    if kind == "in-degree":
        return np.array([len(nbrs) for nbrs in g.in_neighbors], dtype=float)
    if kind == "out-degree":
        return np.array([len(nbrs) for nbrs in g.out_neighbors], dtype=float)
    if kind == "weighted-degree":
        col = np.zeros(g.n)
        for u in range(g.n):
            ws = np.sort([g.edge_weight(u, v) for v in g.neighbors[u]])
            col[u] = ws.sum() if ws.size else 0.0
        return col
    if kind == "wedge-count":
        deg = np.array([len(nbrs) for nbrs in g.neighbors], dtype=float)
        return deg * (deg - 1) / 2.0
    if kind == "triangle-count":
        return _triangle_counts(g)
    if kind == "egonet-internal-edges":
        # edges inside ego(u) = u's incident edges plus edges between
        # neighbors; the latter equal the triangle count at u
        deg = np.array([len(nbrs) for nbrs in g.neighbors], dtype=float)
        return deg + _triangle_counts(g)
    if kind == "egonet-external-edges":
        deg = np.array([len(nbrs) for nbrs in g.neighbors], dtype=float)
        internal = deg + _triangle_counts(g)
        ego_degree_sum = np.array(
            [deg[u] + sum(deg[v] for v in g.neighbors[u]) for u in range(g.n)]
        )
        return ego_degree_sum - 2.0 * internal
    if kind == "core-number":
        return _core_numbers(g)
    raise AssertionError(kind)


def _aggregate_block(g: Graph, block: np.ndarray, op: str) -> np.ndarray:
    """Apply one neighbor aggregation to every column of block at once."""
    out = np.zeros_like(block)
    if op == "mode":
        floored = np.floor(block)
        for u in range(g.n):
            nbrs = list(g.neighbors[u])
            if not nbrs:
                continue
            vals = floored[nbrs]
            for j in range(block.shape[1]):
                uniq, counts = np.unique(vals[:, j], return_counts=True)
                out[u, j] = uniq[np.argmax(counts)]  # ties: smallest value
        return out
    for u in range(g.n):
        nbrs = list(g.neighbors[u])
        if not nbrs:
            continue
        vals = np.sort(block[nbrs], axis=0)  # fixed order: bitwise-stable sums
        if op == "sum":
            out[u] = vals.sum(axis=0)
        elif op == "mean":
            out[u] = vals.sum(axis=0) / len(nbrs)
        elif op == "max":
            out[u] = vals[-1]
        elif op == "min":
            out[u] = vals[0]
        else:
            raise ValueError(f"unknown operator {op!r}")
    return out


def apply_operator(g: Graph, x: FeatureMatrix, base: int, op: str) -> np.ndarray:
    """Aggregate the column of descriptor id `base` over each node's
    neighbors. Isolated nodes get 0."""
    if op not in OPERATOR_KINDS:
        raise ValueError(f"unknown operator {op!r}")
    by_id = {d.id: j for j, d in enumerate(x.descriptors)}
    if base not in by_id:
        raise ValueError(f"no feature with descriptor id {base}")
    col = x.values[:, [by_id[base]]]
    return _aggregate_block(g, col, op)[:, 0]


def vertical_log_bin(column, p: float = 0.5) -> BinnedColumn:
    """Assign ceil(p * remaining) smallest values to each successive bin.

    Values tying the bin boundary join the lower bin, so equal values never
    split across bins.
    """
    if not 0 < p < 1:
        raise ValueError("bin fraction p must lie strictly between 0 and 1")
    values = np.asarray(column, dtype=float)
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    bins = np.zeros(n, dtype=int)
    i, b = 0, 0
    while i < n:
        k = math.ceil(p * (n - i))
        boundary = values[order[i + k - 1]]
        j = i + k
        while j < n and values[order[j]] == boundary:
            j += 1
        bins[order[i:j]] = b
        i, b = j, b + 1
    return BinnedColumn(bins=tuple(int(x) for x in bins), bin_count=b, fraction=p)


def feature_similarity(a: BinnedColumn, b: BinnedColumn) -> float:
    """Agreement rate of two binned columns: fraction of nodes in the same
    bin index. 1.0 iff identical."""
    if len(a.bins) != len(b.bins):
        raise ValueError("binned columns cover different node counts")
    if not a.bins:
        return 1.0
    agree = sum(1 for x, y in zip(a.bins, b.bins) if x == y)
    return agree / len(a.bins)


def _pearson_similarity(cols: np.ndarray) -> np.ndarray:
    f = cols.shape[1]
    sims = np.zeros((f, f))
    std = cols.std(axis=0)
    for i in range(f):
        for j in range(i, f):
            if std[i] == 0 and std[j] == 0:
                s = 1.0
            elif std[i] == 0 or std[j] == 0:
                s = 0.0
            else:
                s = abs(float(np.corrcoef(cols[:, i], cols[:, j])[0, 1]))
            sims[i, j] = sims[j, i] = s
    return sims


def create_feature_graph(
    x: FeatureMatrix, p: float = 0.5, lam: float = 1.0, similarity: str = "binned-agreement"
) -> FeatureGraph:
    """Vertex per feature id; edge (i, j) iff similarity >= lam.

    Only edges are materialized. At lam = 1.0 binned agreement holds exactly
    when the bin vectors are identical, so features are grouped by vector
    instead of compared all-pairs; below 1.0 the pairwise agreement matrix is
    computed in column blocks to bound memory at O(n * block * f).
    """
    if not 0 < lam <= 1:
        raise ValueError("lambda threshold must lie in (0, 1]")
    ids = tuple(d.id for d in x.descriptors)
    if x.f == 0:
        return FeatureGraph(ids, frozenset(), {}, lam)
    edges: dict[tuple[int, int], float] = {}
    if x.n == 0:
        # vacuous agreement, matching feature_similarity on empty columns
        for i in range(x.f):
            for j in range(i + 1, x.f):
                edges[(ids[i], ids[j])] = 1.0
        return FeatureGraph(ids, frozenset(edges), edges, lam)
    if similarity == "binned-agreement":
        bins = np.stack(
            [np.array(vertical_log_bin(x.values[:, j], p).bins) for j in range(x.f)], axis=1
        )
        if lam == 1.0:
            groups: dict[bytes, list[int]] = {}
            for j in range(x.f):
                groups.setdefault(np.ascontiguousarray(bins[:, j]).tobytes(), []).append(j)
            for members in groups.values():
                for a in range(len(members)):
                    for b in range(a + 1, len(members)):
                        edges[(ids[members[a]], ids[members[b]])] = 1.0
            return FeatureGraph(ids, frozenset(edges), edges, lam)
        block = max(1, (1 << 24) // max(1, x.n * x.f))
        for start in range(0, x.f, block):
            stop = min(start + block, x.f)
            sims = (bins[:, start:stop, None] == bins[:, None, :]).mean(axis=0)
            near = np.argwhere(sims >= lam)
            for bi, j in near:
                i = start + int(bi)
                if i < j:
                    edges[(ids[i], ids[int(j)])] = float(sims[bi, j])
        return FeatureGraph(ids, frozenset(edges), edges, lam)
    if similarity == "pearson":
        sims = _pearson_similarity(x.values)
    else:
        raise ValueError(f"unknown similarity {similarity!r}")
    for i in range(x.f):
        for j in range(i + 1, x.f):
            if sims[i, j] >= lam:
                edges[(ids[i], ids[j])] = float(sims[i, j])
    return FeatureGraph(ids, frozenset(edges), edges, lam)


def _components(fg: FeatureGraph) -> list[list[int]]:
    index = {v: i for i, v in enumerate(fg.vertices)}
    parent = list(range(len(fg.vertices)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in fg.edges:
        ra, rb = find(index[a]), find(index[b])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for v in fg.vertices:
        groups.setdefault(find(index[v]), []).append(v)
    return sorted((sorted(g) for g in groups.values()), key=lambda c: c[0])


def prune_feature_set(fg: FeatureGraph, x: FeatureMatrix, tiebreak: str = "earliest") -> FeatureMatrix:
    """Collapse each connected component of the feature graph to one feature.

    "earliest" keeps the smallest descriptor id; "min-similarity" keeps the
    component member with the smallest mean similarity to its co-members
    (over stored edges), id as tiebreak.
    """
    if tuple(d.id for d in x.descriptors) != fg.vertices:
        raise ValueError("feature graph was not built over this matrix")
    keep: set[int] = set()
    for comp in _components(fg):
        if tiebreak == "earliest" or len(comp) == 1:
            keep.add(comp[0])
        elif tiebreak == "min-similarity":
            members = set(comp)

            def mean_sim(fid: int) -> float:
                sims = [s for (a, b), s in fg.similarity.items()
                        if (a == fid and b in members) or (b == fid and a in members)]
                return sum(sims) / len(sims) if sims else 0.0

            keep.add(min(comp, key=lambda fid: (mean_sim(fid), fid)))
        else:
            raise ValueError(f"unknown tiebreak {tiebreak!r}")
    cols = [j for j, d in enumerate(x.descriptors) if d.id in keep]
    return FeatureMatrix(
        values=x.values[:, cols],
        descriptors=tuple(x.descriptors[j] for j in cols),
        iteration_sizes=x.iteration_sizes,
    )


def _required_ancestors(descriptors_by_id: dict[int, FeatureDescriptor], kept: set[int]) -> set[int]:
    needed = set()
    stack = list(kept)
    while stack:
        d = descriptors_by_id[stack.pop()]
        if d.kind == "composite" and d.base not in kept and d.base not in needed:
            needed.add(d.base)
            stack.append(d.base)
    return needed


def learn_features(g: Graph, config: FeatureLearnConfig = FeatureLearnConfig()) -> FeatureMatrix:
    """Run the recursive feature-learning loop.

    Iteration 0 evaluates primitives (plus attribute columns) and prunes.
    Each later iteration applies every operator to every surviving feature,
    merges with the survivors, rebuilds the feature graph, and prunes again;
    the loop stops when no new feature survives or maxiter is reached.

    At threshold < 1.0 a pruned old feature could orphan the recipe of a
    surviving composite; such ancestors are re-protected after each prune so
    every returned descriptor list stays evaluable via recompute. This never
    triggers at the default threshold of 1.0.
    """
    if config.maxiter < 1:
        raise ValueError("maxiter must be >= 1")
    if not config.primitives:
        raise ValueError("primitive set must not be empty")
    primitives = []
    for kind in config.primitives:
        if kind == "degree" and g.directed:
            primitives.extend(["in-degree", "out-degree"])
        else:
            primitives.append(kind)

    columns: list[np.ndarray] = []
    descriptors: list[FeatureDescriptor] = []
    for kind in primitives:
        descriptors.append(FeatureDescriptor(id=len(descriptors), kind="primitive", primitive=kind))
        columns.append(compute_primitive(g, kind))
    if config.attributes is not None:
        attrs = np.asarray(config.attributes, dtype=float)
        if attrs.ndim == 1:
            attrs = attrs[:, None]
        if attrs.shape[0] != g.n:
            raise ValueError("attribute columns must have one row per node")
        if attrs.size and ((attrs < 0).any() or not np.isfinite(attrs).all()):
            raise ValueError("attribute columns must be finite and non-negative")
        for k in range(attrs.shape[1]):
            descriptors.append(
                FeatureDescriptor(id=len(descriptors), kind="attribute", attribute=k)
            )
            columns.append(attrs[:, k])
    next_id = len(descriptors)
    all_by_id = {d.id: d for d in descriptors}

    def prune_round(cols: list[np.ndarray], descs: list[FeatureDescriptor]):
        fm = FeatureMatrix(np.column_stack(cols) if cols else np.zeros((g.n, 0)), tuple(descs))
        fg = create_feature_graph(fm, config.bin_fraction, config.threshold, config.similarity)
        pruned = prune_feature_set(fg, fm, config.tiebreak)
        kept = {d.id for d in pruned.descriptors}
        protected = _required_ancestors(all_by_id, kept)
        if protected:
            kept |= protected
            keep_cols = [j for j, d in enumerate(descs) if d.id in kept]
            return [cols[j] for j in keep_cols], [descs[j] for j in keep_cols]
        by_id = {d.id: j for j, d in enumerate(descs)}
        return (
            [cols[by_id[d.id]] for d in pruned.descriptors],
            list(pruned.descriptors),
        )

    columns, descriptors = prune_round(columns, descriptors)
    sizes = [len(descriptors)]

    for iteration in range(1, config.maxiter + 1):
        prior_ids = {d.id for d in descriptors}
        cand_cols: list[np.ndarray] = []
        cand_descs: list[FeatureDescriptor] = []
        base_block = np.column_stack(columns)
        for op in config.operators:
            agg = _aggregate_block(g, base_block, op)
            for j, d in enumerate(descriptors):
                cand_descs.append(
                    FeatureDescriptor(
                        id=next_id, kind="composite", operator=op, base=d.id, iteration=iteration
                    )
                )
                all_by_id[next_id] = cand_descs[-1]
                next_id += 1
                cand_cols.append(agg[:, j])
        columns, descriptors = prune_round(columns + cand_cols, descriptors + cand_descs)
        sizes.append(len(descriptors))
        if {d.id for d in descriptors} == prior_ids:
            break

    return FeatureMatrix(
        values=np.column_stack(columns) if columns else np.zeros((g.n, 0)),
        descriptors=tuple(descriptors),
        iteration_sizes=tuple(sizes),
    )


def recompute(g: Graph, descriptors, attributes=None) -> FeatureMatrix:
    """Evaluate a descriptor list on a graph, in id order, with no pruning.

    Composite bases must appear earlier in the list (malformed DAGs are
    rejected). Attribute descriptors read from the supplied attributes array.
    """
    descriptors = tuple(descriptors)
    seen: set[int] = set()
    values: dict[int, np.ndarray] = {}
    cols = []
    last_id = -1
    for d in descriptors:
        if d.id <= last_id:
            raise ValueError("descriptor ids must be strictly increasing")
        last_id = d.id
        if d.kind == "primitive":
            col = compute_primitive(g, d.primitive)
        elif d.kind == "attribute":
            if attributes is None:
                raise ValueError("descriptor needs attribute columns but none were given")
            attrs = np.asarray(attributes, dtype=float)
            if attrs.ndim == 1:
                attrs = attrs[:, None]
            if d.attribute >= attrs.shape[1]:
                raise ValueError(f"attribute column {d.attribute} missing")
            col = attrs[:, d.attribute]
        else:
            if d.base not in seen:
                raise ValueError(f"descriptor {d.id} references missing base {d.base}")
            col = _aggregate_block(g, values[d.base][:, None], d.operator)[:, 0]
        seen.add(d.id)
        values[d.id] = col
        cols.append(col)
    return FeatureMatrix(
        values=np.column_stack(cols) if cols else np.zeros((g.n, 0)),
        descriptors=descriptors,
    )


def descriptors_to_json(descriptors) -> str:
    rows = []
    for d in descriptors:
        row = {
            "id": d.id,
            "kind": d.kind,
            "primitive": d.primitive,
            "operator": d.operator,
            "base": d.base,
            "iteration": d.iteration,
        }
        if d.kind == "attribute":
            row["attribute"] = d.attribute
        rows.append(row)
    return json.dumps(rows, indent=2) + "\n"


def descriptors_from_json(text: str) -> tuple[FeatureDescriptor, ...]:
    rows = json.loads(text)
    return tuple(
        FeatureDescriptor(
            id=row["id"],
            kind=row["kind"],
            primitive=row.get("primitive"),
            operator=row.get("operator"),
            base=row.get("base"),
            attribute=row.get("attribute"),
            iteration=row.get("iteration", 0),
        )
        for row in rows
    )


def features_to_csv(x: FeatureMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["node"] + [f"feat_{j}" for j in range(x.f)])
    for u in range(x.n):
        writer.writerow([u] + [repr(float(v)) for v in x.values[u]])
    return buf.getvalue()


def features_from_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not rows[0] or rows[0][0] != "node":
        raise ValueError("expected a 'node,feat_0,...' header row")
    data = []
    for i, row in enumerate(rows[1:]):
        if not row:
            continue
        if int(row[0]) != i:
            raise ValueError(f"row {i} has node id {row[0]}, expected {i}")
        data.append([float(v) for v in row[1:]])
    return np.array(data, dtype=float) if data else np.zeros((0, len(rows[0]) - 1))
