import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rolemine import (
    FeatureDescriptor,
    FeatureLearnConfig,
    FeatureMatrix,
    Graph,
    apply_operator,
    apply_permutation,
    automorphic_orbits,
    compute_primitive,
    create_feature_graph,
    descriptors_from_json,
    descriptors_to_json,
    feature_similarity,
    features_from_csv,
    features_to_csv,
    learn_features,
    load_edge_list,
    prune_feature_set,
    recompute,
    vertical_log_bin,
)

from strategies import graph_with_permutation, graphs

P3 = load_edge_list("0 1\n1 2")
K3 = load_edge_list("0 1\n1 2\n0 2")
S3 = load_edge_list("0 1\n0 2\n0 3")


def naive_primitive(g, kind):
    """Set-based per-node reference, independent of the vectorized path."""
    adj = [set() for _ in range(g.n)]
    for u, v in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    if kind == "degree":
        return [len(adj[u]) for u in range(g.n)]
    if kind == "weighted-degree":
        if g.weights is None:
            return [float(len(adj[u])) for u in range(g.n)]
        out = [0.0] * g.n
        for (u, v), w in g.weights.items():
            out[u] += w
            out[v] += w
        return out
    if kind == "wedge-count":
        return [
            sum(1 for a, b in itertools.combinations(sorted(adj[u]), 2)) for u in range(g.n)
        ]
    if kind == "triangle-count":
        return [
            sum(1 for a, b in itertools.combinations(sorted(adj[u]), 2) if b in adj[a])
            for u in range(g.n)
        ]
    if kind == "egonet-internal-edges":
        out = []
        for u in range(g.n):
            ego = adj[u] | {u}
            out.append(sum(1 for a, b in g.edges if a in ego and b in ego))
        return out
    if kind == "egonet-external-edges":
        out = []
        for u in range(g.n):
            ego = adj[u] | {u}
            out.append(sum(1 for a, b in g.edges if (a in ego) != (b in ego)))
        return out
    if kind == "core-number":
        alive = set(range(g.n))
        core = [0] * g.n
        k = 0
        while alive:
            while True:
                peel = [u for u in alive if len(adj[u] & alive) <= k]
                if not peel:
                    break
                for u in peel:
                    core[u] = k
                    alive.discard(u)
            k += 1
        return core
    raise AssertionError(kind)


def naive_aggregate(g, column, op):
    out = []
    for u in range(g.n):
        vals = [column[v] for v in g.neighbors[u]]
        if not vals:
            out.append(0.0)
        elif op == "sum":
            out.append(math.fsum(sorted(vals)))
        elif op == "mean":
            out.append(math.fsum(sorted(vals)) / len(vals))
        elif op == "max":
            out.append(max(vals))
        elif op == "min":
            out.append(min(vals))
        elif op == "mode":
            floored = [math.floor(v) for v in vals]
            best = min(sorted(set(floored)), key=lambda x: (-floored.count(x), x))
            out.append(float(best))
    return out


def matrix_from_columns(columns):
    descs = tuple(
        FeatureDescriptor(id=j, kind="primitive", primitive="degree") for j in range(len(columns))
    )
    return FeatureMatrix(np.array(columns, dtype=float).T, descs)


class TestPrimitives:
    def test_star_degree(self):
        assert compute_primitive(S3, "degree").tolist() == [3, 1, 1, 1]

    def test_triangle_counts_on_k3(self):
        assert compute_primitive(K3, "triangle-count").tolist() == [1, 1, 1]

    def test_star_leaf_egonet_external(self):
        # ego of leaf 1 is {0, 1}; edges leaving it are (0,2) and (0,3)
        assert compute_primitive(S3, "egonet-external-edges")[1] == 2.0

    def test_wedge_is_pairs_of_neighbors(self):
        assert compute_primitive(S3, "wedge-count").tolist() == [3, 0, 0, 0]

    def test_core_numbers_on_clique_with_pendant(self):
        g = load_edge_list("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n0 4")
        assert compute_primitive(g, "core-number").tolist() == [3, 3, 3, 3, 1]

    def test_weighted_degree_uses_weights(self):
        g = load_edge_list("0 1 2.5\n1 2 0.5")
        assert compute_primitive(g, "weighted-degree").tolist() == [2.5, 3.0, 0.5]

    def test_in_out_degree_directed_only(self):
        g = Graph(n=3, edges=frozenset({(0, 1), (2, 1)}), directed=True)
        assert compute_primitive(g, "in-degree").tolist() == [0, 2, 0]
        assert compute_primitive(g, "out-degree").tolist() == [1, 0, 1]
        with pytest.raises(ValueError):
            compute_primitive(P3, "in-degree")

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            compute_primitive(P3, "pagerank")

    @given(graphs(max_n=7, weighted=True))
    @settings(max_examples=80)
    def test_matches_naive_reference(self, g):
        for kind in (
            "degree",
            "weighted-degree",
            "wedge-count",
            "triangle-count",
            "egonet-internal-edges",
            "egonet-external-edges",
            "core-number",
        ):
            got = compute_primitive(g, kind)
            want = naive_primitive(g, kind)
            assert np.allclose(got, want), kind

    @given(graph_with_permutation(max_n=7))
    def test_isomorphism_invariance(self, case):
        g, perm = case
        h = apply_permutation(g, perm)
        for kind in ("degree", "triangle-count", "core-number", "egonet-external-edges"):
            col_g = compute_primitive(g, kind)
            col_h = compute_primitive(h, kind)
            assert all(col_h[perm[u]] == col_g[u] for u in range(g.n)), kind


class TestOperators:
    def test_path_neighbor_degree_sum(self):
        x = matrix_from_columns([[1.0, 2.0, 1.0]])
        assert apply_operator(P3, x, 0, "sum").tolist() == [2, 2, 2]

    def test_star_neighbor_degree_mean(self):
        x = matrix_from_columns([[3.0, 1.0, 1.0, 1.0]])
        assert apply_operator(S3, x, 0, "mean").tolist() == [1, 3, 3, 3]

    def test_max_of_zero_column_is_zero(self):
        x = matrix_from_columns([[0.0, 0.0, 0.0]])
        assert apply_operator(P3, x, 0, "max").tolist() == [0, 0, 0]

    def test_isolated_node_aggregates_to_zero(self):
        g = Graph(n=3, edges=frozenset({(1, 2)}))
        x = matrix_from_columns([[7.0, 7.0, 7.0]])
        for op in ("sum", "mean", "max", "min", "mode"):
            assert apply_operator(g, x, 0, op)[0] == 0.0

    def test_mode_floors_and_breaks_ties_low(self):
        # node 0 sees floored values {1, 2} once each: tie goes to 1
        g = load_edge_list("0 1\n0 2")
        x = matrix_from_columns([[0.0, 1.9, 2.4]])
        assert apply_operator(g, x, 0, "mode")[0] == 1.0

    def test_bad_base_or_op_rejected(self):
        x = matrix_from_columns([[1.0, 2.0, 1.0]])
        with pytest.raises(ValueError):
            apply_operator(P3, x, 5, "sum")
        with pytest.raises(ValueError):
            apply_operator(P3, x, 0, "median")

    @given(
        graphs(max_n=7),
        st.lists(st.floats(0, 9.5, allow_nan=False), min_size=7, max_size=7),
        st.sampled_from(["sum", "mean", "max", "min", "mode"]),
    )
    @settings(max_examples=120)
    def test_matches_naive_reference(self, g, vals, op):
        column = vals[: g.n]
        if g.n == 0:
            return
        x = matrix_from_columns([column])
        got = apply_operator(g, x, 0, op)
        want = naive_aggregate(g, column, op)
        assert np.allclose(got, want)


class TestVerticalLogBin:
    def test_reference_trace(self):
        col = [1, 1, 1, 1, 2, 4, 8, 16]
        assert list(vertical_log_bin(col, 0.5).bins) == [0, 0, 0, 0, 1, 1, 2, 3]

    def test_constant_column_single_bin(self):
        b = vertical_log_bin([5.0, 5.0, 5.0], 0.5)
        assert list(b.bins) == [0, 0, 0]
        assert b.bin_count == 1

    def test_two_values(self):
        assert list(vertical_log_bin([1.0, 2.0], 0.5).bins) == [0, 1]

    def test_boundary_ties_join_lower_bin(self):
        # half of six is three, but the value at the cut repeats
        assert list(vertical_log_bin([1, 1, 1, 1, 2, 3], 0.5).bins) == [0, 0, 0, 0, 1, 2]

    def test_fraction_validated(self):
        with pytest.raises(ValueError):
            vertical_log_bin([1.0], 0.0)
        with pytest.raises(ValueError):
            vertical_log_bin([1.0], 1.0)

    @given(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=40))
    def test_bins_monotone_and_ties_share(self, vals):
        bins = vertical_log_bin(vals, 0.5).bins
        for i, j in itertools.combinations(range(len(vals)), 2):
            if vals[i] < vals[j]:
                assert bins[i] <= bins[j]
            if vals[i] == vals[j]:
                assert bins[i] == bins[j]

    @given(
        st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=30),
        st.floats(0.1, 0.9),
    )
    def test_bin_ids_dense_from_zero(self, vals, p):
        b = vertical_log_bin(vals, p)
        assert set(b.bins) == set(range(b.bin_count))


class TestFeatureSimilarity:
    def test_identical_is_one(self):
        a = vertical_log_bin([1, 2, 3, 4], 0.5)
        assert feature_similarity(a, a) == 1.0

    def test_total_disagreement_is_zero(self):
        a = vertical_log_bin([1, 1, 2, 2], 0.5)
        b = vertical_log_bin([2, 2, 1, 1], 0.5)
        assert feature_similarity(a, b) == 0.0

    def test_partial_agreement(self):
        a = vertical_log_bin([1, 1, 2, 3], 0.5)
        b = vertical_log_bin([1, 1, 2, 2], 0.5)
        assert feature_similarity(a, b) == 0.75

    def test_mismatched_length_rejected(self):
        a = vertical_log_bin([1, 2], 0.5)
        b = vertical_log_bin([1, 2, 3], 0.5)
        with pytest.raises(ValueError):
            feature_similarity(a, b)


class TestCreateFeatureGraph:
    def test_identical_columns_connect(self):
        x = matrix_from_columns([[1, 2, 3], [1, 2, 3]])
        fg = create_feature_graph(x, lam=1.0)
        assert fg.edges == frozenset({(0, 1)})
        assert fg.similarity[(0, 1)] == 1.0

    def test_star_degree_vs_constant_no_edge(self):
        x = matrix_from_columns([[3, 1, 1, 1], [1, 1, 1, 1]])
        fg = create_feature_graph(x, lam=1.0)
        assert fg.edges == frozenset()

    def test_single_feature_no_edges(self):
        x = matrix_from_columns([[1, 2, 3]])
        fg = create_feature_graph(x)
        assert fg.vertices == (0,)
        assert fg.edges == frozenset()

    def test_threshold_validated(self):
        x = matrix_from_columns([[1, 2, 3]])
        with pytest.raises(ValueError):
            create_feature_graph(x, lam=0.0)
        with pytest.raises(ValueError):
            create_feature_graph(x, lam=1.5)

    @given(
        st.lists(
            st.lists(st.integers(0, 3), min_size=5, max_size=5), min_size=2, max_size=8
        ),
        st.sampled_from([0.2, 0.4, 0.6, 0.8, 1.0]),
    )
    @settings(max_examples=80)
    def test_edges_match_pairwise_similarity(self, cols, lam):
        # the blocked/grouped construction must agree with the two-column API
        x = matrix_from_columns([[float(v) for v in c] for c in cols])
        fg = create_feature_graph(x, lam=lam)
        binned = [vertical_log_bin(x.values[:, j], 0.5) for j in range(x.f)]
        for i in range(x.f):
            for j in range(i + 1, x.f):
                sim = feature_similarity(binned[i], binned[j])
                if sim >= lam:
                    assert (i, j) in fg.similarity
                    assert fg.similarity[(i, j)] == sim
                else:
                    assert (i, j) not in fg.similarity


class TestPrune:
    def test_keep_earliest_per_component(self):
        x = matrix_from_columns([[1, 2, 3], [9, 1, 2], [5, 5, 5], [1, 2, 3]])
        fg = create_feature_graph(x, lam=1.0)
        pruned = prune_feature_set(fg, x)
        assert [d.id for d in pruned.descriptors] == [0, 1, 2]

    def test_edgeless_graph_keeps_everything(self):
        x = matrix_from_columns([[1, 2, 3], [3, 2, 1]])
        fg = create_feature_graph(x, lam=1.0)
        assert prune_feature_set(fg, x).f == 2

    def test_three_copies_keep_first(self):
        x = matrix_from_columns([[1, 2, 3]] * 3)
        fg = create_feature_graph(x, lam=1.0)
        pruned = prune_feature_set(fg, x)
        assert [d.id for d in pruned.descriptors] == [0]

    def test_survivors_separated_below_threshold(self):
        rng = np.random.default_rng(3)
        x = matrix_from_columns(rng.integers(0, 3, size=(6, 8)).astype(float).tolist())
        fg = create_feature_graph(x, lam=0.5)
        pruned = prune_feature_set(fg, x)
        binned = [vertical_log_bin(pruned.values[:, j], 0.5) for j in range(pruned.f)]
        for i in range(pruned.f):
            for j in range(i + 1, pruned.f):
                assert feature_similarity(binned[i], binned[j]) < 0.5

    def test_mismatched_graph_rejected(self):
        x = matrix_from_columns([[1, 2, 3], [3, 2, 1]])
        fg = create_feature_graph(x, lam=1.0)
        y = matrix_from_columns([[1, 2, 3]])
        with pytest.raises(ValueError):
            prune_feature_set(fg, y)


class TestLearnFeatures:
    def test_vertex_transitive_triangle_collapses_to_one(self):
        config = FeatureLearnConfig(primitives=("degree", "triangle-count"), operators=("sum",))
        x = learn_features(K3, config)
        assert x.f == 1
        assert x.descriptors[0].id == 0

    def test_star_growth_monotone_and_terminates(self):
        config = FeatureLearnConfig(primitives=("degree",), operators=("sum", "mean"), maxiter=2)
        x = learn_features(S3, config)
        sizes = x.iteration_sizes
        assert len(sizes) <= 3
        assert all(a <= b for a, b in zip(sizes, sizes[1:]))

    def test_maxiter_bounds_growth_rounds(self):
        x = learn_features(P3, FeatureLearnConfig(maxiter=1))
        assert len(x.iteration_sizes) == 2
        assert all(d.iteration <= 1 for d in x.descriptors)

    def test_empty_primitive_set_rejected(self):
        with pytest.raises(ValueError):
            learn_features(P3, FeatureLearnConfig(primitives=()))

    def test_directed_degree_expands_to_in_and_out(self):
        g = Graph(n=3, edges=frozenset({(0, 1), (1, 2)}), directed=True)
        x = learn_features(g, FeatureLearnConfig(primitives=("degree",), maxiter=1))
        kinds = {d.primitive for d in x.descriptors}
        assert kinds <= {"in-degree", "out-degree"}
        assert len(kinds) >= 1

    def test_duplicate_attribute_column_pruned(self):
        attrs = np.array([[1.0], [2.0], [1.0]])  # equals the degree column on P3
        x = learn_features(
            P3, FeatureLearnConfig(primitives=("degree",), maxiter=1, attributes=attrs)
        )
        assert all(d.kind != "attribute" for d in x.descriptors)

    def test_informative_attribute_survives_and_recurses(self):
        attrs = np.array([[5.0], [0.0], [5.0]])
        config = FeatureLearnConfig(primitives=("degree",), maxiter=2, attributes=attrs)
        x = learn_features(P3, config)
        kinds = {d.kind for d in x.descriptors}
        assert "attribute" in kinds

    def test_negative_attributes_rejected(self):
        attrs = np.array([[-1.0], [0.0], [1.0]])
        with pytest.raises(ValueError):
            learn_features(P3, FeatureLearnConfig(attributes=attrs))

    @given(graphs(min_n=1, max_n=6))
    @settings(max_examples=40)
    def test_orbit_members_share_rows_exactly(self, g):
        x = learn_features(g, FeatureLearnConfig(maxiter=3))
        for cls in automorphic_orbits(g).classes:
            rows = x.values[list(cls)]
            assert (rows == rows[0]).all()

    @given(graphs(min_n=1, max_n=8))
    @settings(max_examples=40)
    def test_monotone_growth_and_separation(self, g):
        x = learn_features(g, FeatureLearnConfig(maxiter=4))
        sizes = x.iteration_sizes
        assert all(a <= b for a, b in zip(sizes, sizes[1:]))
        binned = [vertical_log_bin(x.values[:, j], 0.5) for j in range(x.f)]
        assert len({b.bins for b in binned}) == x.f
        for i in range(min(x.f, 40)):
            for j in range(i + 1, min(x.f, 40)):
                assert feature_similarity(binned[i], binned[j]) < 1.0


class TestRecompute:
    def test_reproduces_learned_matrix(self):
        x = learn_features(S3, FeatureLearnConfig(maxiter=2))
        y = recompute(S3, x.descriptors)
        assert (x.values == y.values).all()

    def test_degree_on_path(self):
        d = (FeatureDescriptor(id=0, kind="primitive", primitive="degree"),)
        assert recompute(P3, d).values[:, 0].tolist() == [1, 2, 1]

    def test_attribute_descriptors_need_columns(self):
        d = (FeatureDescriptor(id=0, kind="attribute", attribute=0),)
        with pytest.raises(ValueError):
            recompute(P3, d)
        got = recompute(P3, d, attributes=np.array([[1.0], [2.0], [3.0]]))
        assert got.values[:, 0].tolist() == [1, 2, 3]

    def test_malformed_descriptor_order_rejected(self):
        d = (
            FeatureDescriptor(id=1, kind="primitive", primitive="degree"),
            FeatureDescriptor(id=0, kind="primitive", primitive="degree"),
        )
        with pytest.raises(ValueError):
            recompute(P3, d)

    def test_composite_with_unseen_base_rejected(self):
        d = (
            FeatureDescriptor(id=0, kind="primitive", primitive="degree"),
            FeatureDescriptor(id=5, kind="composite", operator="sum", base=3),
        )
        with pytest.raises(ValueError):
            recompute(P3, d)

    @given(graph_with_permutation(min_n=1, max_n=7))
    @settings(max_examples=40)
    def test_permutation_equivariance_exact(self, case):
        g, perm = case
        x = learn_features(g, FeatureLearnConfig(maxiter=2))
        h = apply_permutation(g, perm)
        y = recompute(h, x.descriptors)
        assert (y.values[list(perm)] == x.values).all()


class TestSerialization:
    def test_features_csv_round_trip_exact(self):
        x = learn_features(S3, FeatureLearnConfig(maxiter=2))
        text = features_to_csv(x)
        assert text.startswith("node,feat_0")
        back = features_from_csv(text)
        assert (back == x.values).all()

    def test_csv_preserves_non_representable_floats(self):
        x = matrix_from_columns([[0.1 + 0.2, 1 / 3, 2.0]])
        back = features_from_csv(features_to_csv(x))
        assert (back == x.values).all()

    def test_csv_bad_node_order_rejected(self):
        with pytest.raises(ValueError):
            features_from_csv("node,feat_0\n1,2.0\n")

    def test_descriptor_json_round_trip(self):
        x = learn_features(
            S3, FeatureLearnConfig(maxiter=2, attributes=np.array([[9.0], [1.0], [1.0], [4.0]]))
        )
        text = descriptors_to_json(x.descriptors)
        assert descriptors_from_json(text) == x.descriptors

    def test_descriptor_json_attribute_key_only_when_relevant(self):
        rows = json.loads(
            descriptors_to_json(
                (
                    FeatureDescriptor(id=0, kind="primitive", primitive="degree"),
                    FeatureDescriptor(id=1, kind="attribute", attribute=2),
                )
            )
        )
        assert "attribute" not in rows[0]
        assert rows[1]["attribute"] == 2
