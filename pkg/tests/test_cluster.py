import itertools

import numpy as np
import pytest

from seqnet.cluster import (
    ClusterAssignment,
    agglomerative,
    dbscan,
    elbow_select_k,
    gaussian_mixture,
    kmeans,
    load_assignment,
    pca_project,
    save_assignment,
    save_elbow,
    spectral_clustering,
)
from seqnet.errors import ConfigError
from seqnet.ssn import network_from_edges


def complete_graph(n):
    return network_from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def partition_sse(x, labels):
    sse = 0.0
    for c in np.unique(labels):
        members = x[labels == c]
        sse += float(((members - members.mean(axis=0)) ** 2).sum())
    return sse


def co_membership(labels):
    labels = np.asarray(labels)
    return labels[:, None] == labels[None, :]


def four_blobs(rng, per=40, sep=20.0, sigma=1.0, dim=3):
    centers = np.zeros((4, dim))
    centers[1, 0] = sep
    centers[2, 1] = sep
    centers[3, :2] = sep
    rows = [rng.normal(c, sigma, size=(per, dim)) for c in centers]
    truth = np.repeat(np.arange(4), per)
    return np.vstack(rows), truth


class TestKMeans:
    def test_k_equals_n_gives_zero_sse(self):
        x = np.array([[0.0], [1.0], [5.0], [9.0]])
        out = kmeans(x, 4, seed=0)
        assert out.inertia == pytest.approx(0.0, abs=1e-12)
        assert sorted(out.labels.tolist()) == [0, 1, 2, 3]

    def test_two_blob_partition_matches_enumeration(self):
        x = np.array([[0.0], [1.0], [10.0], [11.0]])
        out = kmeans(x, 2, seed=1)
        # enumerate all 2-partitions: the optimum keeps the pairs together
        best = min(
            (
                partition_sse(x, np.array(assign))
                for assign in itertools.product([0, 1], repeat=4)
                if len(set(assign)) == 2
            )
        )
        assert best == pytest.approx(1.0)
        assert out.inertia == pytest.approx(1.0)
        assert out.labels.tolist() == [0, 0, 1, 1]

    def test_sse_history_non_increasing(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(120, 5))
        for seed in range(5):
            out = kmeans(x, 6, seed=seed)
            diffs = np.diff(out.history)
            assert (diffs <= 1e-9).all()

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(50, 3))
        a = kmeans(x, 4, seed=7)
        b = kmeans(x, 4, seed=7)
        assert np.array_equal(a.labels, b.labels)
        assert a.inertia == b.inertia

    def test_minibatch_reports_full_sse(self):
        rng = np.random.default_rng(2)
        x = np.vstack([rng.normal(0, 0.5, (40, 2)), rng.normal(20, 0.5, (40, 2))])
        out = kmeans(x, 2, seed=3, batch_size=16, max_iter=100)
        assert out.k_found == 2
        # inertia is full-data SSE against the learned centers, which can only
        # exceed the SSE against the assignment's own means
        optimal = partition_sse(x, out.labels)
        assert optimal <= out.inertia <= optimal * 1.05
        # well-separated blobs: minibatch still recovers them
        assert (co_membership(out.labels) == co_membership([0] * 40 + [1] * 40)).all()

    def test_k_too_large(self):
        with pytest.raises(ConfigError):
            kmeans(np.zeros((3, 1)), 4)

    def test_labels_dense(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(30, 2))
        out = kmeans(x, 5, seed=0)
        assert set(out.labels.tolist()) == set(range(out.k_found))


class TestAgglomerative:
    def test_fully_connected_ward_two_pairs(self):
        x = np.array([[0.0], [1.0], [10.0], [11.0]])
        out = agglomerative(x, complete_graph(4), 2, linkage="ward")
        assert out.labels.tolist() == [0, 0, 1, 1]
        assert out.forced_merges == 0
        # enumeration oracle: that partition has minimal ESS among 2-partitions
        ess = {
            assign: partition_sse(x, np.array(assign))
            for assign in itertools.product([0, 1], repeat=4)
            if len(set(assign)) == 2
        }
        assert min(ess, key=ess.get) in ((0, 0, 1, 1), (1, 1, 0, 0))

    def test_k_equals_n_all_singletons(self):
        x = np.arange(5.0)[:, None]
        out = agglomerative(x, complete_graph(5), 5)
        assert out.labels.tolist() == [0, 1, 2, 3, 4]

    def test_chain_constraint_forces_merge_order(self):
        # (0, 3) is by far the closest pair in feature space but the chain
        # graph 0-1-2-3 has no 0-3 edge; hand trace: merge (1,2) first
        # (cost 0.125), then {1,2} with 3 (cost ~10.4 vs 12.04 for 0).
        x = np.array([[0.0], [4.0], [4.5], [0.3]])
        g = network_from_edges(4, [(0, 1), (1, 2), (2, 3)])
        out = agglomerative(x, g, 2, linkage="ward")
        assert out.labels.tolist() == [0, 1, 1, 1]
        assert out.forced_merges == 0

    def test_disconnected_pair_flagged(self):
        x = np.array([[0.0], [1.0], [10.0], [11.0]])
        g = network_from_edges(4, [(0, 1), (2, 3)])
        out = agglomerative(x, g, 1)
        assert out.k_found == 1
        assert out.forced_merges == 1

    def test_average_linkage_two_pairs(self):
        x = np.array([[0.0], [1.0], [10.0], [11.0]])
        out = agglomerative(x, complete_graph(4), 2, linkage="average")
        assert out.labels.tolist() == [0, 0, 1, 1]

    def test_unknown_linkage(self):
        with pytest.raises(ConfigError):
            agglomerative(np.zeros((3, 1)), complete_graph(3), 2, linkage="single")

    @pytest.mark.parametrize("linkage", ["ward", "average"])
    def test_matches_naive_reference(self, linkage):
        # plain quadratic re-scan of every connected pair at every step
        def reference(x, graph, k):
            n = len(x)
            size = np.ones(n)
            centroid = x.astype(float).copy()
            cross = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
            members = {i: [i] for i in range(n)}
            adj = {i: set(graph.neighbors[i]) for i in range(n)}
            active = set(range(n))

            def cost(a, b):
                if linkage == "ward":
                    diff = centroid[a] - centroid[b]
                    return size[a] * size[b] / (size[a] + size[b]) * float(diff @ diff)
                return float(cross[a, b]) / (size[a] * size[b])

            while len(active) > k:
                pairs = [
                    (a, b) for a in sorted(active) for b in sorted(adj[a])
                    if a < b and b in active
                ]
                if not pairs:
                    ordered = sorted(active)
                    pairs = [
                        (a, b) for i, a in enumerate(ordered) for b in ordered[i + 1:]
                    ]
                a, b = min(pairs, key=lambda p: (cost(*p), p))
                centroid[a] = (size[a] * centroid[a] + size[b] * centroid[b]) / (
                    size[a] + size[b]
                )
                size[a] += size[b]
                cross[a, :] += cross[b, :]
                cross[:, a] += cross[:, b]
                members[a].extend(members.pop(b))
                merged = (adj[a] | adj.pop(b)) - {a, b}
                adj[a] = merged
                for c in merged:
                    adj[c].discard(b)
                    adj[c].add(a)
                active.remove(b)
            labels = np.empty(n, dtype=int)
            for new_id, c in enumerate(sorted(active, key=lambda c: min(members[c]))):
                labels[members[c]] = new_id
            return labels

        rng = np.random.default_rng(33)
        for trial in range(10):
            n = int(rng.integers(5, 16))
            x = rng.normal(size=(n, 2))
            edges = [
                (int(min(u, v)), int(max(u, v)))
                for u, v in rng.integers(0, n, size=(2 * n, 2))
                if u != v
            ]
            g = network_from_edges(n, edges)
            k = int(rng.integers(1, n))
            got = agglomerative(x, g, k, linkage=linkage)
            expected = reference(x, g, k)
            assert got.labels.tolist() == expected.tolist(), (trial, linkage)


class TestDbscan:
    def test_two_tight_triples(self):
        x = np.array([[0.0], [0.5], [1.0], [20.0], [20.5], [21.0]])
        out = dbscan(x, eps=2.0, min_pts=2)
        assert out.k_found == 2
        assert out.labels.tolist() == [0, 0, 0, 1, 1, 1]

    def test_isolated_point_is_noise(self):
        x = np.array([[0.0], [0.5], [1.0], [100.0]])
        out = dbscan(x, eps=2.0, min_pts=2)
        assert out.labels[3] == -1
        assert out.labels[:3].tolist() == [0, 0, 0]

    def test_huge_eps_single_cluster(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(20, 2))
        out = dbscan(x, eps=1e9, min_pts=2)
        assert out.k_found == 1
        assert (out.labels == 0).all()

    def test_order_independent_up_to_relabeling(self):
        rng = np.random.default_rng(5)
        x = np.vstack(
            [rng.normal(0, 0.3, (15, 2)), rng.normal(10, 0.3, (15, 2))]
        )
        out = dbscan(x, eps=1.5, min_pts=3)
        perm = rng.permutation(len(x))
        out_perm = dbscan(x[perm], eps=1.5, min_pts=3)
        noise = out.labels[perm] == -1
        assert (noise == (out_perm.labels == -1)).all()
        keep = ~noise
        assert (
            co_membership(out.labels[perm][keep])
            == co_membership(out_perm.labels[keep])
        ).all()

    def test_neighborhood_includes_self(self):
        # min_pts=1 makes every point core, even fully isolated ones
        x = np.array([[0.0], [50.0]])
        out = dbscan(x, eps=1.0, min_pts=1)
        assert out.labels.tolist() == [0, 1]


class TestGaussianMixture:
    def test_single_component_is_sample_mean(self):
        rng = np.random.default_rng(3)
        x = rng.normal(2.0, 1.0, size=(50, 2))
        out = gaussian_mixture(x, 1, seed=0, return_responsibilities=True)
        assert (out.labels == 0).all()
        assert out.responsibilities.shape == (50, 1)
        assert np.allclose(out.responsibilities, 1.0)

    def test_loglik_non_decreasing(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(80, 3))
        for seed in range(5):
            out = gaussian_mixture(x, 3, seed=seed)
            diffs = np.diff(out.history)
            assert (diffs >= -1e-9).all()

    def test_separated_blobs_recovered(self):
        rng = np.random.default_rng(6)
        x = np.vstack([rng.normal(0, 0.5, (30, 2)), rng.normal(15, 0.5, (30, 2))])
        truth = np.array([0] * 30 + [1] * 30)
        out = gaussian_mixture(x, 2, seed=1, return_responsibilities=True)
        assert (co_membership(out.labels) == co_membership(truth)).all()
        # posterior near-certain for clearly separated data
        assert out.responsibilities.max(axis=1).min() > 0.999

    def test_k_too_large(self):
        with pytest.raises(ConfigError):
            gaussian_mixture(np.zeros((3, 2)), 4)

    def test_pca_preprojection_runs(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(40, 30))
        out = gaussian_mixture(x, 2, seed=0, pca_dim=5)
        assert len(out.labels) == 40


class TestSpectral:
    def test_far_blobs_perfect_split(self):
        rng = np.random.default_rng(2)
        x = np.vstack([rng.normal(0, 0.3, (25, 2)), rng.normal(30, 0.3, (25, 2))])
        truth = np.array([0] * 25 + [1] * 25)
        out = spectral_clustering(x, 2, seed=0)
        assert (co_membership(out.labels) == co_membership(truth)).all()

    def test_single_cluster(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(20, 2))
        out = spectral_clustering(x, 1, seed=0)
        assert (out.labels == 0).all()

    def test_agreement_with_kmeans_on_separable_blobs(self):
        rng = np.random.default_rng(10)
        x = np.vstack(
            [rng.normal(0, 0.4, (20, 2)), rng.normal(12, 0.4, (20, 2)),
             rng.normal([0, 12], 0.4, (20, 2))]
        )
        km = kmeans(x, 3, seed=0, n_init=5)
        sp = spectral_clustering(x, 3, seed=0)
        assert (co_membership(km.labels) == co_membership(sp.labels)).all()


class TestElbow:
    def test_four_blob_knee(self):
        rng = np.random.default_rng(0)
        x, _ = four_blobs(rng)
        curve = elbow_select_k(x, 1, 10, seed=0)
        assert curve.chosen_k == 4

    def test_linear_curve_falls_back_to_first_interior(self):
        from seqnet.cluster import knee_index

        ks = [1, 2, 3, 4, 5]
        linear_sse = [100.0, 80.0, 60.0, 40.0, 20.0]
        assert knee_index(ks, linear_sse) == 1  # all deviations 0 -> k_min + 1

    def test_knee_picks_maximum_deviation(self):
        from seqnet.cluster import knee_index

        ks = [1, 2, 3, 4, 5, 6]
        sse = [100.0, 55.0, 20.0, 5.0, 4.0, 3.0]
        assert ks[knee_index(ks, sse)] == 3

    def test_sse_non_increasing_in_k(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(60, 4))
        curve = elbow_select_k(x, 1, 8, seed=1)
        diffs = np.diff(curve.sse)
        assert (diffs <= 1e-6 * max(curve.sse)).all()

    def test_chosen_in_range_and_runtimes_recorded(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(40, 2))
        curve = elbow_select_k(x, 2, 6, seed=0)
        assert curve.chosen_k in curve.ks
        assert len(curve.runtimes_sec) == len(curve.ks)
        assert all(t >= 0 for t in curve.runtimes_sec)


class TestPermutationEquivariance:
    def test_kmeans_labels_follow_rows(self):
        rng = np.random.default_rng(21)
        x = np.vstack([rng.normal(0, 0.3, (20, 2)), rng.normal(25, 0.3, (20, 2))])
        out = kmeans(x, 2, seed=0)
        perm = rng.permutation(len(x))
        out_perm = kmeans(x[perm], 2, seed=0)
        assert (
            co_membership(out.labels[perm]) == co_membership(out_perm.labels)
        ).all()


class TestExports:
    def test_assignment_round_trip(self, tmp_path):
        a = ClusterAssignment(np.array([0, 1, 1, -1]), 2)
        path = tmp_path / "assign.csv"
        save_assignment(a, path)
        assert load_assignment(path).tolist() == [0, 1, 1, -1]

    def test_elbow_csv_marks_choice(self, tmp_path):
        rng = np.random.default_rng(1)
        x, _ = four_blobs(rng, per=15)
        curve = elbow_select_k(x, 1, 6, seed=0)
        path = tmp_path / "elbow.csv"
        save_elbow(curve, path, timings=False)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "k,sse,runtime_sec,chosen"
        chosen_rows = [l for l in lines[1:] if l.endswith(",1")]
        assert len(chosen_rows) == 1
        assert chosen_rows[0].startswith(f"{curve.chosen_k},")

    def test_pca_projection_shape_and_determinism(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(30, 10))
        p1 = pca_project(x, 2)
        p2 = pca_project(x, 2)
        assert p1.shape == (30, 2)
        assert np.array_equal(p1, p2)
