import numpy as np
import pytest

from seqnet.errors import AlphabetError, MerSizeError
from seqnet.featurize import (
    FeatureMatrix,
    compute_frequency_vector,
    featurize_dataset,
    kmer_rank,
    kmer_unrank,
    load_features,
    save_features,
    total_kmers,
)
from seqnet.seqio import ALPHABET, Dataset, SequenceRecord, synthesize_dataset


def random_strict_sequence(rng, length):
    return "".join(rng.choice(list(ALPHABET), size=length))


class TestTotalKmers:
    def test_spike_length_window_count(self):
        assert total_kmers(1274, 3) == 1272

    def test_window_equals_sequence(self):
        assert total_kmers(4, 4) == 1

    def test_k_exceeding_length(self):
        with pytest.raises(MerSizeError):
            total_kmers(3, 5)

    def test_k_below_one(self):
        with pytest.raises(MerSizeError):
            total_kmers(10, 0)


class TestKmerRank:
    def test_first_combination(self):
        assert kmer_rank("AA") == 0

    def test_base20_positional(self):
        assert kmer_rank("AC") == 1
        assert kmer_rank("CA") == 20
        assert kmer_rank("CD") == 22

    def test_last_combination(self):
        assert kmer_rank("YYY") == 20**3 - 1

    def test_non_alphabet_character(self):
        with pytest.raises(AlphabetError):
            kmer_rank("AXA")

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_bijection_rank_unrank(self, k):
        for rank in range(20**k):
            assert kmer_rank(kmer_unrank(rank, k)) == rank


class TestComputeFrequencyVector:
    def test_hand_enumeration(self):
        vec = compute_frequency_vector("ACACD", 2)
        assert vec.counts == {kmer_rank("AC"): 2, kmer_rank("CA"): 1, kmer_rank("CD"): 1}
        assert vec.total() == total_kmers(5, 2)

    def test_repeated_mer(self):
        vec = compute_frequency_vector("AAAA", 2)
        assert vec.counts == {0: 3}

    def test_skip_invalid_windows(self):
        vec = compute_frequency_vector("AXAC", 2, skip_invalid=True)
        assert vec.counts == {kmer_rank("AC"): 1}

    def test_invalid_without_skip_raises(self):
        with pytest.raises(AlphabetError):
            compute_frequency_vector("AXAC", 2)

    def test_too_short_sequence(self):
        with pytest.raises(MerSizeError):
            compute_frequency_vector("AC", 3)

    def test_window_count_identity_random(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            length = int(rng.integers(10, 400))
            k = int(rng.integers(2, 5))
            seq = random_strict_sequence(rng, length)
            vec = compute_frequency_vector(seq, k)
            assert vec.total() == (length - k) + 1
            assert len(vec.counts) <= min(length - k + 1, 20**k)
            assert all(0 <= r < 20**k for r in vec.counts)
            assert all(c > 0 for c in vec.counts.values())

    def test_matches_naive_count(self):
        rng = np.random.default_rng(9)
        seq = random_strict_sequence(rng, 200)
        vec = compute_frequency_vector(seq, 3)
        naive = {}
        for i in range(len(seq) - 2):
            r = kmer_rank(seq[i : i + 3])
            naive[r] = naive.get(r, 0) + 1
        assert vec.counts == naive


class TestFeaturizeDataset:
    def test_identical_sequences_identical_rows(self):
        ds = Dataset([SequenceRecord("a", "ACDEAC"), SequenceRecord("b", "ACDEAC")])
        mat = featurize_dataset(ds, k=2)
        assert mat.rows[0].counts == mat.rows[1].counts

    def test_empty_dataset(self):
        mat = featurize_dataset(Dataset([]), k=3)
        assert mat.n == 0

    def test_row_order_matches_dataset(self):
        ds = synthesize_dataset(2, [3, 3], 50, 0.1, 10, seed=2)
        mat = featurize_dataset(ds, k=3)
        for rec, row in zip(ds, mat.rows):
            assert row.counts == compute_frequency_vector(rec.residues, 3).counts

    def test_permutation_equivariance(self):
        ds = synthesize_dataset(2, [4, 4], 40, 0.2, 8, seed=6)
        perm = [5, 2, 7, 0, 1, 6, 3, 4]
        permuted = Dataset([ds[i] for i in perm])
        mat = featurize_dataset(ds, k=2)
        mat_perm = featurize_dataset(permuted, k=2)
        for out_pos, src in enumerate(perm):
            assert mat_perm.rows[out_pos].counts == mat.rows[src].counts

    def test_short_record_error_names_record(self):
        ds = Dataset([SequenceRecord("tiny", "AC")])
        with pytest.raises(MerSizeError, match="tiny"):
            featurize_dataset(ds, k=5)


class TestMatrixExport:
    def test_dense_and_csr_agree(self):
        ds = synthesize_dataset(2, [3, 3], 60, 0.1, 10, seed=8)
        mat = featurize_dataset(ds, k=2)
        assert np.array_equal(mat.to_dense(), mat.to_csr().toarray())

    def test_triplet_round_trip(self, tmp_path):
        ds = synthesize_dataset(2, [4, 4], 70, 0.05, 9, seed=13)
        mat = featurize_dataset(ds, k=3)
        path = tmp_path / "features.csv"
        save_features(mat, path)
        assert load_features(path) == mat

    def test_triplet_header_records_shape(self, tmp_path):
        ds = synthesize_dataset(1, [2], 30, 0.0, 0, seed=0)
        mat = featurize_dataset(ds, k=2)
        path = tmp_path / "features.csv"
        save_features(mat, path)
        first = path.read_text().splitlines()[0]
        assert first == "# n=2 k=2 logical_length=400"

    def test_dense_csv_export(self, tmp_path):
        from seqnet.featurize import save_features_dense

        ds = synthesize_dataset(1, [3], 25, 0.1, 0, seed=4)
        mat = featurize_dataset(ds, k=2)
        path = tmp_path / "dense.csv"
        save_features_dense(mat, path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 4  # header + 3 rows
        parsed = np.array([[int(v) for v in line.split(",")] for line in lines[1:]])
        assert np.array_equal(parsed, mat.to_dense())
