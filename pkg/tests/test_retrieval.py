import numpy as np
import pytest

from klsh.datasets import synth_histograms
from klsh.hashing import HashCode, hash_points, train_bank
from klsh.kernels import KernelSpec, kernel_matrix
from klsh.retrieval import (
    CodeSet,
    evaluate,
    exact_nn,
    ground_truth,
    rank_hamming,
    read_codeset,
    recall_at_R,
    write_codeset,
    write_report_csv,
)


def make_codeset(rng, n, bits):
    codes = rng.integers(0, 256, size=(n, (bits + 7) // 8), dtype=np.uint8)
    return CodeSet(codes=codes, ids=np.arange(n, dtype=np.int64), bits_b=bits)


class TestRankHamming:
    def test_exact_match_first(self):
        rng = np.random.default_rng(0)
        cs = make_codeset(rng, 50, 32)
        q = HashCode(bits=cs.codes[17].copy(), bits_b=32)
        assert rank_hamming(cs, q, 1)[0] == 17

    def test_all_identical_ties_by_id(self):
        codes = np.zeros((10, 4), dtype=np.uint8)
        cs = CodeSet(codes=codes, ids=np.arange(10, dtype=np.int64), bits_b=32)
        q = HashCode(bits=np.zeros(4, dtype=np.uint8), bits_b=32)
        np.testing.assert_array_equal(rank_hamming(cs, q, 5), np.arange(5))

    def test_matches_naive_sort(self):
        rng = np.random.default_rng(1)
        cs = make_codeset(rng, 200, 64)
        q = HashCode(bits=rng.integers(0, 256, 8, dtype=np.uint8), bits_b=64)
        got = rank_hamming(cs, q, 200)
        dists = [int(np.bitwise_count(row ^ q.bits).sum()) for row in cs.codes]
        expected = [i for _, i in sorted(zip(dists, range(200)))]
        np.testing.assert_array_equal(got, expected)

    def test_bits_mismatch(self):
        rng = np.random.default_rng(2)
        cs = make_codeset(rng, 5, 32)
        q = HashCode(bits=np.zeros(8, dtype=np.uint8), bits_b=64)
        with pytest.raises(ValueError, match="mismatch"):
            rank_hamming(cs, q, 1)


class TestExactNN:
    def test_query_in_corpus_ranks_itself_first(self):
        corpus = synth_histograms(30, 8, 3, 20.0, 0).vectors
        spec = KernelSpec("chi2", normalize=True)
        ids = exact_nn(spec, corpus, corpus[12], topk=3)
        assert ids[0] == 12

    def test_two_point_corpus(self):
        spec = KernelSpec("intersection")
        corpus = np.array([[1.0, 0.0], [0.5, 0.5]])
        q = np.array([0.4, 0.6])
        assert exact_nn(spec, corpus, q, 1)[0] == 1

    def test_scale_invariant_ranking(self):
        corpus = synth_histograms(100, 10, 5, 30.0, 1).vectors
        q = synth_histograms(1, 10, 1, 30.0, 2).vectors[0]
        base = exact_nn(KernelSpec("chi2", scale_s=1.0), corpus, q, 10)
        for s in (3.0, 5.0):
            np.testing.assert_array_equal(
                exact_nn(KernelSpec("chi2", scale_s=s), corpus, q, 10), base)

    def test_matches_double_loop_argsort(self):
        rng = np.random.default_rng(3)
        corpus = synth_histograms(40, 6, 4, 10.0, 4).vectors
        q = corpus[7] * 0.5 + corpus[8] * 0.5
        spec = KernelSpec("chi2")
        sims = [kernel_matrix(spec, q, c[None])[0, 0] for c in corpus]
        expected = [i for _, i in sorted(zip([-s for s in sims], range(40)))]
        np.testing.assert_array_equal(exact_nn(spec, corpus, q, 40), expected)

    def test_ground_truth_ignores_transform(self):
        corpus = synth_histograms(50, 8, 4, 25.0, 5).vectors
        queries = synth_histograms(5, 8, 2, 25.0, 6).vectors
        t1 = ground_truth(KernelSpec("chi2", scale_s=1.0), corpus, queries)
        t2 = ground_truth(KernelSpec("chi2", scale_s=7.0), corpus, queries)
        np.testing.assert_array_equal(t1, t2)


class TestRecall:
    def test_truth_always_first(self):
        retrieved = [np.array([i, 99]) for i in range(10)]
        truth = np.arange(10)
        report = recall_at_R(retrieved, truth, [1, 2])
        assert report.recall_at[1] == 1.0

    def test_truth_never_retrieved(self):
        retrieved = [np.array([5, 6]) for _ in range(4)]
        truth = np.zeros(4, dtype=int)
        report = recall_at_R(retrieved, truth, [1, 2])
        assert all(v == 0.0 for v in report.recall_at.values())

    def test_monotone_in_R(self):
        rng = np.random.default_rng(4)
        retrieved = [rng.permutation(50) for _ in range(30)]
        truth = rng.integers(0, 50, 30)
        report = recall_at_R(retrieved, truth, [1, 5, 10, 50])
        vals = [report.recall_at[r] for r in sorted(report.recall_at)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert report.recall_at[50] == 1.0

    def test_empty_queries_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            recall_at_R([], np.array([]), [1])


class TestEndToEnd:
    def test_wide_codes_recover_embedded_ranking(self):
        # Well-separated clusters + many bits: Hamming ranking should put
        # the true NN inside the top 10 for nearly every query.
        corpus = synth_histograms(500, 16, 10, 200.0, 7)
        queries = synth_histograms(60, 16, 10, 200.0, 7)  # same generator params
        spec = KernelSpec("chi2", normalize=True)
        bank = train_bank(corpus.vectors, spec, m=300, t=50, bits_b=4096,
                          rank_r=None, variant="gaussian", seed=13)
        codes = CodeSet(codes=hash_points(bank, corpus.vectors),
                        ids=np.arange(500, dtype=np.int64), bits_b=4096)
        qcodes = hash_points(bank, queries.vectors)
        truth = ground_truth(spec, corpus.vectors, queries.vectors)
        report = evaluate(codes, qcodes, truth, [10], params={"bits": 4096})
        assert report.recall_at[10] >= 0.9


class TestCodeSetIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        cs = make_codeset(rng, 37, 44)
        path = tmp_path / "x.codes"
        write_codeset(path, cs)
        back = read_codeset(path)
        assert back.bits_b == cs.bits_b
        np.testing.assert_array_equal(back.codes, cs.codes)
        np.testing.assert_array_equal(back.ids, cs.ids)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.codes"
        path.write_bytes(b"NOTACODESET")
        with pytest.raises(ValueError, match="magic"):
            read_codeset(path)

    def test_truncated(self, tmp_path):
        rng = np.random.default_rng(6)
        cs = make_codeset(rng, 10, 64)
        path = tmp_path / "x.codes"
        write_codeset(path, cs)
        data = path.read_bytes()
        path.write_bytes(data[:-5])
        with pytest.raises(ValueError, match="truncated"):
            read_codeset(path)


class TestReportCSV:
    def test_rows_and_echo(self, tmp_path):
        report = recall_at_R([np.array([0])], np.array([0]), [1, 10],
                             params={"m": 10, "seed": 3})
        path = tmp_path / "r.csv"
        write_report_csv(path, report)
        text = path.read_text()
        assert "# m=10" in text and "# seed=3" in text
        assert "R,recall,m,seed" in text
