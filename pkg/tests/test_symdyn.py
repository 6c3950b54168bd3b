import itertools

import numpy as np
import pytest

from zetachain.errors import CapExceeded, NotClosed, WrongKind
from zetachain.schemes import build_bowen_series, build_flow_adapted
from zetachain.symdyn import (
    Word,
    class_census,
    compile_database,
    enumerate_closed,
    length_spectrum,
    orbit_record,
)


@pytest.fixture(scope="module")
def flow111():
    return build_flow_adapted((1, 1, 1), 12.0)


@pytest.fixture(scope="module")
def flow456():
    return build_flow_adapted((4, 5, 6), 8.0)


@pytest.fixture(scope="module")
def bowen12():
    return build_bowen_series(12.0, 12.0, 12.0)


def brute_closed_words(s, n):
    """Reference enumeration by filtering the full product set."""
    adj = np.asarray(s.adjacency)
    words = []
    for tup in itertools.product(range(1, s.symbol_count + 1), repeat=n):
        path = tup + (tup[0],)
        if all(adj[a - 1, b - 1] for a, b in zip(path, path[1:])):
            words.append(path)
    return sorted(words)


class TestEnumeration:
    def test_flow_counts(self, flow111):
        assert len(enumerate_closed(flow111, 2)) == 12
        assert len(enumerate_closed(flow111, 4)) == 36
        assert len(enumerate_closed(flow111, 6)) == 132

    def test_odd_lengths_empty(self, flow111):
        assert enumerate_closed(flow111, 3) == []
        assert enumerate_closed(flow111, 5) == []

    def test_matches_brute_force(self, flow111, bowen12):
        for s in (flow111, bowen12):
            for n in (1, 2, 3, 4):
                got = [w.symbols for w in enumerate_closed(s, n)]
                assert got == brute_closed_words(s, n)

    def test_cap(self, flow111):
        with pytest.raises(CapExceeded):
            enumerate_closed(flow111, 21)


class TestOrbitRecord:
    def test_funnel_word(self, flow456):
        rec = orbit_record(flow456, Word((1, 5, 1)))
        assert rec.length == pytest.approx(4 * 8.0, abs=1e-9 * 33)
        assert rec.weight == 4
        assert rec.prime and rec.class_size == 2 and rec.rep_index == 1

    def test_repetition_scaling(self, flow456):
        w = Word((1, 5, 1))
        rec1 = orbit_record(flow456, w)
        rec2 = orbit_record(flow456, w.repeated(2))
        assert rec2.length == pytest.approx(2 * rec1.length, rel=1e-12)
        assert rec2.weight == 2 * rec1.weight
        assert not rec2.prime
        assert rec2.rep_index == 2
        assert rec2.class_size == rec1.class_size

    def test_shift_invariance(self, flow456, bowen12):
        for s, w in ((flow456, Word((1, 5, 3, 5, 1))), (bowen12, Word((1, 1, 2, 1)))):
            rec = orbit_record(s, w)
            shifted = orbit_record(s, w.shifted_left())
            assert shifted.length == pytest.approx(rec.length, rel=1e-12)
            assert shifted.weight == rec.weight
            assert shifted.prime == rec.prime
            assert shifted.class_size == rec.class_size

    def test_not_closed(self, flow456):
        with pytest.raises(NotClosed):
            orbit_record(flow456, Word((1, 5, 3)))

    def test_repetition_laws_all_short_primes(self, flow111):
        for w in enumerate_closed(flow111, 4):
            rec = orbit_record(flow111, w)
            if not rec.prime:
                continue
            for k in (2, 3):
                reck = orbit_record(flow111, w.repeated(k))
                assert reck.length == pytest.approx(k * rec.length, rel=1e-12)
                assert reck.weight == k * rec.weight
                assert reck.rep_index == k


class TestDatabase:
    def test_word_counts_match_adjacency_trace(self, flow111, bowen12):
        dbf = compile_database(flow111, 12)
        eig_counts = {n: 2 * 4 ** (n // 2) + 4 for n in range(2, 13, 2)}
        for n, bucket in dbf.buckets.items():
            assert bucket.word_count == eig_counts[n]
            assert int(bucket.class_sizes.sum()) == bucket.word_count
        dbb = compile_database(bowen12, 8)
        for n, bucket in dbb.buckets.items():
            assert bucket.word_count == 3 ** n + (-1) ** n + 2
            assert int(bucket.class_sizes.sum()) == bucket.word_count

    def test_matches_per_word_records(self, flow456):
        db = compile_database(flow456, 6)
        for n in (2, 4, 6):
            per_word = sorted(
                (orbit_record(flow456, w).length, orbit_record(flow456, w).weight)
                for w in enumerate_closed(flow456, n)
            )
            bucket = db.bucket(n)
            expanded = sorted(
                (l, w)
                for l, w, cs in zip(bucket.lengths, bucket.weights, bucket.class_sizes)
                for _ in range(int(cs))
            )
            assert len(per_word) == len(expanded)
            for (l1, w1), (l2, w2) in zip(per_word, expanded):
                assert l1 == pytest.approx(l2, rel=1e-12)
                assert w1 == w2

    def test_length2_classes_445(self):
        s = build_flow_adapted((4, 4, 5), 8.0)
        bucket = compile_database(s, 2).bucket(2)
        assert len(bucket.lengths) == 6
        assert np.all(bucket.class_sizes == 2)
        assert sorted(bucket.weights.tolist()) == [4, 4, 4, 4, 5, 5]

    def test_empty_for_short_flow(self, flow111):
        assert compile_database(flow111, 1).buckets == {}

    def test_deterministic_stream(self, flow456):
        a = compile_database(flow456, 6).record_stream()
        b = compile_database(flow456, 6).record_stream()
        assert a == b

    def test_even_weight_sums(self, flow456):
        db = compile_database(flow456, 6)
        for n, bucket in db.buckets.items():
            # stored weights are already halved sums; reconstruct and check parity
            assert np.all(bucket.weights * 2 % 2 == 0)
            assert np.all(bucket.weights >= 1)


class TestCensus:
    @staticmethod
    def expected_census(n_triple, word_len):
        n1, n2, n3 = n_triple
        out = {}

        def add(weight, count):
            out[weight] = out.get(weight, 0) + count

        if word_len == 2:
            for v in (n1, n2, n3):
                add(v, 4)
        elif word_len == 4:
            for v in (n1, n2, n3):
                add(2 * v, 4)
            for a, b in ((n1, n2), (n2, n3), (n1, n3)):
                add(a + b, 8)
        elif word_len == 6:
            for v in (n1, n2, n3):
                add(3 * v, 4)
            for a, b in itertools.permutations((n1, n2, n3), 2):
                add(2 * a + b, 12)
            add(n1 + n2 + n3, 48)
        return out

    @pytest.mark.parametrize("n", [(1, 1, 1), (4, 4, 5), (4, 5, 6)])
    @pytest.mark.parametrize("word_len", [2, 4, 6])
    def test_word_number_formula(self, n, word_len):
        s = build_flow_adapted(n, 8.0)
        assert class_census(s, word_len) == self.expected_census(n, word_len)

    def test_wrong_kind(self, bowen12):
        with pytest.raises(WrongKind):
            class_census(bowen12, 2)


class TestLengthSpectrum:
    def test_shortest_entries_distinct_triple(self, flow456):
        spec = length_spectrum(flow456, 48.5)
        assert spec[0].length == pytest.approx(32.0, abs=1e-9)
        assert spec[0].weight == 4 and spec[0].count == 2
        lens = {(round(e.length, 6), e.weight): e.count for e in spec}
        assert lens[(40.0, 5)] == 2
        assert lens[(48.0, 6)] == 2

    def test_below_minimum_empty(self, flow456):
        assert length_spectrum(flow456, 20.0) == []

    def test_cap_exceeded(self, flow456):
        with pytest.raises(CapExceeded):
            length_spectrum(flow456, 100.0, cap=4)

    def test_cross_scheme_multisets(self, flow111, bowen12):
        sf = length_spectrum(flow111, 38.0)
        sb = length_spectrum(bowen12, 38.0)
        assert len(sf) == len(sb)
        for ef, eb in zip(sf, sb):
            assert ef.length == pytest.approx(eb.length, abs=1e-9)
            assert ef.count == eb.count
            assert eb.weight is None
