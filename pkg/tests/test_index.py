"""Packed codes, popcount distances, queries, and the codes file format."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppc.index import (
    PackedCodes,
    hamming,
    hamming_to_all,
    load_codes,
    pack,
    pair_hamming,
    query_knn,
    query_radius,
    save_codes,
    unpack,
)


def _random_codes(p, n, seed):
    rng = np.random.default_rng(seed)
    return (2 * rng.integers(0, 2, size=(p, n)) - 1).astype(np.int8)


class TestPackUnpack:
    def test_single_bit_layout(self):
        C = np.array([[1, -1]], dtype=np.int8)
        packed = pack(C)
        assert packed.words.tolist() == [[1], [0]]

    def test_full_word(self):
        C = np.ones((64, 1), dtype=np.int8)
        packed = pack(C)
        assert packed.words[0, 0] == np.uint64(0xFFFF_FFFF_FFFF_FFFF)

    def test_word_boundary_padding(self):
        C = np.ones((65, 2), dtype=np.int8)
        packed = pack(C)
        assert packed.words.shape == (2, 2)
        assert packed.words[0, 1] == 1  # only bit 0 of the second word

    def test_roundtrip_exact(self):
        C = _random_codes(37, 20, seed=1)
        assert np.array_equal(unpack(pack(C)), C)

    def test_rejects_non_pm1(self):
        with pytest.raises(ValueError):
            pack(np.array([[1, 0]], dtype=np.int8))


class TestHamming:
    def test_identical_zero(self):
        C = _random_codes(24, 2, seed=2)
        C[:, 1] = C[:, 0]
        packed = pack(C)
        assert hamming(packed.words[0], packed.words[1], 24) == 0

    def test_antipodal(self):
        C = np.ones((50, 2), dtype=np.int8)
        C[:, 1] = -1
        packed = pack(C)
        assert hamming(packed.words[0], packed.words[1], 50) == 100

    def test_three_of_24_differ(self):
        C = np.ones((24, 2), dtype=np.int8)
        C[[3, 11, 17], 1] = -1
        packed = pack(C)
        assert hamming(packed.words[0], packed.words[1], 24) == 6
        # cross-check the inner-product identity p - c_i . c_j
        ip = int(C[:, 0].astype(int) @ C[:, 1].astype(int))
        assert 24 - ip == 6

    def test_matches_naive_on_random_pairs(self):
        C = _random_codes(48, 200, seed=3)
        packed = pack(C)
        rng = np.random.default_rng(4)
        for _ in range(500):
            i, j = rng.integers(0, 200, size=2)
            naive = 48 - int(C[:, i].astype(int) @ C[:, j].astype(int))
            assert hamming(packed.words[i], packed.words[j], 48) == naive

    def test_word_count_mismatch(self):
        a = np.zeros(2, dtype=np.uint64)
        with pytest.raises(ValueError):
            hamming(a, a, p=200)


class TestPairHamming:
    def test_matches_gram_identity(self):
        C = _random_codes(17, 30, seed=5)
        packed = pack(C)
        d = pair_hamming(packed)
        G = C.astype(np.int64).T @ C.astype(np.int64)
        iu = np.triu_indices(30, 1)
        assert np.array_equal(d, 17 - G[iu])

    def test_blocking_invariant(self):
        C = _random_codes(9, 23, seed=6)
        packed = pack(C)
        assert np.array_equal(pair_hamming(packed, block=4), pair_hamming(packed, block=64))


class TestQueries:
    def test_radius_negative_alpha_empty(self):
        C = _random_codes(8, 10, seed=7)
        packed = pack(C)
        assert query_radius(packed, packed.words[0], alpha=-1).size == 0

    def test_radius_max_alpha_returns_all(self):
        C = _random_codes(8, 10, seed=8)
        packed = pack(C)
        ids = query_radius(packed, packed.words[0], alpha=16)
        assert sorted(ids.tolist()) == list(range(10))

    def test_radius_zero_exact_match_only(self):
        C = np.ones((6, 2), dtype=np.int8)
        C[:, 1] = -1
        packed = pack(C)
        ids = query_radius(packed, packed.words[0], alpha=0)
        assert ids.tolist() == [0]

    def test_knn_full_set_is_permutation(self):
        C = _random_codes(12, 15, seed=9)
        packed = pack(C)
        ids = query_knn(packed, packed.words[3], k=15)
        assert sorted(ids.tolist()) == list(range(15))
        d = hamming_to_all(packed, packed.words[3])
        assert np.all(np.diff(d[ids]) >= 0)

    def test_knn_self_first(self):
        C = _random_codes(16, 12, seed=10)
        packed = pack(C)
        assert query_knn(packed, packed.words[5], k=1).tolist() == [5]

    def test_knn_tie_smaller_id(self):
        C = np.ones((4, 3), dtype=np.int8)
        C[0, 1] = -1  # ids 1 and 2... make 1 and 2 equidistant from 0
        C[0, 2] = -1
        packed = pack(C)
        assert query_knn(packed, packed.words[0], k=2).tolist() == [0, 1]

    def test_knn_k_exceeds_n(self):
        C = _random_codes(8, 5, seed=11)
        packed = pack(C)
        assert query_knn(packed, packed.words[0], k=50).size == 5

    def test_radius_partition(self):
        C = _random_codes(10, 20, seed=12)
        packed = pack(C)
        inside = set(query_radius(packed, packed.words[0], alpha=8).tolist())
        d = hamming_to_all(packed, packed.words[0])
        outside = {i for i in range(20) if d[i] > 8}
        assert inside | outside == set(range(20))
        assert not (inside & outside)


class TestCodesFile:
    def test_roundtrip_bytes(self, tmp_path):
        C = _random_codes(33, 40, seed=13)
        packed = pack(C, ids=np.arange(100, 140))
        path = tmp_path / "codes.ppcb"
        save_codes(packed, path)
        loaded = load_codes(path)
        assert loaded.n == 40 and loaded.p == 33
        assert np.array_equal(loaded.words, packed.words)
        assert np.array_equal(loaded.ids, packed.ids)
        path2 = tmp_path / "again.ppcb"
        save_codes(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_without_id_table(self, tmp_path):
        packed = pack(_random_codes(7, 9, seed=14))
        path = tmp_path / "codes.ppcb"
        save_codes(packed, path, with_ids=False)
        loaded = load_codes(path)
        assert np.array_equal(loaded.ids, np.arange(9))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ppcb"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            load_codes(path)

    def test_nonzero_padding_rejected(self, tmp_path):
        packed = pack(_random_codes(7, 3, seed=15))
        words = packed.words.copy()
        words[0, 0] |= np.uint64(1 << 60)  # beyond p=7
        bad = PackedCodes(words=words, n=3, p=7)
        path = tmp_path / "pad.ppcb"
        save_codes(bad, path, with_ids=False)
        with pytest.raises(ValueError, match="padding"):
            load_codes(path)


@settings(deadline=None, max_examples=30)
@given(p=st.integers(1, 130), n=st.integers(2, 12), seed=st.integers(0, 999))
def test_pack_roundtrip_property(p, n, seed):
    C = _random_codes(p, n, seed)
    assert np.array_equal(unpack(pack(C)), C)


@settings(deadline=None, max_examples=30)
@given(p=st.integers(1, 100), seed=st.integers(0, 999))
def test_halved_distance_is_a_metric(p, seed):
    """identity, symmetry and triangle inequality on random triples."""
    C = _random_codes(p, 3, seed)
    packed = pack(C)
    w = packed.words
    d01 = hamming(w[0], w[1], p) / 2
    d02 = hamming(w[0], w[2], p) / 2
    d12 = hamming(w[1], w[2], p) / 2
    assert hamming(w[0], w[0], p) == 0
    assert hamming(w[0], w[1], p) == hamming(w[1], w[0], p)
    assert d01 <= d02 + d12
    assert d02 <= d01 + d12
    assert d12 <= d01 + d02
    if not np.array_equal(C[:, 0], C[:, 1]):
        assert d01 > 0
