import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import all_words, index_of, operator
from strategies import pauli_sums, words
from paulikron.exceptions import InvalidLetter, LengthMismatch, QubitCountMismatch
from paulikron.pauli import (
    PauliSum,
    decode,
    decode_many,
    encode,
    encode_many,
    filter_coefficients,
    parse_pauli_string,
    split_identity,
    subtract,
    traceless_frobenius_norm,
)


class TestParse:
    def test_encoding_digit_map(self):
        assert parse_pauli_string("XZ", 2).code == 7
        assert parse_pauli_string("II", 2).code == 0

    def test_invalid_letter_position(self):
        with pytest.raises(InvalidLetter) as info:
            parse_pauli_string("XQ", 2)
        assert info.value.position == 1

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            parse_pauli_string("XYZ", 2)

    def test_lowercase_rejected(self):
        with pytest.raises(InvalidLetter):
            parse_pauli_string("xz", 2)


@pytest.mark.parametrize("n", range(1, 7))
def test_round_trip_exhaustive(n):
    words_n = all_words(n)
    codes = encode_many(words_n, n)
    np.testing.assert_array_equal(codes, [index_of(w) for w in words_n])
    assert decode_many(codes, n) == words_n
    assert all(decode(encode(w), n) == w for w in words_n)


@given(st.integers(7, 12).flatmap(lambda n: st.tuples(st.just(n), words(n))))
def test_round_trip_sampled(nw):
    n, w = nw
    assert decode(encode(w), n) == w
    assert encode_many([w], n)[0] == index_of(w)


def test_encode_slices_match_prefix_suffix():
    w = ["XYZIZ", "ZZZZI"]
    np.testing.assert_array_equal(encode_many(w, 5, 0, 2), [index_of("XY"), index_of("ZZ")])
    np.testing.assert_array_equal(encode_many(w, 5, 2, 5), [index_of("ZIZ"), index_of("ZZI")])


class TestPauliSum:
    def test_duplicates_accumulate(self):
        h = PauliSum(2, [("XX", 0.25), ("XX", 0.25)])
        assert dict(h.terms) == {"XX": 0.5}

    def test_exact_zero_dropped(self):
        h = PauliSum(2, [("XX", 0.5), ("XX", -0.5), ("ZZ", 1.0)])
        assert list(h) == ["ZZ"]

    def test_complex_rejected(self):
        with pytest.raises(TypeError):
            PauliSum(1, {"Z": 1 + 2j})

    def test_wrong_width(self):
        with pytest.raises(LengthMismatch):
            PauliSum(2, {"XXX": 1.0})

    def test_arithmetic(self):
        a = PauliSum(2, {"XX": 1.0, "ZZ": 2.0})
        b = PauliSum(2, {"XX": 1.0})
        assert a - b == PauliSum(2, {"ZZ": 2.0})
        assert (a + b).coeff("XX") == 2.0
        assert (2 * a).coeff("ZZ") == 4.0
        assert -a == a.scale(-1)


class TestSplit:
    def test_with_identity(self):
        s = split_identity(PauliSum(2, {"II": 2.0, "XX": 0.5}))
        assert s.identity_coeff == 2.0 and dict(s.traceless.terms) == {"XX": 0.5}

    def test_without_identity(self):
        s = split_identity(PauliSum(2, {"XX": 0.5}))
        assert s.identity_coeff == 0.0 and dict(s.traceless.terms) == {"XX": 0.5}

    def test_pure_identity(self):
        s = split_identity(PauliSum(2, {"II": -1.3}))
        assert s.identity_coeff == -1.3 and len(s.traceless) == 0

    @given(pauli_sums())
    def test_partition(self, h):
        s = split_identity(h)
        assert "I" * h.n not in s.traceless
        assert s.reassemble() == h


class TestFilter:
    def test_small_dropped(self):
        h = filter_coefficients(PauliSum(2, {"XX": 0.5, "ZI": 1e-15}), 1e-12)
        assert dict(h.terms) == {"XX": 0.5}

    def test_zero_tol_identity(self):
        h = PauliSum(2, {"XX": 0.5, "ZI": 1e-15})
        assert filter_coefficients(h, 0.0) == h

    def test_everything_dropped(self):
        assert len(filter_coefficients(PauliSum(2, {"XX": 1e-13, "YY": -1e-13}), 1e-12)) == 0

    @given(pauli_sums(), st.floats(0, 5), st.floats(0, 5))
    def test_idempotent_and_monotone(self, h, t1, t2):
        lo, hi = sorted((t1, t2))
        once = filter_coefficients(h, lo)
        assert filter_coefficients(once, lo) == once
        assert len(filter_coefficients(h, hi)) <= len(once)


class TestNorm:
    def test_single_term(self):
        assert traceless_frobenius_norm(PauliSum(2, {"XX": 0.5})) == pytest.approx(1.0, rel=1e-15)

    def test_one_qubit(self):
        assert traceless_frobenius_norm(PauliSum(1, {"Z": 1.0})) == pytest.approx(math.sqrt(2), rel=1e-15)

    def test_empty(self):
        assert traceless_frobenius_norm(PauliSum(2, {"II": 3.0})) == 0.0

    def test_matches_dense_random(self):
        rng = np.random.default_rng(5)
        words4 = all_words(4)[1:]
        picked = rng.choice(len(words4), 20, replace=False)
        h = PauliSum(4, {words4[i]: float(rng.standard_normal()) for i in picked})
        dense = np.linalg.norm(operator(dict(h.terms), 4))
        assert traceless_frobenius_norm(h) == pytest.approx(dense, rel=1e-10)

    @given(pauli_sums(max_n=6))
    def test_identity_against_dense(self, h):
        tr = split_identity(h).traceless
        dense = np.linalg.norm(operator(dict(tr.terms), h.n))
        assert traceless_frobenius_norm(h) == pytest.approx(dense, rel=1e-10, abs=1e-12)


class TestSubtract:
    def test_examples(self):
        d = subtract(PauliSum(1, {"Z": 1.0}), PauliSum(1, {"Z": 0.9}))
        assert d.coeff("Z") == pytest.approx(0.1)
        h = PauliSum(2, {"XX": 0.5})
        assert len(subtract(h, h)) == 0
        assert dict(subtract(h, PauliSum(2, {"YY": 0.2})).terms) == {"XX": 0.5, "YY": -0.2}

    def test_qubit_mismatch(self):
        with pytest.raises(QubitCountMismatch):
            subtract(PauliSum(1, {"Z": 1.0}), PauliSum(2, {"ZZ": 1.0}))
