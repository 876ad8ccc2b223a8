import random

import pytest
from hypothesis import given, strategies as st

from outerint.words import (
    Automorphism,
    CyclicWord,
    Word,
    compose,
    cyclic_length,
    cyclic_reduce,
    enumerate_cyclic_words,
    flip_normalize,
    letter_sort_key,
    parse_word,
    primitive_root,
    reduce,
    word_from_json_obj,
    word_length,
    word_str,
    word_to_json_obj,
)
from oracles import divisor_primitive_root, fibonacci, scan_reduce

letters_rank2 = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=40)
letters_rank3 = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=40)


def fib_aut() -> Automorphism:
    return Automorphism.from_images(2, [[1, 2], [1]], [[2], [-2, 1]])


class TestReduce:
    def test_cancellation(self):
        assert reduce([1, -1], 2).letters == ()

    def test_inner_cancellation(self):
        assert reduce([1, 2, -2, 1], 2).letters == (1, 1)

    @given(letters_rank2)
    def test_matches_scan_oracle(self, letters):
        assert reduce(letters, 2).letters == tuple(scan_reduce(letters))

    @given(letters_rank2)
    def test_word_times_inverse_is_identity(self, letters):
        w = reduce(letters, 2)
        assert (w * w.inverse()).is_identity

    @given(letters_rank2)
    def test_idempotent(self, letters):
        w = reduce(letters, 2)
        assert reduce(w.letters, 2) == w

    def test_rejects_bad_letters(self):
        with pytest.raises(ValueError):
            reduce([3], 2)
        with pytest.raises(ValueError):
            reduce([0], 2)
        with pytest.raises(ValueError):
            Word(2, (1, -1))


class TestCyclicReduce:
    def test_one_letter_conjugation(self):
        root, conj = cyclic_reduce(parse_word("abA", 2))
        assert str(root) == "b" and str(conj) == "A"
        # conjugator^-1 * root * conjugator recovers the input
        assert conj.inverse() * root.as_word() * conj == parse_word("abA", 2)

    def test_already_reduced(self):
        root, conj = cyclic_reduce(parse_word("ab", 2))
        assert root.letters == (1, 2) and conj.is_identity

    def test_identity_marker(self):
        root, conj = cyclic_reduce(Word(2))
        assert root is None and conj.is_identity

    @given(letters_rank2, letters_rank2)
    def test_conjugacy_invariance(self, w_letters, u_letters):
        w = reduce(w_letters, 2)
        u = reduce(u_letters, 2)
        assert cyclic_reduce(w.conjugate_by(u))[0] == cyclic_reduce(w)[0]


class TestCyclicWord:
    def test_canonical_rotation_is_least(self):
        cw = CyclicWord(2, (2, 1))
        assert cw.letters == (1, 2)

    def test_rotations_compare_equal(self):
        assert CyclicWord(2, (1, 2, -1, 2)) == CyclicWord(2, (2, 1, 2, -1))

    def test_rejects_unreduced(self):
        with pytest.raises(ValueError):
            CyclicWord(2, (1, -1))
        with pytest.raises(ValueError):
            CyclicWord(2, (2, 1, -2))  # wraps badly
        with pytest.raises(ValueError):
            CyclicWord(2, ())

    def test_letter_order(self):
        assert [letter_sort_key(l) for l in (1, -1, 2, -2)] == [0, 1, 2, 3]

    def test_flip_normalize(self):
        cw = CyclicWord(2, (-1, -2))
        assert flip_normalize(cw).letters == (1, 2)


class TestPrimitiveRoot:
    def test_visible_period(self):
        root, m = primitive_root(CyclicWord(2, (1, 2, 1, 2)))
        assert root.letters == (1, 2) and m == 2

    def test_primitive_case(self):
        root, m = primitive_root(CyclicWord(2, (1, 2)))
        assert root.letters == (1, 2) and m == 1

    @given(letters_rank2)
    def test_against_divisor_oracle(self, letters):
        w = reduce(letters, 2)
        root, _ = cyclic_reduce(w)
        if root is None:
            return
        got_root, got_m = primitive_root(root)
        oracle_root, oracle_m = divisor_primitive_root(root.letters)
        assert got_m == oracle_m
        assert len(root) % len(got_root) == 0
        assert got_root.letters == oracle_root

    @given(letters_rank2, st.integers(min_value=1, max_value=4))
    def test_power_recovers_root(self, letters, m):
        w = reduce(letters, 2)
        root, _ = cyclic_reduce(w)
        if root is None:
            return
        powered, _ = cyclic_reduce(root.as_word() ** m)
        got_root, got_m = primitive_root(powered)
        assert got_root.letters == primitive_root(root)[0].letters
        assert got_m % m == 0


class TestAutomorphism:
    def test_direct_substitution(self):
        assert str(fib_aut().apply(parse_word("a", 2))) == "ab"

    @given(letters_rank2)
    def test_inverse_round_trip(self, letters):
        phi = fib_aut()
        w = reduce(letters, 2)
        assert phi.apply(phi.apply_inverse(w)) == w

    def test_fibonacci_growth(self):
        phi = fib_aut()
        w = parse_word("a", 2)
        for n in range(21):
            assert word_length(w) == fibonacci(n + 2)
            w = phi.apply(w)

    @given(letters_rank2, letters_rank2)
    def test_homomorphism(self, u_letters, v_letters):
        phi = fib_aut()
        u, v = reduce(u_letters, 2), reduce(v_letters, 2)
        assert phi.apply(u * v) == phi.apply(u) * phi.apply(v)

    def test_rejects_non_inverse_pair(self):
        with pytest.raises(ValueError):
            Automorphism.from_images(2, [[1, 2], [1]], [[1], [2]])

    def test_compose_with_inverse_is_identity(self):
        phi = fib_aut()
        assert compose(phi, phi.inverse()).is_identity
        assert compose(phi.inverse(), phi).is_identity

    def test_identity_neutral(self):
        phi = fib_aut()
        ident = Automorphism.identity(2)
        assert compose(ident, phi).images == phi.images
        assert compose(phi, ident).images == phi.images

    def test_associativity_on_random_triples(self):
        rng = random.Random(11)
        from _generators import random_automorphism

        for _ in range(25):
            a, b, c = (random_automorphism(rng, 2) for _ in range(3))
            lhs = compose(compose(a, b), c)
            rhs = compose(a, compose(b, c))
            for i in range(1, 3):
                g = Word(2, (i,))
                assert lhs.apply(g) == rhs.apply(g)

    def test_json_round_trip(self):
        phi = fib_aut()
        assert Automorphism.from_json_obj(phi.to_json_obj()).images == phi.images


class TestLengths:
    def test_examples(self):
        w = parse_word("abA", 2)
        assert word_length(w) == 3
        assert cyclic_length(w) == 1
        assert word_length(Word(2)) == 0 and cyclic_length(Word(2)) == 0

    @given(letters_rank3, st.integers(min_value=-5, max_value=5))
    def test_power_law(self, letters, m):
        w = reduce(letters, 3)
        # direct power-and-reduce oracle
        powered = Word(3)
        base = w if m >= 0 else w.inverse()
        for _ in range(abs(m)):
            powered = powered * base
        assert cyclic_length(powered) == abs(m) * cyclic_length(w)

    @given(letters_rank3, letters_rank3)
    def test_cyclic_length_conjugacy_invariant(self, w_letters, u_letters):
        w, u = reduce(w_letters, 3), reduce(u_letters, 3)
        assert cyclic_length(w.conjugate_by(u)) == cyclic_length(w)


class TestTextAndJson:
    def test_parse_word(self):
        assert parse_word("abA", 2).letters == (1, 2, -1)
        assert parse_word("", 2).is_identity

    @given(letters_rank2)
    def test_round_trips(self, letters):
        w = reduce(letters, 2)
        if not w.is_identity:
            assert parse_word(word_str(w), 2) == w
        assert word_from_json_obj(word_to_json_obj(w), 2) == w


class TestEnumeration:
    def test_counts_rank2(self):
        classes = enumerate_cyclic_words(2, 2)
        # length 1: a, A, b, B; length 2: ab, aB, Ab, AB, aa, AA, bb, BB
        assert len(classes) == 12

    def test_up_to_inversion_halves_free_pairs(self):
        full = enumerate_cyclic_words(2, 2)
        half = enumerate_cyclic_words(2, 2, up_to_inversion=True)
        assert len(half) == 6
        assert all(flip_normalize(cw) == cw for cw in half)
        assert {flip_normalize(cw).letters for cw in full} == {cw.letters for cw in half}

    def test_deterministic_order(self):
        a = enumerate_cyclic_words(3, 3)
        b = enumerate_cyclic_words(3, 3)
        assert a == b
        assert list(a) == sorted(a, key=CyclicWord.sort_key)
