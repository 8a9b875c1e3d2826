import random

import pytest

from kampen.words import (
    Alphabet,
    ReducedWord,
    WordError,
    common_prefix_len,
    common_suffix_len,
    parse_word,
    reduce_letters,
)

AB = Alphabet(("a", "b", "c"))


def naive_reduce(letters):
    """Delete one adjacent inverse pair at a time until none remain."""
    letters = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(letters) - 1):
            if letters[i] == -letters[i + 1]:
                del letters[i : i + 2]
                changed = True
                break
    return tuple(letters)


def test_reduce_matches_fixpoint_deletion():
    rng = random.Random(20240817)
    for _ in range(300):
        n = rng.randrange(0, 24)
        raw = [rng.choice([1, -1]) * rng.randrange(1, 4) for _ in range(n)]
        assert reduce_letters(raw) == naive_reduce(raw)


def test_empty_word_prints_as_one():
    w = ReducedWord.empty(AB)
    assert str(w) == "1"
    assert len(w) == 0
    assert not w


def test_parse_and_print_roundtrip():
    for text in ("a", "a.b^-1.c", "b^-1", "a.a.a", "1"):
        w = parse_word(AB, text)
        assert parse_word(AB, str(w)) == w


def test_parse_exponents_and_tilde():
    assert parse_word(AB, "a^3") == parse_word(AB, "a.a.a")
    assert parse_word(AB, "a^-2") == parse_word(AB, "a^-1.a^-1")
    assert parse_word(AB, "~b") == parse_word(AB, "b^-1")


def test_parse_reduces():
    assert parse_word(AB, "a.a^-1") == ReducedWord.empty(AB)
    assert parse_word(AB, "a.b.b^-1.a") == parse_word(AB, "a.a")


def test_parse_rejects_unknown_symbol():
    with pytest.raises(WordError):
        parse_word(AB, "a.z")


def test_mul_cancels_at_seam():
    u = parse_word(AB, "a.b")
    v = parse_word(AB, "b^-1.c")
    assert u * v == parse_word(AB, "a.c")
    assert u * ~u == ReducedWord.empty(AB)


def test_mul_is_associative_on_random_words():
    rng = random.Random(99)
    words = [
        ReducedWord(AB, [rng.choice([1, -1]) * rng.randrange(1, 4) for _ in range(rng.randrange(0, 10))])
        for _ in range(30)
    ]
    for _ in range(100):
        u, v, w = rng.choice(words), rng.choice(words), rng.choice(words)
        assert (u * v) * w == u * (v * w)


def test_inverse_law():
    rng = random.Random(7)
    for _ in range(100):
        w = ReducedWord(AB, [rng.choice([1, -1]) * rng.randrange(1, 4) for _ in range(rng.randrange(0, 12))])
        assert w * ~w == ReducedWord.empty(AB)
        assert ~~w == w


def test_pow():
    a = parse_word(AB, "a")
    assert a**3 == parse_word(AB, "a.a.a")
    assert a**-2 == parse_word(AB, "a^-1.a^-1")
    assert a**0 == ReducedWord.empty(AB)


def test_cyclic_reduce():
    w = parse_word(AB, "a.b.c.b^-1.a^-1")
    core, conj = w.cyclic_reduce()
    assert core == parse_word(AB, "c")
    assert conj == parse_word(AB, "a.b")
    assert conj * core * ~conj == w
    assert core.is_cyclically_reduced()
    assert not w.is_cyclically_reduced()


def test_is_positive():
    assert parse_word(AB, "a.b.c").is_positive()
    assert not parse_word(AB, "a.b^-1").is_positive()
    assert ReducedWord.empty(AB).is_positive()


def test_alphabet_mismatch_raises():
    other = Alphabet(("a", "b", "c"))
    u = parse_word(AB, "a")
    v = parse_word(other, "a")
    assert u != v
    with pytest.raises(WordError):
        u * v


def test_translate_by_position():
    target = Alphabet(("x", "y", "z"))
    w = parse_word(AB, "a.b^-1.c")
    assert str(w.translate(target)) == "x.y^-1.z"


def test_common_prefix_suffix():
    u = parse_word(AB, "a.b.c")
    v = parse_word(AB, "a.b.a")
    assert common_prefix_len(u, v) == 2
    assert common_suffix_len(u, v) == 0
    assert common_suffix_len(u, parse_word(AB, "b.c")) == 2


def test_letters_out_of_range_rejected():
    with pytest.raises(WordError):
        ReducedWord(AB, [4])
    with pytest.raises(WordError):
        ReducedWord(AB, [0])
