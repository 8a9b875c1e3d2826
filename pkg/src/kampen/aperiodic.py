"""Aperiodic word families and chain encodings over a 2-letter alphabet.

The word set W supplies positive words whose pairwise common prefixes
and suffixes stay below one fifth of the shorter word (small
cancellation).  Triples drawn from W define injective substitutions
psi_j (a -> w_j(a), b -> w_j(b)) and shifted maps phi_j(u) = w_j *
psi_j(u) whose images are disjoint cosets, so chains of phi
applications can be decoded outermost-first.
"""

from __future__ import annotations

from dataclasses import dataclass

from .foldings import SubgroupAutomaton
from .words import (
    Alphabet,
    ReducedWord,
    WordError,
    common_prefix_len,
    common_suffix_len,
    reduce_letters,
)

BASE = Alphabet(("a", "b"), tag="base")

_W_SEED = 0x5EED
_MIN_LENGTH = 10
_RANDOM_TRIES = 4000


def check_property_A(u: ReducedWord, v: ReducedWord) -> bool:
    """Common prefix and suffix both at most min(|u|,|v|)/5."""
    if not u.is_positive() or not v.is_positive():
        raise WordError("property check needs positive words")
    if u.letters == v.letters:
        raise WordError("property check needs distinct words")
    m = min(len(u), len(v))
    return 5 * common_prefix_len(u, v) <= m and 5 * common_suffix_len(u, v) <= m


def thue_morse(n: int) -> str:
    """First n letters of the parity sequence over {a,b}."""
    return "".join("b" if bin(i).count("1") % 2 else "a" for i in range(n))


def thue_morse_factors(length: int) -> list[str]:
    """All factors of the given length, ordered by first occurrence."""
    t = thue_morse(16 * length + 64)
    seen: set[str] = set()
    out = []
    for i in range(len(t) - length + 1):
        f = t[i : i + length]
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


def _period_ok(w: str) -> bool:
    # p-periodic blocks capped at 5p so concatenations stay under 11p
    for p in range(1, 7):
        m = 0
        for j in range(p, len(w)):
            m = m + 1 if w[j] == w[j - p] else 0
            if m + p > 5 * p:
                return False
    return True


def _candidates(length: int):
    import random

    yield from thue_morse_factors(length)
    rng = random.Random(_W_SEED * 100003 + length)
    for _ in range(_RANDOM_TRIES):
        yield "".join(rng.choice("ab") for _ in range(length))


_W_CACHE: list[ReducedWord] = []
_W_NEXT_LENGTH = [_MIN_LENGTH]


def generate_W(count: int) -> list[ReducedWord]:
    """Deterministic list of `count` positive words over {a,b}, lengths
    strictly increasing, pairwise small-cancellation.

    Lengths 10..15 are packed densely (the short words feed the machine
    encodings), then grow geometrically: short words pin down 3-letter
    prefix classes forever, and over a 2-letter alphabet those run out
    unless later words get slack.  Per-length seeding makes shorter
    lists prefixes of longer ones, so results are cached.
    """
    if count < 1:
        raise WordError("count must be positive")
    words = _W_CACHE
    while len(words) < count:
        length = _W_NEXT_LENGTH[0]
        if length > 4000:
            raise WordError(f"word generation stalled at {len(words)} words")
        for cand in _candidates(length):
            w = ReducedWord.from_names(BASE, cand)
            if _period_ok(cand) and all(check_property_A(w, v) for v in words):
                words.append(w)
                break
        if length < 15:
            length += 1
        elif length == 15:
            length = 20
        else:
            length += max(1, length // 4)
        _W_NEXT_LENGTH[0] = length
    return list(words[:count])


@dataclass(frozen=True)
class WTriple:
    """One encoding triple: anchor w plus substitution images w_a, w_b."""

    j: int
    w: ReducedWord
    w_a: ReducedWord
    w_b: ReducedWord

    def __post_init__(self):
        seen = {self.w.letters, self.w_a.letters, self.w_b.letters}
        if len(seen) != 3:
            raise WordError("triple words must be pairwise distinct")
        for x in (self.w, self.w_a, self.w_b):
            if not x.is_positive():
                raise WordError("triple words must be positive")

    @property
    def alphabet(self) -> Alphabet:
        return self.w.alphabet


class PhiMap:
    """The substitution psi_j and the shifted map phi_j = w_j * psi_j,
    together with the folded automaton of H(j) = <w_j(a), w_j(b)>."""

    __slots__ = ("triple", "_automaton")

    def __init__(self, triple: WTriple):
        self.triple = triple
        self._automaton = None

    @property
    def alphabet(self) -> Alphabet:
        return self.triple.alphabet

    @property
    def automaton(self) -> SubgroupAutomaton:
        if self._automaton is None:
            self._automaton = SubgroupAutomaton(
                self.alphabet, (self.triple.w_a, self.triple.w_b)
            )
        return self._automaton

    def translated(self, target: Alphabet) -> "PhiMap":
        t = self.triple
        return PhiMap(
            WTriple(t.j, t.w.translate(target), t.w_a.translate(target), t.w_b.translate(target))
        )

    def psi(self, u: ReducedWord) -> ReducedWord:
        """Substitute a -> w_a, b -> w_b, respecting signs."""
        if u.alphabet is not self.alphabet:
            raise WordError("word over wrong alphabet for this map")
        images = (self.triple.w_a.letters, self.triple.w_b.letters)
        out: list[int] = []
        for x in u.letters:
            img = images[abs(x) - 1]
            if x > 0:
                out.extend(img)
            else:
                out.extend(-y for y in reversed(img))
        return ReducedWord(self.alphabet, reduce_letters(out), _reduced=True)

    def phi(self, u: ReducedWord) -> ReducedWord:
        return self.triple.w * self.psi(u)

    def psi_decode(self, w: ReducedWord) -> ReducedWord | None:
        """Invert psi by greedy block matching.

        The true leading block keeps at least 4/5 of itself at the
        front (the next block cancels at most 1/5), while any wrong
        candidate matches under 1/5 of itself; so the 4/5 threshold
        picks exactly one candidate or the input was no psi-image.
        """
        t = self.triple
        cands = [(1, t.w_a.letters), (-1, (~t.w_a).letters), (2, t.w_b.letters), (-2, (~t.w_b).letters)]
        buf = list(w.letters)
        pos = 0
        out: list[int] = []
        while pos < len(buf):
            hit = None
            for letter, gl in cands:
                cp = 0
                while cp < len(gl) and pos + cp < len(buf) and gl[cp] == buf[pos + cp]:
                    cp += 1
                if 5 * cp >= 4 * len(gl):
                    if hit is not None:
                        return None
                    hit = (letter, gl, cp)
            if hit is None:
                return None
            letter, gl, cp = hit
            if out and out[-1] == -letter:
                return None
            out.append(letter)
            # cancel the unmatched tail of the block in place; it fits in
            # the consumed region since cp >= 4/5 |g| > |g| - cp
            pos += cp
            tail = len(gl) - cp
            if tail:
                buf[pos - tail : pos] = [-x for x in reversed(gl[cp:])]
                pos -= tail
        return ReducedWord(self.alphabet, out, _reduced=True)

    def __repr__(self):
        return f"PhiMap(j={self.triple.j}, |w|={len(self.triple.w)})"


def make_triples(count: int) -> list[WTriple]:
    """Build `count` disjoint triples, consuming generate_W in order."""
    words = generate_W(3 * count)
    return [
        WTriple(j + 1, words[3 * j], words[3 * j + 1], words[3 * j + 2])
        for j in range(count)
    ]


def make_maps(count: int) -> list[PhiMap]:
    return [PhiMap(t) for t in make_triples(count)]


def deconstruct_phi(maps: list[PhiMap], w: ReducedWord):
    """If w = phi_j(u) for a (necessarily unique) map in the family,
    return (index, u); otherwise None."""
    hits = []
    for idx, m in enumerate(maps):
        if m.automaton.in_left_coset(m.triple.w, w):
            hits.append(idx)
    if not hits:
        return None
    if len(hits) > 1:
        raise WordError(f"coset images overlap for maps {hits}; family is broken")
    idx = hits[0]
    m = maps[idx]
    u = m.psi_decode(~m.triple.w * w)
    if u is None:
        return None
    return idx, u


def f_encode(maps: list[PhiMap], u: ReducedWord) -> ReducedWord:
    """Encode a positive word letter by letter: empty -> empty, and
    appending letter j wraps the image in phi_j (last letter outermost)."""
    if not u.is_positive():
        raise WordError("encoding input must be positive")
    if len(u.alphabet) > len(maps):
        raise WordError("not enough maps for this alphabet")
    out = ReducedWord.empty(maps[0].alphabet)
    for x in u.letters:
        out = maps[x - 1].phi(out)
    return out


def f_decode(maps: list[PhiMap], w: ReducedWord, alphabet: Alphabet) -> ReducedWord | None:
    """Invert f_encode by peeling outermost phi layers; None if any
    layer fails to match."""
    rev: list[int] = []
    while len(w):
        got = deconstruct_phi(maps, w)
        if got is None:
            return None
        idx, w = got
        if idx + 1 > len(alphabet):
            return None
        rev.append(idx + 1)
    return ReducedWord(alphabet, tuple(reversed(rev)), _reduced=True)
