"""Subgroup membership in free groups via folded core automata.

A finitely generated subgroup is stored as an inverse automaton: states
with edges labeled by signed letters, folded so that no state carries
two equal-labeled outgoing edges.  Membership is a single walk from the
base state.
"""

from __future__ import annotations

from .words import Alphabet, ReducedWord, WordError, parse_word


class SubgroupAutomaton:
    """Folded core graph of a finitely generated subgroup.

    States are ints with base state 0.  ``out[s][x]`` is the target of
    the edge labeled by signed letter ``x``; inverse edges are always
    stored symmetrically.
    """

    def __init__(self, alphabet: Alphabet, generators=()):
        self.alphabet = alphabet
        self.generators = tuple(generators)
        for g in self.generators:
            if g.alphabet is not alphabet:
                raise WordError("generator over wrong alphabet")
        self.out: list[dict[int, int]] = [{}]
        self._build()

    # -- construction ------------------------------------------------------

    def _build(self):
        # one petal per generator; fold from the raw edge list so that
        # equal-labeled edges are merged, not clobbered
        triples: list[tuple[int, int, int]] = []
        n = 1
        for g in self.generators:
            cur = 0
            lts = g.letters
            for i, x in enumerate(lts):
                if i == len(lts) - 1:
                    nxt = 0
                else:
                    nxt = n
                    n += 1
                triples.append((cur, x, nxt))
                cur = nxt
        self._fold(n, triples)

    def _fold(self, n: int, triples: list[tuple[int, int, int]]):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                lo, hi = (ra, rb) if ra < rb else (rb, ra)
                parent[hi] = lo

        # both orientations so edges merging into a state also fold
        sym = triples + [(t, -x, s) for s, x, t in triples]
        changed = True
        while changed:
            changed = False
            merged: dict[tuple[int, int], int] = {}
            for s, x, t in sym:
                key = (find(s), x)
                ft = find(t)
                prev = merged.get(key)
                if prev is None:
                    merged[key] = ft
                elif find(prev) != ft:
                    union(prev, ft)
                    changed = True

        new_out: list[dict[int, int]] = []
        remap: dict[int, int] = {}

        def state_id(r):
            if r not in remap:
                remap[r] = len(new_out)
                new_out.append({})
            return remap[r]

        state_id(find(0))  # base stays 0
        for s, x, t in sym:
            new_out[state_id(find(s))][x] = state_id(find(t))
        self.out = new_out

    # -- queries -----------------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.out)

    def walk(self, word: ReducedWord, start: int = 0):
        """Follow ``word`` from ``start``; return the end state or None
        if some edge is missing."""
        if word.alphabet is not self.alphabet:
            raise WordError("word over wrong alphabet")
        s = start
        for x in word.letters:
            s = self.out[s].get(x)
            if s is None:
                return None
        return s

    def member(self, word: ReducedWord) -> bool:
        """Is ``word`` in the subgroup?"""
        return self.walk(word) == 0

    def in_left_coset(self, rep: ReducedWord, word: ReducedWord) -> bool:
        """Is ``word`` in ``rep * H``?"""
        return self.member(~rep * word)

    def loops(self, max_len: int):
        """Yield all reduced subgroup elements of length <= max_len,
        shortest first."""
        yield ReducedWord.empty(self.alphabet)
        frontier = [(0, ())]
        for _ in range(max_len):
            nxt = []
            for s, path in frontier:
                last = path[-1] if path else 0
                for x, t in sorted(self.out[s].items()):
                    if x == -last:
                        continue
                    nxt.append((t, path + (x,)))
                    if t == 0:
                        yield ReducedWord(self.alphabet, path + (x,), _reduced=True)
            frontier = nxt

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet.names),
            "generators": [str(g) for g in self.generators],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SubgroupAutomaton":
        ab = Alphabet(tuple(data["alphabet"]))
        gens = [parse_word(ab, t) for t in data["generators"]]
        return cls(ab, gens)


class SectorConstraint:
    """Allowed content of one machine sector: the whole free group, the
    trivial subgroup, or a proper finitely generated subgroup."""

    WHOLE = "whole"
    TRIVIAL = "trivial"
    PROPER = "proper"

    __slots__ = ("kind", "alphabet", "generators", "_automaton")

    def __init__(self, kind: str, alphabet: Alphabet, generators=()):
        if kind not in (self.WHOLE, self.TRIVIAL, self.PROPER):
            raise WordError(f"unknown constraint kind {kind!r}")
        self.kind = kind
        self.alphabet = alphabet
        self.generators = tuple(generators)
        if kind == self.PROPER and not self.generators:
            raise WordError("proper constraint needs generators")
        self._automaton = None

    @classmethod
    def whole(cls, alphabet: Alphabet) -> "SectorConstraint":
        return cls(cls.WHOLE, alphabet)

    @classmethod
    def trivial(cls, alphabet: Alphabet) -> "SectorConstraint":
        return cls(cls.TRIVIAL, alphabet)

    @classmethod
    def proper(cls, alphabet: Alphabet, generators) -> "SectorConstraint":
        return cls(cls.PROPER, alphabet, tuple(generators))

    @property
    def automaton(self) -> SubgroupAutomaton:
        if self._automaton is None:
            self._automaton = SubgroupAutomaton(self.alphabet, self.generators)
        return self._automaton

    def contains(self, word: ReducedWord) -> bool:
        if word.alphabet is not self.alphabet:
            raise WordError("word over wrong alphabet for constraint")
        if self.kind == self.WHOLE:
            return True
        if self.kind == self.TRIVIAL:
            return len(word) == 0
        return self.automaton.member(word)

    def is_trivial(self) -> bool:
        return self.kind == self.TRIVIAL

    def is_whole(self) -> bool:
        return self.kind == self.WHOLE

    def generator_words(self) -> list[ReducedWord]:
        """Words generating the allowed subgroup (letters for whole,
        nothing for trivial)."""
        if self.kind == self.WHOLE:
            return [
                ReducedWord(self.alphabet, (i + 1,), _reduced=True)
                for i in range(len(self.alphabet))
            ]
        if self.kind == self.TRIVIAL:
            return []
        return list(self.generators)

    def __eq__(self, other):
        return (
            isinstance(other, SectorConstraint)
            and self.kind == other.kind
            and self.alphabet is other.alphabet
            and self.generators == other.generators
        )

    def __repr__(self):
        if self.kind == self.PROPER:
            return f"SectorConstraint(proper, {[str(g) for g in self.generators]})"
        return f"SectorConstraint({self.kind})"

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == self.PROPER:
            d["generators"] = [str(g) for g in self.generators]
        return d

    @classmethod
    def from_dict(cls, data: dict, alphabet: Alphabet) -> "SectorConstraint":
        kind = data["kind"]
        gens = [parse_word(alphabet, t) for t in data.get("generators", ())]
        return cls(kind, alphabet, gens)
