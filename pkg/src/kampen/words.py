"""Reduced words in free groups over interned alphabets.

A letter is stored as a nonzero int: ``+(i+1)`` for the i-th alphabet
symbol, ``-(i+1)`` for its inverse.  Words are kept freely reduced at
all times; the empty word prints as ``1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class WordError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """An ordered, interned set of symbol names."""

    names: tuple[str, ...]
    tag: str = ""
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        idx = {}
        for i, name in enumerate(self.names):
            if name in idx:
                raise WordError(f"duplicate symbol {name!r} in alphabet")
            idx[name] = i
        object.__setattr__(self, "_index", idx)

    def __len__(self):
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise WordError(f"symbol {name!r} not in alphabet {self.names}") from None

    def name(self, i: int) -> str:
        return self.names[i]

    def with_suffix(self, suffix: str) -> "Alphabet":
        return Alphabet(tuple(n + suffix for n in self.names), tag=self.tag + suffix)

    def __repr__(self):
        label = self.tag or ",".join(self.names[:4]) + ("..." if len(self.names) > 4 else "")
        return f"Alphabet({label}:{len(self.names)})"


def reduce_letters(letters) -> tuple[int, ...]:
    """Freely reduce a sequence of signed letters (stack algorithm)."""
    out: list[int] = []
    for x in letters:
        if x == 0:
            raise WordError("0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


class ReducedWord:
    """A freely reduced word over a fixed :class:`Alphabet`."""

    __slots__ = ("alphabet", "letters", "_hash")

    def __init__(self, alphabet: Alphabet, letters=(), *, _reduced=False):
        self.alphabet = alphabet
        lts = tuple(letters) if _reduced else reduce_letters(letters)
        n = len(alphabet)
        for x in lts:
            if not (1 <= abs(x) <= n):
                raise WordError(f"letter {x} outside alphabet of size {n}")
        self.letters = lts
        self._hash = None

    # -- construction helpers -------------------------------------------

    @classmethod
    def empty(cls, alphabet: Alphabet) -> "ReducedWord":
        return cls(alphabet, (), _reduced=True)

    @classmethod
    def from_pairs(cls, alphabet: Alphabet, pairs) -> "ReducedWord":
        """Build from (symbol-index, sign) pairs."""
        return cls(alphabet, [(i + 1) * s for i, s in pairs])

    @classmethod
    def from_names(cls, alphabet: Alphabet, names) -> "ReducedWord":
        """Build from symbol names; a leading ``~`` inverts."""
        letters = []
        for nm in names:
            if nm.startswith("~"):
                letters.append(-(alphabet.index(nm[1:]) + 1))
            else:
                letters.append(alphabet.index(nm) + 1)
        return cls(alphabet, letters)

    # -- queries ---------------------------------------------------------

    def __len__(self):
        return len(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        return (
            isinstance(other, ReducedWord)
            and self.alphabet is other.alphabet
            and self.letters == other.letters
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((id(self.alphabet), self.letters))
        return self._hash

    def is_positive(self) -> bool:
        """True iff every letter occurs with positive sign (the empty
        word is positive)."""
        return all(x > 0 for x in self.letters)

    def pairs(self):
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in self.letters]

    # -- algebra ---------------------------------------------------------

    def _check_same(self, other: "ReducedWord"):
        if self.alphabet is not other.alphabet:
            raise WordError(
                f"alphabet mismatch: {self.alphabet!r} vs {other.alphabet!r}"
            )

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        self._check_same(other)
        a, b = self.letters, other.letters
        # cancel at the seam only; both sides are already reduced
        i, j = len(a), 0
        while i > 0 and j < len(b) and a[i - 1] == -b[j]:
            i -= 1
            j += 1
        return ReducedWord(self.alphabet, a[:i] + b[j:], _reduced=True)

    def __invert__(self) -> "ReducedWord":
        return ReducedWord(
            self.alphabet, tuple(-x for x in reversed(self.letters)), _reduced=True
        )

    def __pow__(self, n: int) -> "ReducedWord":
        if n < 0:
            return (~self) ** (-n)
        out = ReducedWord.empty(self.alphabet)
        for _ in range(n):
            out = out * self
        return out

    def cyclic_reduce(self) -> tuple["ReducedWord", "ReducedWord"]:
        """Return (core, g) with ``self == g * core * ~g`` and core
        cyclically reduced."""
        lts = self.letters
        i, j = 0, len(lts)
        while j - i >= 2 and lts[i] == -lts[j - 1]:
            i += 1
            j -= 1
        core = ReducedWord(self.alphabet, lts[i:j], _reduced=True)
        conj = ReducedWord(self.alphabet, lts[:i], _reduced=True)
        return core, conj

    def is_cyclically_reduced(self) -> bool:
        lts = self.letters
        return len(lts) < 2 or lts[0] != -lts[-1]

    def translate(self, target: Alphabet) -> "ReducedWord":
        """Copy-isomorphism by symbol position into ``target``."""
        if len(target) < len(self.alphabet):
            raise WordError("target alphabet too small for translation")
        return ReducedWord(target, self.letters, _reduced=True)

    # -- text form ---------------------------------------------------------

    def __str__(self):
        if not self.letters:
            return "1"
        parts = []
        for x in self.letters:
            nm = self.alphabet.name(abs(x) - 1)
            parts.append(nm if x > 0 else nm + "^-1")
        return ".".join(parts)

    def __repr__(self):
        return f"<{self}>"


def parse_word(alphabet: Alphabet, text: str) -> ReducedWord:
    """Parse ``a.b^-1.c`` / ``a.~b.c`` syntax; ``1`` is the empty word."""
    text = text.strip()
    if text in ("", "1"):
        return ReducedWord.empty(alphabet)
    letters: list[int] = []
    for tok in text.split("."):
        tok = tok.strip()
        if not tok:
            raise WordError("empty token in word text")
        if tok.startswith("~"):
            letters.append(-(alphabet.index(tok[1:]) + 1))
            continue
        if "^" in tok:
            nm, _, exp = tok.partition("^")
            try:
                e = int(exp)
            except ValueError:
                raise WordError(f"bad exponent {exp!r}") from None
            base = alphabet.index(nm) + 1
            letters.extend([base if e > 0 else -base] * abs(e))
        else:
            letters.append(alphabet.index(tok) + 1)
    return ReducedWord(alphabet, letters)


def common_prefix_len(u: ReducedWord, v: ReducedWord) -> int:
    n = 0
    for x, y in zip(u.letters, v.letters):
        if x != y:
            break
        n += 1
    return n


def common_suffix_len(u: ReducedWord, v: ReducedWord) -> int:
    n = 0
    for x, y in zip(reversed(u.letters), reversed(v.letters)):
        if x != y:
            break
        n += 1
    return n
