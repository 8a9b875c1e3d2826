"""Generalized rewriting machines on words with interleaved state letters.

A machine's hardware is a row of parts (state-letter alphabets) with a
slot alphabet between neighbors; slot 0 sits left of part 0 and slot s
right of part s-1.  Circular hardware identifies slot 0 with slot s.

An admissible word alternates signed state letters with sector words.
The base (the sequence of signed part indices) may repeat or invert
parts; which slot a sector lives in is forced by the neighboring signs:
after a positive part-j letter comes slot j+1, after an inverted one
comes slot j.

A rule carries one component per part, (a, q, b) -> (a', q', b'),
meaning every occurrence of q (in either sign) is replaced by
a^-1 a' q' b' b^-1, plus one sector constraint per slot.  Applying a
rule rewrites every state letter simultaneously, reduces, drops tape
letters that fall off the ends, and cancels state-letter pairs that
meet over an empty sector.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import islice

from .foldings import SectorConstraint
from .words import Alphabet, ReducedWord, WordError, parse_word


class SMError(ValueError):
    pass


@dataclass(frozen=True)
class RulePart:
    """One part's component: (a, q_from, b) -> (a_new, q_to, b_new)."""

    a: ReducedWord
    q_from: int
    b: ReducedWord
    a_new: ReducedWord
    q_to: int
    b_new: ReducedWord

    def swapped(self) -> "RulePart":
        return RulePart(self.a_new, self.q_to, self.b_new, self.a, self.q_from, self.b)


class SHardware:
    """Parts and slots of a machine, with optional circular closure."""

    def __init__(self, parts, slots, circular=False):
        self.parts: tuple[Alphabet, ...] = tuple(parts)
        self.slots: tuple[Alphabet, ...] = tuple(slots)
        self.circular = bool(circular)
        if len(self.slots) != len(self.parts) + 1:
            raise SMError("need one slot alphabet more than parts")
        if self.circular and self.slots[0] is not self.slots[-1]:
            raise SMError("circular hardware must share slot 0 and slot s")
        self._letter_owner: dict[str, tuple[int, int]] = {}
        for p, ab in enumerate(self.parts):
            for i, nm in enumerate(ab.names):
                if nm in self._letter_owner:
                    raise SMError(f"state letter {nm!r} appears in two parts")
                self._letter_owner[nm] = (p, i)

    @property
    def s(self) -> int:
        return len(self.parts)

    def next_part(self, p: int) -> int:
        return (p + 1) % self.s if self.circular else p + 1

    def prev_part(self, p: int) -> int:
        return (p - 1) % self.s if self.circular else p - 1

    def slot_index(self, sign1: int, p1: int, sign2: int, p2: int) -> int:
        """Slot between two adjacent signed state letters, or raise."""
        if sign1 > 0 and sign2 > 0:
            if p2 != self.next_part(p1):
                raise SMError(f"illegal base step +{p1} +{p2}")
            return p1 + 1
        if sign1 > 0 and sign2 < 0:
            if p2 != p1:
                raise SMError(f"illegal base step +{p1} -{p2}")
            return p1 + 1
        if sign1 < 0 and sign2 < 0:
            if p2 != self.prev_part(p1):
                raise SMError(f"illegal base step -{p1} -{p2}")
            return self._left_slot(p1)
        if p2 != p1:
            raise SMError(f"illegal base step -{p1} +{p2}")
        return self._left_slot(p1)

    def _left_slot(self, p: int) -> int:
        return self.s if (p == 0 and self.circular) else p

    def state_name(self, p: int, idx: int) -> str:
        return self.parts[p].name(idx)

    def find_state(self, name: str) -> tuple[int, int]:
        try:
            return self._letter_owner[name]
        except KeyError:
            raise SMError(f"unknown state letter {name!r}") from None


class AdmissibleWord:
    """Alternating signed state letters and sector words."""

    __slots__ = ("hardware", "states", "sectors", "_hash")

    def __init__(self, hardware: SHardware, states, sectors, *, _checked=False):
        self.hardware = hardware
        self.states: tuple[tuple[int, int, int], ...] = tuple(states)
        self.sectors: tuple[ReducedWord, ...] = tuple(sectors)
        self._hash = None
        if not _checked:
            self.validate()

    def validate(self):
        hw = self.hardware
        if not self.states:
            raise SMError("admissible word needs at least one state letter")
        if len(self.sectors) != len(self.states) - 1:
            raise SMError("need one sector between each pair of state letters")
        for p, idx, sign in self.states:
            if not (0 <= p < hw.s) or sign not in (1, -1):
                raise SMError(f"bad state letter ({p},{idx},{sign})")
            if not (0 <= idx < len(hw.parts[p])):
                raise SMError(f"state index {idx} outside part {p}")
        for i, u in enumerate(self.sectors):
            p1, i1, s1 = self.states[i]
            p2, i2, s2 = self.states[i + 1]
            slot = hw.slot_index(s1, p1, s2, p2)
            if u.alphabet is not hw.slots[slot]:
                raise SMError(f"sector {i} not over slot {slot} alphabet")
            if p1 == p2 and i1 == i2 and s1 == -s2 and not u:
                raise SMError(f"unreduced state pair at position {i}")

    def slot_of_sector(self, i: int) -> int:
        p1, _, s1 = self.states[i]
        p2, _, s2 = self.states[i + 1]
        return self.hardware.slot_index(s1, p1, s2, p2)

    def base(self) -> tuple[tuple[int, int], ...]:
        return tuple((p, sign) for p, _, sign in self.states)

    def is_standard(self) -> bool:
        """One positive letter per part, in order (wrapped start for
        circular hardware)."""
        hw = self.hardware
        if hw.circular:
            if len(self.states) != hw.s + 1:
                return False
            expect = [(p, 1) for p in range(hw.s)] + [(0, 1)]
        else:
            if len(self.states) != hw.s:
                return False
            expect = [(p, 1) for p in range(hw.s)]
        return self.base() == tuple(expect)

    def state_key(self):
        return tuple((p, idx) for p, idx, _ in self.states)

    def __eq__(self, other):
        return (
            isinstance(other, AdmissibleWord)
            and self.hardware is other.hardware
            and self.states == other.states
            and self.sectors == other.sectors
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.states, tuple(u.letters for u in self.sectors)))
        return self._hash

    def __str__(self):
        hw = self.hardware
        bits = []
        for i, (p, idx, sign) in enumerate(self.states):
            nm = hw.state_name(p, idx)
            bits.append(nm if sign > 0 else nm + "^-1")
            if i < len(self.sectors) and self.sectors[i]:
                bits.append(str(self.sectors[i]))
        return ".".join(bits)

    def __repr__(self):
        return f"<{self}>"

    def total_sector_length(self) -> int:
        return sum(len(u) for u in self.sectors)


class SRule:
    """A named rule: one component per part plus per-slot constraints."""

    def __init__(self, name: str, parts, constraints, sign: int = 1):
        self.name = name
        self.parts: tuple[RulePart, ...] = tuple(parts)
        self.constraints: tuple[SectorConstraint, ...] = tuple(constraints)
        self.sign = sign
        self._inverse = None

    def constraint(self, slot: int) -> SectorConstraint:
        return self.constraints[slot]

    def inverse(self) -> "SRule":
        if self._inverse is None:
            inv = SRule(
                self.name[:-3] if self.name.endswith("^-1") else self.name + "^-1",
                tuple(rp.swapped() for rp in self.parts),
                self.constraints,
                -self.sign,
            )
            inv._inverse = self
            self._inverse = inv
        return self._inverse

    def locks(self) -> tuple[int, ...]:
        """Slots whose constraint is trivial under this rule."""
        return tuple(j for j, c in enumerate(self.constraints) if c.is_trivial())

    def __repr__(self):
        return f"SRule({self.name})"


def parse_admissible(hw: SHardware, text: str) -> AdmissibleWord:
    """Parse dotted mixed text like ``q1.b^-1.q2.d.q2^-1.q1^-1``."""
    states: list[tuple[int, int, int]] = []
    sectors: list[ReducedWord] = []
    pending: list[str] = []

    def flush(slot_alphabet):
        nonlocal pending
        if pending:
            try:
                w = parse_word(slot_alphabet, ".".join(pending))
            except WordError as exc:
                raise SMError(str(exc)) from None
        else:
            w = ReducedWord.empty(slot_alphabet)
        pending = []
        return w

    toks = [] if text.strip() in ("", "1") else text.strip().split(".")
    for tok in toks:
        nm = tok
        sign = 1
        if nm.startswith("~"):
            nm, sign = nm[1:], -1
        elif nm.endswith("^-1"):
            nm, sign = nm[:-3], -1
        if nm in hw._letter_owner:
            p, idx = hw.find_state(nm)
            if states:
                p1, _, s1 = states[-1]
                slot = hw.slot_index(s1, p1, sign, p)
                sectors.append(flush(hw.slots[slot]))
            elif pending:
                raise SMError("tape letters before the first state letter")
            states.append((p, idx, sign))
        else:
            pending.append(tok)
    if pending:
        raise SMError("tape letters after the last state letter")
    return AdmissibleWord(hw, states, sectors)


class _SuffixTracker:
    """Incremental membership data for a sector edited at its left end.

    suf[k] is the state of the subgroup graph from which the last k
    letters of the sector walk to the basepoint; folded graphs are
    co-deterministic, so that state is unique (None once an edge is
    missing, and longer suffixes stay None until letters pop back off).
    """

    __slots__ = ("out", "suf")

    def __init__(self, out, dq):
        self.out = out
        suf = [0]
        for x in reversed(dq):
            s = suf[-1]
            suf.append(out[s].get(-x) if s is not None else None)
        self.suf = suf

    def check(self, dq, b1):
        """Whether b1^-1 u lies in the subgroup (u the tracked sector)."""
        m = 0
        if b1:
            for y, x in zip(b1, islice(dq, 0, len(b1))):
                if y != x:
                    break
                m += 1
        s = 0
        out = self.out
        for y in reversed(b1[m:]):
            s = out[s].get(-y)
            if s is None:
                return False
        t = self.suf[len(dq) - m]
        return t is not None and t == s


class _PrefixTracker:
    """Incremental membership data for a sector edited at its right end.

    Tracks v = reduced form of anchor^-1 u in its own deque, with
    pre[k] the graph state reached from the basepoint along v[:k]
    (None once off the graph).  Right edits of u are fed in as signed
    letters; v keeps its own zipper, so the caller's cancel/append
    choice for u is irrelevant here.
    """

    __slots__ = ("out", "anchor", "vhat", "pre")

    def __init__(self, out, anchor, dq):
        self.out = out
        self.anchor = anchor
        self.vhat = deque()
        self.pre = [0]
        for x in reversed(anchor):
            self.feed(-x)
        for x in dq:
            self.feed(x)

    def feed(self, x):
        vhat, pre = self.vhat, self.pre
        if vhat and vhat[-1] == -x:
            vhat.pop()
            pre.pop()
        else:
            vhat.append(x)
            s = pre[-1]
            pre.append(self.out[s].get(x) if s is not None else None)

    def check(self, a2):
        """Whether v a2^-1 lies in the subgroup."""
        vhat = self.vhat
        n = len(vhat)
        t = 0
        while t < n and t < len(a2) and vhat[-1 - t] == a2[len(a2) - 1 - t]:
            t += 1
        s = self.pre[n - t]
        if s is None:
            return False
        out = self.out
        for y in reversed(a2[: len(a2) - t]):
            s = out[s].get(-y)
            if s is None:
                return False
        return s == 0


_WHOLE, _TRIVIAL, _PROPER = 0, 1, 2


def _rule_tables(rule: SRule):
    """Per-part pieces and per-slot constraint kinds, cached on the rule."""
    tables = getattr(rule, "_tables", None)
    if tables is None:
        parts = tuple(
            (
                (~rp.a * rp.a_new).letters,
                (rp.b_new * ~rp.b).letters,
                rp.a.letters,
                rp.b.letters,
                rp.q_from,
                rp.q_to,
            )
            for rp in rule.parts
        )
        kinds = tuple(
            _TRIVIAL if c.is_trivial() else (_WHOLE if c.is_whole() else _PROPER)
            for c in rule.constraints
        )
        tables = (parts, kinds)
        rule._tables = tables
    return tables


class SMachine:
    """Hardware plus a list of positive rules."""

    def __init__(self, hardware: SHardware, rules):
        self.hardware = hardware
        self.rules: tuple[SRule, ...] = tuple(rules)
        self._by_name: dict[str, SRule] = {}
        for r in self.rules:
            if len(r.parts) != hardware.s:
                raise SMError(f"rule {r.name} must cover all {hardware.s} parts")
            if len(r.constraints) != hardware.s + 1:
                raise SMError(f"rule {r.name} needs one constraint per slot")
            if hardware.circular and r.constraints[0] is not r.constraints[-1]:
                raise SMError(f"rule {r.name}: wrap slot constraints must agree")
            if r.name in self._by_name:
                raise SMError(f"duplicate rule name {r.name}")
            self._by_name[r.name] = r
        self._forward_index: dict[tuple, list[SRule]] | None = None
        self._backward_index: dict[tuple, list[SRule]] | None = None

    def rule(self, name: str) -> SRule:
        if name.endswith("^-1"):
            return self.rule(name[:-3]).inverse()
        try:
            return self._by_name[name]
        except KeyError:
            raise SMError(f"no rule named {name!r}") from None

    def signed_rules(self):
        for r in self.rules:
            yield r
            yield r.inverse()

    # -- applicability and application --------------------------------------

    def _sector_ok(self, rule: SRule, word: AdmissibleWord, i: int) -> bool:
        p1, _, s1 = word.states[i]
        p2, _, s2 = word.states[i + 1]
        u = word.sectors[i]
        slot = word.slot_of_sector(i)
        c = rule.constraint(slot)
        if c.is_whole():
            return True
        rp1, rp2 = rule.parts[p1], rule.parts[p2]
        if s1 > 0 and s2 > 0:
            v = ~rp1.b * u * ~rp2.a
        elif s1 > 0 and s2 < 0:
            v = ~rp1.b * u * rp1.b
        elif s1 < 0 and s2 > 0:
            v = rp1.a * u * ~rp1.a
        else:
            v = ~rp2.b * ~u * ~rp1.a
        return c.contains(v)

    def applicable(self, word: AdmissibleWord, rule: SRule) -> bool:
        for p, idx, _ in word.states:
            if rule.parts[p].q_from != idx:
                return False
        return all(self._sector_ok(rule, word, i) for i in range(len(word.sectors)))

    def apply(self, word: AdmissibleWord, rule: SRule) -> AdmissibleWord:
        """Rewrite every state letter, reduce, trim the overhang, and
        cancel state pairs that meet over empty sectors."""
        if not self.applicable(word, rule):
            raise SMError(f"rule {rule.name} not applicable to {word}")
        states = []
        lefts = []   # tape word glued left of each new state letter
        rights = []  # tape word glued right of it
        for p, idx, sign in word.states:
            rp = rule.parts[p]
            lpiece = ~rp.a * rp.a_new
            rpiece = rp.b_new * ~rp.b
            if sign > 0:
                states.append((p, rp.q_to, 1))
                lefts.append(lpiece)
                rights.append(rpiece)
            else:
                states.append((p, rp.q_to, -1))
                lefts.append(~rpiece)
                rights.append(~lpiece)
        sectors = [rights[i] * word.sectors[i] * lefts[i + 1] for i in range(len(word.sectors))]
        # overhang at both ends is dropped
        states, sectors = self._cancel(states, sectors)
        return AdmissibleWord(self.hardware, states, sectors, _checked=True)

    def _cancel(self, states, sectors):
        changed = True
        while changed:
            changed = False
            for i in range(len(sectors)):
                p1, i1, s1 = states[i]
                p2, i2, s2 = states[i + 1]
                if p1 == p2 and i1 == i2 and s1 == -s2 and not sectors[i]:
                    if len(states) == 2:
                        raise SMError("application cancelled the whole word")
                    if i == 0:
                        del states[0:2]
                        del sectors[0:2]
                    elif i + 1 == len(states) - 1:
                        del states[i : i + 2]
                        del sectors[i - 1 : i + 1]
                    else:
                        merged = sectors[i - 1] * sectors[i + 1]
                        del states[i : i + 2]
                        sectors[i - 1 : i + 2] = [merged]
                    changed = True
                    break
        return states, sectors

    def try_apply(self, word: AdmissibleWord, rule: SRule):
        if not self.applicable(word, rule):
            return None
        return self.apply(word, rule)

    # -- runs ----------------------------------------------------------------

    def run(self, word: AdmissibleWord, names, *, collect=True):
        """Apply rules by name ("xyz" or "xyz^-1"); return the full
        trajectory including the start, or just the final word when
        ``collect`` is false.

        Long runs on all-positive bases take an incremental path whose
        cost per rule is bounded by the rewritten pieces, not the
        sector lengths; it agrees with :meth:`apply` step by step.
        """
        names = list(names)
        if any(s < 0 for _, _, s in word.states):
            out = [word]
            for nm in names:
                word = self.apply(word, self.rule(nm))
                out.append(word)
            return out if collect else word

        hw = self.hardware
        states = [[p, idx] for p, idx, _ in word.states]
        ns = len(word.sectors)
        slot_of = [word.slot_of_sector(i) for i in range(ns)]
        slot_ab = [hw.slots[j] for j in slot_of]
        dqs = [deque(u.letters) for u in word.sectors]
        # at most one tracker per side per sector; edits at the far end kill one
        tl: list = [None] * ns
        tr: list = [None] * ns
        ledits = [0] * ns
        redits = [0] * ns

        def snapshot() -> AdmissibleWord:
            return AdmissibleWord(
                hw,
                tuple((p, q, 1) for p, q in states),
                tuple(
                    ReducedWord(slot_ab[i], tuple(dqs[i]), _reduced=True)
                    for i in range(ns)
                ),
                _checked=True,
            )

        trail = [word] if collect else None
        for nm in names:
            rule = self.rule(nm)
            parts, kinds = _rule_tables(rule)
            ok = all(parts[p][4] == q for p, q in states)
            if ok:
                for i in range(ns):
                    kind = kinds[slot_of[i]]
                    if kind == _WHOLE:
                        continue
                    b1 = parts[states[i][0]][3]
                    a2 = parts[states[i + 1][0]][2]
                    dq = dqs[i]
                    if kind == _TRIVIAL:
                        rp1 = rule.parts[states[i][0]]
                        rp2 = rule.parts[states[i + 1][0]]
                        m = (rp1.b * rp2.a).letters
                        if len(dq) != len(m) or tuple(dq) != m:
                            ok = False
                            break
                        continue
                    c = rule.constraints[slot_of[i]]
                    out = c.automaton.out
                    good = None
                    t = tl[i]
                    if t is not None and t.out is out and not a2:
                        good = t.check(dq, b1)
                    if good is None:
                        r = tr[i]
                        if r is not None and r.out is out and r.anchor == b1:
                            good = r.check(a2)
                    if good is None:
                        # build for the quieter end; only the prefix side
                        # can answer a right-anchored check
                        if a2 or redits[i] > ledits[i]:
                            r = _PrefixTracker(out, b1, dq)
                            tr[i] = r
                            good = r.check(a2)
                        else:
                            t = _SuffixTracker(out, dq)
                            tl[i] = t
                            good = t.check(dq, b1)
                    if not good:
                        ok = False
                        break
            if not ok:
                raise SMError(f"rule {rule.name} not applicable to {snapshot()}")

            for i in range(ns):
                rp = parts[states[i][0]][1]
                lp = parts[states[i + 1][0]][0]
                dq = dqs[i]
                if rp:
                    tr[i] = None
                    t = tl[i]
                    if t is None:
                        for x in reversed(rp):
                            if dq and dq[0] == -x:
                                dq.popleft()
                            else:
                                dq.appendleft(x)
                    else:
                        out = t.out
                        suf = t.suf
                        for x in reversed(rp):
                            if dq and dq[0] == -x:
                                dq.popleft()
                                suf.pop()
                            else:
                                dq.appendleft(x)
                                s = suf[-1]
                                suf.append(out[s].get(-x) if s is not None else None)
                    ledits[i] += len(rp)
                if lp:
                    tl[i] = None
                    r = tr[i]
                    if r is None:
                        for x in lp:
                            if dq and dq[-1] == -x:
                                dq.pop()
                            else:
                                dq.append(x)
                    else:
                        for x in lp:
                            if dq and dq[-1] == -x:
                                dq.pop()
                            else:
                                dq.append(x)
                            r.feed(x)
                    redits[i] += len(lp)
            for st in states:
                st[1] = parts[st[0]][5]
            if collect:
                trail.append(snapshot())
        return trail if collect else snapshot()

    def _index(self, backward: bool):
        cache = self._backward_index if backward else self._forward_index
        if cache is None:
            cache = {}
            for r in self.rules:
                rr = r.inverse() if backward else r
                key = tuple(rp.q_from for rp in rr.parts)
                cache.setdefault(key, []).append(rr)
            if backward:
                self._backward_index = cache
            else:
                self._forward_index = cache
        return cache

    def candidate_rules(self, word: AdmissibleWord):
        """Rules (both signs) whose state letters match the word's."""
        need: dict[int, int] = {}
        for p, idx, _ in word.states:
            if need.setdefault(p, idx) != idx:
                return
        for backward in (False, True):
            for key, rules in self._index(backward).items():
                if all(key[p] == idx for p, idx in need.items()):
                    yield from rules

    def successors(self, word: AdmissibleWord, skip: SRule | None = None):
        """All (rule, result) pairs; pass the last rule used to skip its
        inverse (reduced histories)."""
        out = []
        skip_name = None
        if skip is not None:
            skip_name = skip.name[:-3] if skip.name.endswith("^-1") else skip.name + "^-1"
        for r in self.candidate_rules(word):
            if r.name == skip_name:
                continue
            got = self.try_apply(word, r)
            if got is not None:
                out.append((r, got))
        return out

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        hw = self.hardware
        slot_names = [list(ab.names) for ab in hw.slots]
        if hw.circular:
            slot_names = slot_names[:-1]
        return {
            "circular": hw.circular,
            "parts": [list(ab.names) for ab in hw.parts],
            "slots": slot_names,
            "rules": [
                {
                    "name": r.name,
                    "parts": [
                        {
                            "a": str(rp.a),
                            "from": hw.state_name(p, rp.q_from),
                            "b": str(rp.b),
                            "a_new": str(rp.a_new),
                            "to": hw.state_name(p, rp.q_to),
                            "b_new": str(rp.b_new),
                        }
                        for p, rp in enumerate(r.parts)
                    ],
                    "constraints": [c.to_dict() for c in r.constraints[: hw.s + (0 if hw.circular else 1)]],
                }
                for r in self.rules
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SMachine":
        circular = bool(data.get("circular"))
        parts = tuple(Alphabet(tuple(names)) for names in data["parts"])
        slots = tuple(Alphabet(tuple(names)) for names in data["slots"])
        if circular:
            slots = slots + (slots[0],)
        hw = SHardware(parts, slots, circular)
        rules = []
        for rd in data["rules"]:
            rps = []
            for p, pd in enumerate(rd["parts"]):
                rps.append(
                    RulePart(
                        parse_word(slots[p], pd["a"]),
                        hw.find_state(pd["from"])[1],
                        parse_word(slots[p + 1], pd["b"]),
                        parse_word(slots[p], pd["a_new"]),
                        hw.find_state(pd["to"])[1],
                        parse_word(slots[p + 1], pd["b_new"]),
                    )
                )
            cons = [
                SectorConstraint.from_dict(cd, slots[j])
                for j, cd in enumerate(rd["constraints"])
            ]
            if circular:
                cons.append(cons[0])
            rules.append(SRule(rd["name"], rps, cons))
        return cls(hw, rules)


def identity_part(slot_left: Alphabet, q: int, slot_right: Alphabet) -> RulePart:
    e1, e2 = ReducedWord.empty(slot_left), ReducedWord.empty(slot_right)
    return RulePart(e1, q, e2, e1, q, e2)
