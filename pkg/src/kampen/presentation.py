"""Group presentations read off a machine, and the diagrams over them.

A machine with N parts yields one group generator per state letter, one
per tape letter, and N indexed copies of each rule letter.  The copies
sit between the parts and close into a ring: the copy after the last
part is the copy before the first part, whether or not the hardware is
circular.  Relators come in three kinds:

* ``(theta,q)``: for rule part i rewriting a q b into a' q' b', the
  relator says (a q b) theta_{i+1} = theta_i (a' q' b').
* ``(theta,a)``: theta_j commutes with every generator of the sector
  subgroup allowed in slot j (each letter for a whole slot, each listed
  generator word for a proper one, nothing for a locked one).
* ``hub``: an admissible word declared equal to 1.

Applying a rule then conjugates the flattened word by theta_0, and the
proof is a chain of relator-rotation insertions.  Stacking the chains
for a whole computation gives a trapezium: one row of cells per applied
rule, q-cells for the parts and a-cells for the sector letters carried
across.  Checking a trapezium needs only the cell grid, not the
computation it came from.
"""

from __future__ import annotations

import bisect
from array import array
from collections import namedtuple
from dataclasses import dataclass, field

from .words import Alphabet, ReducedWord
from .smachine import AdmissibleWord, SMachine, SRule


class PresentationError(ValueError):
    """Raised for words, witnesses, or diagrams that do not fit the
    presentation."""


THETA_Q = "(theta,q)"
THETA_A = "(theta,a)"
HUB = "hub"


def least_rotation(seq) -> int:
    """Index at which the lexicographically least rotation starts
    (Booth's algorithm, linear time)."""
    s = tuple(seq)
    if not s:
        return 0
    s2 = s + s
    f = [-1] * len(s2)
    k = 0
    for j in range(1, len(s2)):
        c = s2[j]
        i = f[j - k - 1]
        while i != -1 and c != s2[k + i + 1]:
            if c < s2[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if c != s2[k + i + 1]:
            if c < s2[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def _inv(letters) -> tuple:
    return tuple(-x for x in reversed(letters))


def _base_name(name: str) -> str:
    return name[:-3] if name.endswith("^-1") else name


@dataclass
class Relator:
    """One defining relator, stored as its cyclically reduced
    lexicographically least rotation."""

    word: ReducedWord
    kind: str
    label: str
    multiplicity: int = 1


@dataclass(frozen=True)
class WitnessStep:
    """Insert ``letters`` (a rotation of the relator named ``relator``,
    or of its inverse) before position ``pos`` and reduce."""

    pos: int
    letters: tuple
    relator: str


@dataclass(frozen=True)
class Witness:
    """Insertion chain carrying ``start`` to ``target``."""

    rule: str
    start: ReducedWord
    target: ReducedWord
    steps: tuple

    def to_dict(self, pres: "Presentation") -> dict:
        return {
            "rule": self.rule,
            "start": pres.render(self.start.letters),
            "target": pres.render(self.target.letters),
            "steps": [
                {"pos": st.pos, "relator": st.relator, "word": pres.render(st.letters)}
                for st in self.steps
            ],
        }


class Presentation:
    """Generators, relators, and the machine they were read from."""

    def __init__(self, machine: SMachine, alphabet: Alphabet, part_base,
                 slot_base, theta_base, state_hi, tape_hi):
        self.machine = machine
        self.alphabet = alphabet
        self.n_theta = machine.hardware.s
        self.relators: list[Relator] = []
        self.by_label: dict[str, Relator] = {}
        self._part_base = tuple(part_base)
        self._slot_base = dict(slot_base)      # id(slot alphabet) -> offset
        self._theta_base = dict(theta_base)    # rule name -> offset
        # sorted (offset, rule name) for reverse lookup of rule letters
        self._theta_spans = sorted((b, nm) for nm, b in theta_base.items())
        self._state_hi = state_hi
        self._tape_hi = tape_hi
        self._qcells: dict[tuple, tuple] = {}
        self._acells: set = set()
        self._canon: dict[tuple, Relator] = {}
        self._packed: dict[str, bytes] = {}

    # -- letters -----------------------------------------------------------

    @property
    def generators(self) -> tuple:
        return self.alphabet.names

    def part_letter(self, p: int, idx: int) -> int:
        return self._part_base[p] + idx + 1

    def theta_letter(self, rule_name: str, j: int) -> int:
        base = self._theta_base.get(_base_name(rule_name))
        if base is None:
            raise PresentationError(f"no rule named {rule_name!r}")
        return base + (j % self.n_theta) + 1

    def theta_info(self, letter: int) -> tuple:
        """(rule name, copy index) of a rule letter."""
        i = abs(letter) - 1
        at = bisect.bisect_right(self._theta_spans, (i, chr(0x10FFFF))) - 1
        if at < 0 or i >= self._theta_spans[at][0] + self.n_theta:
            raise PresentationError(f"letter {letter} is not a rule letter")
        base, nm = self._theta_spans[at]
        return nm, i - base

    def letter_kind(self, letter: int) -> str:
        i = abs(letter) - 1
        if i < self._state_hi:
            return "state"
        if i < self._tape_hi:
            return "tape"
        return "rule"

    def map_letters(self, word: ReducedWord) -> tuple:
        """Sector word letters renamed into the presentation alphabet."""
        base = self._slot_base.get(id(word.alphabet))
        if base is None:
            raise PresentationError("word is not over one of the slot alphabets")
        return tuple(x + base if x > 0 else x - base for x in word.letters)

    def part_token(self, p: int, q_idx: int, a: ReducedWord, b: ReducedWord) -> tuple:
        return self.map_letters(a) + (self.part_letter(p, q_idx),) + self.map_letters(b)

    def render(self, letters) -> list:
        names = self.alphabet.names
        return [names[x - 1] if x > 0 else "~" + names[-x - 1] for x in letters]

    # -- flattening --------------------------------------------------------

    def flatten(self, word: AdmissibleWord) -> ReducedWord:
        """The admissible word as one group word.  Circular words must
        span the ring exactly once; the duplicated wrap letter is checked
        against the leading one and dropped."""
        hw = self.machine.hardware
        if word.hardware is not hw:
            raise PresentationError("word belongs to a different machine")
        states = word.states
        if hw.circular:
            if len(states) != hw.s + 1:
                raise PresentationError("word does not span the ring exactly once")
            if states[-1] != states[0]:
                raise PresentationError("wrap letter disagrees with the leading letter")
            states = states[: hw.s]
        letters = []
        for i, (p, idx, sgn) in enumerate(states):
            letters.append(sgn * self.part_letter(p, idx))
            if i < len(word.sectors):
                letters.extend(self.map_letters(word.sectors[i]))
        return ReducedWord(self.alphabet, letters)

    # -- bookkeeping used by emit ------------------------------------------

    def _add(self, letters, kind: str, label: str) -> Relator:
        word = ReducedWord(self.alphabet, letters)
        core, _ = word.cyclic_reduce()
        lts = core.letters
        rot = least_rotation(lts)
        canon = lts[rot:] + lts[:rot]
        rel = self._canon.get(canon)
        if rel is None:
            rel = Relator(ReducedWord(self.alphabet, canon, _reduced=True), kind, label)
            self._canon[canon] = rel
            self.relators.append(rel)
        else:
            rel.multiplicity += 1
        self.by_label[label] = rel
        return rel

    def relator_counts(self) -> dict:
        out: dict[str, int] = {}
        for r in self.relators:
            out[r.kind] = out.get(r.kind, 0) + r.multiplicity
        return out

    def to_dict(self) -> dict:
        return {
            "generators": list(self.alphabet.names),
            "theta_copies": self.n_theta,
            "relators": [
                {
                    "kind": r.kind,
                    "label": r.label,
                    "multiplicity": r.multiplicity,
                    "word": self.render(r.word.letters),
                }
                for r in self.relators
            ],
        }

    # -- rotation tests ----------------------------------------------------

    def _doubled(self, label: str) -> bytes:
        d = self._packed.get(label)
        if d is None:
            lts = self.by_label[label].word.letters
            d = array("i", lts + lts).tobytes()
            self._packed[label] = d
        return d

    def is_relator_rotation(self, letters, label: str) -> bool:
        """Is ``letters`` a rotation of the named relator or of its
        inverse?"""
        rel = self.by_label.get(label)
        if rel is None:
            return False
        n = len(rel.word.letters)
        if len(letters) != n:
            return False
        if n == 0:
            return True
        doubled = self._doubled(label)
        for probe in (letters, _inv(letters)):
            blob = array("i", probe).tobytes()
            at = doubled.find(blob)
            while at != -1:
                if at % 4 == 0:
                    return True
                at = doubled.find(blob, at + 1)
        return False


def emit_presentation(machine: SMachine, hubs=()) -> Presentation:
    """Read the defining presentation off a machine.

    ``hubs`` is an optional iterable of admissible words to declare
    trivial.  Rule letters are indexed by slot, one ring of ``s`` copies
    per rule; on non-circular hardware the ring is closed by identifying
    the copy after the last part with copy 0.
    """
    hw = machine.hardware
    n = hw.s
    names: list[str] = []
    part_base = []
    for ab in hw.parts:
        part_base.append(len(names))
        names.extend(ab.names)
    state_hi = len(names)
    slot_base: dict[int, int] = {}
    for ab in hw.slots:
        if id(ab) not in slot_base:
            slot_base[id(ab)] = len(names)
            names.extend(ab.names)
    tape_hi = len(names)
    theta_base: dict[str, int] = {}
    for r in machine.rules:
        theta_base[r.name] = len(names)
        names.extend(f"th({j}):{r.name}" for j in range(n))
    if len(set(names)) != len(names):
        raise PresentationError("state, tape, and rule letters must not collide")

    pres = Presentation(machine, Alphabet(tuple(names), tag="pres"),
                        part_base, slot_base, theta_base, state_hi, tape_hi)

    nslots = len(hw.slots) - 1 if hw.circular else len(hw.slots)
    for rule in machine.rules:
        thetas = [pres.theta_letter(rule.name, j) for j in range(n)]
        for i, rp in enumerate(rule.parts):
            thi, thn = thetas[i], thetas[(i + 1) % n]
            u = pres.part_token(i, rp.q_from, rp.a, rp.b)
            v = pres.part_token(i, rp.q_to, rp.a_new, rp.b_new)
            pres._add(u + (thn,) + _inv(v) + (-thi,), THETA_Q, f"{rule.name}[{i}]")
            pres._qcells[(thi, thn)] = (u, v)
            pres._qcells[(-thi, -thn)] = (v, u)
        for j in range(nslots):
            cons = rule.constraints[j]
            if cons.is_trivial():
                continue
            th = thetas[j % n]
            for k, g in enumerate(cons.generator_words()):
                lg = pres.map_letters(g)
                pres._add((th,) + lg + (-th,) + _inv(lg),
                          THETA_A, f"{rule.name}{{{j}}}:{k}")
                pres._acells.add((th, lg))
                pres._acells.add((th, _inv(lg)))
    for t, w in enumerate(hubs):
        pres._add(pres.flatten(w).letters, HUB, f"hub:{t}")
    return pres


# -- factoring sector words over their constraints ---------------------------


def decompose(cons, word: ReducedWord, max_nodes: int = 100000) -> list:
    """Factor ``word`` over the constraint's generator words.

    Returns (generator index, exponent) pairs whose left-to-right product
    is ``word``.  Whole sectors factor letter by letter.  Proper sectors
    are searched depth first, best common prefix first, pruned by
    membership of the residual; failed residuals are memoized.
    """
    if word.alphabet is not cons.alphabet:
        raise PresentationError("word is not over the constraint alphabet")
    if cons.is_trivial():
        if word.letters:
            raise PresentationError("nonempty word in a locked sector")
        return []
    if cons.is_whole():
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in word.letters]
    gens = cons.generator_words()
    aut = cons.automaton
    if not aut.member(word):
        raise PresentationError("word is outside the sector subgroup")
    sides = []
    for gi, g in enumerate(gens):
        sides.append((gi, 1, g, ~g))
        sides.append((gi, -1, ~g, g))
    out: list[tuple[int, int]] = []
    dead: set = set()
    budget = [max_nodes]

    def common(a, b):
        m = 0
        for x, y in zip(a, b):
            if x != y:
                break
            m += 1
        return m

    def dfs(res, last):
        if not res.letters:
            return True
        if res.letters in dead:
            return False
        budget[0] -= 1
        if budget[0] < 0:
            raise PresentationError("sector word factoring ran out of budget")
        cands = []
        for gi, e, h, hinv in sides:
            if last == (gi, -e):
                continue
            cands.append((-common(h.letters, res.letters), gi, e, hinv))
        cands.sort(key=lambda t: t[:3])
        for _, gi, e, hinv in cands:
            rest = hinv * res
            if len(rest.letters) >= len(res.letters) + len(hinv.letters):
                continue
            if not aut.member(rest):
                continue
            out.append((gi, e))
            if dfs(rest, (gi, e)):
                return True
            out.pop()
        dead.add(res.letters)
        return False

    if not dfs(word, None):
        raise PresentationError("could not factor the sector word over its generators")
    return out


# -- conjugation witnesses ---------------------------------------------------


def _insert(word: ReducedWord, pos: int, ins: ReducedWord) -> ReducedWord:
    ab = word.alphabet
    pre = ReducedWord(ab, word.letters[:pos], _reduced=True)
    post = ReducedWord(ab, word.letters[pos:], _reduced=True)
    return pre * ins * post


def conjugation_witness(pres: Presentation, word: AdmissibleWord, rule) -> Witness:
    """Derivation of flatten(word) from theta_0 flatten(word*rule)
    theta_0^-1 by relator-rotation insertions.

    Defined for positive admissible words the rule applies to; the rule
    may be given by object or by name, inverses included.
    """
    mach = pres.machine
    if isinstance(rule, str):
        rule = mach.rule(rule)
    if any(s < 0 for _, _, s in word.states):
        raise PresentationError("witnesses are built over positive words only")
    if not mach.applicable(word, rule):
        raise PresentationError(f"rule {rule.name} does not apply to the word")
    hw = mach.hardware
    n = hw.s
    after = mach.apply(word, rule)
    sgn = 1 if rule.sign > 0 else -1
    base = _base_name(rule.name)
    thetas = [sgn * pres.theta_letter(base, j) for j in range(n)]
    start = ReducedWord(
        pres.alphabet,
        (thetas[0],) + pres.flatten(after).letters + (-thetas[0],),
        _reduced=True,
    )
    steps = []
    cur = start
    nsec = len(word.sectors)
    for i in range(n):
        thi, thn = thetas[i], thetas[(i + 1) % n]
        rp = rule.parts[i]
        u = pres.part_token(i, rp.q_from, rp.a, rp.b)
        v = pres.part_token(i, rp.q_to, rp.a_new, rp.b_new)
        ins = ReducedWord(pres.alphabet, u + (thn,) + _inv(v) + (-thi,))
        pos = cur.letters.index(thi)
        steps.append(WitnessStep(pos, ins.letters, f"{base}[{i}]"))
        cur = _insert(cur, pos, ins)
        if i >= nsec:
            continue
        p2 = (i + 1) % n
        vword = ~rp.b * word.sectors[i] * ~rule.parts[p2].a
        cons = rule.constraints[i + 1]
        gens = cons.generator_words()
        slot_label = (i + 1) % n if hw.circular else i + 1
        for k, e in decompose(cons, vword):
            lg = pres.map_letters(gens[k])
            h = lg if e > 0 else _inv(lg)
            ins = ReducedWord(pres.alphabet, h + (thn,) + _inv(h) + (-thn,))
            pos = cur.letters.index(thn)
            steps.append(WitnessStep(pos, ins.letters, f"{base}{{{slot_label}}}:{k}"))
            cur = _insert(cur, pos, ins)
    target = pres.flatten(word)
    if cur != target:
        raise PresentationError("internal: insertion chain did not close up")
    return Witness(rule.name, start, target, tuple(steps))


def check_witness(pres: Presentation, witness: Witness) -> bool:
    """Replay a witness, validating every step against the relators.
    Returns True; raises PresentationError on the first bad step."""
    cur = witness.start
    for t, st in enumerate(witness.steps):
        if st.relator not in pres.by_label:
            raise PresentationError(f"step {t} cites unknown relator {st.relator!r}")
        if not 0 <= st.pos <= len(cur.letters):
            raise PresentationError(f"step {t} inserts outside the word")
        if not pres.is_relator_rotation(st.letters, st.relator):
            raise PresentationError(
                f"step {t} is not a rotation of relator {st.relator!r} or its inverse"
            )
        cur = _insert(cur, st.pos, ReducedWord(pres.alphabet, st.letters, _reduced=True))
    if cur != witness.target:
        raise PresentationError("insertion chain does not reach the target word")
    return True


# -- trapezia ----------------------------------------------------------------

# A cell's boundary read counterclockwise is left^-1 bottom right top^-1;
# it must spell a rotation of a relator or of its inverse.
Cell = namedtuple("Cell", ["kind", "label", "bottom", "top", "left", "right"])


@dataclass
class Row:
    name: str
    cells: list


@dataclass(frozen=True)
class Violation:
    row: int
    cell: object
    reason: str

    def __str__(self):
        at = f"row {self.row}" + ("" if self.cell is None else f", cell {self.cell}")
        return f"{at}: {self.reason}"


def _row_cells(pres: Presentation, word: AdmissibleWord, rule: SRule) -> list:
    mach = pres.machine
    hw = mach.hardware
    n = hw.s
    sgn = 1 if rule.sign > 0 else -1
    base = _base_name(rule.name)
    thetas = [sgn * pres.theta_letter(base, j) for j in range(n)]
    nsec = len(word.sectors)
    cells = []
    for i in range(n):
        rp = rule.parts[i]
        left, right = thetas[i], thetas[(i + 1) % n]
        u = pres.part_token(i, rp.q_from, rp.a, rp.b)
        v = pres.part_token(i, rp.q_to, rp.a_new, rp.b_new)
        cells.append(Cell("q", f"{base}[{i}]", u, v, left, right))
        if i >= nsec:
            continue
        p2 = (i + 1) % n
        vword = ~rp.b * word.sectors[i] * ~rule.parts[p2].a
        cons = rule.constraints[i + 1]
        gens = cons.generator_words()
        slot_label = (i + 1) % n if hw.circular else i + 1
        for k, e in decompose(cons, vword):
            lg = pres.map_letters(gens[k])
            h = lg if e > 0 else _inv(lg)
            cells.append(Cell("a", f"{base}{{{slot_label}}}:{k}", h, h, right, right))
    return cells


class Trapezium:
    """Rows of cells over a computation, one row per applied rule,
    bottom row first."""

    def __init__(self, pres: Presentation, start: AdmissibleWord, names):
        self.pres = pres
        self.start = start
        self.names = tuple(names)
        if any(s < 0 for _, _, s in start.states):
            raise PresentationError("trapezia are built over positive words only")
        for i, (a, b) in enumerate(zip(self.names, self.names[1:])):
            if _base_name(a) == _base_name(b) and a != b:
                raise PresentationError(f"history backtracks at step {i + 1}")
        mach = pres.machine
        self.end = mach.run(start, self.names, collect=False) if self.names else start
        self._rows = None

    def iter_rows(self):
        if self._rows is not None:
            yield from self._rows
            return
        mach = self.pres.machine
        cur = self.start
        for nm in self.names:
            rule = mach.rule(nm)
            yield Row(nm, _row_cells(self.pres, cur, rule))
            cur = mach.apply(cur, rule)

    def materialize(self, max_cells: int = 200000) -> list:
        if self._rows is None:
            rows = []
            total = 0
            for row in self.iter_rows():
                total += len(row.cells)
                if total > max_cells:
                    raise PresentationError(
                        f"trapezium exceeds {max_cells} cells; raise the cap to materialize"
                    )
                rows.append(row)
            self._rows = rows
        return self._rows

    def row(self, i: int) -> Row:
        if self._rows is not None:
            return self._rows[i]
        if not 0 <= i < len(self.names):
            raise PresentationError(f"no row {i}")
        for at, row in enumerate(self.iter_rows()):
            if at == i:
                return row
        raise PresentationError(f"no row {i}")

    def to_dict(self, max_cells: int = 200000) -> dict:
        pres = self.pres
        rows = self.materialize(max_cells)
        return {
            "history": list(self.names),
            "start": pres.render(pres.flatten(self.start).letters),
            "end": pres.render(pres.flatten(self.end).letters),
            "rows": [
                {
                    "name": row.name,
                    "cells": [
                        {
                            "kind": c.kind,
                            "label": c.label,
                            "bottom": pres.render(c.bottom),
                            "top": pres.render(c.top),
                            "left": pres.render([c.left])[0],
                            "right": pres.render([c.right])[0],
                        }
                        for c in row.cells
                    ],
                }
                for row in rows
            ],
        }


def build_trapezium(pres: Presentation, start: AdmissibleWord, names) -> Trapezium:
    """Trapezium of the computation applying ``names`` to ``start``.
    The history must be reduced and every rule applicable in turn."""
    return Trapezium(pres, start, names)


def check_trapezium(trap: Trapezium):
    """Validate a trapezium against its presentation using only the cell
    grid: every cell carries a relator, neighbours share rule edges, each
    row closes its ring, and row boundaries chain from the start word to
    the end word.  Returns None when sound, else the first Violation."""
    pres = trap.pres
    qcells = pres._qcells
    acells = pres._acells
    prev_top = pres.flatten(trap.start)
    ri = -1
    for ri, row in enumerate(trap.iter_rows()):
        cells = row.cells
        if not cells:
            return Violation(ri, None, "empty row")
        bottom: list[int] = []
        top: list[int] = []
        for ci, c in enumerate(cells):
            if c.kind == "q":
                hit = qcells.get((c.left, c.right))
                if hit is None or hit != (c.bottom, c.top):
                    return Violation(ri, ci, "cell does not match any rule-part relator")
            elif c.kind == "a":
                if c.left != c.right or c.bottom != c.top:
                    return Violation(ri, ci, "carried cell sides disagree")
                th = abs(c.left)
                if (th, c.bottom) not in acells and (th, _inv(c.bottom)) not in acells:
                    return Violation(ri, ci, "cell does not match any commutation relator")
            else:
                return Violation(ri, ci, f"unknown cell kind {c.kind!r}")
            if ci + 1 < len(cells) and c.right != cells[ci + 1].left:
                return Violation(ri, ci, "adjacent cells do not share a rule edge")
            bottom.extend(c.bottom)
            top.extend(c.top)
        if cells[0].left != cells[-1].right:
            return Violation(ri, None, "row does not close its rule-letter ring")
        if ReducedWord(pres.alphabet, bottom) != prev_top:
            return Violation(ri, None, "row bottom does not match the word below")
        prev_top = ReducedWord(pres.alphabet, top)
    if prev_top != pres.flatten(trap.end):
        return Violation(ri, None, "top row does not spell the end word")
    return None


def extract_bands(trap: Trapezium, kind: str, index: int):
    """Bands of a trapezium.  ``kind='theta'`` returns row ``index`` (one
    q-cell per part, a-cells between).  ``kind='q'`` returns the vertical
    band of part ``index``: one q-cell per row, whose history is the
    trapezium history."""
    if kind == "theta":
        row = trap.row(index)
        n = trap.pres.machine.hardware.s
        got = sum(1 for c in row.cells if c.kind == "q")
        if got != n:
            raise PresentationError(f"rule band has {got} q-cells, wanted {n}")
        return list(row.cells)
    if kind == "q":
        n = trap.pres.machine.hardware.s
        if not 0 <= index < n:
            raise PresentationError(f"no part {index}")
        band = []
        for row in trap.iter_rows():
            qrow = [c for c in row.cells if c.kind == "q"]
            band.append(qrow[index])
        if len(band) != len(trap.names):
            raise PresentationError("state band history disagrees with the trapezium")
        return band
    raise PresentationError(f"unknown band kind {kind!r}")


# -- sampling words a rule applies to ----------------------------------------


def _random_reduced(ab: Alphabet, rng, size: int) -> ReducedWord:
    if not len(ab):
        return ReducedWord.empty(ab)
    letters: list[int] = []
    for _ in range(size):
        options = [s * (i + 1) for i in range(len(ab)) for s in (1, -1)]
        if letters:
            options = [x for x in options if x != -letters[-1]]
        letters.append(rng.choice(options))
    return ReducedWord(ab, tuple(letters), _reduced=True)


def random_applicable_words(machine: SMachine, rule, rng, count: int = 10,
                            size: int = 3) -> list:
    """Standard-position positive words ``rule`` applies to, built by
    sampling each sector's constraint and wrapping the sample in the
    rule's anchor words."""
    if isinstance(rule, str):
        rule = machine.rule(rule)
    hw = machine.hardware
    n = hw.s
    words = []
    for _ in range(count):
        states = [(p, rule.parts[p].q_from, 1) for p in range(n)]
        if hw.circular:
            states.append(states[0])
        sectors = []
        nsec = n if hw.circular else n - 1
        for i in range(nsec):
            slot = i + 1
            ab = hw.slots[slot]
            cons = rule.constraints[slot]
            p2 = (i + 1) % n
            if cons.is_trivial():
                mid = ReducedWord.empty(ab)
            elif cons.is_whole():
                mid = _random_reduced(ab, rng, rng.randrange(size + 1))
            else:
                gens = cons.generator_words()
                mid = ReducedWord.empty(ab)
                for _ in range(rng.randrange(size + 1)):
                    g = rng.choice(gens)
                    mid = mid * (g if rng.random() < 0.5 else ~g)
            sectors.append(rule.parts[i].b * mid * rule.parts[p2].a)
        words.append(AdmissibleWord(hw, states, sectors))
    return words


# -- rendering ---------------------------------------------------------------


def trapezium_text(trap: Trapezium, max_cells: int = 20000) -> str:
    """Shape of the cell grid, one row per line, bottom row last.  Q
    marks a part cell, dots are carried letters."""
    rows = trap.materialize(max_cells)
    width = max(len(r.name) for r in rows) if rows else 4
    lines = []
    for i in range(len(rows) - 1, -1, -1):
        row = rows[i]
        shape = "".join("Q" if c.kind == "q" else "." for c in row.cells)
        lines.append(f"{i:4d} {row.name:<{width}} {shape}")
    pres = trap.pres
    lines.append("base " + " ".join(pres.render(pres.flatten(trap.start).letters)))
    return "\n".join(lines)


def trapezium_svg(trap: Trapezium, max_cells: int = 20000) -> str:
    """Cell grid as standalone SVG.  Rows stack upward; q-cells of the
    same part are aligned into vertical bands, carried cells spread
    through the gaps between them."""
    rows = trap.materialize(max_cells)
    n = trap.pres.machine.hardware.s
    # widest run of a-cells after each part, over all rows
    gap = [0] * n
    for row in rows:
        at = -1
        run = 0
        for c in row.cells:
            if c.kind == "q":
                if at >= 0:
                    gap[at] = max(gap[at], run)
                at += 1
                run = 0
            else:
                run += 1
        if at >= 0:
            gap[at] = max(gap[at], run)
    qw, aw, h, pad = 46, 12, 26, 4
    xq = [0] * n
    x = pad
    for i in range(n):
        xq[i] = x
        x += qw + gap[i] * aw + 6
    width = x + pad
    height = pad * 2 + h * len(rows) + 18
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="9">',
        f'<rect width="{width}" height="{height}" fill="#fffdf5"/>',
    ]
    for ri, row in enumerate(rows):
        y = height - pad - 18 - (ri + 1) * h
        qi = -1
        ai = 0
        for c in row.cells:
            if c.kind == "q":
                qi += 1
                ai = 0
                x0 = xq[qi]
                out.append(
                    f'<rect x="{x0}" y="{y}" width="{qw}" height="{h}" fill="#cfe3f7" '
                    f'stroke="#345"><title>{row.name} {c.label}</title></rect>'
                )
                label = c.label if len(c.label) <= 9 else c.label[:8] + "…"
                out.append(
                    f'<text x="{x0 + 2}" y="{y + h - 9}" fill="#123">{label}</text>'
                )
            else:
                x0 = xq[qi] + qw + ai * aw
                ai += 1
                out.append(
                    f'<rect x="{x0}" y="{y}" width="{aw}" height="{h}" fill="#f3e8c8" '
                    f'stroke="#875"><title>{c.label}</title></rect>'
                )
    out.append(
        f'<text x="{pad}" y="{height - 6}" fill="#123">rows: {len(rows)}  '
        f"parts: {n}</text>"
    )
    out.append("</svg>")
    return "\n".join(out)
