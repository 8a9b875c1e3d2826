"""Compile a normalized Turing machine into S-machines.

The chain runs in four stages.  For every command theta of the Turing
machine we generate a block machine M(theta) whose rules sweep a wave of
p-indices around the base, rewriting each sector's content through the
aperiodic maps; their union is M1, which accepts exactly the f-images of
the configurations the Turing machine accepts.  A translator T feeds an
input word into f-image form, and the main machine splices L-1 copies of
M1 behind the translator on a circular base.

Tape j of the Turing machine owns two 2-letter sector alphabets, primed
and double primed.  One shared family of maps (translated per sector) is
enough: every uniqueness argument is per sector, and distinct sectors
never mix alphabets.
"""

from __future__ import annotations

from .words import Alphabet, ReducedWord
from .aperiodic import PhiMap, f_encode, f_decode, make_maps
from .foldings import SectorConstraint
from .smachine import (
    AdmissibleWord,
    RulePart,
    SHardware,
    SMachine,
    SRule,
    identity_part,
)
from .turing import TMachine, TMConfig, command_form


class EncodeError(ValueError):
    """Raised when material fed to the encoder is not in its image.

    ``index`` points at the offending entry of whatever sequence was
    being read (rule names, sector list); ``segment`` names the block.
    """

    def __init__(self, message, *, index=None, segment=None):
        super().__init__(message)
        self.index = index
        self.segment = segment


_AB = ("a", "b")


class _Family:
    """One block family: a command plus its insert-shaped driver.

    ``icmd`` maps a config forward across the block; for delete commands
    it is the inverse command (the block runs the insertion, and the
    machine history uses it backwards), hence the "!" name suffix.
    """

    __slots__ = ("name", "cmd", "icmd", "tape", "form", "letter")

    def __init__(self, name, cmd, icmd, tape, form, letter):
        self.name = name
        self.cmd = cmd
        self.icmd = icmd
        self.tape = tape
        self.form = form
        self.letter = letter  # 1-based index into the tape alphabet, or None

    def forward_name(self):
        if self.icmd is self.cmd:
            return self.cmd.name
        return self.cmd.name + "^-1"

    def backward_name(self):
        if self.icmd is self.cmd:
            return self.cmd.name + "^-1"
        return self.cmd.name


class EncoderContext:
    """Shared alphabets, maps and constraints for one normalized machine."""

    def __init__(self, tm: TMachine, *, copies: int = 3, pool=None):
        if copies < 2:
            raise EncodeError("need at least two t-letters")
        self.tm = tm
        self.copies = copies
        self.k = len(tm.tape_alphabets)
        self.input_ab = Alphabet(tuple(tm.input_alphabet), tag="input")
        self.tape_ab = [
            Alphabet(tuple(names), tag=f"tape{j + 1}")
            for j, names in enumerate(tm.tape_alphabets)
        ]
        self.Yp = [
            Alphabet((f"a'({j + 1})", f"b'({j + 1})"), tag=f"Y'{j + 1}")
            for j in range(self.k)
        ]
        self.Ypp = [
            Alphabet((f"a''({j + 1})", f"b''({j + 1})"), tag=f"Y''{j + 1}")
            for j in range(self.k)
        ]
        width = max(len(ab) for ab in self.tape_ab)
        if pool is None:
            pool = make_maps(width)
        if len(pool) < width:
            raise EncodeError("map pool smaller than the widest tape alphabet")
        self.pool = list(pool)
        self.maps_p = [
            [m.translated(self.Yp[j]) for m in self.pool[: len(self.tape_ab[j])]]
            for j in range(self.k)
        ]
        self.maps_pp = [
            [m.translated(self.Ypp[j]) for m in self.pool[: len(self.tape_ab[j])]]
            for j in range(self.k)
        ]
        self.Hp = [
            [
                SectorConstraint.proper(self.Yp[j], (m.triple.w_a, m.triple.w_b))
                for m in self.maps_p[j]
            ]
            for j in range(self.k)
        ]
        self.Hpp = [
            [
                SectorConstraint.proper(self.Ypp[j], (m.triple.w_a, m.triple.w_b))
                for m in self.maps_pp[j]
            ]
            for j in range(self.k)
        ]

        self.families: dict[str, _Family] = {}
        self.family_order: list[str] = []
        for cmd in tm.commands:
            if cmd.sign < 0:
                continue
            tape, form = command_form(cmd)
            if form == "delete":
                icmd = cmd.inverse()
                name = cmd.name + "!"
                form = "insert"
            else:
                icmd = cmd
                name = cmd.name
            letter = None
            if form == "insert":
                nm = icmd.parts[tape].after.left[0]
                letter = self.tape_ab[tape].index(nm) + 1
            fam = _Family(name, cmd, icmd, tape, form, letter)
            self.families[name] = fam
            self.family_order.append(name)

        self._fam_pos = {nm: n for n, nm in enumerate(self.family_order)}
        self._m1_hw = None
        self._m1 = None
        self._t = None
        self._main = None
        self._main_aux = None
        self.rule_info: dict[str, tuple[str, str]] = {}
        self._fcache: dict[tuple[int, tuple], tuple[int, ...]] = {}
        self._cons_cache: dict[tuple[int, int], SectorConstraint] = {}

    # -- M1 hardware ---------------------------------------------------

    @property
    def m1_hardware(self) -> SHardware:
        if self._m1_hw is None:
            k = self.k
            parts = [Alphabet(("q(0)",), tag="Q0")]
            for j in range(k):
                names = [f"p{j + 1}"]
                for fam in self.family_order:
                    names.extend(f"p{j + 1}({fam},{s})" for s in (1, 2, 3))
                parts.append(Alphabet(tuple(names), tag=f"P{j + 1}"))
                parts.append(Alphabet(tuple(self.tm.state_parts[j]), tag=f"Q{j + 1}"))
            ends = Alphabet((), tag="E")
            slots = [ends]
            for j in range(k):
                slots.append(self.Yp[j])
                slots.append(self.Ypp[j])
            slots.append(ends)
            self._m1_hw = SHardware(tuple(parts), tuple(slots))
        return self._m1_hw

    def p_idx(self, j: int, fam: str | None, stage: int) -> int:
        if stage == 0:
            return 0
        return 1 + 3 * self._fam_pos[fam] + (stage - 1)

    def q_idx(self, j: int, name: str) -> int:
        return self.m1_hardware.parts[2 * j + 2].index(name)

    def _whole(self, ab: Alphabet) -> SectorConstraint:
        key = (id(ab), 0)
        if key not in self._cons_cache:
            self._cons_cache[key] = SectorConstraint.whole(ab)
        return self._cons_cache[key]

    def _trivial(self, ab: Alphabet) -> SectorConstraint:
        key = (id(ab), 1)
        if key not in self._cons_cache:
            self._cons_cache[key] = SectorConstraint.trivial(ab)
        return self._cons_cache[key]

    # -- f-images --------------------------------------------------------

    def f_letters(self, j: int, names: tuple) -> tuple[int, ...]:
        """Letters of f_j applied to a tape-j word given by letter names."""
        key = (j, names)
        got = self._fcache.get(key)
        if got is None:
            word = ReducedWord.from_names(self.tape_ab[j], names)
            got = f_encode(self.maps_p[j], word).letters
            self._fcache[key] = got
        return got

    def config_contents(self, cfg: TMConfig) -> list[tuple[int, ...]]:
        out = []
        for j, tape in enumerate(cfg.tapes):
            if tape[2]:
                raise EncodeError(f"tape {j + 1} has letters right of the head")
            out.append(self.f_letters(j, tape[0]))
        return out


def _stage_part(ctx, j, fam, s_from, s_to, a_new=None, b=None, b_new=None):
    """RulePart for the P-head of tape j moving between index stages."""
    yp, ypp = ctx.Yp[j], ctx.Ypp[j]
    e1, e2 = ReducedWord.empty(yp), ReducedWord.empty(ypp)
    return RulePart(
        e1,
        ctx.p_idx(j, fam, s_from),
        b if b is not None else e2,
        a_new if a_new is not None else e1,
        ctx.p_idx(j, fam, s_to),
        b_new if b_new is not None else e2,
    )


def build_M_theta(ctx: EncoderContext, cmd) -> list[SRule]:
    """All positive rules of the block machine for one command.

    A block fires as: set, then a left sweep (cursor walks i, i-1, ...),
    then a right sweep back, then clear.  Pins on every p-head encode
    the sweep position, so distinct blocks cannot interleave.
    """
    if isinstance(cmd, str):
        fam = ctx.families[cmd]
    else:
        tape, form = command_form(cmd)
        name = cmd.name + "!" if form == "delete" else cmd.name
        fam = ctx.families[name]
    icmd, i, form = fam.icmd, fam.tape, fam.form
    k = ctx.k
    hw = ctx.m1_hardware
    ends = hw.slots[0]

    qb = [p.before.state for p in icmd.parts]
    qa = [p.after.state for p in icmd.parts]
    if form == "check":
        lw = [(i - d) % k for d in range(1, k)]
    else:
        lw = [(i - d) % k for d in range(k)]
    rw = list(reversed(lw))

    if fam.letter is not None:
        mp = ctx.maps_p[i][fam.letter - 1]
        mpp = ctx.maps_pp[i][fam.letter - 1]
        hp = ctx.Hp[i][fam.letter - 1]
        hpp = ctx.Hpp[i][fam.letter - 1]

    stage = [0] * k
    qcur = list(qb)
    rules = []

    def pin_parts(overrides):
        parts = [overrides.get(0) or identity_part(ends, 0, hw.slots[1])]
        for j in range(k):
            pj = 2 * j + 1
            parts.append(
                overrides.get(pj)
                or _stage_part(ctx, j, fam.name, stage[j], stage[j])
            )
            qj = 2 * j + 2
            part = overrides.get(qj)
            if part is None:
                idx = ctx.q_idx(j, qcur[j])
                part = identity_part(hw.slots[qj], idx, hw.slots[qj + 1])
            parts.append(part)
        return tuple(parts)

    def cons(locks=(), special=None):
        out = [ctx._whole(ab) for ab in hw.slots]
        for slot in locks:
            out[slot] = ctx._trivial(hw.slots[slot])
        if special:
            for slot, c in special.items():
                out[slot] = c
        return tuple(out)

    def word1(ab, letter):
        return ReducedWord(ab, (letter,), _reduced=True)

    def anchor_part(j):
        # the head left of tape j's primed sector, pinned and anchored at w'
        p = 2 * j
        q = 0 if p == 0 else ctx.q_idx(j - 1, qcur[j - 1])
        e = ReducedWord.empty(hw.slots[p])
        return p, RulePart(e, q, mp.triple.w, e, q, mp.triple.w)

    # (1) set: create the index on the working head
    if form == "check":
        over = {2 * i + 1: _stage_part(ctx, i, fam.name, 0, 2)}
        locks = [2 * i + 1, 2 * i + 2]  # Y'_i and Y''_i
        if k > 1:
            h = (i - 1) % k
            over[2 * h + 1] = _stage_part(ctx, h, fam.name, 0, 1)
            locks.append(2 * h + 2)
        else:
            q_part = 2 * i + 2
            over[q_part] = RulePart(
                ReducedWord.empty(hw.slots[q_part]),
                ctx.q_idx(i, qb[i]),
                ReducedWord.empty(hw.slots[q_part + 1]),
                ReducedWord.empty(hw.slots[q_part]),
                ctx.q_idx(i, qa[i]),
                ReducedWord.empty(hw.slots[q_part + 1]),
            )
        rules.append(
            SRule(f"{fam.name}/set", pin_parts(over), cons(locks=locks))
        )
        stage[i] = 2
        if k > 1:
            stage[(i - 1) % k] = 1
        else:
            qcur = list(qa)
    else:
        over = {2 * i + 1: _stage_part(ctx, i, fam.name, 0, 1)}
        locks = [2 * j + 2 for j in range(k)]
        rules.append(
            SRule(f"{fam.name}/set", pin_parts(over), cons(locks=locks))
        )
        stage[i] = 1

    # (2) left sweep
    for t, j in enumerate(lw):
        working = j == i and fam.letter is not None
        for c in (1, 2):
            if working:
                wc = mpp.triple.w_a if c == 1 else mpp.triple.w_b
                part = _stage_part(
                    ctx, j, fam.name, 1, 1,
                    a_new=word1(ctx.Yp[j], -c), b_new=wc,
                )
                cc = cons(special={2 * j + 2: hpp})
            else:
                part = _stage_part(
                    ctx, j, fam.name, 1, 1,
                    a_new=word1(ctx.Yp[j], -c),
                    b_new=word1(ctx.Ypp[j], c),
                )
                cc = cons()
            rules.append(
                SRule(
                    f"{fam.name}/L:{_AB[c - 1]}/{j + 1}",
                    pin_parts({2 * j + 1: part}),
                    cc,
                )
            )
        last = t == len(lw) - 1
        if working:
            part = _stage_part(ctx, j, fam.name, 1, 2, a_new=mp.triple.w)
            special = {2 * j + 2: hpp}
        else:
            part = _stage_part(ctx, j, fam.name, 1, 2)
            special = None
        over = {2 * j + 1: part}
        locks = [2 * j + 1]  # the swept sector must be drained
        if last:
            if qa[i] != qb[i]:
                q_part = 2 * i + 2
                over[q_part] = RulePart(
                    ReducedWord.empty(hw.slots[q_part]),
                    ctx.q_idx(i, qb[i]),
                    ReducedWord.empty(hw.slots[q_part + 1]),
                    ReducedWord.empty(hw.slots[q_part]),
                    ctx.q_idx(i, qa[i]),
                    ReducedWord.empty(hw.slots[q_part + 1]),
                )
        else:
            nxt = lw[t + 1]
            over[2 * nxt + 1] = _stage_part(ctx, nxt, fam.name, 0, 1)
            locks.append(2 * nxt + 2)
        rules.append(
            SRule(
                f"{fam.name}/adv/{j + 1}",
                pin_parts(over),
                cons(locks=locks, special=special),
            )
        )
        stage[j] = 2
        if last:
            qcur = list(qa)
        else:
            stage[lw[t + 1]] = 1

    # (3) right sweep
    for j in rw:
        working = j == i and fam.letter is not None
        for c in (1, 2):
            if working:
                wc = mpp.triple.w_a if c == 1 else mpp.triple.w_b
                vc = mp.triple.w_a if c == 1 else mp.triple.w_b
                part = _stage_part(
                    ctx, j, fam.name, 2, 2, a_new=vc, b=wc,
                )
                anchor, ap = anchor_part(j)
                cc = cons(special={2 * j + 1: hp, 2 * j + 2: hpp})
                over = {2 * j + 1: part, anchor: ap}
            else:
                part = _stage_part(
                    ctx, j, fam.name, 2, 2,
                    a_new=word1(ctx.Yp[j], c),
                    b_new=word1(ctx.Ypp[j], -c),
                )
                cc = cons()
                over = {2 * j + 1: part}
            rules.append(
                SRule(
                    f"{fam.name}/R:{_AB[c - 1]}/{j + 1}",
                    pin_parts(over),
                    cc,
                )
            )
        over = {2 * j + 1: _stage_part(ctx, j, fam.name, 2, 3)}
        special = None
        if working:
            anchor, ap = anchor_part(j)
            over[anchor] = ap
            special = {2 * j + 1: hp}
        rules.append(
            SRule(
                f"{fam.name}/fin/{j + 1}",
                pin_parts(over),
                cons(locks=[2 * j + 2], special=special),
            )
        )
        stage[j] = 3

    if form == "check":
        over = {2 * i + 1: _stage_part(ctx, i, fam.name, 2, 3)}
        rules.append(
            SRule(
                f"{fam.name}/fin/{i + 1}",
                pin_parts(over),
                cons(locks=[2 * i + 2]),
            )
        )
        stage[i] = 3

    # (5) clear: all indices drop together
    over = {2 * j + 1: _stage_part(ctx, j, fam.name, 3, 0) for j in range(k)}
    rules.append(
        SRule(
            f"{fam.name}/clear",
            pin_parts(over),
            cons(locks=[2 * j + 2 for j in range(k)]),
        )
    )
    return rules


def build_M1(ctx: EncoderContext) -> SMachine:
    """Union of all block machines over the shared hardware."""
    if ctx._m1 is None:
        rules = []
        for name in ctx.family_order:
            block = build_M_theta(ctx, name)
            for r in block:
                tail = r.name[len(name) + 1:]
                phase = tail.split("/")[0].split(":")[0]
                ctx.rule_info[r.name] = (name, phase)
            rules.extend(block)
        ctx._m1 = SMachine(ctx.m1_hardware, rules)
    return ctx._m1


# -- configurations as admissible words ---------------------------------


def F_map(ctx: EncoderContext, cfg: TMConfig) -> AdmissibleWord:
    """The admissible word q0 f1(u1) p1 q1 ... fk(uk) pk qk."""
    hw = ctx.m1_hardware
    states = [(0, 0, 1)]
    sectors = []
    for j, tape in enumerate(cfg.tapes):
        if tape[2]:
            raise EncodeError(f"tape {j + 1} has letters right of the head")
        letters = ctx.f_letters(j, tape[0])
        sectors.append(ReducedWord(ctx.Yp[j], letters, _reduced=True))
        sectors.append(ReducedWord.empty(ctx.Ypp[j]))
        states.append((2 * j + 1, 0, 1))
        states.append((2 * j + 2, ctx.q_idx(j, tape[1]), 1))
    return AdmissibleWord(hw, tuple(states), tuple(sectors), _checked=True)


def F_inverse(ctx: EncoderContext, word: AdmissibleWord) -> TMConfig:
    """Recover the configuration from an f-image word, or explain why not."""
    hw = ctx.m1_hardware
    if word.hardware is not hw or len(word.states) != 2 * ctx.k + 1:
        raise EncodeError("word is not over the standard base")
    tapes = []
    for j in range(ctx.k):
        part, idx, sign = word.states[2 * j + 1]
        if part != 2 * j + 1 or sign < 0 or idx != 0:
            raise EncodeError(
                f"p-head of tape {j + 1} carries an index", segment=f"P{j + 1}"
            )
        qpart, qidx, qsign = word.states[2 * j + 2]
        if qpart != 2 * j + 2 or qsign < 0:
            raise EncodeError("state letters out of order")
        if word.sectors[2 * j + 1]:
            raise EncodeError(
                f"double-primed sector {j + 1} not empty", segment=f"Y''{j + 1}"
            )
        dec = f_decode(ctx.maps_p[j], word.sectors[2 * j], ctx.tape_ab[j])
        if dec is None:
            raise EncodeError(
                f"sector {j + 1} content is not an f-image", segment=f"Y'{j + 1}"
            )
        names = tuple(ctx.tape_ab[j].name(x - 1) for x in dec.letters)
        tapes.append((names, hw.parts[2 * j + 2].name(qidx), ()))
    return TMConfig(tuple(tapes))


# -- canonical histories -------------------------------------------------


def canonical_block(ctx: EncoderContext, fam_name: str, contents) -> list[str]:
    """Rule names of the canonical block at the given sector contents.

    ``contents[j]`` lists the letters sitting in the primed sector of
    tape j when the block starts (a positive word over the 2-letter
    copy alphabet, given as ints).
    """
    fam = ctx.families[fam_name]
    k = ctx.k
    i = fam.tape
    if fam.form == "check":
        if contents[i]:
            raise EncodeError(f"{fam_name}: checked sector must be empty")
        lw = [(i - d) % k for d in range(1, k)]
    else:
        lw = [(i - d) % k for d in range(k)]
    rw = list(reversed(lw))
    names = [f"{fam_name}/set"]
    for j in lw:
        names.extend(
            f"{fam_name}/L:{_AB[c - 1]}/{j + 1}" for c in reversed(contents[j])
        )
        names.append(f"{fam_name}/adv/{j + 1}")
    for j in rw:
        names.extend(f"{fam_name}/R:{_AB[c - 1]}/{j + 1}" for c in contents[j])
        names.append(f"{fam_name}/fin/{j + 1}")
    if fam.form == "check":
        names.append(f"{fam_name}/fin/{i + 1}")
    names.append(f"{fam_name}/clear")
    return names


class EncodedRun:
    """An M1 history together with its endpoint words."""

    def __init__(self, start, names, end):
        self.start = start
        self.names = names
        self.end = end


class DecodedRun:
    """A machine history recovered from an M1 trace."""

    def __init__(self, start_config, history, configs, segments):
        self.start_config = start_config
        self.history = history
        self.configs = configs
        self.segments = segments  # (family, direction, offset, length)


def encode_computation(ctx: EncoderContext, cfg: TMConfig, names) -> EncodedRun:
    """Expand a machine computation into the canonical M1 history."""
    tm = ctx.tm
    start = F_map(ctx, cfg)
    out: list[str] = []
    for step, nm in enumerate(names):
        cmd = tm.command(nm)
        nxt = tm.apply_command(cfg, cmd)
        if nxt is None:
            raise EncodeError(f"{nm} not applicable at step {step}", index=step)
        pos = cmd if cmd.sign > 0 else cmd.inverse()
        tape, form = command_form(pos)
        if form == "delete":
            fam = pos.name + "!"
            forward = cmd.sign < 0
        else:
            fam = pos.name
            forward = cmd.sign > 0
        at = cfg if forward else nxt
        block = canonical_block(ctx, fam, ctx.config_contents(at))
        if forward:
            out.extend(block)
        else:
            out.extend(n + "^-1" for n in reversed(block))
        cfg = nxt
    return EncodedRun(start, out, F_map(ctx, cfg))


def decode_computation(ctx: EncoderContext, word: AdmissibleWord, names) -> DecodedRun:
    """Cut an M1 history into canonical blocks and replay the machine.

    The trace must start at an f-image and consist of whole blocks; a
    block read backwards starts with an inverted clear rule (both
    orientations create the index first).
    """
    tm = ctx.tm
    build_M1(ctx)  # populate rule_info
    cfg = F_inverse(ctx, word)
    start = cfg
    history: list[str] = []
    configs = [cfg]
    segments = []
    names = list(names)
    pos = 0
    while pos < len(names):
        nm = names[pos]
        base = nm[:-3] if nm.endswith("^-1") else nm
        info = ctx.rule_info.get(base)
        if info is None:
            raise EncodeError(f"unknown rule {nm!r}", index=pos)
        fam_name, phase = info
        fam = ctx.families[fam_name]
        if nm == f"{fam_name}/set":
            target = tm.apply_command(cfg, fam.icmd)
            if target is None:
                raise EncodeError(
                    f"block {fam_name} starts outside its domain", index=pos,
                    segment=fam_name,
                )
            expected = canonical_block(ctx, fam_name, ctx.config_contents(cfg))
            step = fam.forward_name()
        elif nm == f"{fam_name}/clear^-1":
            back = fam.icmd.inverse()
            target = tm.apply_command(cfg, back)
            if target is None:
                raise EncodeError(
                    f"inverse block {fam_name} starts outside its domain",
                    index=pos, segment=fam_name,
                )
            fwd = canonical_block(ctx, fam_name, ctx.config_contents(target))
            expected = [n + "^-1" for n in reversed(fwd)]
            step = fam.backward_name()
        else:
            raise EncodeError(
                f"trace does not sit at a block boundary ({nm!r})",
                index=pos, segment=fam_name,
            )
        got = names[pos:pos + len(expected)]
        if got != expected:
            at = pos
            for a, b in zip(got, expected):
                if a != b:
                    break
                at += 1
            msg = f"block {fam_name} deviates from canonical form at {at}"
            if len(got) < len(expected):
                msg += f" (trace ends {len(expected) - len(got)} rules early)"
            raise EncodeError(msg, index=at, segment=fam_name)
        segments.append((fam_name, "forward" if step == fam.forward_name() else "backward", pos, len(expected)))
        pos += len(expected)
        history.append(step)
        cfg = target
        configs.append(cfg)
    return DecodedRun(start, history, configs, segments)


# -- primitive copy machines ---------------------------------------------


def _z_hardware(ap: Alphabet, app: Alphabet) -> SHardware:
    ends = Alphabet((), tag="E")
    parts = (
        Alphabet(("L",), tag="ZL"),
        Alphabet(("p(1)", "p(2)", "p(3)"), tag="ZP"),
        Alphabet(("R",), tag="ZR"),
    )
    return SHardware(parts, (ends, ap, app, ends))


def _z_rule(hw, name, p_from, p_to, whole, special, anchor, a_new=None, b=None, b_new=None):
    e = [ReducedWord.empty(ab) for ab in hw.slots]
    lpart = RulePart(e[0], 0, anchor or e[1], e[0], 0, anchor or e[1])
    ppart = RulePart(
        e[1], p_from, b if b is not None else e[2],
        a_new if a_new is not None else e[1], p_to,
        b_new if b_new is not None else e[2],
    )
    rpart = RulePart(e[2], 0, e[3], e[2], 0, e[3])
    cons = list(whole)
    for slot, c in (special or {}).items():
        cons[slot] = c
    return SRule(name, (lpart, ppart, rpart), tuple(cons))


def build_Z(direction: str, ap: Alphabet, app: Alphabet) -> SMachine:
    """A plain one-sector copy machine.

    "left" gives the index-1 rules (head eats the primed sector), "right"
    the index-2 rules (head restores it), "both" their union.
    """
    hw = _z_hardware(ap, app)
    whole = tuple(SectorConstraint.whole(ab) for ab in hw.slots)
    trivial1 = SectorConstraint.trivial(hw.slots[1])
    trivial2 = SectorConstraint.trivial(hw.slots[2])
    if direction not in ("left", "right", "both"):
        raise EncodeError(f"unknown direction {direction!r}")
    rules = []
    if direction in ("left", "both"):
        for c in (1, 2):
            rules.append(_z_rule(
                hw, f"xi1({_AB[c - 1]})", 0, 0, whole, None, None,
                a_new=ReducedWord(ap, (-c,), _reduced=True),
                b_new=ReducedWord(app, (c,), _reduced=True),
            ))
        rules.append(_z_rule(hw, "xi2", 0, 1, whole, {1: trivial1}, None))
    if direction in ("right", "both"):
        for c in (1, 2):
            rules.append(_z_rule(
                hw, f"xi3({_AB[c - 1]})", 1, 1, whole, None, None,
                a_new=ReducedWord(ap, (c,), _reduced=True),
                b_new=ReducedWord(app, (-c,), _reduced=True),
            ))
        rules.append(_z_rule(hw, "xi4", 1, 2, whole, {2: trivial2}, None))
    return SMachine(hw, rules)


def build_Z_phi(pmap: PhiMap, direction: str, ap: Alphabet, app: Alphabet) -> SMachine:
    """The working-sector copy machine twisted by one aperiodic map."""
    hw = _z_hardware(ap, app)
    mp = pmap.translated(ap)
    mpp = pmap.translated(app)
    hp = SectorConstraint.proper(ap, (mp.triple.w_a, mp.triple.w_b))
    hpp = SectorConstraint.proper(app, (mpp.triple.w_a, mpp.triple.w_b))
    whole = tuple(SectorConstraint.whole(ab) for ab in hw.slots)
    trivial1 = SectorConstraint.trivial(hw.slots[1])
    trivial2 = SectorConstraint.trivial(hw.slots[2])
    if direction not in ("left", "right", "both"):
        raise EncodeError(f"unknown direction {direction!r}")
    rules = []
    if direction in ("left", "both"):
        for c in (1, 2):
            wc = mpp.triple.w_a if c == 1 else mpp.triple.w_b
            rules.append(_z_rule(
                hw, f"xi1'({_AB[c - 1]})", 0, 0, whole, {2: hpp}, None,
                a_new=ReducedWord(ap, (-c,), _reduced=True), b_new=wc,
            ))
        rules.append(_z_rule(
            hw, "xi2'", 0, 1, whole, {1: trivial1, 2: hpp}, None,
            a_new=mp.triple.w,
        ))
    if direction in ("right", "both"):
        for c in (1, 2):
            wc = mpp.triple.w_a if c == 1 else mpp.triple.w_b
            vc = mp.triple.w_a if c == 1 else mp.triple.w_b
            rules.append(_z_rule(
                hw, f"xi3'({_AB[c - 1]})", 1, 1, whole,
                {1: hp, 2: hpp}, mp.triple.w,
                a_new=vc, b=wc,
            ))
        rules.append(_z_rule(
            hw, "xi4'", 1, 2, whole, {1: hp, 2: trivial2}, mp.triple.w,
        ))
    return SMachine(hw, rules)


# -- translator -----------------------------------------------------------


def build_T(ctx: EncoderContext) -> SMachine:
    """Input-consuming machine depositing f1 of the mirrored input."""
    if ctx._t is not None:
        return ctx._t
    yp, ypp = ctx.Yp[0], ctx.Ypp[0]
    ends = Alphabet((), tag="E")
    pnames = ["p"]
    for nm in ctx.input_ab.names:
        pnames.extend(f"p(T:{nm},{s})" for s in (1, 2, 3))
    parts = (
        Alphabet(("K",), tag="TK"),
        Alphabet(("L",), tag="TL"),
        Alphabet(tuple(pnames), tag="TP"),
        Alphabet(("R",), tag="TR"),
    )
    hw = SHardware(parts, (ends, ctx.input_ab, yp, ypp, ends))
    whole = [SectorConstraint.whole(ab) for ab in hw.slots]
    e = [ReducedWord.empty(ab) for ab in hw.slots]

    def tpart(p_from, p_to, a_new=None, b=None, b_new=None):
        return RulePart(
            e[2], p_from, b if b is not None else e[3],
            a_new if a_new is not None else e[2], p_to,
            b_new if b_new is not None else e[3],
        )

    def lpart(a=None, a_new=None, b=None):
        return RulePart(
            a if a is not None else e[1], 0, b if b is not None else e[2],
            a_new if a_new is not None else e[1], 0,
            b if b is not None else e[2],
        )

    kpart = RulePart(e[0], 0, e[1], e[0], 0, e[1])
    rpart = RulePart(e[3], 0, e[4], e[3], 0, e[4])

    def mk(name, lp, pp, cons):
        return SRule(name, (kpart, lp, pp, rpart), tuple(cons))

    rules = []
    pidx = {}
    for n, nm in enumerate(ctx.input_ab.names):
        for s in (1, 2, 3):
            pidx[(nm, s)] = 1 + 3 * n + (s - 1)
    for nm in ctx.input_ab.names:
        ti = ctx.tape_ab[0].index(nm)
        mp, mpp = ctx.maps_p[0][ti], ctx.maps_pp[0][ti]
        hp, hpp = ctx.Hp[0][ti], ctx.Hpp[0][ti]
        fam = f"T:{nm}"
        s1, s2, s3 = (pidx[(nm, s)] for s in (1, 2, 3))

        cons = list(whole)
        cons[3] = SectorConstraint.trivial(ypp)
        rules.append(mk(f"{fam}/set", lpart(), tpart(0, s1), cons))

        for c in (1, 2):
            wc = mpp.triple.w_a if c == 1 else mpp.triple.w_b
            cons = list(whole)
            cons[3] = hpp
            rules.append(mk(
                f"{fam}/L:{_AB[c - 1]}",
                lpart(),
                tpart(s1, s1, a_new=ReducedWord(yp, (-c,), _reduced=True), b_new=wc),
                cons,
            ))

        eat = ReducedWord(ctx.input_ab, (ctx.input_ab.index(nm) + 1,), _reduced=True)
        cons = list(whole)
        cons[2] = SectorConstraint.trivial(yp)
        cons[3] = hpp
        rules.append(mk(
            f"{fam}/adv",
            lpart(a=eat, a_new=ReducedWord.empty(ctx.input_ab)),
            tpart(s1, s2, a_new=mp.triple.w),
            cons,
        ))

        for c in (1, 2):
            wc = mpp.triple.w_a if c == 1 else mpp.triple.w_b
            vc = mp.triple.w_a if c == 1 else mp.triple.w_b
            cons = list(whole)
            cons[2] = hp
            cons[3] = hpp
            rules.append(mk(
                f"{fam}/R:{_AB[c - 1]}",
                lpart(b=mp.triple.w),
                tpart(s2, s2, a_new=vc, b=wc),
                cons,
            ))

        cons = list(whole)
        cons[2] = hp
        cons[3] = SectorConstraint.trivial(ypp)
        rules.append(mk(f"{fam}/fin", lpart(b=mp.triple.w), tpart(s2, s3), cons))

        cons = list(whole)
        cons[3] = SectorConstraint.trivial(ypp)
        rules.append(mk(f"{fam}/clear", lpart(), tpart(s3, 0), cons))
    ctx._t = SMachine(hw, rules)
    return ctx._t


def t_block(ctx: EncoderContext, letter_name: str, contents) -> list[str]:
    fam = f"T:{letter_name}"
    names = [f"{fam}/set"]
    names.extend(f"{fam}/L:{_AB[c - 1]}" for c in reversed(contents))
    names.append(f"{fam}/adv")
    names.extend(f"{fam}/R:{_AB[c - 1]}" for c in contents)
    names.extend((f"{fam}/fin", f"{fam}/clear"))
    return names


def t_history(ctx: EncoderContext, u: ReducedWord) -> tuple[list[str], ReducedWord]:
    """Canonical translator history for a positive input word, plus the
    deposited f-image (of the mirrored word)."""
    if u.alphabet is not ctx.input_ab or not u.is_positive():
        raise EncodeError("translator input must be positive over the input alphabet")
    names: list[str] = []
    content = ReducedWord.empty(ctx.Yp[0])
    for x in reversed(u.letters):
        nm = ctx.input_ab.name(x - 1)
        names.extend(t_block(ctx, nm, content.letters))
        content = ctx.maps_p[0][ctx.tape_ab[0].index(nm)].phi(content)
    return names, content


def t_input(ctx: EncoderContext, u: ReducedWord) -> AdmissibleWord:
    """The translator configuration K u L p R."""
    t = build_T(ctx)
    hw = t.hardware
    sectors = (
        u,
        ReducedWord.empty(ctx.Yp[0]),
        ReducedWord.empty(ctx.Ypp[0]),
    )
    states = ((0, 0, 1), (1, 0, 1), (2, 0, 1), (3, 0, 1))
    return AdmissibleWord(hw, states, sectors)


# -- the main machine ------------------------------------------------------


class _MainLayout:
    """Index bookkeeping for the circular base."""

    def __init__(self, ctx):
        k, L = ctx.k, ctx.copies
        self.k, self.copies = k, L
        self.t_parts = [0, 1] + [2 + (c - 1) * (2 * k + 2) - 1 for c in range(2, L)]
        # part index of copy c's Q0 (copies are 1-based)
        self.copy_start = [None] + [2 + (c - 1) * (2 * k + 2) for c in range(1, L)]
        self.nparts = L + (L - 1) * (2 * k + 1)


def build_main(ctx: EncoderContext) -> SMachine:
    """Circular machine: translator phase, connection, machine phase."""
    if ctx._main is not None:
        return ctx._main
    m1 = build_M1(ctx)
    t = build_T(ctx)
    k, L = ctx.k, ctx.copies
    lay = _MainLayout(ctx)
    ends = Alphabet((), tag="E")

    # part alphabets: machine letters first, then the translator-phase bar
    # letters, so every M1 letter keeps its index in the copy.
    parts: list[Alphabet] = []
    slots: list[Alphabet] = [ends]
    yp_c: list[list[Alphabet]] = [None]
    ypp_c: list[list[Alphabet]] = [None]
    tb = ctx.input_ab
    for c in range(L):
        parts.append(Alphabet((f"t({c})",), tag=f"t{c}"))
        slots.append(tb if c == 0 else ends)
        if c == 0:
            tb = None
            continue
        sfx = f"@{c}"
        yp_c.append([ab.with_suffix(sfx) for ab in ctx.Yp])
        ypp_c.append([ab.with_suffix(sfx) for ab in ctx.Ypp])
        m1p = ctx.m1_hardware.parts
        extra = [f"L*{sfx}"]
        parts.append(Alphabet(tuple(n + sfx for n in m1p[0].names) + tuple(extra)))
        slots.append(yp_c[c][0])
        bar = [f"p*{sfx}"]
        for nm in ctx.input_ab.names:
            bar.extend(f"p*(T:{nm},{s}){sfx}" for s in (1, 2, 3))
        parts.append(Alphabet(tuple(n + sfx for n in m1p[1].names) + tuple(bar)))
        slots.append(ypp_c[c][0])
        parts.append(Alphabet(tuple(n + sfx for n in m1p[2].names) + (f"R*{sfx}",)))
        for j in range(1, k):
            slots.append(yp_c[c][j])
            parts.append(
                Alphabet(tuple(n + sfx for n in m1p[2 * j + 1].names)
                         + (f"prk(p{j + 1})*{sfx}",))
            )
            slots.append(ypp_c[c][j])
            parts.append(
                Alphabet(tuple(n + sfx for n in m1p[2 * j + 2].names)
                         + (f"prk(q{j + 1})*{sfx}",))
            )
        slots.append(ends)
    hw = SHardware(tuple(parts), tuple(slots), circular=True)

    whole_e = SectorConstraint.whole(ends)
    whole_in = SectorConstraint.whole(ctx.input_ab)
    lock_in = SectorConstraint.trivial(ctx.input_ab)
    tcons: dict[tuple[int, int], SectorConstraint] = {}

    def translated_cons(cons, target):
        key = (id(cons), id(target))
        got = tcons.get(key)
        if got is None:
            if cons.is_whole():
                got = SectorConstraint.whole(target)
            elif cons.is_trivial():
                got = SectorConstraint.trivial(target)
            else:
                got = SectorConstraint.proper(
                    target, tuple(g.translate(target) for g in cons.generator_words())
                )
            tcons[key] = got
        return got

    def idle(part_idx, letter_idx):
        return identity_part(
            hw.slots[part_idx], letter_idx, hw.slots[(part_idx + 1) % len(parts)]
        )

    def copy_slot_ab(c, local_slot):
        # local_slot indexes M1's slot list (0..2k+1)
        if local_slot == 0 or local_slot == 2 * k + 1:
            return ends
        j, second = divmod(local_slot - 1, 2)
        return (ypp_c[c] if second else yp_c[c])[j]

    bar_idx = []
    for c in range(1, L):
        start = lay.copy_start[c]
        row = {"L*": parts[start].index(f"L*@{c}")}
        row["p*"] = parts[start + 1].index(f"p*@{c}")
        for nm in ctx.input_ab.names:
            for s in (1, 2, 3):
                row[f"p({nm},{s})"] = parts[start + 1].index(f"p*(T:{nm},{s})@{c}")
        row["R*"] = parts[start + 2].index(f"R*@{c}")
        for j in range(1, k):
            row[f"prk_p{j}"] = parts[start + 2 * j + 1].index(f"prk(p{j + 1})*@{c}")
            row[f"prk_q{j}"] = parts[start + 2 * j + 2].index(f"prk(q{j + 1})*@{c}")
        bar_idx.append(row)

    rules = []

    # machine phase: every M1 rule acts in all copies at once
    for rule in m1.rules:
        if rule.sign < 0:
            continue
        mparts = [idle(p, 0) for p in range(len(parts))]
        cons = [whole_e] * (len(parts) + 1)
        cons[1] = lock_in
        for c in range(1, L):
            start = lay.copy_start[c]
            for local in range(2 * k + 1):
                rp = rule.parts[local]
                gpart = start + local
                la = copy_slot_ab(c, local)
                lb = copy_slot_ab(c, local + 1)
                mparts[gpart] = RulePart(
                    rp.a.translate(la), rp.q_from, rp.b.translate(lb),
                    rp.a_new.translate(la), rp.q_to, rp.b_new.translate(lb),
                )
            for local in range(2 * k + 2):
                cc = rule.constraints[local]
                target = copy_slot_ab(c, local)
                gslot = start + local
                if target is ends:
                    continue
                cons[gslot] = translated_cons(cc, target)
        rules.append(SRule(rule.name, tuple(mparts), tuple(cons)))

    # translator phase: barred copies of T working in every input block
    for rule in t.rules:
        if rule.sign < 0:
            continue
        mparts = [None] * len(parts)
        for c0, p in enumerate(lay.t_parts):
            mparts[p] = idle(p, 0)
        lp = rule.parts[1]
        mparts[1] = RulePart(
            lp.a, 0, ReducedWord.empty(ends),
            lp.a_new, 0, ReducedWord.empty(ends),
        )
        cons = [whole_e] * (len(parts) + 1)
        cons[1] = rule.constraints[1]
        for c in range(1, L):
            start = lay.copy_start[c]
            row = bar_idx[c - 1]
            ypc, yppc = yp_c[c][0], ypp_c[c][0]
            mparts[start] = RulePart(
                ReducedWord.empty(ends), row["L*"], lp.b.translate(ypc),
                ReducedWord.empty(ends), row["L*"], lp.b.translate(ypc),
            )
            pp = rule.parts[2]

            def bar_of(idx):
                if idx == 0:
                    return row["p*"]
                off = idx - 1
                nm = ctx.input_ab.names[off // 3]
                return row[f"p({nm},{off % 3 + 1})"]

            mparts[start + 1] = RulePart(
                pp.a.translate(ypc), bar_of(pp.q_from), pp.b.translate(yppc),
                pp.a_new.translate(ypc), bar_of(pp.q_to), pp.b_new.translate(yppc),
            )
            mparts[start + 2] = idle(start + 2, row["R*"])
            for j in range(1, k):
                mparts[start + 2 * j + 1] = idle(start + 2 * j + 1, row[f"prk_p{j}"])
                mparts[start + 2 * j + 2] = idle(start + 2 * j + 2, row[f"prk_q{j}"])
            cons[start + 1] = translated_cons(rule.constraints[2], ypc)
            cons[start + 2] = translated_cons(rule.constraints[3], yppc)
            for j in range(1, k):
                cons[start + 2 * j + 1] = SectorConstraint.trivial(yp_c[c][j])
                cons[start + 2 * j + 2] = SectorConstraint.trivial(ypp_c[c][j])
        rules.append(SRule(rule.name, tuple(mparts), tuple(cons)))

    # connection: drop every bar letter at once
    mparts = [idle(p, 0) for p in range(len(parts))]
    cons = [whole_e] * (len(parts) + 1)
    cons[1] = lock_in
    for c in range(1, L):
        start = lay.copy_start[c]
        row = bar_idx[c - 1]

        def swap(gpart, frm, to):
            left = hw.slots[gpart]
            right = hw.slots[(gpart + 1) % len(parts)]
            e1, e2 = ReducedWord.empty(left), ReducedWord.empty(right)
            return RulePart(e1, frm, e2, e1, to, e2)

        mparts[start] = swap(start, row["L*"], 0)
        mparts[start + 1] = swap(start + 1, row["p*"], 0)
        mparts[start + 2] = swap(
            start + 2, row["R*"], ctx.q_idx(0, ctx.tm.start[0])
        )
        for j in range(1, k):
            mparts[start + 2 * j + 1] = swap(start + 2 * j + 1, row[f"prk_p{j}"], 0)
            mparts[start + 2 * j + 2] = swap(
                start + 2 * j + 2, row[f"prk_q{j}"], ctx.q_idx(j, ctx.tm.start[j])
            )
        for j in range(k):
            cons[start + 2 * j + 1] = (
                SectorConstraint.whole(yp_c[c][j]) if j == 0
                else SectorConstraint.trivial(yp_c[c][j])
            )
            cons[start + 2 * j + 2] = SectorConstraint.trivial(ypp_c[c][j])
    rules.append(SRule("x43", tuple(mparts), tuple(cons)))

    ctx._main = SMachine(hw, rules)
    ctx._main_aux = (lay, yp_c, ypp_c, bar_idx)
    return ctx._main


def _main_word(ctx, states, sector_map):
    m = build_main(ctx)
    hw = m.hardware
    n = len(hw.parts)
    sectors = [
        sector_map.get(i, ReducedWord.empty(hw.slots[i + 1])) for i in range(n)
    ]
    states = list(states) + [states[0]]
    return AdmissibleWord(hw, tuple(states), tuple(sectors))


def sigma_word(ctx: EncoderContext, u) -> AdmissibleWord:
    """The input configuration: u in the first sector, bars parked."""
    m = build_main(ctx)
    lay, yp_c, ypp_c, bar_idx = ctx._main_aux
    if isinstance(u, str):
        u = ReducedWord.from_names(ctx.input_ab, u)
    if u.alphabet is not ctx.input_ab:
        u = u.translate(ctx.input_ab)
    k, L = ctx.k, ctx.copies
    states = []
    for c in range(L):
        states.append((lay.t_parts[c], 0, 1))
        if c == 0:
            continue
        start = lay.copy_start[c]
        row = bar_idx[c - 1]
        states.append((start, row["L*"], 1))
        states.append((start + 1, row["p*"], 1))
        states.append((start + 2, row["R*"], 1))
        for j in range(1, k):
            states.append((start + 2 * j + 1, row[f"prk_p{j}"], 1))
            states.append((start + 2 * j + 2, row[f"prk_q{j}"], 1))
    return _main_word(ctx, states, {0: u})


def sigma_start(ctx: EncoderContext) -> AdmissibleWord:
    return sigma_word(ctx, ReducedWord.empty(ctx.input_ab))


def sigma_accept(ctx: EncoderContext) -> AdmissibleWord:
    """The accept configuration: every copy at the machine's stop word."""
    m = build_main(ctx)
    lay, yp_c, ypp_c, bar_idx = ctx._main_aux
    k, L = ctx.k, ctx.copies
    states = []
    for c in range(L):
        states.append((lay.t_parts[c], 0, 1))
        if c == 0:
            continue
        start = lay.copy_start[c]
        states.append((start, 0, 1))
        for j in range(k):
            states.append((start + 2 * j + 1, 0, 1))
            states.append(
                (start + 2 * j + 2, ctx.q_idx(j, ctx.tm.accept[j]), 1)
            )
    return _main_word(ctx, states, {})


def main_history(ctx: EncoderContext, u, *, fuel: int = 200) -> list[str]:
    """Rule names accepting sigma(u): translate, connect, then run the
    encoded machine computation on the mirrored input."""
    if isinstance(u, str):
        u = ReducedWord.from_names(ctx.input_ab, u)
    names, _ = t_history(ctx, u)
    names = list(names)
    names.append("x43")
    mirror = ReducedWord(ctx.input_ab, tuple(reversed(u.letters)), _reduced=True)
    text = "".join(ctx.input_ab.name(x - 1) for x in mirror.letters)
    cfg = ctx.tm.input_config(text)
    hist = ctx.tm.search_accept(cfg, fuel)
    if hist is None:
        raise EncodeError(f"machine does not accept {text!r} within {fuel} steps")
    names.extend(encode_computation(ctx, cfg, hist).names)
    return names
