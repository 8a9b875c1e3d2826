"""Multi-tape Turing machines with two-sided head patterns, plus the
normalization pipeline that rebuilds a deterministic machine into a
symmetric one whose positive commands each touch a single tape.

A tape configuration is (left, state, right); a command part is a pair
of patterns, each optionally anchored at the left marker or the right
marker.  All machines in this package keep their heads parked at the
right markers, but apply_command handles the general shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class TMError(ValueError):
    pass


@dataclass(frozen=True)
class TapePattern:
    """One side of a command part: a state with tape words around it.

    ``lanchor`` pins the pattern to the left end of the tape (the word
    left of the head must equal ``left`` exactly); without it, ``left``
    only has to be a suffix.  Same for ``ranchor``/``right``/prefix.
    """

    state: str
    left: tuple[str, ...] = ()
    lanchor: bool = False
    right: tuple[str, ...] = ()
    ranchor: bool = True

    def text(self) -> str:
        bits = []
        if self.lanchor:
            bits.append("|")
        bits.extend(self.left)
        bits.append(self.state.upper())
        bits.extend(self.right)
        if self.ranchor:
            bits.append("|")
        return " ".join(bits)


@dataclass(frozen=True)
class TMCommandPart:
    before: TapePattern
    after: TapePattern

    def __post_init__(self):
        if self.before.lanchor != self.after.lanchor or self.before.ranchor != self.after.ranchor:
            raise TMError("command part must keep its end markers")

    def is_idle(self) -> bool:
        return (
            self.before == self.after
            and not self.before.left
            and not self.before.right
            and not self.before.lanchor
        )

    def swapped(self) -> "TMCommandPart":
        return TMCommandPart(self.after, self.before)


class TMCommand:
    def __init__(self, name: str, parts, sign: int = 1):
        self.name = name
        self.parts: tuple[TMCommandPart, ...] = tuple(parts)
        self.sign = sign

    def inverse(self) -> "TMCommand":
        nm = self.name[:-3] if self.name.endswith("^-1") else self.name + "^-1"
        return TMCommand(nm, tuple(p.swapped() for p in self.parts), -self.sign)

    def working_tapes(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.parts) if not p.is_idle())

    def text(self) -> str:
        return f"{self.name}: [" + "; ".join(
            f"{p.before.text()} -> {p.after.text()}" for p in self.parts
        ) + "]"

    def __repr__(self):
        return f"TMCommand({self.name})"


@dataclass(frozen=True)
class TMConfig:
    tapes: tuple[tuple[tuple[str, ...], str, tuple[str, ...]], ...]

    def states(self) -> tuple[str, ...]:
        return tuple(q for _, q, _ in self.tapes)

    def tape_words(self) -> tuple[tuple[str, ...], ...]:
        return tuple(left + right for left, _, right in self.tapes)

    def tapes_empty(self) -> bool:
        return all(not left and not right for left, _, right in self.tapes)

    def text(self) -> str:
        return " ".join(
            "[" + " ".join(left + (q.upper(),) + right) + "]" for left, q, right in self.tapes
        )


@dataclass
class RunResult:
    outcome: str  # accepted / rejected / out-of-fuel
    history: list[str]
    configs: list[TMConfig]


def _match_side(word, pat_word, anchored):
    if anchored:
        return word == pat_word
    if len(pat_word) > len(word):
        return False
    return word[len(word) - len(pat_word):] == pat_word


class TMachine:
    """k tapes, per-tape state parts, commands over anchored patterns."""

    def __init__(self, input_alphabet, tape_alphabets, state_parts, commands, start, accept):
        self.input_alphabet = tuple(input_alphabet)
        self.tape_alphabets: tuple[tuple[str, ...], ...] = tuple(tuple(t) for t in tape_alphabets)
        self.state_parts: tuple[tuple[str, ...], ...] = tuple(tuple(s) for s in state_parts)
        self.commands: tuple[TMCommand, ...] = tuple(commands)
        self.start = tuple(start)
        self.accept = tuple(accept)
        self._validate()
        self._by_name = {c.name: c for c in self.commands}
        # Parts name their before-states outright, so a full state vector
        # keys the only commands that could match.
        self._by_states: dict[tuple[str, ...], list[TMCommand]] = {}
        for c in self.commands:
            key = tuple(p.before.state for p in c.parts)
            self._by_states.setdefault(key, []).append(c)

    @property
    def k(self) -> int:
        return len(self.tape_alphabets)

    def _validate(self):
        k = self.k
        if len(self.state_parts) != k or len(self.start) != k or len(self.accept) != k:
            raise TMError("state parts, start and accept vectors must match the tape count")
        seen: set[str] = set()
        for letters in self.tape_alphabets + self.state_parts:
            for x in letters:
                if x in seen:
                    raise TMError(f"letter {x!r} used on two tapes")
                seen.add(x)
        if not set(self.input_alphabet) <= set(self.tape_alphabets[0]):
            raise TMError("input alphabet must sit inside tape 1's alphabet")
        names = set()
        for cmd in self.commands:
            if cmd.name in names:
                raise TMError(f"duplicate command name {cmd.name}")
            names.add(cmd.name)
            if len(cmd.parts) != k:
                raise TMError(f"command {cmd.name} must have one part per tape")
            for i, part in enumerate(cmd.parts):
                for pat in (part.before, part.after):
                    if pat.state not in self.state_parts[i]:
                        raise TMError(f"{cmd.name}: state {pat.state!r} not on tape {i + 1}")
                    for x in pat.left + pat.right:
                        if x not in self.tape_alphabets[i]:
                            raise TMError(f"{cmd.name}: letter {x!r} not on tape {i + 1}")
        for i, (q0, q1) in enumerate(zip(self.start, self.accept)):
            if q0 not in self.state_parts[i] or q1 not in self.state_parts[i]:
                raise TMError(f"start/accept state missing on tape {i + 1}")

    def command(self, name: str) -> TMCommand:
        if name.endswith("^-1"):
            return self.command(name[:-3]).inverse()
        try:
            return self._by_name[name]
        except KeyError:
            raise TMError(f"no command named {name!r}") from None

    # -- configurations ------------------------------------------------------

    def input_config(self, u) -> TMConfig:
        letters = tuple(u)
        for x in letters:
            if x not in self.input_alphabet:
                raise TMError(f"{x!r} is not an input letter")
        tapes = [(letters, self.start[0], ())]
        tapes += [((), q, ()) for q in self.start[1:]]
        return TMConfig(tuple(tapes))

    def accept_config(self) -> TMConfig:
        return TMConfig(tuple(((), q, ()) for q in self.accept))

    def is_accepting(self, config: TMConfig) -> bool:
        return config.states() == self.accept and config.tapes_empty()

    def apply_command(self, config: TMConfig, cmd: TMCommand):
        """The rewritten configuration, or None if some part fails to match."""
        new_tapes = []
        for (left, q, right), part in zip(config.tapes, cmd.parts):
            b, a = part.before, part.after
            if q != b.state:
                return None
            if not _match_side(left, b.left, b.lanchor):
                return None
            if b.ranchor:
                if right != b.right:
                    return None
                new_right = a.right
            else:
                if right[: len(b.right)] != b.right:
                    return None
                new_right = a.right + right[len(b.right):]
            new_left = a.left if b.lanchor else left[: len(left) - len(b.left)] + a.left
            new_tapes.append((new_left, a.state, new_right))
        return TMConfig(tuple(new_tapes))

    def applicable(self, config: TMConfig) -> list[TMCommand]:
        pool = self._by_states.get(config.states(), ())
        return [c for c in pool if self.apply_command(config, c) is not None]

    # -- runs ----------------------------------------------------------------

    def run_deterministic(self, u, fuel: int) -> RunResult:
        config = u if isinstance(u, TMConfig) else self.input_config(u)
        history: list[str] = []
        configs = [config]
        for _ in range(fuel + 1):
            if self.is_accepting(config):
                return RunResult("accepted", history, configs)
            if len(history) == fuel:
                return RunResult("out-of-fuel", history, configs)
            apps = self.applicable(config)
            if len(apps) > 1:
                names = ", ".join(c.name for c in apps)
                raise TMError(f"nondeterministic ({names}) at {config.text()}")
            if not apps:
                return RunResult("rejected", history, configs)
            config = self.apply_command(config, apps[0])
            history.append(apps[0].name)
            configs.append(config)
        return RunResult("out-of-fuel", history, configs)

    def symmetrize(self) -> "TMachine":
        pos = [c for c in self.commands if c.sign > 0]
        cmds = []
        for c in pos:
            cmds.append(c)
            cmds.append(c.inverse())
        return TMachine(
            self.input_alphabet, self.tape_alphabets, self.state_parts, cmds, self.start, self.accept
        )

    def search_accept(self, config: TMConfig, depth: int):
        """BFS over reduced histories; an accepting history or None."""
        if self.is_accepting(config):
            return []
        seen = {config}
        frontier = [(config, None)]
        came: dict[TMConfig, tuple[TMConfig, str]] = {}
        for _ in range(depth):
            nxt = []
            for cfg, last in frontier:
                for cmd in self._by_states.get(cfg.states(), ()):
                    if last is not None and cmd.name == _inv_name(last):
                        continue
                    got = self.apply_command(cfg, cmd)
                    if got is None or got in seen:
                        continue
                    seen.add(got)
                    came[got] = (cfg, cmd.name)
                    if self.is_accepting(got):
                        out = []
                        cur = got
                        while cur in came:
                            cur, nm = came[cur]
                            out.append(nm)
                        return out[::-1]
                    nxt.append((got, cmd.name))
            if not nxt:
                return None
            frontier = nxt
        return None

    def accepts_bounded(self, u, depth: int) -> bool:
        return self.search_accept(self.input_config(u), depth) is not None

    def run_by_names(self, config: TMConfig, names) -> list[TMConfig]:
        out = [config]
        for nm in names:
            config = self.apply_command(config, self.command(nm))
            if config is None:
                raise TMError(f"command {nm} not applicable in the given run")
            out.append(config)
        return out

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        def pat(p: TapePattern) -> dict:
            return {
                "state": p.state,
                "left": list(p.left),
                "lanchor": p.lanchor,
                "right": list(p.right),
                "ranchor": p.ranchor,
            }

        return {
            "input_alphabet": list(self.input_alphabet),
            "tape_alphabets": [list(t) for t in self.tape_alphabets],
            "state_parts": [list(s) for s in self.state_parts],
            "start": list(self.start),
            "accept": list(self.accept),
            "commands": [
                {
                    "name": c.name,
                    "sign": c.sign,
                    "parts": [{"before": pat(p.before), "after": pat(p.after)} for p in c.parts],
                }
                for c in self.commands
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TMachine":
        def pat(d: dict) -> TapePattern:
            return TapePattern(
                d["state"], tuple(d["left"]), d["lanchor"], tuple(d["right"]), d["ranchor"]
            )

        cmds = [
            TMCommand(
                c["name"],
                tuple(TMCommandPart(pat(p["before"]), pat(p["after"])) for p in c["parts"]),
                c.get("sign", 1),
            )
            for c in data["commands"]
        ]
        return cls(
            data["input_alphabet"],
            data["tape_alphabets"],
            data["state_parts"],
            cmds,
            data["start"],
            data["accept"],
        )


def _inv_name(name: str) -> str:
    return name[:-3] if name.endswith("^-1") else name + "^-1"


# -- normal form ---------------------------------------------------------------


def command_form(cmd: TMCommand) -> tuple[int, str]:
    """(working tape index, form) where form is one of "insert",
    "delete", "state", "check".  Raises if the command fits none."""
    work = cmd.working_tapes()
    if len(work) != 1:
        raise TMError(f"{cmd.name}: {len(work)} working heads, need exactly 1")
    i = work[0]
    part = cmd.parts[i]
    b, a = part.before, part.after
    if b.right or a.right or not b.ranchor:
        raise TMError(f"{cmd.name}: head not parked at the right marker")
    if b.lanchor:
        if b.left or a.left:
            raise TMError(f"{cmd.name}: anchored part may not move letters")
        if a.state == b.state:
            raise TMError(f"{cmd.name}: anchored part must change the state")
        return i, "check"
    if not b.left and not a.left:
        if a.state == b.state:
            raise TMError(f"{cmd.name}: identity part on the working tape")
        return i, "state"
    if not b.left and len(a.left) == 1:
        return i, "insert"
    if len(b.left) == 1 and not a.left:
        return i, "delete"
    raise TMError(f"{cmd.name}: moves more than one letter")


def check_normal_form(machine: TMachine) -> dict[str, tuple[int, str]]:
    """Classify every positive command; raise on the first misfit."""
    return {c.name: command_form(c) for c in machine.commands if c.sign > 0}


# -- the normalization pipeline --------------------------------------------------


def _patterns_may_overlap(p1: TapePattern, p2: TapePattern) -> bool:
    if p1.state != p2.state:
        return False
    if p1.right or p2.right or not p1.ranchor or not p2.ranchor:
        raise TMError("determinism check expects right-parked heads")
    a, b = p1.left, p2.left
    if p1.lanchor and p2.lanchor:
        return a == b
    if p1.lanchor:
        return len(a) >= len(b) and a[len(a) - len(b):] == b
    if p2.lanchor:
        return len(b) >= len(a) and b[len(b) - len(a):] == a
    n = min(len(a), len(b))
    return n == 0 or a[len(a) - n:] == b[len(b) - n:]


def _check_deterministic(machine: TMachine):
    cmds = machine.commands
    for x in range(len(cmds)):
        for y in range(x + 1, len(cmds)):
            c1, c2 = cmds[x], cmds[y]
            if all(
                _patterns_may_overlap(p1.before, p2.before)
                for p1, p2 in zip(c1.parts, c2.parts)
            ):
                raise TMError(f"commands {c1.name} and {c2.name} overlap; machine not deterministic")


class _Builder:
    """Accumulates commands of the rebuilt machine; every command names
    all heads (idle parts pin states), so emission is a state table."""

    def __init__(self, k: int):
        self.k = k
        self.commands: list[TMCommand] = []
        self.fresh_states: list[tuple[int, str]] = []

    def emit(self, name, pins, tape, before_pat, after_pat):
        """pins: full state vector; tape: the working head; patterns for it."""
        parts = []
        for i in range(self.k):
            if i == tape:
                parts.append(TMCommandPart(before_pat, after_pat))
            else:
                idle = TapePattern(pins[i])
                parts.append(TMCommandPart(idle, idle))
        self.commands.append(TMCommand(name, tuple(parts)))

    def state_change(self, name, pins, tape, q_from, q_to):
        self.emit(name, pins, tape, TapePattern(q_from), TapePattern(q_to))

    def insert(self, name, pins, tape, letter, q_from, q_to):
        self.emit(name, pins, tape, TapePattern(q_from), TapePattern(q_to, (letter,)))

    def delete(self, name, pins, tape, letter, q_from, q_to):
        self.emit(name, pins, tape, TapePattern(q_from, (letter,)), TapePattern(q_to))

    def check_empty(self, name, pins, tape, q_from, q_to):
        self.emit(
            name, pins, tape, TapePattern(q_from, (), True), TapePattern(q_to, (), True)
        )


def _require_parked(machine: TMachine):
    for cmd in machine.commands:
        for part in cmd.parts:
            for pat in (part.before, part.after):
                if pat.right or not pat.ranchor:
                    raise TMError(
                        f"{cmd.name}: normalization needs all heads parked at the right markers"
                    )


def normalize(machine: TMachine) -> TMachine:
    """Rebuild a deterministic machine into a symmetric one in which
    every positive command works on a single tape and either moves one
    letter, changes one state, or checks one tape for emptiness.

    The new machine has two extra tapes.  It first reverses the input
    onto tape k+1 letter by letter, then pours it back, restoring the
    order on tape 1 and leaving a copy on tape k+2.  It then runs the
    original commands (split into single-action chains), verifies all
    tapes empty, erases the copy, and accepts.
    """
    _require_parked(machine)
    _check_deterministic(machine)
    k = machine.k
    K = k + 2
    A = machine.input_alphabet
    copy1 = {a: a + "'" for a in A}
    copy2 = {a: a + "''" for a in A}

    mid_states = [machine.start[i] for i in range(1, k)]
    b = _Builder(K)

    def vec(q1, qa1, qa2, middles=None):
        return [q1] + list(middles if middles is not None else mid_states) + [qa1, qa2]

    # initial command, the only user of the start state
    b.state_change("init", vec("in0", "ld1", "ld2"), 0, "in0", "ld0")

    # phase one: pop tape 1, push the reversed word onto tape k+1
    for a in A:
        b.delete(f"take:{a}", vec("ld0", "ld1", "ld2"), 0, a, "ld0", f"ld0:{a}")
        b.insert(f"put:{a}", vec(f"ld0:{a}", "ld1", "ld2"), k, copy1[a], "ld1", f"ld1:{a}")
        b.state_change(f"back0:{a}", vec(f"ld0:{a}", f"ld1:{a}", "ld2"), 0, f"ld0:{a}", "ld0")
        b.state_change(f"back1:{a}", vec("ld0", f"ld1:{a}", "ld2"), k, f"ld1:{a}", "ld1")
    b.check_empty("turn", vec("ld0", "ld1", "ld2"), 0, "ld0", "cp0")

    # phase two: pour tape k+1 back, restoring tape 1 and copying to k+2
    for a in A:
        b.delete(f"pour:{a}", vec("cp0", "ld1", "ld2"), k, copy1[a], "ld1", f"ld1&{a}")
        b.insert(f"restore:{a}", vec("cp0", f"ld1&{a}", "ld2"), 0, a, "cp0", f"cp0&{a}")
        b.insert(f"stash:{a}", vec(f"cp0&{a}", f"ld1&{a}", "ld2"), k + 1, copy2[a], "ld2", f"ld2&{a}")
        b.state_change(f"pback1:{a}", vec(f"cp0&{a}", f"ld1&{a}", f"ld2&{a}"), k, f"ld1&{a}", "ld1")
        b.state_change(f"pback0:{a}", vec(f"cp0&{a}", "ld1", f"ld2&{a}"), 0, f"cp0&{a}", "cp0")
        b.state_change(f"pback2:{a}", vec("cp0", "ld1", f"ld2&{a}"), k + 1, f"ld2&{a}", "ld2")
    b.check_empty("begin-work", vec("cp0", "ld1", "ld2"), k, "ld1", "wk1")
    b.state_change("load", vec("cp0", "wk1", "ld2"), 0, "cp0", machine.start[0])

    # the original commands, split into one-action chains
    for cmd in machine.commands:
        _split_command(b, machine, cmd)

    # wind-down: verify every original tape empty, then burn the copy
    accept = list(machine.accept)
    fin_pins = vec(accept[0], "wk1", "ld2", middles=accept[1:])
    for i in range(k):
        b.check_empty(f"fin:{i + 1}", list(fin_pins), i, accept[i], f"fn{i + 1}")
        fin_pins[i] = f"fn{i + 1}"
    b.check_empty(f"fin:{k + 1}", list(fin_pins), k, "wk1", "fnk1")
    fin_pins[k] = "fnk1"
    for a in A:
        b.delete(f"erase:{a}", list(fin_pins), k + 1, copy2[a], "ld2", "ld2")
    b.check_empty("accept", list(fin_pins), k + 1, "ld2", "fnk2")

    new_states: list[list[str]] = [list(machine.state_parts[i]) for i in range(k)]
    new_states[0] += (
        ["in0", "ld0", "cp0", "fn1"]
        + [f"ld0:{a}" for a in A]
        + [f"cp0&{a}" for a in A]
    )
    for i in range(1, k):
        new_states[i].append(f"fn{i + 1}")
    new_states.append(
        ["ld1", "wk1", "fnk1"] + [f"ld1:{a}" for a in A] + [f"ld1&{a}" for a in A]
    )
    new_states.append(["ld2", "fnk2"] + [f"ld2&{a}" for a in A])
    for tape, name in b.fresh_states:
        new_states[tape].append(name)

    tape_alphabets = list(machine.tape_alphabets) + [
        tuple(copy1[a] for a in A),
        tuple(copy2[a] for a in A),
    ]
    used: set[str] = set()
    for bunch in list(tape_alphabets) + new_states:
        for x in bunch:
            if x in used:
                raise TMError(f"name {x!r} collides during normalization; rename it in the machine")
            used.add(x)

    start = tuple(vec("in0", "ld1", "ld2"))
    accept_vec = tuple([f"fn{i + 1}" for i in range(k)] + ["fnk1", "fnk2"])
    built = TMachine(A, tape_alphabets, [tuple(s) for s in new_states], b.commands, start, accept_vec)
    return built.symmetrize()


def _split_command(b: _Builder, machine: TMachine, cmd: TMCommand):
    """Turn one general command into a chain of single-action commands
    threaded through private states (fresh per chain).

    With several active tapes, every action lands on a fresh state and
    per-tape settling moves close the chain; that way no prefix of the
    chain can be skipped or repeated in a reduced computation.  With a
    single active tape, the last action targets the final state itself.
    """
    k = machine.k
    pins = [cmd.parts[i].before.state for i in range(k)] + ["wk1", "ld2"]

    plans: list[tuple[int, list[tuple[str, str | None]]]] = []
    for i in range(k):
        part = cmd.parts[i]
        if part.is_idle():
            continue
        bp, ap = part.before, part.after
        acts: list[tuple[str, str | None]] = [("del", x) for x in reversed(bp.left)]
        if bp.lanchor:
            acts.append(("chk", None))
        acts += [("ins", x) for x in ap.left]
        if not acts:
            acts.append(("set", None))
        plans.append((i, acts))
    if not plans:
        raise TMError(f"{cmd.name}: command does nothing")

    solo = len(plans) == 1
    n = 0

    def step(kind, letter, tape, cur, tgt):
        nonlocal n
        nm = f"{cmd.name}/{n}"
        if kind == "del":
            b.delete(nm, list(pins), tape, letter, cur, tgt)
        elif kind == "ins":
            b.insert(nm, list(pins), tape, letter, cur, tgt)
        elif kind == "chk":
            b.check_empty(nm, list(pins), tape, cur, tgt)
        else:
            b.state_change(nm, list(pins), tape, cur, tgt)
        pins[tape] = tgt
        n += 1

    for i, acts in plans:
        cur = cmd.parts[i].before.state
        for j, (kind, letter) in enumerate(acts):
            if solo and j == len(acts) - 1:
                tgt = cmd.parts[i].after.state
            else:
                tgt = f"{cmd.name}:{n}"
                b.fresh_states.append((i, tgt))
            step(kind, letter, i, cur, tgt)
            cur = tgt
    if not solo:
        for i, _ in plans:
            step("set", None, i, pins[i], cmd.parts[i].after.state)
