"""Small concrete machines used by tests and as CLI defaults."""

from __future__ import annotations

from .turing import TapePattern, TMCommand, TMCommandPart, TMachine


def _part(state, left, state2, left2, anchored=False):
    return TMCommandPart(
        TapePattern(state, tuple(left), anchored),
        TapePattern(state2, tuple(left2), anchored),
    )


def copy_erase_machine() -> TMachine:
    """Two tapes, recognizes {a^m b^m : m >= 0}.

    Phase one (state s) eats b's off the right end of the input while
    stacking a counter letter B on tape 2 for each; phase two (state t)
    eats a's against the counters.  Accepts when both tapes drain at
    the same moment.
    """
    cmds = [
        TMCommand("eat-b", (_part("s", "b", "s", ""), _part("u", "", "u", "B"))),
        TMCommand("to-a", (_part("s", "a", "t", "a"), _part("u", "", "u", ""))),
        TMCommand("eat-a", (_part("t", "a", "t", ""), _part("u", "B", "u", ""))),
        TMCommand("finish", (_part("t", "", "f", "", True), _part("u", "", "v", "", True))),
        TMCommand("empty", (_part("s", "", "f", "", True), _part("u", "", "v", "", True))),
    ]
    return TMachine(
        input_alphabet=("a", "b"),
        tape_alphabets=(("a", "b"), ("B",)),
        state_parts=(("s", "t", "f"), ("u", "v")),
        commands=cmds,
        start=("s", "u"),
        accept=("f", "v"),
    )


def copy_erase_mirror() -> TMachine:
    """Same two-tape design, recognizing {b^m a^m : m >= 0}."""
    cmds = [
        TMCommand("eat-a", (_part("s", "a", "s", ""), _part("u", "", "u", "B"))),
        TMCommand("to-b", (_part("s", "b", "t", "b"), _part("u", "", "u", ""))),
        TMCommand("eat-b", (_part("t", "b", "t", ""), _part("u", "B", "u", ""))),
        TMCommand("finish", (_part("t", "", "f", "", True), _part("u", "", "v", "", True))),
        TMCommand("empty", (_part("s", "", "f", "", True), _part("u", "", "v", "", True))),
    ]
    return TMachine(
        input_alphabet=("a", "b"),
        tape_alphabets=(("a", "b"), ("B",)),
        state_parts=(("s", "t", "f"), ("u", "v")),
        commands=cmds,
        start=("s", "u"),
        accept=("f", "v"),
    )


def unary_erase_machine() -> TMachine:
    """One tape over {a}; accepts every input by erasing it."""
    cmds = [
        TMCommand("eat", (_part("s", "a", "s", ""),)),
        TMCommand("done", (_part("s", "", "f", "", True),)),
    ]
    return TMachine(
        input_alphabet=("a",),
        tape_alphabets=(("a",),),
        state_parts=(("s", "f"),),
        commands=cmds,
        start=("s",),
        accept=("f",),
    )
