"""Turing model tests: the counter fixture, symmetrization, and the
single-action rebuild."""

import itertools

import pytest

from kampen.fixtures import copy_erase_machine, copy_erase_mirror, unary_erase_machine
from kampen.turing import (
    TapePattern,
    TMachine,
    TMCommand,
    TMCommandPart,
    TMConfig,
    TMError,
    check_normal_form,
    command_form,
    normalize,
)


def test_fixture_language():
    m = copy_erase_machine()
    for u, want in [
        ("", True),
        ("ab", True),
        ("aabb", True),
        ("aaabbb", True),
        ("ba", False),
        ("aab", False),
        ("abb", False),
        ("abab", False),
        ("a", False),
        ("b", False),
    ]:
        got = m.run_deterministic(u, 100)
        assert (got.outcome == "accepted") == want, u


def test_mirror_fixture_language():
    m = copy_erase_mirror()
    assert m.run_deterministic("ba", 100).outcome == "accepted"
    assert m.run_deterministic("bbaa", 100).outcome == "accepted"
    assert m.run_deterministic("ab", 100).outcome == "rejected"


def test_fuel_zero():
    m = copy_erase_machine()
    assert m.run_deterministic("ab", 0).outcome == "out-of-fuel"
    assert m.run_deterministic("", 0).outcome == "out-of-fuel"  # needs one step


def test_apply_command_shapes():
    m = copy_erase_machine()
    config = TMConfig(((("a",), "s", ()), ((), "u", ())))
    ins = TMCommand(
        "ins",
        (
            TMCommandPart(TapePattern("s"), TapePattern("s", ("b",))),
            TMCommandPart(TapePattern("u"), TapePattern("u")),
        ),
    )
    got = m.apply_command(config, ins)
    assert got.tapes[0] == (("a", "b"), "s", ())
    swap = TMCommand(
        "swap",
        (
            TMCommandPart(TapePattern("s"), TapePattern("t")),
            TMCommandPart(TapePattern("u"), TapePattern("u")),
        ),
    )
    assert m.apply_command(config, swap).tapes[0] == (("a",), "t", ())
    anchored = TMCommand(
        "anch",
        (
            TMCommandPart(TapePattern("s", (), True), TapePattern("t", (), True)),
            TMCommandPart(TapePattern("u"), TapePattern("u")),
        ),
    )
    assert m.apply_command(config, anchored) is None  # tape 1 not empty


def test_inverse_law():
    m = copy_erase_machine().symmetrize()
    run = copy_erase_machine().run_deterministic("aabb", 100)
    assert run.outcome == "accepted"
    for config in run.configs:
        for cmd in m.commands:
            step = m.apply_command(config, cmd)
            if step is None:
                continue
            back = m.apply_command(step, cmd.inverse())
            assert back == config


def test_symmetrize_counts():
    m = copy_erase_machine()
    sym = m.symmetrize()
    assert len(sym.commands) == 2 * len(m.commands)
    again = sym.symmetrize()
    assert {c.name for c in again.commands} == {c.name for c in sym.commands}


def test_run_deterministic_flags_nondeterminism():
    sym = copy_erase_machine().symmetrize()
    with pytest.raises(TMError, match="nondeterministic"):
        sym.run_deterministic("ab", 10)


def test_search_accept_on_symmetrized():
    sym = copy_erase_machine().symmetrize()
    assert sym.search_accept(sym.accept_config(), 5) == []
    hist = sym.search_accept(sym.input_config("ab"), 20)
    assert hist is not None
    assert sym.run_by_names(sym.input_config("ab"), hist)[-1] == sym.accept_config()
    assert sym.search_accept(sym.input_config("ba"), 20) is None


def test_normalized_commands_fit_forms():
    m0 = normalize(copy_erase_machine())
    forms = check_normal_form(m0)
    assert set(forms.values()) <= {(i, f) for i in range(4) for f in ("insert", "delete", "state", "check")}
    assert forms["init"] == (0, "state")
    assert forms["take:a"] == (0, "delete")
    assert forms["put:a"] == (2, "insert")
    assert forms["turn"] == (0, "check")
    assert forms["stash:b"] == (3, "insert")


def test_command_form_rejects_two_heads():
    m = copy_erase_machine()
    with pytest.raises(TMError, match="working heads"):
        command_form(m.command("eat-b"))


def test_normalize_preserves_language():
    m = copy_erase_machine()
    m0 = normalize(m)
    for n in range(4):
        for u in itertools.product("ab", repeat=n):
            want = m.run_deterministic(u, 100).outcome == "accepted"
            assert m0.accepts_bounded(u, 400) == want, u


def test_normalize_unary_machine():
    m = unary_erase_machine()
    m0 = normalize(m)
    check_normal_form(m0)
    for u in ("", "a", "aa", "aaa"):
        assert m0.accepts_bounded(u, 200), u


def test_normalize_mirror_language():
    m0 = normalize(copy_erase_mirror())
    assert m0.accepts_bounded("ba", 400)
    assert not m0.accepts_bounded("ab", 400)


def _mentioned_states(cmd):
    out = set()
    for part in cmd.parts:
        out.add(part.before.state)
        out.add(part.after.state)
    return out


def test_block_states_are_private():
    """Auxiliary states minted for one letter block or one split chain
    never leak into another family's commands."""
    m0 = normalize(copy_erase_machine())
    original = {"s", "t", "f", "u", "v"}
    owners: dict[str, set[str]] = {}
    for cmd in m0.commands:
        if cmd.sign < 0:
            continue
        for st in _mentioned_states(cmd):
            owners.setdefault(st, set()).add(cmd.name)
    for st, names in owners.items():
        if st in original or st in {"in0", "ld0", "ld1", "ld2", "cp0", "wk1"}:
            continue
        if st.startswith("fn"):
            continue
        if ":" in st and not st.startswith(tuple(f"{c}:" for c in ("eat-b", "to-a", "eat-a", "finish", "empty"))):
            letter = st.rsplit(":", 1)[1] if "&" not in st else st.rsplit("&", 1)[1]
            assert all(nm.endswith(f":{letter}") for nm in names), (st, names)
        elif "&" in st:
            letter = st.rsplit("&", 1)[1]
            assert all(nm.endswith(f":{letter}") for nm in names), (st, names)
        else:
            base = st.rsplit(":", 1)[0]
            assert all(nm.startswith(base + "/") for nm in names), (st, names)


def test_no_reduced_return():
    """Bounded search: no nonempty reduced history leads back to its
    own start configuration."""
    m0 = normalize(copy_erase_machine())
    hist = m0.search_accept(m0.input_config("ab"), 60)
    assert hist is not None
    configs = m0.run_by_names(m0.input_config("ab"), hist)
    samples = [configs[0], configs[len(configs) // 2], configs[-1]]
    for start in samples:
        stack = [(start, None, 0)]
        while stack:
            cfg, last, depth = stack.pop()
            if depth == 8:
                continue
            for cmd in m0.commands:
                if last is not None and cmd.name == (
                    last[:-3] if last.endswith("^-1") else last + "^-1"
                ):
                    continue
                got = m0.apply_command(cfg, cmd)
                if got is None:
                    continue
                assert got != start, f"returned to start in {depth + 1} steps via {cmd.name}"
                stack.append((got, cmd.name, depth + 1))


def test_json_roundtrip():
    m = copy_erase_machine()
    m2 = TMachine.from_dict(m.to_dict())
    assert [c.text() for c in m2.commands] == [c.text() for c in m.commands]
    assert m2.run_deterministic("aabb", 100).outcome == "accepted"
    m0 = normalize(m)
    m3 = TMachine.from_dict(m0.to_dict())
    assert [c.text() for c in m3.commands] == [c.text() for c in m0.commands]


def test_nondeterministic_input_rejected_by_normalize():
    m = copy_erase_machine()
    bad = TMachine(
        m.input_alphabet,
        m.tape_alphabets,
        m.state_parts,
        list(m.commands) + [TMCommand("dup", m.command("eat-b").parts)],
        m.start,
        m.accept,
    )
    with pytest.raises(TMError, match="overlap"):
        normalize(bad)
