"""Encoding chain tests: primitive copy machines, block machines, the
translator, and the circular main machine, all on the two-letter
copy-erase fixture."""

import functools
import random

import pytest

from kampen.aperiodic import f_encode, make_maps
from kampen.fixtures import copy_erase_mirror
from kampen.smachine import AdmissibleWord, SMError
from kampen.turing import normalize
from kampen.words import Alphabet, ReducedWord
from kampen.encoder import (
    EncodeError,
    EncoderContext,
    F_inverse,
    F_map,
    build_M1,
    build_M_theta,
    build_T,
    build_Z,
    build_Z_phi,
    build_main,
    canonical_block,
    decode_computation,
    encode_computation,
    main_history,
    sigma_accept,
    sigma_start,
    sigma_word,
    t_history,
    t_input,
)


@functools.lru_cache(maxsize=None)
def ctx():
    return EncoderContext(normalize(copy_erase_mirror()))


@functools.lru_cache(maxsize=None)
def m1():
    return build_M1(ctx())


@functools.lru_cache(maxsize=None)
def accepting(text):
    tm = ctx().tm
    cfg = tm.input_config(text)
    hist = tm.search_accept(cfg, 80)
    assert hist is not None
    return cfg, hist


def z_word(m, letters, index, pp_letters=()):
    ap, app = m.hardware.slots[1], m.hardware.slots[2]
    return AdmissibleWord(
        m.hardware,
        ((0, 0, 1), (1, index, 1), (2, 0, 1)),
        (ReducedWord(ap, letters), ReducedWord(app, pp_letters)),
    )


# -- primitive copy machines ----------------------------------------------


def fresh_pair():
    return Alphabet(("x'", "y'"), tag="zp"), Alphabet(("x''", "y''"), tag="zpp")


def test_z_copy_roundtrip():
    ap, app = fresh_pair()
    m = build_Z("both", ap, app)
    w = z_word(m, (1, 2), 0)
    mid = m.run(w, ["xi1(b)", "xi1(a)", "xi2"], collect=False)
    # after the left pass the content sits mirrored into the second sector
    assert mid == z_word(m, (), 1, pp_letters=(1, 2))
    end = m.run(mid, ["xi3(a)", "xi3(b)", "xi4"], collect=False)
    assert end == z_word(m, (1, 2), 2)


def test_z_lock_blocks_turn():
    ap, app = fresh_pair()
    m = build_Z("left", ap, app)
    w = z_word(m, (1,), 0)
    assert not m.applicable(w, m.rule("xi2"))
    drained = m.apply(w, m.rule("xi1(a)"))
    assert m.applicable(drained, m.rule("xi2"))


def test_z_wrong_application_leaves_garbage_but_runs():
    ap, app = fresh_pair()
    m = build_Z("left", ap, app)
    w = z_word(m, (1,), 0)
    wrong = m.apply(w, m.rule("xi1(b)"))
    assert wrong.sectors[0].letters == (1, -2)
    assert wrong.sectors[1].letters == (2,)
    # the head can never drain the sector now: xi2 stays locked out
    assert not m.applicable(wrong, m.rule("xi2"))


def test_z_projection_invariant():
    ap, app = fresh_pair()
    m = build_Z("both", ap, app)
    rng = random.Random(4021)
    for trial in range(15):
        w = z_word(m, tuple(rng.choice((1, 2)) for _ in range(rng.randrange(4))), 0)
        inv = (w.sectors[0] * w.sectors[1].translate(ap)).letters
        last = None
        for _ in range(20):
            steps = m.successors(w, skip=last)
            if not steps:
                break
            last, w = steps[rng.randrange(len(steps))]
            assert (w.sectors[0] * w.sectors[1].translate(ap)).letters == inv


def test_z_phi_roundtrip():
    ap, app = fresh_pair()
    pmap = make_maps(2)[0]
    m = build_Z_phi(pmap, "both", ap, app)
    mp = pmap.translated(ap)
    for letters in ((1,), (1, 2), (2, 2, 1)):
        w = z_word(m, letters, 0)
        names = [f"xi1'({'ab'[c - 1]})" for c in reversed(letters)]
        names.append("xi2'")
        names.extend(f"xi3'({'ab'[c - 1]})" for c in letters)
        names.append("xi4'")
        end = m.run(w, names, collect=False)
        image = mp.phi(ReducedWord(ap, letters))
        assert end == z_word(m, image.letters, 2)


def test_z_phi_lock_blocks_early_turn():
    ap, app = fresh_pair()
    pmap = make_maps(2)[0]
    m = build_Z_phi(pmap, "left", ap, app)
    w = z_word(m, (1, 2), 0)
    assert not m.applicable(w, m.rule("xi2'"))


def test_z_phi_unique_canonical_path():
    """Exactly one positive-rule history of minimal length connects the
    start to the image word."""
    ap, app = fresh_pair()
    pmap = make_maps(2)[0]
    m = build_Z_phi(pmap, "both", ap, app)
    mp = pmap.translated(ap)
    start = z_word(m, (1, 2), 0)
    target = z_word(m, mp.phi(ReducedWord(ap, (1, 2))).letters, 2)
    positives = [r for r in m.rules]
    hits = []

    def dfs(w, path):
        if len(path) > 6:
            return
        if w == target:
            hits.append(tuple(path))
            return
        for r in positives:
            if m.applicable(w, r):
                path.append(r.name)
                dfs(m.apply(w, r), path)
                path.pop()

    dfs(start, [])
    assert hits == [(
        "xi1'(b)", "xi1'(a)", "xi2'", "xi3'(a)", "xi3'(b)", "xi4'",
    )]


def test_z_phi_no_return():
    """No nonempty reduced computation of length <= 8 comes back to its
    start word."""
    ap, app = fresh_pair()
    pmap = make_maps(2)[0]
    m = build_Z_phi(pmap, "both", ap, app)
    start = z_word(m, (1, 2), 0)

    def dfs(w, last, depth):
        if depth == 0:
            return
        for r, nxt in m.successors(w, skip=last):
            assert nxt != start
            dfs(nxt, r, depth - 1)

    dfs(start, None, 8)


# -- block machines over the fixture --------------------------------------


def test_m1_rule_count():
    c = ctx()
    m = m1()
    per_form = {}
    for fam in c.families.values():
        k = c.k
        if fam.form == "check":
            n = 2 + 6 * (k - 1) + 1
        else:
            n = 2 + 6 * k
        per_form[fam.name] = n
    assert len(m.rules) == sum(per_form.values())
    forms = {f.form for f in c.families.values()}
    assert forms == {"insert", "state", "check"}


def test_block_commutes_with_F_per_form():
    c = ctx()
    m = m1()
    cfg, hist = accepting("ba")
    configs = c.tm.run_by_names(cfg, hist)
    seen_forms = set()
    for at, nm in zip(configs, hist):
        cmd = c.tm.command(nm)
        if cmd.sign < 0:
            continue
        fam = c.families.get(cmd.name) or c.families[cmd.name + "!"]
        if fam.form in seen_forms or fam.icmd is not cmd:
            continue
        seen_forms.add(fam.form)
        block = canonical_block(c, fam.name, c.config_contents(at))
        end = m.run(F_map(c, at), block, collect=False)
        assert end == F_map(c, c.tm.apply_command(at, fam.icmd))
    assert {"insert", "state", "check"} <= seen_forms


def test_build_M_theta_accepts_name_or_command():
    c = ctx()
    nm = c.family_order[0]
    by_name = build_M_theta(c, nm)
    by_cmd = build_M_theta(c, c.families[nm].cmd)
    assert [r.name for r in by_name] == [r.name for r in by_cmd]


def test_check_block_requires_empty_sector():
    c = ctx()
    checks = [f for f in c.families.values() if f.form == "check"]
    assert checks
    fam = checks[0]
    contents = [()] * c.k
    contents[fam.tape] = (1,)
    with pytest.raises(EncodeError):
        canonical_block(c, fam.name, contents)


def test_f_map_roundtrip_and_injectivity():
    c = ctx()
    words = {}
    for text in ("", "ba"):
        cfg, hist = accepting(text)
        for conf in c.tm.run_by_names(cfg, hist):
            w = F_map(c, conf)
            assert F_inverse(c, w) == conf
            prev = words.get(w)
            assert prev is None or prev == conf
            words[w] = conf
    assert len(words) > 30


def test_f_inverse_rejects_indexed_and_residue_words():
    c = ctx()
    m = m1()
    start, hist = accepting("ba")
    cfg, fam = next(
        (conf, f)
        for conf in c.tm.run_by_names(start, hist)
        for f in c.families.values()
        if f.form == "insert" and c.tm.apply_command(conf, f.icmd) is not None
    )
    block = canonical_block(c, fam.name, c.config_contents(cfg))
    mid = m.run(F_map(c, cfg), block[:2], collect=False)
    with pytest.raises(EncodeError):
        F_inverse(c, mid)
    bad = AdmissibleWord(
        c.m1_hardware,
        F_map(c, cfg).states,
        (ReducedWord(c.Yp[0], (1,)),) + F_map(c, cfg).sectors[1:],
    )
    with pytest.raises(EncodeError) as err:
        F_inverse(c, bad)
    assert "f-image" in str(err.value)


# -- encode / decode -------------------------------------------------------


def test_encode_decode_roundtrip():
    c = ctx()
    m = m1()
    for text in ("", "ba"):
        cfg, hist = accepting(text)
        run = encode_computation(c, cfg, hist)
        assert m.run(run.start, run.names, collect=False) == run.end
        dec = decode_computation(c, run.start, run.names)
        assert dec.history == list(hist)
        assert dec.configs[-1] == c.tm.run_by_names(cfg, hist)[-1]
        assert all(d == "forward" or fam.endswith("!")
                   for fam, d, _, _ in dec.segments
                   for fam, d in [(fam, d)])


def test_encode_handles_backtracking_trace():
    c = ctx()
    m = m1()
    cfg, hist = accepting("ba")
    zig = [hist[0], hist[0] + "^-1"] + list(hist)
    run = encode_computation(c, cfg, zig)
    assert m.run(run.start, run.names, collect=False) == run.end
    dec = decode_computation(c, run.start, run.names)
    assert dec.history == zig
    dirs = [d for _, d, _, _ in dec.segments[:2]]
    assert "backward" in dirs


def test_decoded_history_is_reduced():
    c = ctx()
    cfg, hist = accepting("ba")
    dec = decode_computation(c, F_map(c, cfg), encode_computation(c, cfg, hist).names)
    for x, y in zip(dec.history, dec.history[1:]):
        assert x != y + "^-1" and y != x + "^-1"


def test_decode_rejects_corrupt_traces():
    c = ctx()
    cfg, hist = accepting("ba")
    run = encode_computation(c, cfg, hist)

    with pytest.raises(EncodeError) as err:
        decode_computation(c, run.start, run.names[1:])
    assert "boundary" in str(err.value)

    with pytest.raises(EncodeError) as err:
        decode_computation(c, run.start, run.names[:20])
    assert err.value.index is not None

    mangled = list(run.names)
    at = next(i for i in range(1, len(mangled)) if mangled[i] != mangled[i - 1])
    mangled[at] = mangled[at - 1]
    with pytest.raises(EncodeError) as err:
        decode_computation(c, run.start, mangled)
    assert err.value.segment is not None

    with pytest.raises(EncodeError):
        decode_computation(c, run.start, ["no-such-rule"])


def test_m1_no_return_shadow():
    """Reduced computations from an f-image never come back to it."""
    c = ctx()
    m = m1()
    cfg, _ = accepting("ba")
    start = F_map(c, cfg)

    def dfs(w, last, depth):
        if depth == 0:
            return
        for r, nxt in m.successors(w, skip=last):
            assert nxt != start
            dfs(nxt, r, depth - 1)

    dfs(start, None, 5)


# -- translator ------------------------------------------------------------


def test_translator_deposits_mirror_image():
    c = ctx()
    t = build_T(c)
    assert len(t.rules) == 8 * len(c.input_ab)
    for text in ("", "a", "ab", "ba", "aabb"):
        u = ReducedWord.from_names(c.input_ab, text)
        names, content = t_history(c, u)
        end = t.run(t_input(c, u), names, collect=False)
        mirror = ReducedWord(c.tape_ab[0], tuple(reversed(u.letters)))
        image = f_encode(c.maps_p[0], mirror)
        assert content == image
        expected = AdmissibleWord(
            t.hardware,
            ((0, 0, 1), (1, 0, 1), (2, 0, 1), (3, 0, 1)),
            (
                ReducedWord.empty(c.input_ab),
                image,
                ReducedWord.empty(c.Ypp[0]),
            ),
        )
        assert end == expected


def test_translator_consumes_last_letter_first():
    c = ctx()
    u = ReducedWord.from_names(c.input_ab, "ab")
    names, _ = t_history(c, u)
    assert names[0] == "T:b/set"


def test_translator_rejects_nonpositive_input():
    c = ctx()
    with pytest.raises(EncodeError):
        t_history(c, ReducedWord.from_names(c.input_ab, ["a", "~b"]))
    with pytest.raises(EncodeError):
        t_history(c, ReducedWord.from_names(c.Yp[0], "a'(1)".split()))


def test_translator_run_matches_stepwise():
    c = ctx()
    t = build_T(c)
    u = ReducedWord.from_names(c.input_ab, "ab")
    names, _ = t_history(c, u)
    w = t_input(c, u)
    trail = t.run(w, names)
    step = w
    for nm, expect in zip(names, trail[1:]):
        step = t.apply(step, t.rule(nm))
        assert step == expect


# -- the main machine ------------------------------------------------------


def test_sigma_words_are_standard():
    c = ctx()
    assert sigma_word(c, "") == sigma_start(c)
    for w in (sigma_start(c), sigma_word(c, "ab"), sigma_accept(c)):
        assert w.is_standard()
    assert sigma_start(c) != sigma_accept(c)


def test_x43_fires_only_after_translation():
    c = ctx()
    m = build_main(c)
    x43 = m.rule("x43")
    u = ReducedWord.from_names(c.input_ab, "ab")
    w = sigma_word(c, u)
    assert not m.applicable(w, x43)
    names, _ = t_history(c, u)
    after_t = m.run(w, names, collect=False)
    assert m.applicable(after_t, x43)
    working = m.apply(after_t, x43)
    assert not m.applicable(working, x43)
    for r in m.rules:
        if r.name.startswith("T:"):
            assert not m.applicable(working, r)


def test_main_copies_stay_in_sync():
    c = ctx()
    m = build_main(c)
    u = ReducedWord.from_names(c.input_ab, "ab")
    names, content = t_history(c, u)
    w = m.run(sigma_word(c, u), names, collect=False)
    k = c.k
    seen = []
    for i, s in enumerate(w.sectors):
        if s:
            seen.append((i, s.letters))
    # the input sector is drained; each copy holds the same image
    assert len(seen) == c.copies - 1
    assert len({letters for _, letters in seen}) == 1
    assert seen[0][1] == content.letters


def test_main_accepting_runs():
    c = ctx()
    m = build_main(c)
    for text in ("", "ab"):
        hist = main_history(c, text)
        end = m.run(sigma_word(c, text), hist, collect=False)
        assert end == sigma_accept(c)


def test_main_history_rejects_unaccepted_input():
    c = ctx()
    with pytest.raises(EncodeError):
        main_history(c, "ba", fuel=60)


def test_main_machine_shape():
    c = ctx()
    m = build_main(c)
    k, L = c.k, c.copies
    assert len(m.hardware.parts) == L + (L - 1) * (2 * k + 1)
    assert m.hardware.circular
    t = build_T(c)
    names = {r.name for r in m.rules}
    assert {r.name for r in m1().rules} <= names
    assert {r.name for r in t.rules} <= names
    assert "x43" in names
    assert len(names) == len(m1().rules) + len(t.rules) + 1
