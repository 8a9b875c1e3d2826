"""Command line front end.

One executable wires up the word algebra, the machine constructions,
the encoders, and the presentation exports.  Every subcommand runs
out of the box on the built-in two-letter copy-erase fixture; machine
JSON files switch the input where it makes sense.

Search bounds honour the KAMPEN_SEARCH_DEPTH environment variable
when no --depth flag is given.  Exit status is 0 when the requested
action and every requested check succeed, 1 on failure, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import functools
import json
import os
import random
import sys
import time
from pathlib import Path

from .aperiodic import (
    BASE,
    check_property_A,
    f_decode,
    f_encode,
    generate_W,
    make_maps,
)
from .encoder import (
    EncodeError,
    EncoderContext,
    F_map,
    build_M1,
    build_T,
    build_Z,
    build_main,
    canonical_block,
    decode_computation,
    encode_computation,
    main_history,
    sigma_accept,
    sigma_word,
    t_history,
    t_input,
)
from .fixtures import copy_erase_mirror
from .presentation import (
    PresentationError,
    build_trapezium,
    check_trapezium,
    emit_presentation,
    trapezium_svg,
    trapezium_text,
)
from .smachine import AdmissibleWord, SMachine, SMError, parse_admissible
from .turing import TMachine, TMConfig, TMError, normalize
from .words import Alphabet, ReducedWord, WordError, parse_word

ENV_DEPTH = "KAMPEN_SEARCH_DEPTH"
ENV_BUDGET = "KAMPEN_SEARCH_BUDGET"
DEFAULT_SEED = 2026


class CLIError(Exception):
    """User-facing failure carrying a one-line message."""


# -- shared plumbing ---------------------------------------------------------


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(args, payload: dict, lines) -> None:
    if args.format == "json":
        sys.stdout.write(_json_text(payload))
    else:
        for ln in lines:
            print(ln)


def _read_json(path):
    p = Path(path)
    if not p.is_file():
        raise CLIError(f"no such file: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise CLIError(f"{path} is not valid JSON: {e}") from None


def _write(path, text: str) -> None:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _bound(flag_value, fallback: int) -> int:
    """A --depth flag beats KAMPEN_SEARCH_DEPTH beats the default."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(ENV_DEPTH)
    if env:
        try:
            return int(env)
        except ValueError:
            raise CLIError(f"{ENV_DEPTH} must be an integer, got {env!r}") from None
    return fallback


@functools.lru_cache(maxsize=None)
def _fixture_ctx_cached(copies: int) -> EncoderContext:
    return EncoderContext(normalize(copy_erase_mirror()), copies=copies)


def _fixture_ctx(copies: int = 3) -> EncoderContext:
    # canonicalize the cache key so default and explicit calls share
    # one context (alphabet identity matters downstream)
    return _fixture_ctx_cached(copies)


@functools.lru_cache(maxsize=None)
def _machine(kind: str, copies: int = 3) -> SMachine:
    ctx = _fixture_ctx(copies)
    if kind == "m1":
        return build_M1(ctx)
    if kind == "T":
        return build_T(ctx)
    return build_main(ctx)


@functools.lru_cache(maxsize=None)
def _presentation(kind: str, copies: int = 3, hubs: bool = True):
    ctx = _fixture_ctx(copies)
    m = _machine(kind, copies)
    if kind == "main" and hubs:
        return emit_presentation(m, hubs=(sigma_accept(ctx), sigma_word(ctx, "")))
    return emit_presentation(m)


def _load_tm(path) -> TMachine:
    if path is None:
        return copy_erase_mirror()
    return TMachine.from_dict(_read_json(path))


def _load_sm(spec: str, copies: int = 3) -> SMachine:
    if spec in ("m1", "main", "T"):
        return _machine(spec, copies)
    return SMachine.from_dict(_read_json(spec))


def _config_from(tm: TMachine, obj) -> TMConfig:
    if isinstance(obj, dict) and "input" in obj:
        return tm.input_config(tuple(obj["input"]))
    if isinstance(obj, dict) and "tapes" in obj:
        tapes = tuple((tuple(l), q, tuple(r)) for l, q, r in obj["tapes"])
        return TMConfig(tapes)
    raise CLIError('config object needs an "input" string or a "tapes" list')


def _names_from(obj) -> list[str]:
    names = obj.get("names") if isinstance(obj, dict) else obj
    if not isinstance(names, list) or not all(isinstance(x, str) for x in names):
        raise CLIError('history must be a JSON list of names or {"names": [...]}')
    return names


def _word_key(w: AdmissibleWord):
    return (w.states, tuple(s.letters for s in w.sectors))


# -- words -------------------------------------------------------------------


def cmd_words(args) -> int:
    if args.action == "gen-W":
        ws = generate_W(args.count)
        _emit(args, {"count": len(ws), "words": [str(w) for w in ws]},
              [str(w) for w in ws])
        return 0
    if args.action == "check-A":
        u = parse_word(BASE, args.u)
        v = parse_word(BASE, args.v)
        ok = check_property_A(u, v)
        _emit(args, {"u": str(u), "v": str(v), "compatible": ok},
              ["pass" if ok else "fail"])
        return 0 if ok else 1
    ctx = _fixture_ctx()
    j = args.tape
    if not (1 <= j <= ctx.k):
        raise CLIError(f"tape index out of range (1..{ctx.k})")
    maps = ctx.maps_p[j - 1]
    if args.action == "f-encode":
        u = parse_word(ctx.tape_ab[j - 1], args.word)
        w = f_encode(maps, u)
        _emit(args, {"tape": j, "input": str(u), "image": str(w)}, [str(w)])
        return 0
    w = parse_word(ctx.Yp[j - 1], args.word)
    u = f_decode(maps, w, ctx.tape_ab[j - 1])
    if u is None:
        _emit(args, {"tape": j, "input": str(w), "preimage": None},
              ["not an f-image"])
        return 1
    _emit(args, {"tape": j, "input": str(w), "preimage": str(u)}, [str(u)])
    return 0


# -- tm ----------------------------------------------------------------------


def cmd_tm(args) -> int:
    tm = _load_tm(args.machine)
    if args.action == "normalize":
        m0 = normalize(tm)
        counts = {
            "tapes": len(m0.tape_alphabets),
            "commands": len(m0.commands),
            "positive_commands": sum(1 for c in m0.commands if c.sign > 0),
            "states": sum(len(p) for p in m0.state_parts),
        }
        if args.out:
            _write(args.out, _json_text(m0.to_dict()))
        _emit(args, counts, [f"{k}: {v}" for k, v in counts.items()])
        return 0
    if args.action == "run":
        res = tm.run_deterministic(tuple(args.input), args.fuel)
        payload = {
            "outcome": res.outcome,
            "steps": len(res.history),
            "history": res.history,
            "final": res.configs[-1].text(),
        }
        _emit(args, payload, [
            f"outcome: {res.outcome}",
            f"steps: {len(res.history)}",
            f"final: {res.configs[-1].text()}",
        ])
        return 0 if res.outcome == "accepted" else 1
    depth = _bound(args.depth, 60)
    hist = tm.search_accept(tm.input_config(tuple(args.input)), depth)
    if hist is None:
        _emit(args, {"accepted": False, "depth": depth},
              [f"not accepted within {depth} steps"])
        return 1
    _emit(args, {"accepted": True, "depth": depth, "history": hist},
          [f"accepted in {len(hist)} steps"] + hist)
    return 0


# -- sm ----------------------------------------------------------------------


def cmd_sm(args) -> int:
    m = _load_sm(args.machine, args.copies)
    hw = m.hardware
    if args.action == "validate":
        counts = {
            "parts": hw.s,
            "slots": len(hw.slots),
            "circular": hw.circular,
            "rules": len(m.rules),
        }
        _emit(args, counts, [f"{k}: {v}" for k, v in counts.items()])
        return 0
    if args.action == "apply":
        w = parse_admissible(hw, args.word)
        r = m.rule(args.rule)
        got = m.try_apply(w, r)
        if got is None:
            raise CLIError(f"rule {args.rule} is not applicable to {args.word}")
        _emit(args, {"word": str(got)}, [str(got)])
        return 0
    if args.action == "run":
        w = parse_admissible(hw, args.word)
        names = list(args.names)
        if args.history:
            names = _names_from(_read_json(args.history))
        if args.trail:
            trail = m.run(w, names)
            _emit(args, {"trail": [str(x) for x in trail]},
                  [str(x) for x in trail])
        else:
            end = m.run(w, names, collect=False)
            _emit(args, {"word": str(end)}, [str(end)])
        return 0
    # search: breadth-first over reduced histories
    start = parse_admissible(hw, getattr(args, "from"))
    target = parse_admissible(hw, args.to)
    depth = _bound(args.depth, 8)
    hist = _sm_search(m, start, target, depth)
    if hist is None:
        _emit(args, {"found": False, "depth": depth},
              [f"not reachable within {depth} steps"])
        return 1
    _emit(args, {"found": True, "history": hist},
          [f"reached in {len(hist)} steps"] + hist)
    return 0


def _sm_search(m: SMachine, start, target, depth: int):
    if start == target:
        return []
    seen = {_word_key(start)}
    frontier = [(start, None)]
    came = {}
    for _ in range(depth):
        nxt = []
        for w, last in frontier:
            for r, got in m.successors(w, skip=last):
                key = _word_key(got)
                if key in seen:
                    continue
                seen.add(key)
                came[key] = (_word_key(w), r.name)
                if got == target:
                    out = []
                    cur = key
                    while cur in came:
                        cur, nm = came[cur]
                        out.append(nm)
                    return out[::-1]
                nxt.append((got, r))
        if not nxt:
            return None
        frontier = nxt
    return None


# -- encode ------------------------------------------------------------------


def cmd_encode(args) -> int:
    ctx = _fixture_ctx(args.copies)
    if args.action in ("m1", "main"):
        m = _machine(args.action, args.copies)
        counts = {"parts": m.hardware.s, "rules": len(m.rules),
                  "circular": m.hardware.circular}
        if args.out:
            _write(args.out, _json_text(m.to_dict()))
        _emit(args, counts, [f"{k}: {v}" for k, v in counts.items()])
        return 0
    if args.action == "F":
        cfg = _config_from(ctx.tm, _read_json(args.config))
        w = F_map(ctx, cfg)
        if args.out:
            _write(args.out, _json_text({"word": str(w)}))
        _emit(args, {"word": str(w)}, [str(w)])
        return 0
    if args.action == "run":
        obj = _read_json(args.history)
        cfg = _config_from(ctx.tm, obj)
        run = encode_computation(ctx, cfg, _names_from(obj))
        payload = {"start": str(run.start), "names": list(run.names),
                   "end": str(run.end)}
        if args.out:
            _write(args.out, _json_text(payload))
        _emit(args, payload, [
            f"steps: {len(run.names)}",
            f"start: {run.start}",
            f"end: {run.end}",
        ])
        return 0
    obj = _read_json(args.trace)
    if not isinstance(obj, dict) or "start" not in obj:
        raise CLIError('trace must be {"start": word, "names": [...]}')
    m1 = _machine("m1", args.copies)
    w = parse_admissible(m1.hardware, obj["start"])
    dec = decode_computation(ctx, w, _names_from(obj))
    payload = {
        "history": dec.history,
        "configs": [c.text() for c in dec.configs],
        "segments": [list(s) for s in dec.segments],
    }
    if args.out:
        _write(args.out, _json_text(payload))
    _emit(args, payload,
          [f"history: {len(dec.history)} steps"] + dec.history)
    return 0


# -- present -----------------------------------------------------------------


def _presentation_lines(pres) -> list[str]:
    return [".".join(pres.render(r.word.letters)) for r in pres.relators]


def cmd_present(args) -> int:
    pres = _presentation(args.machine, args.copies, not args.no_hubs)
    counts = pres.relator_counts()
    payload = {
        "generators": len(pres.generators),
        "theta_copies": pres.n_theta,
        "relators": counts,
        "distinct_relators": len(pres.relators),
    }
    if args.out:
        _write(args.out + ".txt", "\n".join(_presentation_lines(pres)) + "\n")
        _write(args.out + ".json", _json_text(pres.to_dict()))
    lines = [f"generators: {payload['generators']}",
             f"theta copies: {pres.n_theta}"]
    lines += [f"relators {k}: {v}" for k, v in sorted(counts.items())]
    lines.append(f"distinct relators: {len(pres.relators)}")
    _emit(args, payload, lines)
    return 0


# -- diagram -----------------------------------------------------------------


def cmd_diagram(args) -> int:
    ctx = _fixture_ctx(args.copies)
    if args.machine == "main":
        pres = _presentation("main", args.copies)
        start = sigma_word(ctx, args.word)
        names = main_history(ctx, args.word, fuel=args.fuel)
    else:
        pres = _presentation("m1", args.copies)
        cfg = ctx.tm.input_config(tuple(args.word))
        hist = ctx.tm.search_accept(cfg, _bound(args.depth, 60))
        if hist is None:
            raise CLIError(f"fixture machine does not accept {args.word!r}")
        run = encode_computation(ctx, cfg, hist)
        start, names = run.start, run.names
    trap = build_trapezium(pres, start, names)
    verdict = check_trapezium(trap)
    payload = {
        "machine": args.machine,
        "rows": len(names),
        "ok": verdict is None,
        "violation": None if verdict is None else str(verdict),
    }
    lines = [f"rows: {len(names)}",
             "check: ok" if verdict is None else f"check: {verdict}"]
    if args.out:
        _write(args.out + ".json", _json_text(trap.to_dict(args.max_cells)))
        _write(args.out + ".svg", trapezium_svg(trap, args.max_cells))
    if args.text:
        print(trapezium_text(trap, args.max_cells))
    _emit(args, payload, lines)
    return 0 if verdict is None else 1


# -- verify ------------------------------------------------------------------


class _Bounds:
    def __init__(self, seed, depth, count, budget=None):
        self.seed = seed
        self.depth = depth
        self.count = count
        self.budget = budget

    def rng(self):
        return random.Random(self.seed)


def _all_reduced(alphabet, max_len):
    out = [ReducedWord.empty(alphabet)]
    frontier = [()]
    letters = [i + 1 for i in range(len(alphabet))]
    letters += [-x for x in letters]
    for _ in range(max_len):
        nxt = []
        for path in frontier:
            for x in letters:
                if path and path[-1] == -x:
                    continue
                p = path + (x,)
                nxt.append(p)
                out.append(ReducedWord(alphabet, p, _reduced=True))
        frontier = nxt
    return out


def _all_positive(alphabet, max_len):
    out = [ReducedWord.empty(alphabet)]
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for path in frontier:
            for x in range(1, len(alphabet) + 1):
                p = path + (x,)
                nxt.append(p)
                out.append(ReducedWord(alphabet, p, _reduced=True))
        frontier = nxt
    return out


def _suite_property_A(b: _Bounds):
    """Pairwise compatibility of the generated stock plus injectivity
    and image-disjointness of the letter substitutions."""
    count = b.count or 16
    depth = b.depth or 3
    words = generate_W(count)
    checks = 0
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            if not check_property_A(words[i], words[j]):
                return False, checks, f"pair {words[i]}/{words[j]} failed"
            checks += 1
    maps = make_maps(2)
    sweep = _all_reduced(BASE, depth)
    images = []
    for pm in maps:
        seen = {}
        for u in sweep:
            img = pm.phi(u).letters
            if img in seen:
                return False, checks, f"phi collision at {u}"
            seen[img] = u
            checks += 1
        images.append(set(seen))
    overlap = images[0] & images[1]
    if overlap:
        return False, checks, "phi images of distinct maps overlap"
    return True, checks, f"{count} words, substitution sweep depth {depth}"


def _suite_lemma_T(b: _Bounds):
    """The translator turns every short positive input into the encoded
    mirror image, and the letter-map decoding inverts it."""
    ctx = _fixture_ctx()
    t = _machine("T")
    depth = b.depth or 3
    maps = ctx.maps_p[0]
    checks = 0
    for u in _all_positive(ctx.input_ab, depth):
        names, content = t_history(ctx, u)
        end = t.run(t_input(ctx, u), names, collect=False)
        mirror = ReducedWord(ctx.tape_ab[0], tuple(reversed(u.letters)))
        image = f_encode(maps, mirror)
        expected = AdmissibleWord(
            t.hardware,
            ((0, 0, 1), (1, 0, 1), (2, 0, 1), (3, 0, 1)),
            (ReducedWord.empty(ctx.input_ab), image,
             ReducedWord.empty(ctx.Ypp[0])),
        )
        if end != expected or content != image:
            return False, checks, f"translation of {u} diverged"
        if f_decode(maps, content, ctx.tape_ab[0]) != mirror:
            return False, checks, f"decode failed on {u}"
        checks += 1
    return True, checks, f"all positive inputs up to length {depth}"


def _iter_traces(tm: TMachine, cfg, depth: int):
    """All reduced command-name sequences of length 1..depth from cfg."""
    stack = [(cfg, [], None)]
    while stack:
        at, names, last = stack.pop()
        if names:
            yield names
        if len(names) == depth:
            continue
        for cmd in tm.applicable(at):
            if last is not None and cmd.name == _tm_inv(last):
                continue
            nxt = tm.apply_command(at, cmd)
            stack.append((nxt, names + [cmd.name], cmd.name))


def _tm_inv(name: str) -> str:
    return name[:-3] if name.endswith("^-1") else name + "^-1"


def _suite_tuda_suda(b: _Bounds):
    """Encoding a machine trace and decoding it back is lossless, and
    both endpoints are f-images of the traced configurations."""
    ctx = _fixture_ctx()
    m1 = _machine("m1")
    depth = b.depth or 3
    checks = 0
    for text in ("", "ba"):
        cfg = ctx.tm.input_config(tuple(text))
        for names in _iter_traces(ctx.tm, cfg, depth):
            run = encode_computation(ctx, cfg, names)
            final = ctx.tm.run_by_names(cfg, names)[-1]
            if run.start != F_map(ctx, cfg) or run.end != F_map(ctx, final):
                return False, checks, f"endpoints diverged on {names}"
            if m1.run(run.start, run.names, collect=False) != run.end:
                return False, checks, f"replay diverged on {names}"
            dec = decode_computation(ctx, run.start, run.names)
            if dec.history != list(names):
                return False, checks, f"history diverged on {names}"
            if dec.configs[-1] != final:
                return False, checks, f"final config diverged on {names}"
            checks += 1
    return True, checks, f"all traces up to length {depth} from 2 starts"


def _suite_pos(b: _Bounds):
    """No nonempty reduced computation returns to its starting f-image.

    Breadth-first over reduced histories, one level per history length,
    deduplicating on (word, last rule).  The edge budget caps the sweep;
    hitting it truncates the level and is reported, not failed."""
    ctx = _fixture_ctx()
    m1 = _machine("m1")
    depth = b.depth or 6
    count = b.count or 5
    budget = b.budget or 300_000
    starts = []
    seen = set()
    for text in ("", "ba"):
        cfg = ctx.tm.input_config(tuple(text))
        hist = ctx.tm.search_accept(cfg, 80)
        for at in ctx.tm.run_by_names(cfg, hist):
            w = F_map(ctx, at)
            key = _word_key(w)
            if key not in seen:
                seen.add(key)
                starts.append(w)
    starts = starts[:count]
    per_start = max(1, budget // max(1, len(starts)))
    edges = 0
    truncated = False
    for start in starts:
        spent = 0
        visited = {(_word_key(start), None)}
        frontier = [(start, None)]
        for _ in range(depth):
            if spent >= per_start:
                truncated = True
                break
            nxt = []
            for w, last in frontier:
                for r, got in m1.successors(w, skip=last):
                    spent += 1
                    if got == start:
                        return False, edges + spent, f"returned to start via {r.name}"
                    key = (_word_key(got), r.name)
                    if key in visited:
                        continue
                    visited.add(key)
                    nxt.append((got, r))
                if spent >= per_start:
                    truncated = True
                    break
            if not nxt:
                break
            frontier = nxt
        edges += spent
    note = "budget-truncated" if truncated else "closed"
    return True, edges, (f"{len(starts)} starts, depth {depth}, "
                         f"{edges} edges, {note}")


def _suite_canon(b: _Bounds):
    """Per-command canonical rule blocks commute with the f-image map
    along accepting runs."""
    ctx = _fixture_ctx()
    m1 = _machine("m1")
    checks = 0
    forms = set()
    for text in ("", "ba"):
        cfg = ctx.tm.input_config(tuple(text))
        hist = ctx.tm.search_accept(cfg, 80)
        configs = ctx.tm.run_by_names(cfg, hist)
        for at, nm in zip(configs, hist):
            cmd = ctx.tm.command(nm)
            if cmd.sign < 0:
                continue
            fam = ctx.families.get(cmd.name) or ctx.families[cmd.name + "!"]
            if fam.icmd is not cmd:
                continue
            block = canonical_block(ctx, fam.name, ctx.config_contents(at))
            end = m1.run(F_map(ctx, at), block, collect=False)
            if end != F_map(ctx, ctx.tm.apply_command(at, fam.icmd)):
                return False, checks, f"block for {fam.name} diverged"
            forms.add(fam.form)
            checks += 1
    if not {"insert", "state", "check"} <= forms:
        return False, checks, f"only saw forms {sorted(forms)}"
    return True, checks, f"{checks} blocks across forms {sorted(forms)}"


def _suite_projection(b: _Bounds):
    """Random primitive-copy-machine walks preserve the combined
    content projection of their two sectors."""
    rng = b.rng()
    count = b.count or 15
    depth = b.depth or 20
    ap = Alphabet(("x'", "y'"), tag="zp")
    app = Alphabet(("x''", "y''"), tag="zpp")
    m = build_Z("both", ap, app)
    checks = 0
    for _ in range(count):
        letters = tuple(rng.choice((1, 2)) for _ in range(rng.randrange(4)))
        w = AdmissibleWord(
            m.hardware,
            ((0, 0, 1), (1, 0, 1), (2, 0, 1)),
            (ReducedWord(ap, letters), ReducedWord(app, ())),
        )
        inv = (w.sectors[0] * w.sectors[1].translate(ap)).letters
        last = None
        for _ in range(depth):
            steps = m.successors(w, skip=last)
            if not steps:
                break
            last, w = steps[rng.randrange(len(steps))]
            if (w.sectors[0] * w.sectors[1].translate(ap)).letters != inv:
                return False, checks, "projection drifted"
            checks += 1
    return True, checks, f"{count} walks, {checks} steps"


def _suite_qqiv(b: _Bounds):
    """Rules that lock a sector never apply across a mirrored state
    pair enclosing that sector."""
    rng = b.rng()
    count = b.count or 40
    m1 = _machine("m1")
    hw = m1.hardware
    locking = [r for r in m1.rules if r.locks()]
    rng.shuffle(locking)
    checks = 0
    for r in locking[:count]:
        for j in r.locks():
            slot = hw.slots[j]
            if not len(slot):
                continue
            content = ReducedWord(slot, (rng.randrange(1, len(slot) + 1),))
            layouts = []
            if j >= 1:
                q = r.parts[j - 1].q_from
                layouts.append(((j - 1, q, 1), (j - 1, q, -1)))
            if j < hw.s:
                q = r.parts[j].q_from
                layouts.append(((j, q, -1), (j, q, 1)))
            for states in layouts:
                try:
                    w = AdmissibleWord(hw, states, (content,))
                except SMError:
                    checks += 1
                    continue
                if m1.applicable(w, r):
                    return False, checks, f"{r.name} applied across a mirror pair"
                checks += 1
    return True, checks, f"{min(count, len(locking))} locking rules probed"


_SUITES = {
    "canon": (_suite_canon, "canonical rule blocks commute with the f-image map"),
    "lemma-T": (_suite_lemma_T, "translator output matches the letter-map encoding"),
    "pos": (_suite_pos, "no reduced computation returns to its f-image start"),
    "projection": (_suite_projection, "copy-machine walks preserve content"),
    "property-A": (_suite_property_A, "word stock aperiodicity and map injectivity"),
    "qqiv": (_suite_qqiv, "locked sectors reject mirrored state pairs"),
    "tuda-suda": (_suite_tuda_suda, "trace encode/decode round trip"),
}


def run_suite(name: str, *, seed: int = DEFAULT_SEED, depth=None, count=None,
              budget=None) -> dict:
    """Run one verification suite and return its report entry."""
    if name not in _SUITES:
        known = ", ".join(sorted(_SUITES))
        raise CLIError(f"unknown suite {name!r}; available: {known}")
    fn, _ = _SUITES[name]
    t0 = time.perf_counter()
    passed, checks, details = fn(_Bounds(seed, depth, count, budget))
    return {
        "suite": name,
        "passed": passed,
        "checks": checks,
        "details": details,
        "seconds": round(time.perf_counter() - t0, 3),
    }


def cmd_verify(args) -> int:
    names = args.suites or ["all"]
    if names == ["all"]:
        names = sorted(_SUITES)
    for nm in names:
        if nm not in _SUITES:
            known = ", ".join(sorted(_SUITES))
            print(f"error: unknown suite {nm!r}; available: {known}",
                  file=sys.stderr)
            return 2
    depth = _bound(args.depth, None)
    budget = args.budget
    if budget is None and os.environ.get(ENV_BUDGET):
        try:
            budget = int(os.environ[ENV_BUDGET])
        except ValueError:
            print(f"error: {ENV_BUDGET} must be an integer", file=sys.stderr)
            return 2
    results = [run_suite(nm, seed=args.seed, depth=depth, count=args.count,
                         budget=budget)
               for nm in names]
    report = {"seed": args.seed, "results": results,
              "passed": all(r["passed"] for r in results)}
    if args.report:
        _write(args.report, _json_text(report))
    lines = []
    for r in results:
        tag = "PASS" if r["passed"] else "FAIL"
        lines.append(f"{tag} {r['suite']}: {r['details']} "
                     f"({r['checks']} checks, {r['seconds']}s)")
    _emit(args, report, lines)
    return 0 if report["passed"] else 1


# -- pipeline ----------------------------------------------------------------


_DEFAULT_PARAMS = {"copies": 3, "fuel": 200, "depth": 80}


def _load_project(path):
    if path is None:
        obj = {}
    else:
        obj = _read_json(path)
        if not isinstance(obj, dict):
            raise CLIError("project file must hold a JSON object")
    params = dict(_DEFAULT_PARAMS)
    params.update(obj.get("params", {}))
    if params["copies"] < 2:
        raise CLIError("parameter copies out of range (need >= 2)")
    if params["fuel"] < 1 or params["depth"] < 1:
        raise CLIError("parameters fuel and depth must be positive")
    return {
        "seed": obj.get("seed", DEFAULT_SEED),
        "machine": obj.get("machine"),
        "triples": obj.get("triples"),
        "params": params,
    }


def _triple_snapshot(ctx: EncoderContext) -> list[dict]:
    return [
        {"j": m.triple.j, "w": str(m.triple.w),
         "w_a": str(m.triple.w_a), "w_b": str(m.triple.w_b)}
        for m in ctx.pool
    ]


def cmd_pipeline(args) -> int:
    project = _load_project(args.project)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stage = "load"
    report = {"project": project, "stages": {}}
    try:
        tm = _load_tm(project["machine"])

        stage = "normalize"
        m0 = normalize(tm)
        _write(out / "m0.json", _json_text(m0.to_dict()))
        report["stages"]["normalize"] = {
            "tapes": len(m0.tape_alphabets),
            "commands": len(m0.commands),
        }

        stage = "build_M1"
        ctx = EncoderContext(m0, copies=project["params"]["copies"])
        snapshot = _triple_snapshot(ctx)
        if project["triples"]:
            want = _read_json(project["triples"])
            if want != snapshot:
                raise CLIError("triple snapshot does not match the project file")
        _write(out / "triples.json", _json_text(snapshot))
        m1 = build_M1(ctx)
        _write(out / "m1.json", _json_text(m1.to_dict()))
        report["stages"]["build_M1"] = {"parts": m1.hardware.s,
                                        "rules": len(m1.rules)}

        stage = "build_main"
        main = build_main(ctx)
        _write(out / "main.json", _json_text(main.to_dict()))
        report["stages"]["build_main"] = {"parts": main.hardware.s,
                                          "rules": len(main.rules)}

        stage = "emit_presentation"
        pres = emit_presentation(
            main, hubs=(sigma_accept(ctx), sigma_word(ctx, "")))
        _write(out / "presentation.json", _json_text(pres.to_dict()))
        _write(out / "presentation.txt",
               "\n".join(_presentation_lines(pres)) + "\n")
        report["stages"]["emit_presentation"] = {
            "generators": len(pres.generators),
            "relators": pres.relator_counts(),
        }
    except (CLIError, WordError, SMError, TMError, EncodeError,
            PresentationError, OSError) as e:
        print(f"pipeline failed at stage {stage}: {e}", file=sys.stderr)
        return 1

    _write(out / "report.json", _json_text(report))
    lines = [f"artifacts: {out}"]
    for name, counts in report["stages"].items():
        flat = ", ".join(f"{k}={v}" for k, v in counts.items())
        lines.append(f"{name}: {flat}")
    _emit(args, report, lines)
    return 0


# -- parser ------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="kampen",
        description="Machine encodings into group presentations.")
    top.add_argument("--format", choices=("text", "json"), default="text",
                     help="output format (default text)")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("words", help="word stock and letter-map encodings")
    ps = p.add_subparsers(dest="action", required=True)
    g = ps.add_parser("gen-W", help="print the deterministic word stock")
    g.add_argument("--count", type=int, default=16)
    g = ps.add_parser("check-A", help="check a pair for aperiodic compatibility")
    g.add_argument("u")
    g.add_argument("v")
    for nm, hp in (("f-encode", "encode a positive tape word"),
                   ("f-decode", "invert the letter-map encoding")):
        g = ps.add_parser(nm, help=hp)
        g.add_argument("--tape", type=int, default=1, help="1-based tape index")
        g.add_argument("word")
    p.set_defaults(fn=cmd_words)

    p = sub.add_parser("tm", help="multi-tape machine runs and normalization")
    ps = p.add_subparsers(dest="action", required=True)
    g = ps.add_parser("run", help="deterministic run on an input word")
    g.add_argument("input")
    g.add_argument("--machine", help="machine JSON (default: built-in fixture)")
    g.add_argument("--fuel", type=int, default=200)
    g = ps.add_parser("normalize", help="rebuild in the normal command forms")
    g.add_argument("--machine")
    g.add_argument("--out", help="write the normalized machine JSON here")
    g = ps.add_parser("search-accept", help="bounded search for an accepting run")
    g.add_argument("input")
    g.add_argument("--machine")
    g.add_argument("--depth", type=int)
    p.set_defaults(fn=cmd_tm)

    def sm_common(g):
        g.add_argument("--machine", default="m1",
                       help="m1, main, T, or a machine JSON path (default m1)")
        g.add_argument("--copies", type=int, default=3,
                       help="copy count for the built-in machines")

    p = sub.add_parser("sm", help="rewriting machine operations")
    ps = p.add_subparsers(dest="action", required=True)
    sm_common(ps.add_parser("validate", help="load, validate, and print counts"))
    g = ps.add_parser("apply", help="apply one rule to a word")
    g.add_argument("word")
    g.add_argument("rule")
    sm_common(g)
    g = ps.add_parser("run", help="run a rule-name history")
    g.add_argument("word")
    g.add_argument("names", nargs="*")
    g.add_argument("--history", help="JSON file with the name list")
    g.add_argument("--trail", action="store_true", help="print every step")
    sm_common(g)
    g = ps.add_parser("search", help="breadth-first search between two words")
    g.add_argument("from")
    g.add_argument("to")
    g.add_argument("--depth", type=int)
    sm_common(g)
    p.set_defaults(fn=cmd_sm)

    p = sub.add_parser("encode", help="configuration encodings and traces")
    ps = p.add_subparsers(dest="action", required=True)
    for nm, hp in (("m1", "build the block machine"),
                   ("main", "build the circular machine")):
        g = ps.add_parser(nm, help=hp)
        g.add_argument("--out", help="write the machine JSON here")
        g.add_argument("--copies", type=int, default=3)
    g = ps.add_parser("F", help="map a configuration to its image word")
    g.add_argument("--config", required=True, help="configuration JSON file")
    g.add_argument("--out")
    g.add_argument("--copies", type=int, default=3)
    g = ps.add_parser("run", help="encode a machine trace")
    g.add_argument("--history", required=True,
                   help='JSON file {"input"|"config": ..., "names": [...]}')
    g.add_argument("--out")
    g.add_argument("--copies", type=int, default=3)
    g = ps.add_parser("decode", help="decode an encoded trace")
    g.add_argument("--trace", required=True,
                   help='JSON file {"start": word, "names": [...]}')
    g.add_argument("--out")
    g.add_argument("--copies", type=int, default=3)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("present", help="emit the group presentation")
    p.add_argument("--machine", choices=("m1", "main"), default="main")
    p.add_argument("--copies", type=int, default=3)
    p.add_argument("--no-hubs", action="store_true",
                   help="skip the stop-word relators")
    p.add_argument("--out", help="basename for .txt and .json exports")
    p.set_defaults(fn=cmd_present)

    p = sub.add_parser("diagram", help="build and check a computation diagram")
    p.add_argument("word", help="fixture input word (may be empty)")
    p.add_argument("--machine", choices=("main", "m1"), default="main")
    p.add_argument("--copies", type=int, default=3)
    p.add_argument("--fuel", type=int, default=200)
    p.add_argument("--depth", type=int)
    p.add_argument("--out", help="basename for .json and .svg exports")
    p.add_argument("--text", action="store_true", help="print the cell grid")
    p.add_argument("--max-cells", type=int, default=20000)
    p.set_defaults(fn=cmd_diagram)

    p = sub.add_parser("verify", help="run named verification suites")
    p.add_argument("suites", nargs="*",
                   help="suite names, or 'all' (default)")
    p.add_argument("--depth", type=int,
                   help=f"search depth (or {ENV_DEPTH})")
    p.add_argument("--count", type=int)
    p.add_argument("--budget", type=int,
                   help=f"edge budget for sweeps (or {ENV_BUDGET})")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--report", default="verify-report.json",
                   help="JSON report path (default verify-report.json)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("pipeline", help="run the whole construction chain")
    p.add_argument("--project", help="project JSON file")
    p.add_argument("--out", default="artifacts", help="artifact directory")
    p.set_defaults(fn=cmd_pipeline)

    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CLIError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (WordError, SMError, TMError, EncodeError, PresentationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
