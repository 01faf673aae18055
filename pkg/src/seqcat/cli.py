"""Command-line front end: ``seqcat derive|plan|pi|perm``.

Exit codes: 0 on a result, 1 when there is none, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import baxter, deriver, picalc, rules, strips
from .categories import CategorySyntaxError, is_atomic
from .terms import TermSyntaxError, print_term, show


class InputError(Exception):
    pass


def data_path(name: str) -> Path:
    """``name`` as given if it exists, else the bundled data file of that name."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("seqcat") / "data" / name
    if bundled.is_file():
        return Path(str(bundled))
    raise InputError(f"no such file: {name}")


def _read(name: str) -> str:
    return data_path(name).read_text(encoding="utf-8")


def _tokens(args) -> list[str]:
    toks = [t for chunk in args.tokens for t in chunk.split()]
    if not toks:
        raise InputError("no tokens given")
    return toks


def _config(args) -> rules.RuleConfig:
    if getattr(args, "config", None):
        return rules.load_config(_read(args.config))
    return rules.preset(args.preset)


def _emit(out, obj) -> None:
    out.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")


# ---------------------------------------------------------------- derive

def cmd_derive(args, out) -> int:
    lex = deriver.load_lexicon(_read(args.lexicon))
    ds = deriver.derive(_tokens(args), lex, _config(args),
                        all_derivations=args.all)
    for k, d in enumerate(ds, 1):
        if args.format == "json-lines":
            _emit(out, {"reading": k, "derivation": deriver.to_json(d)})
        else:
            if k > 1:
                out.write("\n")
            out.write(f"reading {k}\n")
            out.write(deriver.render(d, args.style) + "\n")
    if not ds and args.format == "text":
        out.write("no derivation\n")
    return 0 if ds else 1


# ---------------------------------------------------------------- plan

def cmd_plan(args, out) -> int:
    lex = deriver.load_lexicon(_read(args.lexicon))
    world = strips.parse_world(_read(args.world))
    ds = deriver.derive(_tokens(args), lex, _config(args))
    readings = [d for d in ds if is_atomic(d.item.category)]
    ok = 0
    for k, d in enumerate(readings, 1):
        item = d.item
        try:
            after = strips.execute(item, world)
        except strips.PlanError as exc:
            if args.format == "json-lines":
                _emit(out, {"reading": k, "lf": show(item.lf), "ok": False, "error": str(exc)})
            else:
                out.write(f"reading {k}: {item.category} : {show(item.lf)}\n{exc}\n")
            continue
        ok += 1
        added = [str(f) for f in after.facts if not world.holds(f)]
        removed = [str(f) for f in world.facts if not after.holds(f)]
        if args.format == "json-lines":
            _emit(out, {"reading": k, "lf": show(item.lf), "ok": True, "added": added,
                        "deleted": removed, "world": [str(f) for f in after.facts]})
        else:
            out.write(f"reading {k}: {item.category} : {show(item.lf)}\n")
            out.write("added: " + ", ".join(added) + "\n")
            out.write("deleted: " + ", ".join(removed) + "\n")
            out.write("world:\n" + "".join(f"  {f}\n" for f in after.facts))
    if not readings:
        msg = "no executable reading"
        if args.format == "json-lines":
            _emit(out, {"ok": False, "error": msg})
        else:
            out.write(msg + "\n")
    return 0 if ok else 1


# ---------------------------------------------------------------- pi

def _label_json(label: picalc.Label) -> dict:
    def v(x):
        return x if isinstance(x, str) or x is None else print_term(x)
    out = {"rule": label.rule}
    if label.channel is not None:
        out["channel"] = v(label.channel)
    if label.subst is not None:
        out["subst"] = [v(label.subst[0]), label.subst[1]]
    if label.extruded:
        out["extruded"] = list(label.extruded)
    if label.term is not None:
        out["term"] = show(label.term)
    return out


def cmd_pi(args, out) -> int:
    p = picalc.parse_process(_read(args.process))
    if args.check_async:
        result = picalc.check_async(p)
        if args.format == "json-lines":
            _emit(out, {"async": result})
        else:
            out.write(("true" if result else "false") + "\n")
        return 0
    if args.stance:
        result = picalc.classify_stance(p)
        if args.format == "json-lines":
            _emit(out, {"stance": result})
        else:
            out.write(result + "\n")
        return 0
    world = None
    if args.world:
        world = picalc.StripsWorld(strips.parse_world(_read(args.world)))
    lazy = not args.eager
    if args.exhaustive:
        root = picalc.explore(p, depth=args.depth, world=world, lazy=lazy)
        traces = picalc.maximal_traces(root)
        truncated = picalc.tree_truncated(root)
    else:
        tr = picalc.run_random(p, seed=args.seed, max_steps=args.max_steps,
                               world=world, lazy=lazy)
        traces = [[(m.label, m) for m in tr.steps]]
        truncated = tr.truncated
    start = picalc.show_process(picalc.canonical(p))
    for k, trace in enumerate(traces, 1):
        if args.format == "json-lines":
            _emit(out, {"trace": k, "step": 0, "state": start})
            for i, (label, node) in enumerate(trace, 1):
                _emit(out, {"trace": k, "step": i, **_label_json(label),
                            "state": picalc.show_process(node.process)})
        else:
            out.write(f"trace {k}\n  {start}\n")
            for label, node in trace:
                out.write(f"  => {label}\n  {picalc.show_process(node.process)}\n")
    if truncated:
        if args.format == "json-lines":
            _emit(out, {"bound_exceeded": True})
        else:
            out.write("bound exceeded\n")
    return 0


# ---------------------------------------------------------------- perm

def cmd_perm(args, out) -> int:
    if args.count is not None:
        if args.count < 1:
            raise InputError("--count needs n >= 1")
        n = baxter.count_separable(args.count)
        _write(args, out, {"n": args.count, "separable": n}, str(n))
        return 0
    if args.permutation is None:
        raise InputError("give a permutation or --count N")
    try:
        p = baxter.parse_permutation(args.permutation)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.contains:
        try:
            pat = baxter.parse_permutation(args.contains)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        r = baxter.contains_pattern(p, pat)
        _write(args, out, {"contains": r}, str(r).lower())
        return 0
    if args.tree:
        try:
            t = baxter.separation_tree(p)
        except baxter.NotSeparable:
            _write(args, out, {"tree": None}, "not separable")
            return 1
        _write(args, out, {"tree": str(t)}, str(t))
        return 0
    if args.encode:
        enc = baxter.encode_permutation(p, args.hierarchy)
        if args.format == "json-lines":
            for v, (c, t) in zip(p, enc):
                _emit(out, {"value": v, "category": str(c), "lf": show(t)})
        else:
            for v, (c, t) in zip(p, enc):
                out.write(f"{v}: {c} : {show(t)}\n")
        return 0
    r = baxter.is_separable(p)
    _write(args, out, {"separable": r}, str(r).lower())
    return 0


def _write(args, out, obj, text) -> None:
    if args.format == "json-lines":
        _emit(out, obj)
    else:
        out.write(text + "\n")


# ---------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqcat", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json-lines"), default="text")
    common.add_argument("--out", help="write output here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    grammar = argparse.ArgumentParser(add_help=False)
    grammar.add_argument("--lexicon", required=True)
    grammar.add_argument("--preset", choices=rules.PRESETS, default="planning")
    grammar.add_argument("--config", help="rule configuration file (overrides --preset)")
    grammar.add_argument("tokens", nargs="*")

    d = sub.add_parser("derive", parents=[common, grammar], help="derive a token sequence")
    d.add_argument("--all", action="store_true", help="every derivation, not one per reading")
    d.add_argument("--style", choices=("ascii", "sexpr"), default="ascii")
    d.set_defaults(func=cmd_derive)

    pl = sub.add_parser("plan", parents=[common, grammar], help="derive and execute")
    pl.add_argument("--world", required=True)
    pl.set_defaults(func=cmd_plan)

    pi = sub.add_parser("pi", parents=[common], help="run a process")
    pi.add_argument("process")
    pi.add_argument("--exhaustive", action="store_true")
    pi.add_argument("--depth", type=int, default=20)
    pi.add_argument("--seed", type=int, default=0)
    pi.add_argument("--max-steps", type=int, default=1000)
    pi.add_argument("--world", help="STRIPS world file consulted by cond and leaves")
    pi.add_argument("--eager", action="store_true",
                    help="unfold replication even when other steps are possible")
    pi.add_argument("--check-async", action="store_true")
    pi.add_argument("--stance", action="store_true")
    pi.set_defaults(func=cmd_pi)

    pm = sub.add_parser("perm", parents=[common], help="permutation queries")
    pm.add_argument("permutation", nargs="?")
    pm.add_argument("--separable", action="store_true", help="(default query)")
    pm.add_argument("--tree", action="store_true")
    pm.add_argument("--contains", metavar="PATTERN")
    pm.add_argument("--encode", action="store_true")
    pm.add_argument("--hierarchy", choices=sorted(baxter.HIERARCHIES), default="chain")
    pm.add_argument("--count", type=int, metavar="N")
    pm.set_defaults(func=cmd_perm)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if getattr(args, "depth", 1) < 1 or getattr(args, "max_steps", 1) < 1:
        print("seqcat: bounds must be positive", file=sys.stderr)
        return 2
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        return args.func(args, out)
    except (InputError, OSError, SyntaxError, ValueError, KeyError,
            deriver.ChartLimit) as exc:
        print(f"seqcat: {exc}", file=sys.stderr)
        return 2
    finally:
        if args.out:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
