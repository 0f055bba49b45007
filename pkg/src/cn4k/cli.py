"""Command-line front end.

Exit codes: 0 success (proved / ok / true / valid / found / pass), 1 the
negative answer (not provable / invalid / false / none / fail), 2 budget
exceeded, 3 malformed input (formula, proof, model or derivation), 64 usage
error, 74 file I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from importlib import resources

from .formula import ParseError, Polarity, closure, parse, render, sort_key
from .hilbert import HilbertFormatError, check_derivation, load_derivation
from .logics import ALL_LOGICS, LogicId
from .oracle import (
    CorpusProfile,
    SearchBounds,
    corpus_generate,
    random_model,
    reference_supports,
    search_countermodel,
)
from .prover import NotProvable, Proved, decide
from .semantics import (
    EvaluationError,
    ModelFormatError,
    check_frame,
    check_model,
    dump_model,
    frame_validates,
    load_model,
    model_to_dict,
    supports,
)
from .sequent import ProofError, Sequent, certificate, check_proof, load_certificate, parse_sequent

EXIT_OK, EXIT_NO, EXIT_BUDGET, EXIT_PARSE, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3, 64, 74

LOGIC_HELP = "logic: cn4k (base), pm (the ± extension), yv (the ⋎ extension), join (the ⋈ extension), one (all)"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def output_schema() -> dict:
    text = resources.files("cn4k").joinpath("data/output.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _logic(name: str) -> LogicId:
    try:
        return LogicId.from_name(name)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _polarity(name: str) -> Polarity:
    key = name.strip().lower()
    if key in ("pos", "+", "positive"):
        return Polarity.POS
    if key in ("neg", "-", "negative"):
        return Polarity.NEG
    raise argparse.ArgumentTypeError("polarity must be pos or neg")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cn4k", description="Decision kit for CN4K and its extensions.",
                epilog=LOGIC_HELP)
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="structured output")

    sp = sub.add_parser("prove", help="decide a sequent 'f1, f2 => g' or a formula")
    sp.add_argument("--logic", type=_logic, required=True, help=LOGIC_HELP)
    sp.add_argument("--budget", type=int, default=None, help="node limit (default: $CN4K_BUDGET or none)")
    sp.add_argument("--emit-proof", metavar="FILE", help="write the proof certificate here")
    sp.add_argument("--stats", action="store_true", help="print search statistics")
    sp.add_argument("--no-cache", action="store_true", help="disable the proved/failed tables")
    sp.add_argument("sequent")
    common(sp)

    sp = sub.add_parser("check-proof", help="verify a proof certificate")
    sp.add_argument("--logic", type=_logic, required=True, help=LOGIC_HELP)
    sp.add_argument("--allow-cut", action="store_true")
    sp.add_argument("file")
    common(sp)

    sp = sub.add_parser("check-hilbert", help="verify a Hilbert derivation file")
    sp.add_argument("--logic", type=_logic, default=None, help="override the file's logic: header")
    sp.add_argument("file")
    common(sp)

    sp = sub.add_parser("model-eval", help="evaluate a formula at a world of a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--world", required=True)
    sp.add_argument("--polarity", type=_polarity, default=Polarity.POS)
    sp.add_argument("--close", action="store_true", help="close leq reflexively and transitively first")
    sp.add_argument("formula")
    common(sp)

    sp = sub.add_parser("frame-validate", help="is the formula valid on the model's frame")
    sp.add_argument("--model", required=True, help="model file; only its frame is used")
    sp.add_argument("--close", action="store_true")
    sp.add_argument("formula")
    common(sp)

    sp = sub.add_parser("countermodel", help="bounded search for a falsifying model")
    sp.add_argument("--logic", type=_logic, required=True, help=LOGIC_HELP)
    sp.add_argument("--max-worlds", type=int, default=3)
    sp.add_argument("--max-candidates", type=int, default=None)
    sp.add_argument("formula")
    common(sp)

    sp = sub.add_parser("closure", help="list the closure of a formula")
    sp.add_argument("formula")
    common(sp)

    sp = sub.add_parser("selftest", help="run the differential checks on a random corpus")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=40)
    common(sp)
    return p


class _Out:
    def __init__(self, command: str, as_json: bool):
        self.command = command
        self.as_json = as_json
        self.start = time.perf_counter()
        self.doc: dict = {"command": command, "payload": {}, "statistics": {}}

    def say(self, text: str):
        if not self.as_json:
            print(text)

    def finish(self, verdict: str, code: int) -> int:
        if self.as_json:
            self.doc["verdict"] = verdict
            self.doc["exit_code"] = code
            self.doc["timing"] = {"seconds": round(time.perf_counter() - self.start, 6)}
            print(json.dumps(self.doc, indent=1))
        return code


def _budget(arg: int | None) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get("CN4K_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"CN4K_BUDGET must be an integer, got {env!r}") from None
    return None


def cmd_prove(a) -> int:
    out = _Out("prove", a.json)
    s = parse_sequent(a.sequent)
    v = decide(s, a.logic, _budget(a.budget), use_cache=not a.no_cache)
    out.doc.update(logic=a.logic.value, input=str(s))
    out.doc["statistics"] = v.stats.as_dict()
    if isinstance(v, Proved):
        cert = certificate(v.tree, a.logic)
        if a.emit_proof:
            with open(a.emit_proof, "w", encoding="utf-8") as fh:
                json.dump(cert, fh, indent=1)
        out.doc["payload"]["proof"] = cert
        out.doc["statistics"].update(height=v.tree.height, size=v.tree.size)
        out.say(f"proved in {a.logic.value}: {s}  (height {v.tree.height}, {v.tree.size} nodes)")
        code, verdict = EXIT_OK, "proved"
    elif isinstance(v, NotProvable):
        out.say(f"not provable in {a.logic.value}: {s}")
        code, verdict = EXIT_NO, "not_provable"
    else:
        out.say(f"budget exceeded after {v.stats.nodes} nodes: {s}")
        code, verdict = EXIT_BUDGET, "budget_exceeded"
    if a.stats and not a.json:
        print(" ".join(f"{k}={val}" for k, val in v.stats.as_dict().items()))
    return out.finish(verdict, code)


def cmd_check_proof(a) -> int:
    out = _Out("check-proof", a.json)
    tree, file_logic = load_certificate(a.file)
    r = check_proof(tree, a.logic, allow_cut=a.allow_cut)
    out.doc.update(logic=a.logic.value, input=str(tree.sequent))
    out.doc["statistics"] = {"height": tree.height, "size": tree.size}
    if file_logic is not None and file_logic is not a.logic:
        out.say(f"note: certificate declares logic {file_logic.value}")
    if r.ok:
        out.say(f"ok: {tree.sequent}")
        return out.finish("ok", EXIT_OK)
    out.say(r.describe())
    out.doc["payload"]["error"] = r.describe()
    return out.finish("invalid", EXIT_NO)


def cmd_check_hilbert(a) -> int:
    out = _Out("check-hilbert", a.json)
    d = load_derivation(a.file, a.logic)
    v = check_derivation(d)
    out.doc.update(logic=d.logic.value, input=render(d.conclusion) if d.conclusion else "")
    out.doc["statistics"] = {"lines": len(d.steps)}
    if v.ok:
        out.say(f"ok: {', '.join(render(h) for h in d.hypotheses)} |- {render(d.conclusion)}")
        return out.finish("ok", EXIT_OK)
    out.say(v.describe())
    out.doc["payload"].update(error=v.reason, line=v.line, category=v.category)
    return out.finish("invalid", EXIT_NO)


def _load_checked_model(path: str, close: bool):
    m = load_model(path, close=close)
    problems = list(check_frame(m.frame).violations) + list(check_model(m).violations)
    if problems:
        raise ModelFormatError("ill-formed model: " + "; ".join(map(str, problems)))
    return m


def cmd_model_eval(a) -> int:
    out = _Out("model-eval", a.json)
    m = _load_checked_model(a.model, a.close)
    f = parse(a.formula)
    result = supports(m, a.world, a.polarity, f)
    out.doc.update(input=render(f))
    out.doc["payload"]["world"] = a.world
    out.say("true" if result else "false")
    return out.finish("true" if result else "false", EXIT_OK if result else EXIT_NO)


def cmd_frame_validate(a) -> int:
    out = _Out("frame-validate", a.json)
    m = _load_checked_model(a.model, a.close)
    f = parse(a.formula)
    fv = frame_validates(m.frame, f)
    out.doc.update(input=render(f))
    if fv.valid:
        out.say("valid")
        return out.finish("valid", EXIT_OK)
    cm = fv.countermodel(m.frame)
    world = m.frame.worlds[fv.world]
    out.doc["payload"].update(model=model_to_dict(cm), world=world)
    out.say(f"invalid: fails at {world} under\n" + dump_model(cm))
    return out.finish("invalid", EXIT_NO)


def cmd_countermodel(a) -> int:
    out = _Out("countermodel", a.json)
    if a.max_worlds < 1:
        raise UsageError("--max-worlds must be at least 1")
    f = parse(a.formula)
    o = search_countermodel(f, a.logic.frame_class, SearchBounds(a.max_worlds, a.max_candidates))
    out.doc.update(logic=a.logic.value, input=render(f))
    out.doc["statistics"] = {"frames_checked": o.frames_checked, "complete": o.complete}
    if o.countermodel is None:
        out.say(f"no countermodel with at most {a.max_worlds} worlds"
                + ("" if o.complete else " (candidate cap reached)"))
        return out.finish("none", EXIT_NO)
    cm = o.countermodel
    out.doc["payload"].update(model=model_to_dict(cm.model), world=cm.world_name)
    out.say(f"# fails at world {cm.world_name}")
    out.say(dump_model(cm.model).rstrip())
    return out.finish("found", EXIT_OK)


def cmd_closure(a) -> int:
    out = _Out("closure", a.json)
    f = parse(a.formula)
    members = [render(g) for g in sorted(closure(f), key=sort_key)]
    out.doc.update(input=render(f))
    out.doc["payload"]["formulas"] = members
    out.doc["statistics"] = {"size": len(members)}
    for m in members:
        out.say(m)
    return out.finish("ok", EXIT_OK)


def selftest(seed: int, count: int) -> dict[str, int]:
    """Differential checks on a random corpus; returns counters, ``*_violations`` must be 0."""
    rng = random.Random(seed)
    corpus = corpus_generate(seed, CorpusProfile(max_size=6, variables=2, count=count))
    c = dict.fromkeys(["formulas", "evaluations", "proved", "proof_violations", "evaluator_violations",
                       "soundness_violations", "oracle_violations", "lattice_violations"], 0)
    c["formulas"] = len(corpus)
    for f in corpus:
        proved = {}
        for logic in ALL_LOGICS:
            v = decide(Sequent((), f), logic, budget=200000)
            proved[logic] = isinstance(v, Proved)
            if isinstance(v, Proved):
                c["proved"] += 1
                if not check_proof(v.tree, logic):
                    c["proof_violations"] += 1
            for _ in range(3):
                m = random_model(rng, logic.frame_class, 3)
                for w in range(m.frame.size):
                    for pol in Polarity:
                        c["evaluations"] += 1
                        if supports(m, w, pol, f) != reference_supports(m, w, pol, f):
                            c["evaluator_violations"] += 1
                    if proved[logic] and not supports(m, w, Polarity.POS, f):
                        c["soundness_violations"] += 1
            cm = search_countermodel(f, logic.frame_class, SearchBounds(max_worlds=2)).countermodel
            if cm is not None and proved[logic]:
                c["oracle_violations"] += 1
        base = proved[LogicId.CN4K]
        if base and not all(proved.values()):
            c["lattice_violations"] += 1
        mids = (LogicId.CN4K_PM, LogicId.CN4K_YV, LogicId.CN4K_JOIN)
        if any(proved[m] for m in mids) and not proved[LogicId.CN4K_ONE]:
            c["lattice_violations"] += 1
    return c


def cmd_selftest(a) -> int:
    out = _Out("selftest", a.json)
    counts = selftest(a.seed, a.count)
    out.doc["payload"]["checks"] = counts
    out.doc["statistics"] = {"seed": a.seed}
    bad = sum(v for k, v in counts.items() if k.endswith("_violations"))
    for k, v in counts.items():
        out.say(f"{k}: {v}")
    out.say("PASS" if not bad else "FAIL")
    return out.finish("pass" if not bad else "fail", EXIT_OK if not bad else EXIT_NO)


COMMANDS = {
    "prove": cmd_prove,
    "check-proof": cmd_check_proof,
    "check-hilbert": cmd_check_hilbert,
    "model-eval": cmd_model_eval,
    "frame-validate": cmd_frame_validate,
    "countermodel": cmd_countermodel,
    "closure": cmd_closure,
    "selftest": cmd_selftest,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"cn4k: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        print(f"cn4k: parse error: {e}", file=sys.stderr)
        if e.text:
            print(f"  {e.text}\n  {' ' * e.position}^", file=sys.stderr)
        return EXIT_PARSE
    except (ModelFormatError, HilbertFormatError, ProofError, EvaluationError, json.JSONDecodeError) as e:
        print(f"cn4k: invalid input: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"cn4k: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


def main() -> int:
    return run(sys.argv[1:])
