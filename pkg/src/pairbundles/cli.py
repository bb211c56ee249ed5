"""Command-line front end.

All randomness flows from a single --seed: every sampling loop derives a
per-trial generator as default_rng([seed, stream, trial]) where stream is
a fixed number per suite, so reports are reproducible across machines and
worker counts.

Exit codes: 0 pass, 1 usage/IO error, 2 classification ambiguity,
3 verification failure.
"""

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import core
from .classify import (
    AmbiguityError,
    ClassificationFailureError,
    classify_pair,
)
from .closure import PSI1_GRAPH, SuspectEdgeWarning, bundle_graph
from .core import PairAB, ValidationError
from .normal_forms import (
    ALabel,
    BLabel,
    CELLS,
    BundleParams,
    label_from_string,
    representative,
    table_dimension,
)
from .numerics import (
    bundle_dimension_numeric,
    distance_to_bundle,
    monte_carlo_neighborhood,
    psi2_orbit_dimension_numeric,
    sample_detxe_case,
    sample_lemadet_case,
)
from .witnesses import (
    CATALOG,
    witness_eval,
    witness_lookup,
    witness_repair,
    witness_verify,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_AMBIGUOUS = 2
EXIT_VERIFY = 3

# fixed per-suite stream numbers for the seed scheme
_STREAMS = {"detxe": 1, "PAE": 2, "cE": 3, "PBF": 4, "part3": 5, "mc": 6}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_pair(args) -> PairAB:
    if getattr(args, "input", None):
        with open(args.input) as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemExit((EXIT_USAGE,
                          f"malformed JSON: {exc}"))  # includes line/col
    try:
        return PairAB.from_json(doc)
    except (ValidationError, ValueError, KeyError, TypeError) as exc:
        raise SystemExit((EXIT_USAGE, f"invalid pair document: {exc}"))


def _params_arg(args) -> BundleParams | None:
    raw = getattr(args, "params", None)
    if not raw:
        return None
    try:
        return BundleParams.from_json(json.loads(raw))
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise SystemExit((EXIT_USAGE, f"invalid --params: {exc}"))


def _label_arg(text: str):
    try:
        return label_from_string(text)
    except ValueError as exc:
        raise SystemExit((EXIT_USAGE, str(exc)))


def _emit(doc, args) -> None:
    fmt = getattr(args, "format", "json")
    if fmt == "csv" and isinstance(doc, dict) and "checks" in doc:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["id", "status", "margin"])
        for row in doc["checks"]:
            writer.writerow([row["id"],
                             "pass" if row["pass"] else "fail",
                             row["margin"]])
        text = buf.getvalue()
    else:
        text = core.dumps(doc, indent=2) + "\n"
    out = getattr(args, "output", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# simple commands

def cmd_classify(args) -> int:
    x = _read_pair(args)
    try:
        cls = classify_pair(x)
    except AmbiguityError as exc:
        _emit({"ambiguous": list(exc.candidates), "error": str(exc)}, args)
        return EXIT_AMBIGUOUS
    except ClassificationFailureError as exc:
        _emit({"error": str(exc)}, args)
        return EXIT_VERIFY
    _emit(cls.to_json(), args)
    return EXIT_OK


def cmd_reduce(args) -> int:
    x = _read_pair(args)
    try:
        cls = classify_pair(x)
    except AmbiguityError as exc:
        _emit({"ambiguous": list(exc.candidates), "error": str(exc)}, args)
        return EXIT_AMBIGUOUS
    except ClassificationFailureError as exc:
        _emit({"error": str(exc)}, args)
        return EXIT_VERIFY
    rep = representative(cls.label, cls.params)
    doc = cls.to_json()
    doc["representative"] = rep.to_json()
    _emit(doc, args)
    return EXIT_OK


def cmd_dim(args) -> int:
    label = _label_arg(args.label)
    params = _params_arg(args)
    try:
        got = bundle_dimension_numeric(label, params)
    except (ValidationError, ValueError) as exc:
        raise SystemExit((EXIT_USAGE, str(exc)))
    want = table_dimension(label)
    _emit({"label": str(label), "dimension": got, "table": want,
           "agrees": got == want}, args)
    return EXIT_OK if got == want else EXIT_VERIFY


# ---------------------------------------------------------------------------
# closure graph commands

def cmd_closure(args) -> int:
    g = bundle_graph()
    if args.closure_cmd == "path":
        src, dst = _label_arg(args.src), _label_arg(args.dst)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", SuspectEdgeWarning)
            reachable = g.is_path(src, dst)
            chain = g.path_edges(src, dst) if reachable else None
        doc = {
            "src": str(src), "dst": str(dst), "is_path": reachable,
            "warnings": [str(w.message) for w in caught],
            "edges": None if chain is None else [
                {"src": str(e.src), "dst": str(e.dst),
                 "provenance": e.provenance} for e in chain],
        }
        _emit(doc, args)
        return EXIT_OK
    if args.closure_cmd == "successors":
        src = _label_arg(args.src)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SuspectEdgeWarning)
            succ = sorted(str(s) for s in g.successors(src))
        _emit({"src": str(src), "successors": succ}, args)
        return EXIT_OK
    # export
    which, fmt = args.which, args.format
    if which == "psi":
        text = g.to_json() if fmt == "json" else g.to_dot()
    elif which == "psi1":
        text = _export_psi1(fmt)
    else:
        text = _export_psi2(fmt)
    out = getattr(args, "output", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _a_dim(a: ALabel) -> int:
    return table_dimension(label_from_string(f"{a.value}/zero"))


def _export_psi1(fmt: str) -> str:
    edges = sorted((s.value, d.value) for s, d in PSI1_GRAPH.edges)
    if fmt == "json":
        return json.dumps({
            "nodes": [{"label": a.value, "dim": _a_dim(a)} for a in ALabel],
            "edges": [{"src": s, "dst": d} for s, d in edges],
        }, indent=2) + "\n"
    lines = ["digraph psi1 {"]
    for a in ALabel:
        lines.append(f'  "{a.value}" [label="{a.value} (dim {_a_dim(a)})"];')
    for s, d in edges:
        lines.append(f'  "{s}" -> "{d}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _export_psi2(fmt: str) -> str:
    chain = sorted(BLabel, key=lambda x: x.rank)
    edges = list(zip(chain, chain[1:]))
    if fmt == "json":
        return json.dumps({
            "nodes": [{"label": b.value, "rank": b.rank} for b in chain],
            "edges": [{"src": s.value, "dst": d.value} for s, d in edges],
        }, indent=2) + "\n"
    lines = ["digraph psi2 {"]
    for b in chain:
        lines.append(f'  "{b.value}";')
    for s, d in edges:
        lines.append(f'  "{s.value}" -> "{d.value}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# witness commands

def _lookup_or_die(args):
    src, dst = _label_arg(args.src), _label_arg(args.dst)
    fam = witness_lookup(src, dst)
    if fam is None:
        raise SystemExit((EXIT_USAGE,
                          f"no catalogued family for {src} -> {dst}"))
    return fam


def cmd_witness(args) -> int:
    fam = _lookup_or_die(args)
    if args.witness_cmd == "eval":
        try:
            g, moved, residual = witness_eval(fam, args.s)
        except ValueError as exc:
            raise SystemExit((EXIT_USAGE, str(exc)))
        _emit({"name": fam.name, "s": args.s, "residual": residual,
               "group_element": g.to_json(), "moved": moved.to_json()},
              args)
        return EXIT_OK
    if args.witness_cmd == "verify":
        report = witness_verify(fam, tol=args.tol)
        _emit(report.to_json(), args)
        return EXIT_OK if report.status == "verified" else EXIT_VERIFY
    # repair
    fam2 = witness_repair(fam, tol=args.tol)
    report = witness_verify(fam2, tol=args.tol)
    _emit({"name": fam2.name, "status": fam2.status,
           "provenance": fam2.provenance,
           "verify": report.to_json()}, args)
    ok = fam2.status in ("verified", "repaired")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# verification suites

def _suite_dims(args):
    checks = []
    for cell in CELLS:
        got = bundle_dimension_numeric(cell)
        want = table_dimension(cell)
        checks.append({"id": f"dim-{cell}", "pass": got == want,
                       "margin": float(-abs(got - want))})
    for B, want in ((core.SymMat2.diag(1, 0), 2),
                    (core.SymMat2.identity(), 3)):
        got = psi2_orbit_dimension_numeric(B)
        checks.append({"id": f"dim-psi2-orbit-rank{want - 1}",
                       "pass": got == want,
                       "margin": float(-abs(got - want))})
    return checks


def _suite_bounds(args):
    checks = []
    trials = args.trials
    worst = float("inf")
    bad = 0
    for t in range(trials):
        rep = sample_detxe_case(
            np.random.default_rng([args.seed, _STREAMS["detxe"], t]))
        worst = min(worst, rep.margin)
        bad += rep.margin < 0
    checks.append({"id": "bound-detxe", "pass": bad == 0, "margin": worst})
    for mode in ("PAE", "cE", "PBF", "part3"):
        worst = float("inf")
        bad = skipped = 0
        for t in range(trials):
            rep = sample_lemadet_case(
                mode, np.random.default_rng([args.seed, _STREAMS[mode], t]))
            if not rep.hypothesis_ok:
                skipped += 1
                continue
            worst = min(worst, rep.margin)
            bad += rep.margin < 0
        checks.append({"id": f"bound-lemadet-{mode}", "pass": bad == 0,
                       "margin": worst})
    return checks


def _suite_graph(args):
    checks = []
    for cell in CELLS:
        rep = monte_carlo_neighborhood(cell, None, args.epsilon, args.trials,
                                       seed=args.seed)
        checks.append({"id": f"mc-{cell}", "pass": not rep.violations,
                       "margin": float(-len(rep.violations))})
    return checks


def _suite_witness(args):
    checks = []
    for fam in CATALOG:
        report = witness_verify(fam, tol=args.tol)
        if report.status != "verified":
            fam = witness_repair(fam, tol=args.tol)
            report = witness_verify(fam, tol=args.tol)
        ok = report.status == "verified"
        margin = (args.tol - report.residuals[-1]) if report.residuals else \
            float("-inf")
        checks.append({"id": f"witness-{fam.name}", "pass": ok,
                       "margin": margin, "status": fam.status})
    return checks


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise SystemExit((EXIT_USAGE, "--trials must be >= 1"))
    suites = {
        "dims": _suite_dims,
        "bounds": _suite_bounds,
        "graph": _suite_graph,
        "witness": _suite_witness,
    }
    wanted = list(suites) if args.suite == "all" else [args.suite]
    checks = []
    for name in wanted:
        checks.extend(suites[name](args))
    failed = [c["id"] for c in checks if not c["pass"]]
    prefix = {"dims": "dim-", "bounds": "bound-", "graph": "mc-",
              "witness": "witness-"}
    doc = {
        "seed": args.seed,
        "suites": wanted,
        "counts": {name: sum(c["id"].startswith(prefix[name])
                             for c in checks) for name in wanted},
        "checks": checks,
        "failed": failed,
        "pass": not failed,
    }
    _emit(doc, args)
    return EXIT_OK if not failed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# distance / Monte Carlo

def cmd_dist(args) -> int:
    x = _read_pair(args)
    target = _label_arg(args.target)
    try:
        d, (g, params) = distance_to_bundle(x, target, budget=args.budget,
                                            seed=args.seed)
    except ValidationError as exc:
        raise SystemExit((EXIT_USAGE, str(exc)))
    _emit({"target": str(target), "distance": d,
           "group_element": g.to_json(), "params": params.to_json()}, args)
    return EXIT_OK


def cmd_mc(args) -> int:
    if args.trials < 1:
        raise SystemExit((EXIT_USAGE, "--trials must be >= 1"))
    label = _label_arg(args.label)
    try:
        rep = monte_carlo_neighborhood(label, _params_arg(args),
                                       args.epsilon, args.trials,
                                       seed=args.seed)
    except ValidationError as exc:
        raise SystemExit((EXIT_USAGE, str(exc)))
    _emit(rep.to_json(), args)
    return EXIT_OK if rep.ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# wiring

def build_parser() -> _Parser:
    p = _Parser(prog="pairbundles", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, pair_input=False):
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", help="write the report here")
        if pair_input:
            sp.add_argument("--input", help="pair JSON file (default stdin)")

    sp = sub.add_parser("classify", help="classify a pair from JSON")
    common(sp, pair_input=True)
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("reduce", help="classify and emit the reduction")
    common(sp, pair_input=True)
    sp.set_defaults(fn=cmd_reduce)

    sp = sub.add_parser("dim", help="numeric bundle dimension")
    sp.add_argument("label")
    sp.add_argument("--params", help="params as JSON")
    common(sp)
    sp.set_defaults(fn=cmd_dim)

    sp = sub.add_parser("closure", help="closure graph queries")
    csub = sp.add_subparsers(dest="closure_cmd", required=True)
    q = csub.add_parser("path")
    q.add_argument("src")
    q.add_argument("dst")
    common(q)
    q = csub.add_parser("successors")
    q.add_argument("src")
    common(q)
    q = csub.add_parser("export")
    q.add_argument("which", choices=("psi1", "psi2", "psi"))
    q.add_argument("--format", choices=("json", "dot"), default="json")
    q.add_argument("--output")
    sp.set_defaults(fn=cmd_closure)

    sp = sub.add_parser("witness", help="degeneration families")
    wsub = sp.add_subparsers(dest="witness_cmd", required=True)
    for name in ("eval", "verify", "repair"):
        q = wsub.add_parser(name)
        q.add_argument("src")
        q.add_argument("dst")
        if name == "eval":
            q.add_argument("--s", type=float, required=True)
        q.add_argument("--tol", type=float, default=1e-4)
        common(q)
    sp.set_defaults(fn=cmd_witness)

    sp = sub.add_parser("verify", help="verification suites")
    sp.add_argument("suite", choices=("dims", "bounds", "graph", "witness",
                                      "all"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--epsilon", type=float, default=1e-3)
    sp.add_argument("--budget", type=int, default=8)
    sp.add_argument("--tol", type=float, default=1e-4)
    common(sp)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("dist", help="distance to a bundle")
    sp.add_argument("target")
    sp.add_argument("--budget", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    common(sp, pair_input=True)
    sp.set_defaults(fn=cmd_dist)

    sp = sub.add_parser("mc", help="Monte Carlo neighborhood check")
    sp.add_argument("label")
    sp.add_argument("--params", help="params as JSON")
    sp.add_argument("--epsilon", type=float, default=1e-3)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(fn=cmd_mc)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:
        if isinstance(exc.code, tuple):
            code, message = exc.code
            print(message, file=sys.stderr)
            return code
        raise


if __name__ == "__main__":
    sys.exit(main())
