"""Command-line front end: parse a graph spec, run a pipeline, print JSON lines.

Spec format, one entry per line ('#' starts a comment):

    photon <id> <side>:<pos>:<C|Q> <side>:<pos>:<C|Q>
    option <key> <value>

Exit status: 0 all checks pass and all verdicts convergent, 1 a check failed
or a verdict is divergent, 2 the graph spec does not parse or violates a graph
invariant, 3 a verdict was requested without the contour-distortion flag.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import GraphError, SoftQEDError
from .ir.classify import classify_singularity, enumerate_terms, term_count, term_kind
from .ir.graph import SIDES, End, InsertionGraph, PhotonLine, validate
from .ir.power import pole_shapes, power_count, symbolic_degrees
from .ir.sectors import parse_sector

FORMAT = "softqed-report/1"
OPTION_KEYS = {"sectors", "epsilon-scale", "delta", "assume-contour-distortion", "trials",
               "seed"}
_END = re.compile(r"^([0-9]+):([0-9]+):([CQ])$")


class SpecError(SoftQEDError):
    def __init__(self, message, line, column, **payload):
        super().__init__(message, line=line, column=column, **payload)
        self.line, self.column = line, column


@dataclass
class GraphSpec:
    graph: InsertionGraph
    options: dict = field(default_factory=dict)


def _tokens(line):
    out = []
    for m in re.finditer(r"\S+", line):
        out.append((m.group(), m.start() + 1))
    return out


def parse_spec(text) -> GraphSpec:
    """Parse and validate a spec; errors carry 1-based line and column."""
    photons, options, seen = [], {}, {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        head, col = toks[0]
        if head == "photon":
            if len(toks) != 4:
                raise SpecError("photon lines need an id and two ends", ln, col)
            (pid, pc), (ea, ca), (eb, cb) = toks[1:]
            if not pid.isdigit() or int(pid) < 1:
                raise SpecError(f"bad photon id {pid!r}", ln, pc)
            if int(pid) in seen:
                raise SpecError(f"photon {pid} defined twice (first on line {seen[int(pid)]})",
                                ln, pc)
            ends = []
            for tok, c in ((ea, ca), (eb, cb)):
                m = _END.match(tok)
                if not m:
                    raise SpecError(f"bad end {tok!r}, expected side:pos:C|Q", ln, c)
                side, pos = int(m.group(1)), int(m.group(2))
                if side not in SIDES:
                    raise SpecError(f"side {side} outside 1..3", ln, c)
                ends.append(End(side, pos, m.group(3)))
            seen[int(pid)] = ln
            photons.append(PhotonLine(int(pid), *ends))
        elif head == "option":
            if len(toks) != 3:
                raise SpecError("option lines need a key and a value", ln, col)
            (key, kc), (val, _) = toks[1:]
            if key not in OPTION_KEYS:
                raise SpecError(f"unknown option {key!r}", ln, kc)
            options[key] = val
        else:
            raise SpecError(f"unknown directive {head!r}", ln, col)
    photons.sort(key=lambda p: p.j)
    try:
        g = validate(InsertionGraph(tuple(photons)))
    except GraphError as exc:
        lines = sorted(seen.values())
        culprits = exc.payload.get("photons") or [exc.payload.get("photon")]
        ln = max((seen[j] for j in culprits if j in seen), default=lines[0] if lines else 1)
        raise SpecError(str(exc), ln, 1, invariant=exc.invariant,
                        **{k: v for k, v in exc.payload.items() if k != "invariant"}) from exc
    return GraphSpec(g, options)


# ---------------------------------------------------------------- report output

class Report:
    def __init__(self, command, config, seed, stream):
        self.stream = stream
        self.failed = False
        self.divergent = False
        self.emit({"format": FORMAT, "command": command, "version": __version__,
                   "seed": seed, "config": config})

    def emit(self, rec):
        # plumbing records (format, graph, summary, errors) get the artifact anchor
        rec.setdefault("anchor", "anchor:artifact")
        self.stream.write(json.dumps(rec, default=_json_default) + "\n")


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return str(x)


def _verdict_rec(v):
    rec = {"passed": bool(v.passed), "trials": v.trials}
    if v.inconclusive:
        rec["inconclusive"] = True
    if v.witness is not None:
        rec["witness"] = {k: str(val) for k, val in dict(v.witness).items()}
    return rec


# ---------------------------------------------------------------- commands

def _side_propagator(g, s):
    from .identities import propagator_from_sequence

    return propagator_from_sequence(g.q_sequence(s), extra=1,
                                    base=None, side=s) if g.q_sequence(s) else None


def cmd_decompose(spec, cfg, rep):
    from .identities import pole_reconstruction, propagator_from_sequence
    from .poles import pole_decompose

    g = spec.graph
    for s in SIDES:
        seq = g.q_sequence(s)
        P = propagator_from_sequence(seq, extra=0, side=s)
        terms = pole_decompose(P)
        for t in terms:
            rep.emit({"record": "pole-term", "side": s, "pole": t.i, "momentum": str(t.momentum),
                      "sign": t.sign(),
                      "sigma": {str(j): {"sign": sg, "dominant": dom}
                                for j, (sg, dom) in sorted(t.sigma.items())},
                      "d_factors": list(t.d_count()), "anchor": "anchor:pole-residue"})
        v = pole_reconstruction(P, trials=cfg["trials"], seed=cfg["seed"])
        rep.emit({"record": "reconstruction", "side": s, "terms": len(terms), **_verdict_rec(v),
                  "anchor": "anchor:pole-residue"})
        rep.failed |= not v.passed


def cmd_ir_check(spec, cfg, rep):
    g = spec.graph
    assume = cfg["assume-contour-distortion"]
    for sec in cfg["sectors"]:
        for sh in pole_shapes(g):
            r = power_count(g, sh, sec, assume_distortion=assume)
            sym, _ = symbolic_degrees(g, sh, sec)
            kind = term_kind(g, tuple(("M", "M") for _ in g.photons), sh.cuts)
            form = classify_singularity(kind, g)
            agree = sym == r.totals
            rep.emit({"record": "power-count", "sector": sec.label(), "shape": sh.label(),
                      "degrees": {f"r{t}": d for t, d in sorted(r.totals.items())},
                      "exponents": {f"r{t}": d for t, d in sorted(r.exponents.items())},
                      "half_lines": {f"r{t}:{h}": d for (t, h), d in sorted(r.half_lines.items())},
                      "photon_of_rank": {f"r{t}": j for t, j in sorted(r.photon_of_rank.items())},
                      "symbolic_agrees": agree, "verdict": r.verdict,
                      "integrable": all(d >= 1 for d in r.totals.values()),
                      "flags": r.flags, "kind": kind, "singularity": form.cls,
                      "anchor": "anchor:half-line-count", "form_anchor": form.anchor})
            rep.failed |= not agree
            rep.divergent |= r.verdict not in (None, "convergent")
    if not assume:
        rep.emit({"record": "assumption-missing",
                  "message": "convergence verdicts need --assume-contour-distortion",
                  "anchor": "anchor:contour-distortion"})


def cmd_classify(spec, cfg, rep):
    g = spec.graph
    terms = enumerate_terms(g)
    for t in terms:
        form = classify_singularity(t.kind, g)
        rep.emit({"record": "term", "term": t.label(), "kind": t.kind, "ignorable": t.ignorable,
                  "form": form.as_dict(), "anchor": form.anchor or "anchor:term-expansion"})
        rep.failed |= form.cls == "unclassified" and not t.ignorable
    rep.emit({"record": "term-count", "enumerated": len(terms), "formula": term_count(g),
              "anchor": "anchor:term-expansion"})
    rep.failed |= len(terms) != term_count(g)


def cmd_verify(spec, cfg, rep):
    from .identities import identity_suite, two_propagator_ward

    g = spec.graph
    v = two_propagator_ward(trials=cfg["trials"], seed=cfg["seed"])
    rep.emit({"record": "identity", "name": "two-propagator-ward", **_verdict_rec(v),
              "anchor": "anchor:ward"})
    rep.failed |= not v.passed
    checked = 0
    for s in SIDES:
        P = _side_propagator(g, s)
        if P is None:
            continue
        checked += 1
        for name, v in identity_suite(P, trials=cfg["trials"], seed=cfg["seed"]).items():
            rep.emit({"record": "identity", "name": name, "side": s, **_verdict_rec(v),
                      "anchor": "anchor:ward"})
            rep.failed |= not v.passed
    rep.emit({"record": "identity-summary", "sides_checked": checked, "vacuous": checked == 0,
              "anchor": "anchor:ward"})


def cmd_loop_current(spec, cfg, rep):
    from .oracle.current import LoopPolygon, loop_current, log_slope_scan, mdot

    rng = np.random.default_rng(cfg["seed"])
    worst = 0.0
    for _ in range(cfg["trials"]):
        L = LoopPolygon(rng.normal(size=(3, 4)))
        k = rng.normal(size=4)
        J = loop_current(L, k)
        scale = float(np.max(np.abs(k)) * np.max(np.abs(J))) or 1.0
        worst = max(worst, float(abs(mdot(k, J))) / scale)
    ok = worst <= 1e-12
    rep.emit({"record": "current-conservation", "trials": cfg["trials"], "max_rel": worst,
              "passed": ok, "anchor": "anchor:loop-current"})
    L = LoopPolygon([[0, 0, 0, 0], [3, 1, 0.5, 0], [5, 0.2, -0.4, 0.3]])
    slope, vals = log_slope_scan(L, [4.0, 2.0, 1.0], 32.0, n_radial=96, n_theta=32, n_phi=48)
    rep.emit({"record": "pairing-scan", "r_min": [4.0, 2.0, 1.0], "r_max": 32.0,
              "values": [float(v) for v in vals], "log_slope": slope, "passed": slope > 0,
              "anchor": "anchor:loop-current"})
    rep.failed |= not (ok and slope > 0)


COMMANDS = {"decompose": cmd_decompose, "ir-check": cmd_ir_check, "classify": cmd_classify,
            "verify-identities": cmd_verify, "loop-current": cmd_loop_current}


def _flag(val):
    return str(val).lower() in ("1", "true", "yes", "on")


def build_config(spec, args):
    o = spec.options
    n = spec.graph.n
    seed = args.seed if args.seed is not None else int(o.get("seed", 0))
    trials = args.trials if args.trials is not None else int(o.get("trials", 100))
    sectors = args.sectors or o.get("sectors", "all")
    delta = Fraction(args.delta if args.delta is not None else o.get("delta", "1"))
    eps = float(args.epsilon_scale if args.epsilon_scale is not None
                else o.get("epsilon-scale", "1e-9"))
    assume = args.assume_contour_distortion or _flag(o.get("assume-contour-distortion", "false"))
    return {"seed": seed, "trials": trials, "sectors_spec": sectors, "delta": delta,
            "epsilon-scale": eps, "assume-contour-distortion": assume,
            "sectors": parse_sector(sectors, n)}


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    ap = argparse.ArgumentParser(prog="softqed", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--spec", help="graph spec file (omit for the bare triangle)")
    ap.add_argument("--out", help="write the report here instead of standard output")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--sectors")
    ap.add_argument("--epsilon-scale", type=float)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--assume-contour-distortion", action="store_true")
    ap.add_argument("--delta")
    args = ap.parse_args(argv)
    text = ""
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            text = fh.read()
    try:
        spec = parse_spec(text)
        cfg = build_config(spec, args)
    except (SpecError, ValueError, ZeroDivisionError) as exc:
        payload = getattr(exc, "payload", {})
        sys.stderr.write(json.dumps({"record": "error", "kind": "parse", "message": str(exc),
                                     **payload, "anchor": "anchor:artifact"},
                                    default=_json_default) + "\n")
        return 2
    out = open(args.out, "w", encoding="utf-8") if args.out else stdout
    try:
        shown = {k: v for k, v in cfg.items() if k != "sectors"}
        rep = Report(args.command, shown, cfg["seed"], out)
        rep.emit({"record": "graph", "n": spec.graph.n, "spec": spec.graph.spec_text().strip()})
        try:
            COMMANDS[args.command](spec, cfg, rep)
        except SoftQEDError as exc:
            rep.emit({"record": "error", "kind": type(exc).__name__, "message": str(exc),
                      **exc.payload})
            rep.failed = True
        if args.command == "ir-check" and not cfg["assume-contour-distortion"]:
            code = 3
        elif rep.failed or rep.divergent:
            code = 1
        else:
            code = 0
        rep.emit({"record": "summary", "exit": code})
    finally:
        if args.out:
            out.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
