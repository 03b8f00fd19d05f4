"""DOT diagrams and the JSON dump of an SLTS."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .model import ModelError, Signature
from .parser import parse_predicate
from .prover import Outcome, Verdict
from .slts import AProv, DProv, Eliminated, Slts, SuperState, SymbolicState, Transition
from .terms import TRUE, Domain, show

DUMP_FORMAT = "bslts-slts"
DUMP_VERSION = 1
STYLES = ("compact", "verbose")


@dataclass(frozen=True)
class RenderOptions:
    show_provenance: bool = False
    clusters: bool = True
    style: str = "compact"

    def __post_init__(self):
        if self.style not in STYLES:
            raise ValueError(f"style must be one of {STYLES}")


# ---------------------------------------------------------------------- DOT

_D_VERBOSE = {DProv.GUARD_BY_PROOF: "G:proof", DProv.GUARD_BY_DEFAULT: "G:default", DProv.ASSUMED: "G:assumed"}
_A_VERBOSE = {AProv.REACH_BY_PROOF: "G:proof", AProv.REACH_BY_DEFAULT: "G:default", AProv.ASSUMED: "G:assumed"}


def d_token(t: Transition, style: str = "compact") -> str:
    if t.d_prov is DProv.PROVED_TRUE:
        return ""
    if t.d_prov is DProv.ASSUMED:
        return "assumed" if t.D == TRUE else ("G:assumed" if style == "verbose" else "G")
    return _D_VERBOSE[t.d_prov] if style == "verbose" else "G"


def a_token(t: Transition, style: str = "compact") -> str:
    if t.a_prov is AProv.PROVED_TRUE:
        return ""
    if t.a_prov is AProv.ASSUMED:
        return "assumed" if t.A == TRUE else ("G:assumed" if style == "verbose" else "G")
    return _A_VERBOSE[t.a_prov] if style == "verbose" else "G"


def edge_label(t: Transition, style: str = "compact") -> str:
    """``[d][a]Event`` with d, a empty for proved-true predicates and G for computed ones."""
    return f"[{d_token(t, style)}][{a_token(t, style)}]{t.event}"


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(s: Slts, opts: RenderOptions | None = None) -> str:
    opts = opts or RenderOptions()
    lines = [f"digraph {_q(s.machine)} {{", "  rankdir=LR;", "  node [shape=box, style=rounded];"]
    init = s.initial.name
    lines.append(f"  {_q(init)} [shape=point, width=0.15, label=\"\"];")
    grouped = set()
    if opts.clusters:
        for i, h in enumerate(sorted(s.hierarchy, key=lambda h: h.name)):
            lines.append(f"  subgraph {_q(f'cluster_{i}')} {{")
            lines.append(f"    label={_q(h.name)};")
            for name in sorted(h.substates):
                lines.append(f"    {_q(name)};")
                grouped.add(name)
            lines.append("  }")
    for st in sorted(s.states, key=lambda st: st.name):
        if st.name != init and st.name not in grouped:
            lines.append(f"  {_q(st.name)};")
    for t in sorted(s.transitions, key=lambda t: t.key):
        label = edge_label(t, opts.style)
        if opts.show_provenance:
            extra = []
            if t.D != TRUE:
                extra.append(f"D: {show(t.D)}")
            if t.A != TRUE:
                extra.append(f"A: {show(t.A)}")
            extra.append(f"{t.d_prov.value}/{t.a_prov.value}")
            label = "\n".join([label, *extra])
        lines.append(f"  {_q(t.source)} -> {_q(t.target)} [label={_q(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------- JSON

def _domain_json(name: str, d: Domain) -> dict:
    return {"name": name, "set": d.name, "type": d.type, "values": list(d.values)}


def _verdict_json(v: Verdict) -> dict:
    return {"id": v.po_id, "kind": v.kind, "outcome": v.outcome.value, "provenance": v.provenance,
            "examined": v.examined, "witness": None if v.witness is None else {k: x for k, x in v.witness}}


def to_data(s: Slts) -> dict:
    """The dump as plain data (see docs/dump_schema.md)."""
    unreached = s.unreached_names
    states = []
    for st in s.states:
        states.append({"name": st.name, "predicate": show(st.predicate), "interpretation": show(st.interpretation),
                       "initial": st.is_initial, "super_state": st.super_state, "explored": st.name not in unreached})
    kept = {st.name for st in s.states}
    for st in s.unreached:
        if st.name not in kept:
            states.append({"name": st.name, "predicate": show(st.predicate),
                           "interpretation": show(st.interpretation), "initial": False,
                           "super_state": st.super_state, "explored": False, "dropped": True})
    return {
        "format": DUMP_FORMAT,
        "version": DUMP_VERSION,
        "machine": s.machine,
        "kind": s.kind,
        "mode": s.mode,
        "budget": s.budget,
        "sets": {k: list(v) for k, v in s.signature.sets.items()},
        "variables": [_domain_json(n, d) for n, d in s.signature.variables.items()],
        "invariant": show(s.invariant),
        "initial": s.initial.name,
        "states": states,
        "super_states": [{"name": h.name, "projection": None if h.projection is None else show(h.projection),
                          "interpretation": show(h.interpretation), "substates": list(h.substates),
                          "verdict": None if h.verdict is None else _verdict_json(h.verdict)}
                         for h in s.hierarchy],
        "transitions": [{"source": t.source, "event": t.event, "target": t.target, "D": show(t.D), "A": show(t.A),
                         "d_provenance": t.d_prov.value, "a_provenance": t.a_prov.value} for t in s.transitions],
        "eliminated": [{"source": x.source, "event": x.event, "target": x.target, "reason": x.reason,
                        "po": x.po_id, "assumed": x.assumed} for x in s.eliminated],
        "minimal": s.minimal,
        "warnings": list(s.warnings),
        "ledger": [_verdict_json(v) for v in s.ledger],
    }


def to_structured(s: Slts) -> str:
    return json.dumps(to_data(s), indent=2, ensure_ascii=False) + "\n"


class DumpError(ModelError):
    pass


def _verdict_from(d: dict) -> Verdict:
    w = d.get("witness")
    return Verdict(Outcome(d["outcome"]), d["id"], d["kind"], None if w is None else tuple(w.items()),
                   d.get("examined", 0), d.get("provenance") == "assumed")


def from_data(data: dict) -> Slts:
    if data.get("format") != DUMP_FORMAT:
        raise DumpError("not an SLTS dump")
    if data.get("version") != DUMP_VERSION:
        raise DumpError(f"unsupported dump version {data.get('version')}")
    try:
        variables = {}
        for v in data["variables"]:
            variables[v["name"]] = Domain(v["set"], tuple(v["values"]), v["type"])
        sig = Signature({k: tuple(v) for k, v in data["sets"].items()}, variables)

        def pred(text):
            return parse_predicate(text, sig)

        states, dropped, unreached = [], [], []
        for st in data["states"]:
            sym = SymbolicState(st["name"], pred(st["interpretation"]), pred(st["predicate"]), st["initial"],
                                st.get("super_state"))
            if st.get("dropped"):
                dropped.append(sym)
                unreached.append(sym)
                continue
            states.append(sym)
            if not st["explored"]:
                unreached.append(sym)
        transitions = tuple(Transition(t["source"], t["event"], t["target"], pred(t["D"]), pred(t["A"]),
                                       DProv(t["d_provenance"]), AProv(t["a_provenance"]))
                            for t in data["transitions"])
        eliminated = tuple(Eliminated(x["source"], x["event"], x["target"], x["reason"], x["po"], x["assumed"])
                           for x in data["eliminated"])
        hierarchy = tuple(SuperState(h["name"], pred(h["interpretation"]), tuple(h["substates"]),
                                     None if h["verdict"] is None else _verdict_from(h["verdict"]),
                                     None if h["projection"] is None else pred(h["projection"]))
                          for h in data["super_states"])
        ledger = tuple(_verdict_from(v) for v in data["ledger"])
        return Slts(data["machine"], sig, pred(data["invariant"]), tuple(states), transitions, ledger,
                    eliminated, tuple(unreached), hierarchy, data["mode"], data["budget"],
                    tuple(data.get("warnings", ())), data["kind"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DumpError(f"malformed SLTS dump: {exc}") from None


def from_structured(text: str) -> Slts:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DumpError(f"not JSON: {exc}") from None
    return from_data(data)


def load_dump(path) -> Slts:
    return from_structured(Path(path).read_text(encoding="utf-8"))


__all__ = ["RenderOptions", "to_dot", "to_structured", "to_data", "from_structured", "from_data", "load_dump",
           "edge_label", "DumpError", "DUMP_FORMAT", "DUMP_VERSION"]
