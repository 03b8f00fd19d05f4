"""Parsed components: machines and refinements."""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .terms import (BOOL, BOOL_TYPE, And, Domain, Expr, Iff, Implies, Or, Pred, Seq, Subst, TRUE, conj,
                    conjuncts, disjuncts, rename_vars, show, show_subst)

INIT_EVENT = "INITIALISATION"


class ModelError(ValueError):
    """Base class for every error raised while reading a component."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class LexicalError(ModelError):
    pass


class SyntaxError_(ModelError):
    pass


class UnknownIdentifier(ModelError):
    pass


class DomainMismatch(ModelError):
    pass


class ParallelClash(ModelError):
    pass


class NonFiniteDomain(ModelError):
    pass


@dataclass(frozen=True)
class Signature:
    """Sets and typed variables: everything needed to read a predicate."""

    sets: Mapping[str, tuple] = field(default_factory=dict)
    variables: Mapping[str, Domain] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sets", MappingProxyType(dict(self.sets)))
        object.__setattr__(self, "variables", MappingProxyType(dict(self.variables)))

    def set_domain(self, name: str) -> Domain:
        if name == "BOOL":
            return BOOL
        return Domain(name, tuple(self.sets[name]), name)

    def constants(self) -> dict:
        """Element name -> set name, BOOL included."""
        out = {"TRUE": BOOL_TYPE, "FALSE": BOOL_TYPE}
        for s, elems in self.sets.items():
            for e in elems:
                out[e] = s
        return out

    def var_list(self) -> list:
        return list(self.variables.items())


def _freeze(mapping) -> Mapping:
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True, eq=False)
class Machine:
    name: str
    sets: Mapping[str, tuple]
    variables: Mapping[str, Domain]
    invariant: Pred
    assertion: Pred | None
    initialisation: Subst
    events: Mapping[str, Subst]

    def __post_init__(self):
        object.__setattr__(self, "sets", _freeze(self.sets))
        object.__setattr__(self, "variables", _freeze(self.variables))
        object.__setattr__(self, "events", _freeze(self.events))

    def __eq__(self, other):
        if not isinstance(other, Machine):
            return NotImplemented
        return (self.name == other.name and dict(self.sets) == dict(other.sets)
                and list(self.variables.items()) == list(other.variables.items())
                and self.invariant == other.invariant and self.assertion == other.assertion
                and self.initialisation == other.initialisation
                and list(self.events.items()) == list(other.events.items()))

    @property
    def signature(self) -> Signature:
        return Signature(self.sets, self.variables)

    @property
    def state_predicates(self) -> list:
        """The P_1..P_n read from the ASSERTIONS clause (top-level disjuncts)."""
        if self.assertion is None:
            return []
        return list(disjuncts(self.assertion))

    @property
    def interface(self) -> frozenset:
        return frozenset(self.events)


@dataclass(frozen=True)
class Decomposition:
    """`abstract <=> sub_1 or ... or sub_k` as written in a refinement's ASSERTIONS."""

    abstract: Pred
    substates: tuple

    @property
    def name(self) -> str:
        return show(self.abstract)


@dataclass(frozen=True, eq=False)
class Refinement:
    """A refinement with its abstraction inlined.

    ``abstraction`` has its variables renamed (``abs_`` prefix) when they clash
    with concrete ones; ``links`` holds the equalities added for such kept
    variables.  ``concrete.invariant`` is the gluing invariant as written.
    """

    name: str
    refines: str
    abstraction: Machine
    concrete: Machine
    new_sets: tuple
    links: tuple
    variant: Expr | None
    decompositions: tuple
    renaming: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "renaming", _freeze(self.renaming))

    def __eq__(self, other):
        if not isinstance(other, Refinement):
            return NotImplemented
        return (self.name == other.name and self.refines == other.refines
                and self.abstraction == other.abstraction and self.concrete == other.concrete
                and self.new_sets == other.new_sets and self.links == other.links
                and self.variant == other.variant and self.decompositions == other.decompositions
                and dict(self.renaming) == dict(other.renaming))

    @property
    def gluing(self) -> Pred:
        return self.concrete.invariant

    @property
    def linking(self) -> Pred:
        """The gluing invariant plus equalities for variables kept under both names."""
        return conj(self.gluing, *self.links)

    @property
    def interface(self) -> frozenset:
        return self.concrete.interface

    @property
    def new_events(self) -> list:
        return [e for e in self.concrete.events if e not in self.abstraction.events]

    @property
    def joint_variables(self) -> dict:
        out = dict(self.abstraction.variables)
        out.update(self.concrete.variables)
        return out

    @property
    def sets(self) -> Mapping[str, tuple]:
        return self.concrete.sets


def interface_of(model) -> frozenset:
    """Event names of a machine or refinement, initialisation excluded."""
    return model.interface


# ------------------------------------------------------------------ printing

def _set_decl(name, elems) -> str:
    return f"{name} = {{{', '.join(elems)}}}"


def _events_block(events: Mapping[str, Subst]) -> list:
    out = []
    names = list(events)
    for i, name in enumerate(names):
        sep = " ;" if i < len(names) - 1 else ""
        body = events[name]
        if isinstance(body, Seq):
            text = f"    BEGIN\n{show_subst(body, 3)}\n    END"
        else:
            text = show_subst(body, 2)
        out.append(f"  {name} =\n{text}{sep}")
    return out


def pretty_print(model) -> str:
    """Source text that parses back to a structurally equal component."""
    if isinstance(model, Refinement):
        return _print_refinement(model)
    m: Machine = model
    lines = [f"MACHINE {m.name}"]
    if m.sets:
        lines.append("SETS")
        lines.append("  " + " ;\n  ".join(_set_decl(n, e) for n, e in m.sets.items()))
    if m.variables:
        lines.append("VARIABLES")
        lines.append("  " + ", ".join(m.variables))
    lines.append("INVARIANT")
    lines.append("  " + show(m.invariant))
    if m.assertion is not None:
        lines.append("ASSERTIONS")
        lines.append("  " + show(m.assertion))
    lines.append("INITIALISATION")
    lines.append(_init_text(m.initialisation))
    if m.events:
        lines.append("EVENTS")
        lines.extend(_events_block(m.events))
    lines.append("END")
    return "\n".join(lines) + "\n"


def _init_text(s: Subst) -> str:
    return show_subst(s, 1)


def _print_refinement(r: Refinement) -> str:
    c = r.concrete
    lines = [f"REFINEMENT {r.name}", f"REFINES {r.refines}"]
    if r.new_sets:
        lines.append("SETS")
        lines.append("  " + " ;\n  ".join(_set_decl(n, c.sets[n]) for n in r.new_sets))
    if c.variables:
        lines.append("VARIABLES")
        lines.append("  " + ", ".join(c.variables))
    lines.append("INVARIANT")
    lines.append("  " + show(c.invariant))
    if r.variant is not None:
        lines.append("VARIANT")
        lines.append("  " + show(r.variant))
    if c.assertion is not None:
        lines.append("ASSERTIONS")
        back = {v: k for k, v in r.renaming.items()}
        lines.append("  " + " &\n  ".join(f"({show(rename_vars(d.abstract, back))} <=> {_rhs(d)})"
                                         for d in r.decompositions))
    lines.append("INITIALISATION")
    lines.append(_init_text(c.initialisation))
    if c.events:
        lines.append("EVENTS")
        lines.extend(_events_block(c.events))
    lines.append("END")
    return "\n".join(lines) + "\n"


def _rhs(d: Decomposition) -> str:
    p = d.substates[0] if len(d.substates) == 1 else Or(tuple(d.substates))
    return f"({show(p)})" if isinstance(p, (Implies, Iff)) else show(p)


def decomposition_assertion(decs) -> Pred:
    parts = []
    for d in decs:
        rhs = d.substates[0] if len(d.substates) == 1 else Or(tuple(d.substates))
        parts.append(Iff(d.abstract, rhs))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


__all__ = [
    "INIT_EVENT", "ModelError", "LexicalError", "SyntaxError_", "UnknownIdentifier", "DomainMismatch",
    "ParallelClash", "NonFiniteDomain", "Signature", "Machine", "Refinement", "Decomposition",
    "interface_of", "pretty_print", "decomposition_assertion", "TRUE", "conjuncts",
]
