"""Symbolic labelled transition systems."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace

from .model import Signature
from .prover import Verdict
from .terms import TRUE, Pred

INIT_STATE = "Init"


class DProv(str, enum.Enum):
    PROVED_TRUE = "ProvedTrue"
    GUARD_BY_PROOF = "GuardByProof"
    GUARD_BY_DEFAULT = "GuardByDefault"
    ASSUMED = "Assumed"


class AProv(str, enum.Enum):
    PROVED_TRUE = "ProvedTrue"
    REACH_BY_PROOF = "ReachByProof"
    REACH_BY_DEFAULT = "ReachByDefault"
    ASSUMED = "Assumed"


BY_DEFAULT = (DProv.GUARD_BY_DEFAULT, AProv.REACH_BY_DEFAULT)


def state_key(name: str) -> str:
    """State name with whitespace removed, as used inside PO identifiers."""
    return re.sub(r"\s+", "", name)


@dataclass(frozen=True)
class SymbolicState:
    name: str
    interpretation: Pred
    predicate: Pred = TRUE
    is_initial: bool = False
    super_state: str | None = None


@dataclass(frozen=True)
class Transition:
    source: str
    event: str
    target: str
    D: Pred
    A: Pred
    d_prov: DProv
    a_prov: AProv

    @property
    def key(self) -> tuple:
        return (self.source, self.event, self.target)

    @property
    def by_default(self) -> bool:
        return self.d_prov is DProv.GUARD_BY_DEFAULT or self.a_prov is AProv.REACH_BY_DEFAULT

    @property
    def d_true(self) -> bool:
        return self.D == TRUE

    @property
    def a_true(self) -> bool:
        return self.A == TRUE


@dataclass(frozen=True)
class Eliminated:
    """A triple dropped because PO(2) (reason "D") or PO(5) (reason "A") held."""

    source: str
    event: str
    target: str
    reason: str
    po_id: str
    assumed: bool = False


@dataclass(frozen=True)
class SuperState:
    """An abstract state seen through the gluing invariant, with its substates."""

    name: str
    interpretation: Pred
    substates: tuple
    verdict: Verdict | None = None
    projection: Pred | None = None


@dataclass(frozen=True)
class Slts:
    machine: str
    signature: Signature
    invariant: Pred
    states: tuple
    transitions: tuple
    ledger: tuple = ()
    eliminated: tuple = ()
    unreached: tuple = ()
    hierarchy: tuple = ()
    mode: str = "strict"
    budget: int | None = None
    warnings: tuple = field(default=(), compare=False)
    kind: str = "machine"

    @property
    def initial(self) -> SymbolicState:
        inits = [s for s in self.states if s.is_initial]
        if len(inits) != 1:
            raise ValueError("an SLTS has exactly one initial state")
        return inits[0]

    @property
    def minimal(self) -> bool:
        return is_minimal(self)

    def state(self, name: str) -> SymbolicState:
        for s in self.states:
            if s.name == name:
                return s
        for s in self.unreached:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def state_names(self) -> list:
        return [s.name for s in self.states]

    @property
    def unreached_names(self) -> set:
        return {s.name for s in self.unreached}

    def processed(self, name: str) -> bool:
        """Was the state explored (its outgoing transitions are all known)?"""
        return name in self.state_names and name not in self.unreached_names

    def outgoing(self, source: str, event: str | None = None) -> list:
        return [t for t in self.transitions if t.source == source and (event is None or t.event == event)]

    def transition(self, source: str, event: str, target: str) -> Transition | None:
        for t in self.transitions:
            if t.key == (source, event, target):
                return t
        return None

    def eliminated_from(self, source: str, event: str) -> list:
        return [x for x in self.eliminated if x.source == source and x.event == event]

    @property
    def events(self) -> list:
        return sorted({t.event for t in self.transitions if not self.state(t.source).is_initial})

    def without(self, key: tuple) -> "Slts":
        """Copy with one transition removed (used for mutation checks)."""
        return replace(self, transitions=tuple(t for t in self.transitions if t.key != key))

    def verdict(self, po_id: str) -> Verdict | None:
        for v in self.ledger:
            if v.po_id == po_id:
                return v
        return None


def is_minimal(s: Slts) -> bool:
    """No transition was kept by default."""
    return not any(t.by_default for t in s.transitions)


def transition_sort_key(t: Transition, initial: str = INIT_STATE) -> tuple:
    return (t.source != initial, t.source, t.event, t.target)
