"""Generic binary CSP solver: AC3 propagation inside backtracking search.

The solver only ever sees a binary network: variables, finite value domains,
and constraints abstracted as a boolean test over the values of their two
variables. Search maintains arc consistency after every branching decision,
picks the variable with the smallest live domain (declared order breaking
ties), and enumerates values in domain order. Working domains are copied per
search node, so backtracking is just returning.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .model import (
    BasicConstraint,
    CheckReport,
    ContractError,
    CspError,
    InterpRegistry,
    Violation,
)
from .encode import (
    BinConstraint,
    BinNetwork,
    BinValue,
    BinVar,
    HVar,
    OVar,
    RawVal,
    TupleVal,
    tuple_component,
)


class StepLimitError(CspError):
    """Search exceeded the caller-imposed node budget."""


FIRST = 0
SECOND = 1


class Arc(NamedTuple):
    """One revision task: prune `side`'s variable of constraint `index`
    against the constraint's other variable."""

    index: int
    side: int


def constraint_vars(c: BinConstraint) -> tuple[BinVar, BinVar]:
    """The constraint's two variables. For projections the hidden variable
    comes first, the original variable second; the two are always distinct."""
    if isinstance(c, BasicConstraint):
        return (OVar(c.x), OVar(c.y))
    return (HVar(c.op, c.arity, c.scope), OVar(c.var))


def interp_binary(
    c: BinConstraint, vx: BinValue, vy: BinValue, reg: InterpRegistry
) -> bool:
    """Decide a binary constraint on a concrete value pair.

    ``vx`` belongs to the constraint's first variable, ``vy`` to its second.
    Value shapes are validated: projections require a tuple of the declared
    arity on the first position and a raw value on the second.
    """
    if isinstance(c, BasicConstraint):
        if not isinstance(vx, RawVal) or not isinstance(vy, RawVal):
            raise ContractError(f"basic constraint {c.op!r} applied to non-raw values")
        return bool(reg.basic(c.op)(vx.value, vy.value))
    if not isinstance(vx, TupleVal) or vx.arity != c.arity or len(vx.items) != c.arity:
        raise ContractError(
            f"projection {c.op!r}[{c.index}] expects a width-{c.arity} tuple value"
        )
    if not isinstance(vy, RawVal):
        raise ContractError(f"projection {c.op!r}[{c.index}] expects a raw value")
    return tuple_component(c.index, vx.items) == vy.value


def check_bin_network(net: BinNetwork, reg: InterpRegistry) -> CheckReport:
    """Well-formedness of a binary network: the domain map's keys, the
    declared variables and the variables occurring in constraints are the
    same set; no two constraints share the same variable pair; and the two
    variables of every constraint are distinct."""
    violations: list[Violation] = []
    declared = set(net.variables)
    dom_keys = set(net.domains)
    used: set[BinVar] = set()
    for c in net.constraints:
        used.update(constraint_vars(c))
    if not (used == declared == dom_keys):
        violations.append(
            Violation(
                "variables",
                None,
                f"{len(used)} in constraints, {len(declared)} declared, "
                f"{len(dom_keys)} domain entries; sets differ",
            )
        )
    seen: dict[frozenset, int] = {}
    for i, c in enumerate(net.constraints):
        u, w = constraint_vars(c)
        if u == w:
            violations.append(Violation("scope", i, f"both variables equal: {u}"))
        key = frozenset((u, w))
        if key in seen:
            violations.append(
                Violation(
                    "normalization", i, f"same variable pair as constraint {seen[key]}"
                )
            )
        else:
            seen[key] = i
    return CheckReport(not violations, tuple(violations))


@dataclass
class SearchStats:
    nodes: int = 0
    revise_calls: int = 0
    arcs_processed: int = 0


def _compile_check(c: BinConstraint, reg: InterpRegistry):
    # Bind the constraint's semantics once; revise calls this in its inner loop.
    if isinstance(c, BasicConstraint):
        pred = reg.basic(c.op)
        return lambda vx, vy: pred(vx.value, vy.value)
    index = c.index
    return lambda vx, vy: vx.items[index] == vy.value


@dataclass
class SolverState:
    """Working domains plus the AC3 worklist for one binary network.

    Shared, immutable context (compiled checks, incident-arc index, stats)
    is reused across branch copies; only the domains and worklist fork.
    """

    net: BinNetwork
    reg: InterpRegistry
    current: dict[BinVar, list[BinValue]] = field(default_factory=dict)
    worklist: deque = field(default_factory=deque)

    def __post_init__(self) -> None:
        if not self.current:
            self.current = {v: list(self.net.domains[v]) for v in self.net.variables}
        self._queued: set[Arc] = set()
        self._pairs = [constraint_vars(c) for c in self.net.constraints]
        self._checks = [_compile_check(c, self.reg) for c in self.net.constraints]
        # Arcs to re-examine when a variable's domain shrinks: those revising
        # the other end of every constraint the variable participates in.
        incident: dict[BinVar, list[Arc]] = {v: [] for v in self.net.variables}
        for i, (u, w) in enumerate(self._pairs):
            if w in incident:
                incident[w].append(Arc(i, FIRST))
            if u in incident:
                incident[u].append(Arc(i, SECOND))
        self._incident = incident
        self.stats = SearchStats()

    def enqueue(self, arc: Arc) -> None:
        if arc not in self._queued:
            self._queued.add(arc)
            self.worklist.append(arc)

    def pop(self) -> Arc:
        arc = self.worklist.popleft()
        self._queued.discard(arc)
        return arc

    def seed_all(self) -> None:
        """Queue every arc, in constraint order, first side then second."""
        for i in range(len(self.net.constraints)):
            self.enqueue(Arc(i, FIRST))
            self.enqueue(Arc(i, SECOND))

    def seed_var(self, v: BinVar) -> None:
        """Queue the arcs incident to ``v`` (those pruning its neighbours)."""
        for arc in self._incident.get(v, ()):
            self.enqueue(arc)

    def branch(self, var: BinVar, value: BinValue) -> "SolverState":
        """Child state with ``var`` fixed to ``value`` and a worklist seeded
        by its incident arcs. Domains are copied; context is shared."""
        child = SolverState.__new__(SolverState)
        child.net = self.net
        child.reg = self.reg
        child.current = {v: list(d) for v, d in self.current.items()}
        child.current[var] = [value]
        child.worklist = deque()
        child._queued = set()
        child._pairs = self._pairs
        child._checks = self._checks
        child._incident = self._incident
        child.stats = self.stats
        child.seed_var(var)
        return child


def revise(state: SolverState, arc: Arc) -> tuple[bool, bool]:
    """Remove unsupported values from the arc's revised domain.

    A value survives iff some value of the opposite variable satisfies the
    constraint with it. Domain order is preserved. Returns (changed,
    emptied) where emptied means the domain just became empty.
    """
    state.stats.revise_calls += 1
    u, w = state._pairs[arc.index]
    check = state._checks[arc.index]
    if arc.side == FIRST:
        revised, other = u, w
        dom = state.current[revised]
        opp = state.current[other]
        kept = [v for v in dom if any(check(v, o) for o in opp)]
    else:
        revised, other = w, u
        dom = state.current[revised]
        opp = state.current[other]
        kept = [v for v in dom if any(check(o, v) for o in opp)]
    if len(kept) == len(dom):
        return False, False
    state.current[revised] = kept
    return True, not kept


def propagate(state: SolverState) -> bool:
    """Run AC3 to fixpoint on the state's worklist.

    Pops arcs, revises, and on any change re-queues the arcs incident to
    the shrunk variable, except the one through the constraint just
    processed (its support is symmetric, so nothing new can be pruned).
    Returns False as soon as a domain empties; True means every remaining
    value has a support on every incident constraint.
    """
    while state.worklist:
        arc = state.pop()
        state.stats.arcs_processed += 1
        changed, emptied = revise(state, arc)
        if emptied:
            return False
        if changed:
            u, w = state._pairs[arc.index]
            revised_var = u if arc.side == FIRST else w
            for nxt in state._incident.get(revised_var, ()):
                if nxt.index != arc.index:
                    state.enqueue(nxt)
    return True


def _search(state: SolverState, max_nodes: int | None):
    if not propagate(state):
        return None
    best: BinVar | None = None
    best_size = 0
    for v in state.net.variables:
        size = len(state.current[v])
        if size != 1 and (best is None or size < best_size):
            best, best_size = v, size
    if best is None:
        return {v: state.current[v][0] for v in state.net.variables}
    for value in list(state.current[best]):
        state.stats.nodes += 1
        if max_nodes is not None and state.stats.nodes > max_nodes:
            raise StepLimitError(f"node budget {max_nodes} exhausted")
        result = _search(state.branch(best, value), max_nodes)
        if result is not None:
            return result
    return None


def solve_bin(
    net: BinNetwork,
    reg: InterpRegistry,
    max_nodes: int | None = None,
    stats: SearchStats | None = None,
) -> dict[BinVar, BinValue] | None:
    """Find one solution of a binary network, or None when none exists.

    The caller is responsible for passing a well-formed network (see
    ``check_bin_network``); behaviour on ill-formed input is unspecified.
    """
    state = SolverState(net, reg)
    if stats is not None:
        state.stats = stats
    state.seed_all()
    return _search(state, max_nodes)
