"""Hidden variable encoding: rewrite an n-ary network as an equivalent binary one.

Every n-ary constraint becomes a hidden (dual) variable whose domain is the
constraint's satisfying tuples, tied back to the original variables by one
projection constraint per scope position. Binary constraints pass through
unchanged. Solutions translate both ways without loss.
"""

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

from .model import (
    BasicConstraint,
    Constraint,
    ContractError,
    Domain,
    Extension,
    InterpRegistry,
    Nary,
    Network,
)

# Hidden-variable values are fixed-width integer tuples with O(1) access.
ValueTuple = tuple[int, ...]


def make_tuple(values: Sequence[int]) -> ValueTuple:
    """Pack a value sequence into a tuple, preserving order and length."""
    return tuple(values)


def tuple_values(n: int, t: ValueTuple) -> list[int]:
    """Unpack a tuple of known width ``n`` back into a list."""
    if n != len(t):
        raise ContractError(f"tuple width {len(t)} != expected {n}")
    return list(t)


def tuple_component(i: int, t: ValueTuple) -> int:
    """The i-th component (0-based); out-of-range indices are a caller fault."""
    if not 0 <= i < len(t):
        raise ContractError(f"component {i} out of range for width {len(t)}")
    return t[i]


@dataclass(frozen=True)
class OVar:
    """A variable carried over from the original network."""

    name: str


@dataclass(frozen=True)
class HVar:
    """The hidden variable standing in for one n-ary constraint."""

    op: str
    arity: int
    scope: tuple[str, ...]


BinVar = OVar | HVar


@dataclass(frozen=True)
class RawVal:
    """An original variable's value."""

    value: int


@dataclass(frozen=True)
class TupleVal:
    """A hidden variable's value: one satisfying tuple of its constraint."""

    arity: int
    items: ValueTuple


BinValue = RawVal | TupleVal


@dataclass(frozen=True)
class Proj:
    """Projection constraint: component ``index`` of the hidden variable's
    tuple must equal the value of original variable ``var``."""

    op: str
    arity: int
    scope: tuple[str, ...]
    index: int
    var: str


BinConstraint = BasicConstraint | Proj


@dataclass
class BinNetwork:
    """The binary network consumed by the solver."""

    variables: tuple[BinVar, ...]
    domains: dict[BinVar, tuple[BinValue, ...]]
    constraints: tuple[BinConstraint, ...]


def var_sort_key(v: BinVar) -> tuple:
    """Total order over encoded variables: originals first, then hidden."""
    if isinstance(v, OVar):
        return (0, v.name)
    return (1, v.op, v.arity, v.scope)


def value_sort_key(v: BinValue) -> tuple:
    """Total order over encoded values: raw values first, then tuples."""
    if isinstance(v, RawVal):
        return (0, v.value)
    return (1, v.arity, v.items)


def expand(
    op: str,
    arity: int,
    scope: tuple[str, ...],
    domains: dict[str, Domain],
    reg: InterpRegistry,
) -> list[ValueTuple] | None:
    """Compute a hidden variable's domain: the satisfying tuples over its scope.

    Intensional ops enumerate the cartesian product of the scope domains in
    scope order (leftmost variable slowest, each domain in ascending order)
    and keep the tuples the predicate accepts. Extensional ops copy the
    registered table in order, dropping rows with any component outside the
    corresponding variable's current domain. Returns None when a scope
    variable has no domain entry; that is the only failure mode.
    """
    try:
        doms = [domains[v] for v in scope]
    except KeyError:
        return None
    interp = reg.op(op, arity)
    if isinstance(interp, Extension):
        return [
            row
            for row in interp.table
            if all(val in dom for val, dom in zip(row, doms))
        ]
    return [t for t in itertools.product(*doms) if interp.pred(t)]


DualPair = tuple[HVar, list[ValueTuple]]


def encode_constraints(
    constraints: Sequence[Constraint],
    domains: dict[str, Domain],
    reg: InterpRegistry,
) -> tuple[list[BinConstraint], list[DualPair]] | None:
    """Encode a constraint list, collecting the hidden variables on the way.

    Binary constraints pass through. Each n-ary constraint contributes its
    hidden variable paired with the expanded tuple domain, plus one
    projection constraint per scope position, in position order. Returns
    None iff some scope variable lacks a domain entry.
    """
    out: list[BinConstraint] = []
    duals: list[DualPair] = []
    for c in constraints:
        if isinstance(c, BasicConstraint):
            out.append(c)
            continue
        tuples = expand(c.op, c.arity, c.scope, domains, reg)
        if tuples is None:
            return None
        duals.append((HVar(c.op, c.arity, c.scope), tuples))
        out.extend(
            Proj(c.op, c.arity, c.scope, i, v) for i, v in enumerate(c.scope)
        )
    return out, duals


def extend_domains(
    raw: dict[BinVar, tuple[BinValue, ...]], duals: Sequence[DualPair]
) -> dict[BinVar, tuple[BinValue, ...]]:
    """Extend a raw-value domain map with tuple domains for hidden variables."""
    doms = dict(raw)
    for hv, tuples in duals:
        doms[hv] = tuple(TupleVal(hv.arity, t) for t in tuples)
    return doms


def encode_network(net: Network, reg: InterpRegistry) -> BinNetwork | None:
    """Translate an n-ary network into its hidden-variable binary encoding.

    The encoded variable list is the original variables (wrapped, in order)
    followed by the hidden variables (in constraint order). Returns None
    exactly when ``encode_constraints`` does; on well-formed input that
    never happens.
    """
    encoded = encode_constraints(net.constraints, net.domains, reg)
    if encoded is None:
        return None
    constraints, duals = encoded
    raw: dict[BinVar, tuple[BinValue, ...]] = {
        OVar(v): tuple(RawVal(x) for x in net.domains.get(v, ()))
        for v in net.variables
    }
    variables = tuple(OVar(v) for v in net.variables) + tuple(hv for hv, _ in duals)
    return BinNetwork(variables, extend_domains(raw, duals), tuple(constraints))


BinAssignment = dict[BinVar, BinValue]


def encode_solution(a: dict[str, int], net: Network) -> BinAssignment:
    """Map a total assignment of the original network onto the encoded
    variables: originals keep their value, each hidden variable gets the
    tuple its constraint's scope takes under ``a``."""
    out: BinAssignment = {}
    try:
        for v in net.variables:
            out[OVar(v)] = RawVal(a[v])
        for c in net.constraints:
            if isinstance(c, Nary):
                items = make_tuple([a[v] for v in c.scope])
                out[HVar(c.op, c.arity, c.scope)] = TupleVal(c.arity, items)
    except KeyError as e:
        raise ContractError(
            f"assignment not total: variable {e.args[0]!r} missing"
        ) from None
    return out


def decode_solution(b: BinAssignment, variables: Sequence[str]) -> dict[str, int]:
    """Read original-variable values back out of a binary assignment,
    dropping hidden-variable bindings. A missing or tuple-valued binding for
    an original variable signals a solver contract violation."""
    out: dict[str, int] = {}
    for name in variables:
        val = b.get(OVar(name))
        if not isinstance(val, RawVal):
            raise ContractError(f"missing or non-raw binding for variable {name!r}")
        out[name] = val.value
    return out
