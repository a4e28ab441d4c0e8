"""Data model for finite-domain constraint networks.

A network couples a variable list, a finite integer domain per variable, and
a constraint list. Constraint semantics live outside the network in an
InterpRegistry keyed by symbolic ids, which keeps networks serializable and
structurally comparable. The structures are deliberately permissive:
ill-formed networks are representable, and ``check_network`` reports exactly
what is wrong instead of construction failing.
"""

from collections.abc import Callable, Iterable
from dataclasses import dataclass


class CspError(Exception):
    """Base class for errors raised by this package."""


class RegistryError(CspError):
    """An interpretation registration was rejected."""


class ContractError(CspError):
    """A documented precondition was violated by the caller."""


# Partial assignment of original variables to integer values.
Assignment = dict[str, int]

Domain = tuple[int, ...]


def make_domain(values: Iterable[int]) -> Domain:
    """Normalize values into a strictly ascending, duplicate-free domain."""
    return tuple(sorted(set(values)))


@dataclass(frozen=True)
class BasicConstraint:
    """Binary constraint between two variables, resolved through the registry."""

    op: str
    x: str
    y: str


@dataclass(frozen=True)
class Nary:
    """Constraint over three or more variables, resolved through the registry.

    The arity is explicit and deliberately unchecked against the scope here;
    ``check_network`` reports mismatches rather than construction failing.
    """

    op: str
    arity: int
    scope: tuple[str, ...]


Constraint = BasicConstraint | Nary


def constraint_scope(c: Constraint) -> tuple[str, ...]:
    """The constraint's variables, in declaration order."""
    if isinstance(c, BasicConstraint):
        return (c.x, c.y)
    return c.scope


@dataclass
class Network:
    """A finite-domain constraint network (any mix of binary and n-ary)."""

    variables: tuple[str, ...]
    domains: dict[str, Domain]
    constraints: tuple[Constraint, ...]


@dataclass(frozen=True)
class Extension:
    """Extensional semantics: the exact table of accepted value tuples."""

    table: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Intention:
    """Intensional semantics: a total predicate over a scope-ordered value tuple."""

    pred: Callable[[tuple[int, ...]], bool]


Interpretation = Extension | Intention


@dataclass
class OpEntry:
    arity: int
    interp: Interpretation
    expr_source: str | None = None


@dataclass
class BasicEntry:
    pred: Callable[[int, int], bool]
    expr_source: str | None = None
    table: tuple[tuple[int, ...], ...] | None = None


class InterpRegistry:
    """Resolves constraint ids to their semantics.

    N-ary ids get exactly one entry each, checked against the arity at
    lookup time. Extensional tables are validated eagerly at registration:
    every row must have exactly the registered arity and rows must be
    duplicate-free. Binary (basic) ids map to predicates over value pairs.

    Entries may carry printable sources (a functional expression or a raw
    table) so that parsed or generated models can be written back out.
    """

    def __init__(self) -> None:
        self._ops: dict[str, OpEntry] = {}
        self._basic: dict[str, BasicEntry] = {}

    def add_op(
        self,
        op: str,
        arity: int,
        interp: Interpretation,
        expr_source: str | None = None,
    ) -> None:
        if op in self._ops:
            raise RegistryError(f"op {op!r} registered twice")
        if arity < 1:
            raise RegistryError(f"op {op!r}: arity must be positive, got {arity}")
        if isinstance(interp, Extension):
            seen = set()
            for row in interp.table:
                if len(row) != arity:
                    raise RegistryError(
                        f"op {op!r}: table row {row} has width {len(row)}, expected {arity}"
                    )
                if row in seen:
                    raise RegistryError(f"op {op!r}: duplicate table row {row}")
                seen.add(row)
        self._ops[op] = OpEntry(arity, interp, expr_source)

    def add_basic(
        self,
        op: str,
        pred: Callable[[int, int], bool],
        expr_source: str | None = None,
        table: tuple[tuple[int, ...], ...] | None = None,
    ) -> None:
        if op in self._basic:
            raise RegistryError(f"basic op {op!r} registered twice")
        if table is not None:
            seen = set()
            for row in table:
                if len(row) != 2:
                    raise RegistryError(
                        f"basic op {op!r}: table row {row} has width {len(row)}, expected 2"
                    )
                if row in seen:
                    raise RegistryError(f"basic op {op!r}: duplicate table row {row}")
                seen.add(row)
        self._basic[op] = BasicEntry(pred, expr_source, table)

    def has_op(self, op: str, arity: int) -> bool:
        entry = self._ops.get(op)
        return entry is not None and entry.arity == arity

    def has_basic(self, op: str) -> bool:
        return op in self._basic

    def op(self, op: str, arity: int) -> Interpretation:
        entry = self._ops.get(op)
        if entry is None or entry.arity != arity:
            raise ContractError(f"unresolved op {op!r} at arity {arity}")
        return entry.interp

    def basic(self, op: str) -> Callable[[int, int], bool]:
        entry = self._basic.get(op)
        if entry is None:
            raise ContractError(f"unresolved basic op {op!r}")
        return entry.pred

    def op_entry(self, op: str) -> OpEntry:
        entry = self._ops.get(op)
        if entry is None:
            raise ContractError(f"unresolved op {op!r}")
        return entry

    def basic_entry(self, op: str) -> BasicEntry:
        entry = self._basic.get(op)
        if entry is None:
            raise ContractError(f"unresolved basic op {op!r}")
        return entry


@dataclass(frozen=True)
class Violation:
    """One well-formedness failure: what kind, where, and why."""

    kind: str  # variables | normalization | scope | arity | interpretation
    index: int | None  # constraint index when the failure is per-constraint
    message: str


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    violations: tuple[Violation, ...]


def check_network(net: Network, reg: InterpRegistry) -> CheckReport:
    """Well-formedness check for an n-ary network.

    Passing requires: (a) variables occurring in constraints, declared
    variables and domain-map keys are the same set; (b) no two constraints
    hold over the same variable set; (c) every scope is duplicate-free;
    (d) every n-ary constraint has matching scope length and arity > 2;
    (e) every constraint id resolves in the registry. Violations are data,
    never exceptions.
    """
    violations: list[Violation] = []

    declared = set(net.variables)
    dom_keys = set(net.domains)
    used: set[str] = set()
    for c in net.constraints:
        used.update(constraint_scope(c))
    if not (used == declared == dom_keys):
        parts = []
        if used != declared:
            parts.append(
                f"constraint variables {sorted(used)} != declared {sorted(declared)}"
            )
        if declared != dom_keys:
            parts.append(
                f"declared {sorted(declared)} != domain keys {sorted(dom_keys)}"
            )
        violations.append(Violation("variables", None, "; ".join(parts)))

    seen_scopes: dict[frozenset[str], int] = {}
    for i, c in enumerate(net.constraints):
        scope = constraint_scope(c)
        if len(set(scope)) != len(scope):
            violations.append(
                Violation("scope", i, f"repeated variable in scope {list(scope)}")
            )
        key = frozenset(scope)
        if key in seen_scopes:
            violations.append(
                Violation(
                    "normalization",
                    i,
                    f"same variable set as constraint {seen_scopes[key]}: {sorted(key)}",
                )
            )
        else:
            seen_scopes[key] = i
        if isinstance(c, Nary):
            if len(c.scope) != c.arity:
                violations.append(
                    Violation(
                        "arity",
                        i,
                        f"scope length {len(c.scope)} != arity {c.arity}",
                    )
                )
            if c.arity <= 2:
                violations.append(
                    Violation("arity", i, f"n-ary arity must exceed 2, got {c.arity}")
                )
            if not reg.has_op(c.op, c.arity):
                violations.append(
                    Violation(
                        "interpretation",
                        i,
                        f"op {c.op!r} unresolved at arity {c.arity}",
                    )
                )
        else:
            if not reg.has_basic(c.op):
                violations.append(
                    Violation("interpretation", i, f"basic op {c.op!r} unresolved")
                )
    return CheckReport(not violations, tuple(violations))


def eval_constraint(c: Constraint, reg: InterpRegistry, a: Assignment) -> bool:
    """Decide one constraint under an assignment covering its whole scope.

    Raises ContractError when a scope variable is unassigned or the
    constraint id does not resolve.
    """
    scope = constraint_scope(c)
    try:
        vals = tuple(a[v] for v in scope)
    except KeyError as e:
        raise ContractError(f"variable {e.args[0]!r} unassigned for {c}") from None
    if isinstance(c, BasicConstraint):
        return bool(reg.basic(c.op)(vals[0], vals[1]))
    interp = reg.op(c.op, c.arity)
    if isinstance(interp, Extension):
        return vals in interp.table
    return bool(interp.pred(vals))


def is_solution(a: Assignment, net: Network, reg: InterpRegistry) -> bool:
    """True iff ``a`` is total over the network, in-domain, and satisfies
    every constraint. Extra bindings beyond the declared variables are
    ignored."""
    for v in net.variables:
        if v not in a or a[v] not in net.domains.get(v, ()):
            return False
    return all(eval_constraint(c, reg, a) for c in net.constraints)
