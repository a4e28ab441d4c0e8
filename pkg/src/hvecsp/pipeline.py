"""End-to-end solving plus the test harness around it.

``solve`` composes the hidden variable encoding, the binary solver and the
solution decoding, rejecting ill-formed input up front. The module also
hosts the brute-force enumeration oracles used to cross-check the solver
and the seeded random network generator that drives the property suites.
"""

import itertools
import math
import random
from dataclasses import dataclass

from . import predexpr
from .encode import (
    BinAssignment,
    BinNetwork,
    HVar,
    OVar,
    decode_solution,
    encode_network,
    expand,
)
from .model import (
    Assignment,
    BasicConstraint,
    CheckReport,
    ContractError,
    CspError,
    Extension,
    Intention,
    InterpRegistry,
    Nary,
    Network,
    check_network,
    constraint_scope,
    make_domain,
)
from .predexpr import Call, Lit, Param
from .solver import SearchStats, solve_bin


class IllFormedNetworkError(CspError):
    """Solving was refused because the input network is ill-formed."""

    def __init__(self, report: CheckReport):
        self.report = report
        lines = "; ".join(
            f"[{v.kind}{'' if v.index is None else f' #{v.index}'}] {v.message}"
            for v in report.violations
        )
        super().__init__(f"ill-formed network: {lines}")


class OracleLimitError(CspError):
    """Enumeration refused: the assignment space exceeds the cap."""


DEFAULT_ORACLE_CAP = 10_000_000


def solve(
    net: Network,
    reg: InterpRegistry,
    max_nodes: int | None = None,
    stats: SearchStats | None = None,
) -> Assignment | None:
    """Solve an n-ary network; returns one solution or None when UNSAT.

    Ill-formed networks are rejected with IllFormedNetworkError before any
    solving happens. On well-formed input the encoding cannot fail; if it
    ever did, that would be an internal fault, reported as ContractError.
    """
    report = check_network(net, reg)
    if not report.ok:
        raise IllFormedNetworkError(report)
    bin_net = encode_network(net, reg)
    if bin_net is None:
        raise ContractError("encoding failed on a well-formed network")
    result = solve_bin(bin_net, reg, max_nodes=max_nodes, stats=stats)
    if result is None:
        return None
    return decode_solution(result, net.variables)


def _assignment_space(sizes: list[int], cap: int) -> int:
    total = math.prod(sizes)
    if total > cap:
        raise OracleLimitError(
            f"assignment space {total} exceeds the oracle cap {cap}"
        )
    return total


def enumerate_solutions(
    net: Network, reg: InterpRegistry, cap: int = DEFAULT_ORACLE_CAP
) -> list[Assignment]:
    """All solutions, by checking every total assignment.

    Assignments are enumerated lexicographically: variables in declared
    order, the leftmost varying slowest, each domain in its own order.
    Exceeding the cap raises instead of silently truncating.
    """
    domains = [net.domains.get(v, ()) for v in net.variables]
    _assignment_space([len(d) for d in domains], cap)
    checks = []
    for c in net.constraints:
        if isinstance(c, BasicConstraint):
            xi = net.variables.index(c.x)
            yi = net.variables.index(c.y)
            pred = reg.basic(c.op)
            checks.append(lambda vals, p=pred, a=xi, b=yi: p(vals[a], vals[b]))
        else:
            idxs = tuple(net.variables.index(v) for v in c.scope)
            interp = reg.op(c.op, c.arity)
            if isinstance(interp, Extension):
                table = set(interp.table)
                checks.append(
                    lambda vals, t=table, ix=idxs: tuple(vals[i] for i in ix) in t
                )
            else:
                checks.append(
                    lambda vals, p=interp.pred, ix=idxs: p(
                        tuple(vals[i] for i in ix)
                    )
                )
    solutions = []
    for combo in itertools.product(*domains):
        if all(check(combo) for check in checks):
            solutions.append(dict(zip(net.variables, combo)))
    return solutions


def enumerate_bin_solutions(
    net: BinNetwork, reg: InterpRegistry, cap: int = DEFAULT_ORACLE_CAP
) -> list[BinAssignment]:
    """Binary-side analogue of ``enumerate_solutions``, over encoded values."""
    domains = [net.domains.get(v, ()) for v in net.variables]
    _assignment_space([len(d) for d in domains], cap)
    index = {v: i for i, v in enumerate(net.variables)}
    checks = []
    for c in net.constraints:
        if isinstance(c, BasicConstraint):
            a, b = index[OVar(c.x)], index[OVar(c.y)]
            pred = reg.basic(c.op)
            checks.append(lambda vals, p=pred, i=a, j=b: p(vals[i].value, vals[j].value))
        else:
            a = index[HVar(c.op, c.arity, c.scope)]
            b = index[OVar(c.var)]
            k = c.index
            checks.append(
                lambda vals, i=a, j=b, n=k: vals[i].items[n] == vals[j].value
            )
    solutions = []
    for combo in itertools.product(*domains):
        if all(check(combo) for check in checks):
            solutions.append(dict(zip(net.variables, combo)))
    return solutions


@dataclass(frozen=True)
class GenConfig:
    """Shape of randomly generated networks; identical seeds give identical
    networks. Ranges are inclusive."""

    seed: int = 0
    var_count: tuple[int, int] = (2, 6)
    domain_size: tuple[int, int] = (1, 4)
    constraint_count: tuple[int, int] = (1, 5)
    arity: tuple[int, int] = (2, 4)
    extensional_fraction: float = 0.4
    unsat_fraction: float = 0.25
    # Resample networks whose encoded assignment space is larger than this,
    # keeping brute-force cross-checks affordable. None disables the bound.
    max_image_space: int | None = None

    def __post_init__(self) -> None:
        for name in ("var_count", "domain_size", "constraint_count", "arity"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise ValueError(f"empty {name} range ({lo}, {hi})")
        if self.arity[0] < 2:
            raise ValueError("arity must be at least 2")


_COMPARES = ("eq", "ne", "le", "lt", "ge", "gt")


def _linear_expr(coeffs: list[int], rel: str, bound: int) -> predexpr.Expr:
    terms = []
    for i, c in enumerate(coeffs):
        p = Param(f"X{i}")
        if c == 1:
            terms.append(p)
        elif c == -1:
            terms.append(Call("neg", (p,)))
        else:
            terms.append(Call("mul", (Lit(c), p)))
    acc = terms[0]
    for t in terms[1:]:
        acc = Call("add", (acc, t))
    return Call(rel, (acc, Lit(bound)))


def _linear_bounds(coeffs: list[int], doms: list[tuple[int, ...]]) -> tuple[int, int]:
    lo = sum(min(c * d[0], c * d[-1]) for c, d in zip(coeffs, doms))
    hi = sum(max(c * d[0], c * d[-1]) for c, d in zip(coeffs, doms))
    return lo, hi


def _fresh_scope(
    rng: random.Random,
    variables: list[str],
    k: int,
    used: set[frozenset],
    tries: int = 30,
) -> tuple[str, ...] | None:
    for _ in range(tries):
        scope = tuple(rng.sample(variables, k))
        if frozenset(scope) not in used:
            used.add(frozenset(scope))
            return scope
    return None


def _build_network(
    rng: random.Random, cfg: GenConfig
) -> tuple[Network, InterpRegistry, int]:
    n = rng.randint(*cfg.var_count)
    names = [f"v{i}" for i in range(n)]
    domains: dict[str, tuple[int, ...]] = {}
    for name in names:
        size = rng.randint(*cfg.domain_size)
        lo = rng.randint(-3, 3)
        domains[name] = make_domain(rng.sample(range(lo, lo + size + 3), size))

    reg = InterpRegistry()
    constraints = []
    used_scopes: set[frozenset] = set()
    dual_sizes: list[int] = []

    def add_constraint(scope: tuple[str, ...], force_unsat: bool = False) -> None:
        k = len(scope)
        ident = f"c{len(constraints)}"
        doms = [domains[v] for v in scope]
        if k == 2:
            if force_unsat:
                expr = Call("lt", (Param("X0"), Param("X0")))
            elif rng.random() < 0.5:
                expr = Call(rng.choice(_COMPARES), (Param("X0"), Param("X1")))
            else:
                coeffs = [rng.choice((-2, -1, 1, 2)) for _ in range(2)]
                lo, hi = _linear_bounds(coeffs, doms)
                rel = "eq" if rng.random() < 0.7 else "ge"
                expr = _linear_expr(coeffs, rel, rng.randint(lo, hi))
            pred = predexpr.compile_predicate(expr, ("X0", "X1"))
            reg.add_basic(ident, lambda x, y, p=pred: p((x, y)),
                          expr_source=predexpr.to_source(expr))
            constraints.append(BasicConstraint(ident, scope[0], scope[1]))
            return
        params = tuple(f"X{i}" for i in range(k))
        extensional = not force_unsat and rng.random() < cfg.extensional_fraction
        if extensional:
            rows = list(itertools.product(*doms))
            count = rng.randint(1, min(8, len(rows)))
            table = tuple(sorted(rng.sample(rows, count)))
            reg.add_op(ident, k, Extension(table))
        else:
            coeffs = [rng.choice((-2, -1, 1, 2)) for _ in range(k)]
            lo, hi = _linear_bounds(coeffs, doms)
            if force_unsat:
                expr = _linear_expr(coeffs, "eq", hi + 1)
            else:
                rel = "eq" if rng.random() < 0.7 else "ge"
                expr = _linear_expr(coeffs, rel, rng.randint(lo, hi))
            pred = predexpr.compile_predicate(expr, params)
            reg.add_op(ident, k, Intention(pred),
                       expr_source=predexpr.to_source(expr))
        constraints.append(Nary(ident, k, scope))
        tuples = expand(ident, k, scope, domains, reg)
        dual_sizes.append(len(tuples or ()))

    # Cover every variable first so the network is well-formed, then top up
    # with extra constraints until the drawn count is reached. Variables
    # that cannot be covered (scope collisions, too few variables) are
    # dropped from the network at the end.
    target = rng.randint(*cfg.constraint_count)
    if n >= 2:
        order = rng.sample(names, n)
        pos = 0
        while pos < n:
            k = min(rng.randint(*cfg.arity), n)
            chunk = order[pos:pos + k]
            pos += len(chunk)
            scope = None
            for _ in range(30):
                pad = (rng.sample([v for v in names if v not in chunk],
                                  k - len(chunk))
                       if len(chunk) < k else [])
                cand = tuple(chunk + pad)
                if frozenset(cand) not in used_scopes:
                    used_scopes.add(frozenset(cand))
                    scope = cand
                    break
            if scope is not None:
                add_constraint(scope)
        while len(constraints) < target:
            k = min(rng.randint(*cfg.arity), n)
            scope = _fresh_scope(rng, names, k, used_scopes)
            if scope is None:
                break
            add_constraint(scope)
        if rng.random() < cfg.unsat_fraction:
            k = 3 if cfg.arity[1] >= 3 and n >= 3 else 2
            scope = _fresh_scope(rng, names, k, used_scopes)
            if scope is not None:
                add_constraint(scope, force_unsat=True)

    covered: set[str] = set()
    for c in constraints:
        covered.update(constraint_scope(c))
    keep = tuple(v for v in names if v in covered)
    kept_domains = {v: domains[v] for v in keep}
    image_space = math.prod(len(d) for d in kept_domains.values())
    image_space *= math.prod(dual_sizes) if dual_sizes else 1
    return Network(keep, kept_domains, tuple(constraints)), reg, image_space


def random_network(cfg: GenConfig) -> tuple[Network, InterpRegistry]:
    """Generate a well-formed network (and its registry) from a seed.

    Construction guarantees well-formedness: fresh distinct variables,
    normalized scopes, matching arities, registered interpretations, and
    every variable covered by some constraint. Roughly a quarter of the
    networks get one unsatisfiable linear constraint so UNSAT paths are
    exercised. When ``max_image_space`` is set, oversized networks are
    resampled deterministically.
    """
    rng = random.Random(cfg.seed)
    for _ in range(200):
        net, reg, image_space = _build_network(rng, cfg)
        if cfg.max_image_space is None or image_space <= cfg.max_image_space:
            return net, reg
    raise CspError(
        f"could not generate a network within max_image_space={cfg.max_image_space}"
    )
