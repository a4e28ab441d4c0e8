"""Instance ingestion: XCSP 2.1 XML subset and a native line format.

Supported XCSP 2.1 features: integer domains (enumerations and lo..hi
ranges), extensional relations with supports/conflicts semantics, and
intensional predicates over the functional expression grammar of
``predexpr``. Soft constraints, global constraints and anything else
produce an explicit "unsupported" diagnostic rather than a silent skip.

Native format, one declaration per line, ``#`` starts a comment:

    var <name> <v1> <v2> ...        enumerated domain
    var <name> <lo>..<hi>           range domain (forms may be mixed)
    table <name> <arity> <row>;<row>;...   rows are space-separated ints
    con <name> ext <table> <scope...>
    con <name> int <expr> <scope...>       expr is whitespace-free,
                                           X0..Xk-1 name scope positions

Arity-2 constraints lower to basic binary constraints, everything wider to
n-ary constraints backed by the registry; constraint names become the
registry ids.
"""

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from . import predexpr
from .model import (
    BasicConstraint,
    CspError,
    Extension,
    Intention,
    InterpRegistry,
    Nary,
    Network,
    RegistryError,
    check_network,
    make_domain,
)
from .pipeline import IllFormedNetworkError


class ParseError(CspError):
    """Malformed input, with positional or element context when available."""

    def __init__(self, message: str, line: int | None = None, context: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if context:
            where.append(context)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.context = context


@dataclass
class LoweringStats:
    """Counters collected while lowering an instance."""

    variables: int = 0
    constraints: int = 0
    extensional: int = 0
    intensional: int = 0
    div_zero_events: int = 0


def _parse_values(tokens: list[str], line: int | None = None,
                  context: str | None = None) -> list[int]:
    values: list[int] = []
    for tok in tokens:
        if ".." in tok:
            lo_txt, _, hi_txt = tok.partition("..")
            try:
                lo, hi = int(lo_txt), int(hi_txt)
            except ValueError:
                raise ParseError(f"bad range {tok!r}", line, context) from None
            if lo > hi:
                raise ParseError(f"empty range {tok!r}", line, context)
            values.extend(range(lo, hi + 1))
        else:
            try:
                values.append(int(tok))
            except ValueError:
                raise ParseError(f"bad integer {tok!r}", line, context) from None
    return values


def _parse_rows(text: str, arity: int, line: int | None = None,
                context: str | None = None, sep: str = ";") -> tuple[tuple[int, ...], ...]:
    rows = []
    for seg in text.split(sep):
        seg = seg.strip()
        if not seg:
            continue
        try:
            row = tuple(int(tok) for tok in seg.split())
        except ValueError:
            raise ParseError(f"bad tuple {seg!r}", line, context) from None
        if len(row) != arity:
            raise ParseError(
                f"tuple {seg!r} has {len(row)} components, expected {arity}",
                line,
                context,
            )
        rows.append(row)
    return tuple(rows)


# ---------------------------------------------------------------------------
# XCSP 2.1 subset


@dataclass
class XRelation:
    name: str
    arity: int
    semantics: str  # supports | conflicts
    rows: tuple[tuple[int, ...], ...]


@dataclass
class XPredicate:
    name: str
    params: tuple[str, ...]
    expr: predexpr.Expr


@dataclass
class XConstraint:
    name: str
    arity: int
    scope: tuple[str, ...]
    reference: str
    params: tuple[str, ...]  # effective parameters; empty means scope order


@dataclass
class XcspInstance:
    """A validated XCSP instance: every reference resolves, scopes are
    declared, arities are consistent."""

    domains: dict[str, tuple[int, ...]] = field(default_factory=dict)
    variables: dict[str, str] = field(default_factory=dict)  # name -> domain
    relations: dict[str, XRelation] = field(default_factory=dict)
    predicates: dict[str, XPredicate] = field(default_factory=dict)
    constraints: list[XConstraint] = field(default_factory=list)


def parse_xcsp(text: str) -> XcspInstance:
    """Parse and validate an XCSP 2.1 document (the supported subset)."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        line, col = e.position
        raise ParseError(f"malformed XML: {e.msg}", line=line) from None
    if root.tag != "instance":
        raise ParseError(f"expected <instance> root, found <{root.tag}>")
    presentation = root.find("presentation")
    if presentation is not None:
        kind = presentation.get("type")
        if kind not in (None, "CSP"):
            raise ParseError(
                f"unsupported feature: instance type {kind!r}",
                context="<presentation>",
            )

    inst = XcspInstance()

    for dom in root.iter("domain"):
        name = dom.get("name")
        if not name:
            raise ParseError("domain without a name", context="<domains>")
        ctx = f"domain {name!r}"
        values = _parse_values((dom.text or "").split(), context=ctx)
        nb = dom.get("nbValues")
        if nb is not None and int(nb) != len(values):
            raise ParseError(
                f"nbValues={nb} but {len(values)} values listed", context=ctx
            )
        inst.domains[name] = make_domain(values)

    for var in root.iter("variable"):
        name, domref = var.get("name"), var.get("domain")
        ctx = f"variable {name!r}"
        if not name or not domref:
            raise ParseError("variable needs name and domain", context=ctx)
        if domref not in inst.domains:
            raise ParseError(f"unknown domain {domref!r}", context=ctx)
        if name in inst.variables:
            raise ParseError("duplicate variable name", context=ctx)
        inst.variables[name] = domref

    for rel in root.iter("relation"):
        name = rel.get("name")
        ctx = f"relation {name!r}"
        if not name:
            raise ParseError("relation without a name", context="<relations>")
        semantics = rel.get("semantics", "supports")
        if semantics not in ("supports", "conflicts"):
            raise ParseError(f"unsupported semantics {semantics!r}", context=ctx)
        try:
            arity = int(rel.get("arity", ""))
        except ValueError:
            raise ParseError("missing or bad arity", context=ctx) from None
        rows = _parse_rows(rel.text or "", arity, context=ctx, sep="|")
        nb = rel.get("nbTuples")
        if nb is not None and int(nb) != len(rows):
            raise ParseError(f"nbTuples={nb} but {len(rows)} rows listed", context=ctx)
        inst.relations[name] = XRelation(name, arity, semantics, rows)

    for pred in root.iter("predicate"):
        name = pred.get("name")
        ctx = f"predicate {name!r}"
        if not name:
            raise ParseError("predicate without a name", context="<predicates>")
        par_el = pred.find("parameters")
        if par_el is None:
            raise ParseError("predicate without <parameters>", context=ctx)
        tokens = (par_el.text or "").split()
        if len(tokens) % 2 != 0 or any(t != "int" for t in tokens[::2]):
            raise ParseError("parameters must be 'int NAME' pairs", context=ctx)
        params = tuple(tokens[1::2])
        expr_el = pred.find("expression/functional")
        if expr_el is None or not (expr_el.text or "").strip():
            raise ParseError("predicate without <functional> expression", context=ctx)
        try:
            expr = predexpr.parse_expression(expr_el.text, params)
        except predexpr.ExprError as e:
            raise ParseError(str(e), context=ctx) from None
        inst.predicates[name] = XPredicate(name, params, expr)

    for con in root.iter("constraint"):
        name = con.get("name")
        ctx = f"constraint {name!r}"
        if not name:
            raise ParseError("constraint without a name", context="<constraints>")
        scope = tuple((con.get("scope") or "").split())
        if not scope:
            raise ParseError("constraint without a scope", context=ctx)
        for v in scope:
            if v not in inst.variables:
                raise ParseError(f"scope variable {v!r} not declared", context=ctx)
        try:
            arity = int(con.get("arity", str(len(scope))))
        except ValueError:
            raise ParseError("bad arity", context=ctx) from None
        if arity != len(scope):
            raise ParseError(
                f"arity {arity} != scope length {len(scope)}", context=ctx
            )
        ref = con.get("reference")
        if not ref:
            raise ParseError("constraint without a reference", context=ctx)
        if ref.startswith("global:"):
            raise ParseError(f"unsupported feature: global constraint {ref!r}",
                             context=ctx)
        params: tuple[str, ...] = ()
        par_el = con.find("parameters")
        if par_el is not None:
            params = tuple((par_el.text or "").split())
        if ref in inst.relations:
            if inst.relations[ref].arity != arity:
                raise ParseError(
                    f"relation {ref!r} has arity {inst.relations[ref].arity}, "
                    f"constraint has {arity}",
                    context=ctx,
                )
            if params:
                raise ParseError("relation reference takes no parameters", context=ctx)
        elif ref in inst.predicates:
            formals = inst.predicates[ref].params
            actuals = params or scope
            if len(actuals) != len(formals):
                raise ParseError(
                    f"predicate {ref!r} takes {len(formals)} parameters, "
                    f"got {len(actuals)}",
                    context=ctx,
                )
            for tok in actuals:
                if _is_int(tok):
                    continue
                if tok not in inst.variables:
                    raise ParseError(
                        f"effective parameter {tok!r} is neither a declared "
                        "variable nor an integer",
                        context=ctx,
                    )
                if tok not in scope:
                    raise ParseError(
                        f"effective parameter {tok!r} is not in the scope",
                        context=ctx,
                    )
            params = actuals
        else:
            raise ParseError(f"unresolved reference {ref!r}", context=ctx)
        inst.constraints.append(XConstraint(name, arity, scope, ref, params))

    return inst


def _is_int(tok: str) -> bool:
    try:
        int(tok)
        return True
    except ValueError:
        return False


def _bind_to_scope(expr: predexpr.Expr, formals: tuple[str, ...],
                   actuals: tuple[str, ...], scope: tuple[str, ...]) -> predexpr.Expr:
    """Rewrite a predicate body so its parameters are scope positions
    X0..Xk-1; integer effective parameters become literals."""
    mapping: dict[str, predexpr.Expr] = {}
    for formal, actual in zip(formals, actuals):
        if _is_int(actual):
            mapping[formal] = predexpr.Lit(int(actual))
        else:
            mapping[formal] = predexpr.Param(f"X{scope.index(actual)}")
    return predexpr.substitute(expr, mapping)


def lower_to_network(
    inst: XcspInstance,
    stats: LoweringStats | None = None,
    check: bool = True,
) -> tuple[Network, InterpRegistry]:
    """Lower a validated instance to a network plus its registry.

    Supports-relations become extensional tables verbatim; conflicts become
    negated-membership predicates; predicate references become predicates
    over scope positions. Arity-2 constraints lower to basic binary
    constraints. With ``check`` (the default), an ill-formed result is
    rejected with the offending well-formedness clauses.
    """
    if stats is None:
        stats = LoweringStats()
    reg = InterpRegistry()
    names = tuple(inst.variables)
    domains = {v: inst.domains[d] for v, d in inst.variables.items()}
    constraints = []
    stats.variables = len(names)

    def count_div_zero() -> None:
        stats.div_zero_events += 1

    for con in inst.constraints:
        ident = con.name
        scope = con.scope
        k = con.arity
        if con.reference in inst.relations:
            rel = inst.relations[con.reference]
            stats.extensional += 1
            if k == 2:
                rowset = frozenset(rel.rows)
                if rel.semantics == "supports":
                    pred = lambda x, y, rs=rowset: (x, y) in rs
                else:
                    pred = lambda x, y, rs=rowset: (x, y) not in rs
                reg.add_basic(ident, pred,
                              table=rel.rows if rel.semantics == "supports" else None)
                constraints.append(BasicConstraint(ident, scope[0], scope[1]))
            elif rel.semantics == "supports":
                reg.add_op(ident, k, Extension(rel.rows))
                constraints.append(Nary(ident, k, scope))
            else:
                rowset = frozenset(rel.rows)
                reg.add_op(ident, k,
                           Intention(lambda t, rs=rowset: t not in rs))
                constraints.append(Nary(ident, k, scope))
        else:
            xpred = inst.predicates[con.reference]
            stats.intensional += 1
            actuals = con.params or scope
            expr = _bind_to_scope(xpred.expr, xpred.params, actuals, scope)
            params = tuple(f"X{i}" for i in range(k))
            pred = predexpr.compile_predicate(expr, params, count_div_zero)
            source = predexpr.to_source(expr)
            if k == 2:
                reg.add_basic(ident, lambda x, y, p=pred: p((x, y)),
                              expr_source=source)
                constraints.append(BasicConstraint(ident, scope[0], scope[1]))
            else:
                reg.add_op(ident, k, Intention(pred), expr_source=source)
                constraints.append(Nary(ident, k, scope))
    stats.constraints = len(constraints)

    net = Network(names, domains, tuple(constraints))
    if check:
        report = check_network(net, reg)
        if not report.ok:
            raise IllFormedNetworkError(report)
    return net, reg


# ---------------------------------------------------------------------------
# Native format


def parse_native(text: str) -> tuple[Network, InterpRegistry]:
    """Parse the native line format into a network plus its registry.

    No well-formedness check is applied; use ``check_network`` (the solver
    entry points do) to validate the result.
    """
    variables: list[str] = []
    domains: dict[str, tuple[int, ...]] = {}
    tables: dict[str, tuple[int, tuple[tuple[int, ...], ...]]] = {}
    constraints = []
    con_names: set[str] = set()
    reg = InterpRegistry()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kw = tokens[0]
        if kw == "var":
            if len(tokens) < 3:
                raise ParseError("var needs a name and at least one value", lineno)
            name = tokens[1]
            if name in domains:
                raise ParseError(f"duplicate variable {name!r}", lineno)
            variables.append(name)
            domains[name] = make_domain(_parse_values(tokens[2:], lineno))
        elif kw == "table":
            if len(tokens) < 3:
                raise ParseError("table needs a name and an arity", lineno)
            name = tokens[1]
            if name in tables:
                raise ParseError(f"duplicate table {name!r}", lineno)
            try:
                arity = int(tokens[2])
            except ValueError:
                raise ParseError(f"bad arity {tokens[2]!r}", lineno) from None
            rest = line.split(None, 3)
            rows = _parse_rows(rest[3] if len(rest) > 3 else "", arity, lineno)
            if len(set(rows)) != len(rows):
                raise ParseError(f"duplicate row in table {name!r}", lineno)
            tables[name] = (arity, rows)
        elif kw == "con":
            if len(tokens) < 5:
                raise ParseError("con needs a name, a kind, a body and a scope",
                                 lineno)
            name, kind = tokens[1], tokens[2]
            if name in con_names:
                raise ParseError(f"duplicate constraint {name!r}", lineno)
            con_names.add(name)
            scope = tuple(tokens[4:])
            for v in scope:
                if v not in domains:
                    raise ParseError(f"scope variable {v!r} not declared", lineno)
            k = len(scope)
            if kind == "ext":
                ref = tokens[3]
                if ref not in tables:
                    raise ParseError(f"unknown table {ref!r}", lineno)
                arity, rows = tables[ref]
                if arity != k:
                    raise ParseError(
                        f"table {ref!r} has arity {arity}, scope has {k} "
                        "variables",
                        lineno,
                    )
                if k == 2:
                    rowset = frozenset(rows)
                    reg.add_basic(name, lambda x, y, rs=rowset: (x, y) in rs,
                                  table=rows)
                    constraints.append(BasicConstraint(name, scope[0], scope[1]))
                else:
                    try:
                        reg.add_op(name, k, Extension(rows))
                    except RegistryError as e:
                        raise ParseError(str(e), lineno) from None
                    constraints.append(Nary(name, k, scope))
            elif kind == "int":
                params = tuple(f"X{i}" for i in range(k))
                try:
                    expr = predexpr.parse_expression(tokens[3], params)
                except predexpr.ExprError as e:
                    raise ParseError(str(e), lineno) from None
                pred = predexpr.compile_predicate(expr, params)
                source = predexpr.to_source(expr)
                if k == 2:
                    reg.add_basic(name, lambda x, y, p=pred: p((x, y)),
                                  expr_source=source)
                    constraints.append(BasicConstraint(name, scope[0], scope[1]))
                else:
                    reg.add_op(name, k, Intention(pred), expr_source=source)
                    constraints.append(Nary(name, k, scope))
            else:
                raise ParseError(f"unknown constraint kind {kind!r}", lineno)
        else:
            raise ParseError(f"unknown declaration {kw!r}", lineno)

    return Network(tuple(variables), domains, tuple(constraints)), reg


def emit_native(net: Network, reg: InterpRegistry) -> str:
    """Print a network in the native format's normal form.

    Requires printable semantics: every intensional id must carry an
    expression source and every extensional id its table (parsed and
    generated models always do).
    """
    lines = []
    for v in net.variables:
        values = " ".join(str(x) for x in net.domains[v])
        lines.append(f"var {v} {values}")
    for c in net.constraints:
        if isinstance(c, BasicConstraint):
            entry = reg.basic_entry(c.op)
            if entry.table is not None:
                rows = ";".join(" ".join(str(x) for x in row) for row in entry.table)
                lines.append(f"table {c.op} 2 {rows}".rstrip())
                lines.append(f"con {c.op} ext {c.op} {c.x} {c.y}")
            elif entry.expr_source is not None:
                lines.append(f"con {c.op} int {entry.expr_source} {c.x} {c.y}")
            else:
                raise CspError(f"basic op {c.op!r} has no printable source")
        else:
            entry = reg.op_entry(c.op)
            scope = " ".join(c.scope)
            if isinstance(entry.interp, Extension):
                rows = ";".join(
                    " ".join(str(x) for x in row) for row in entry.interp.table
                )
                lines.append(f"table {c.op} {c.arity} {rows}".rstrip())
                lines.append(f"con {c.op} ext {c.op} {scope}")
            elif entry.expr_source is not None:
                lines.append(f"con {c.op} int {entry.expr_source} {scope}")
            else:
                raise CspError(f"op {c.op!r} has no printable source")
    return "\n".join(lines) + "\n"


def detect_format(path: str) -> str:
    return "xcsp" if path.lower().endswith(".xml") else "native"


def load_text(text: str, fmt: str, stats: LoweringStats | None = None,
              check: bool = False) -> tuple[Network, InterpRegistry]:
    """Parse ``text`` in the given format ('xcsp' or 'native')."""
    if fmt == "xcsp":
        return lower_to_network(parse_xcsp(text), stats=stats, check=check)
    if fmt == "native":
        net, reg = parse_native(text)
        if stats is not None:
            stats.variables = len(net.variables)
            stats.constraints = len(net.constraints)
        if check:
            report = check_network(net, reg)
            if not report.ok:
                raise IllFormedNetworkError(report)
        return net, reg
    raise ValueError(f"unknown format {fmt!r}")
