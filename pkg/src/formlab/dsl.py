"""A small line-oriented scripting language over charts, forms and checks.

Declarations::

    chart (T,V) params (R,c_v) assume R>0, T>0
    form w = c_v*dT + (R*T/V)*dV on (T,V)
    metric g on (x,y): diag(1, x^2)
    connection G on (x,y): (x,x,y) = 1; (y,x,x) = -1
    connection L = christoffel(g)
    pde H = p_t + (p_x^2 + x^2)/2 vars (t,x)

In form expressions ``dX`` is the basis 1-form of coordinate X, ``d(...)`` is
the exterior derivative, ``*`` is the (ordered) wedge or scaling and ``^``
between two forms is also the wedge, so printed forms read back unchanged.

Commands (``as NAME`` stores a form result)::

    wedge a b | d w | potential w | star w [metric g]      [as NAME]
    pullback w to (s) by (s, s^2)                           [as NAME]
    restrict w where x = 1, y = 2*z                         [as NAME]
    closed w [with G]          commutator w [with G]
    classify w [with G]        frobenius w
    intfactor w [order (y,x)]  descend w where x = 1; y = 1
    char H init (t=0, x=0, p_t=-1/2, p_x=1, u=0) h 0.001 s_end 6.28 [params (v=1)] [csv PATH]
    corpus [run] thermo|gas|em|all
    metric-report [metric g] [connection G]
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import characteristics as chars
from . import corpus as corpus_mod
from .chart import Chart, Connection, Metric, christoffel, metric_closure_report
from .errors import (DegreeOutOfRange, ExprSyntaxError, FormlabError, ScriptSyntaxError,
                     UndeclaredName)
from .forms import (DifferentialForm, commutator_1form, exterior_derivative, hodge_star, is_closed,
                    potential, pullback, restrict_to_pseudostructure, wedge)
from .integrability import (classify_relation, degree_descent, find_integrating_factor,
                            frobenius_test)
from .scalar import (MINUS_ONE, ZERO, Expr, Opaque, Power, Product, Sum, Symbol, ZeroVerdict,
                     evaluate_numeric, normalize, parse_raw, to_text)

SCHEMA = 1
_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_AS = re.compile(rf"^(?P<body>.*?)(?:\s+as\s+(?P<as>{_NAME}))?\s*$")

VERBS = ("wedge", "d", "closed", "potential", "star", "pullback", "restrict", "commutator",
         "classify", "frobenius", "intfactor", "descend", "char", "corpus", "metric-report")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass
class Decl:
    kind: str  # chart | form | metric | connection | pde
    name: str
    value: object
    line: int
    source: tuple = ()  # forms: (parse tree, chart, column) for rebuilding at run time


@dataclass
class Command:
    verb: str
    args: dict
    line: int
    text: str


@dataclass
class Script:
    declarations: list = field(default_factory=list)
    commands: list = field(default_factory=list)
    # statements in source order (Decl or Command)
    statements: list = field(default_factory=list)


def _split_names(text):
    return [t.strip() for t in text.split(",") if t.strip()]


class _Ctx:
    """Name tables filled while parsing."""

    def __init__(self):
        self.charts = {}
        self.current = None
        self.forms = {}  # command results hold zero forms of the right degree
        self.metrics = {}
        self.connections = {}
        self.pdes = {}

    def names(self):
        return set(self.forms) | set(self.metrics) | set(self.connections) | set(self.pdes)


class _Line:
    def __init__(self, text, lineno):
        self.text = text
        self.lineno = lineno

    def col(self, fragment, start=0):
        i = self.text.find(fragment, start) if fragment else -1
        return (i if i >= 0 else 0) + 1

    def syntax(self, message, fragment=""):
        return ScriptSyntaxError(message, self.lineno, self.col(fragment))

    def undeclared(self, name):
        return UndeclaredName(f"undeclared name {name!r}", self.lineno, self.col(name))


# ---------------------------------------------------------------------------
# form expressions
# ---------------------------------------------------------------------------


class _FormBuilder:
    def __init__(self, chart: Chart, forms: dict, line: _Line, expr_col: int):
        self.chart = chart
        self.forms = forms
        self.line = line
        self.expr_col = expr_col
        self.scalars = set(chart.coords) | set(chart.params)

    def _is_basis(self, name):
        return name.startswith("d") and name[1:] in self.chart.coords

    def _formish(self, node) -> bool:
        if isinstance(node, Symbol):
            return self._is_basis(node.name) or node.name in self.forms
        if isinstance(node, Opaque) and node.name == "d" and node.order == 0:
            return True
        return any(self._formish(c) for c in node.children())

    def _check_scalar(self, node):
        for s in node.free_symbols:
            if s not in self.scalars:
                raise self.line.undeclared(s)

    def build(self, node):
        if not self._formish(node):
            self._check_scalar(node)
            return normalize(node)
        if isinstance(node, Symbol):
            if node.name in self.forms:
                f = self.forms[node.name]
                if f.chart.coords != self.chart.coords:
                    raise ScriptSyntaxError(f"form {node.name!r} lives on chart {f.chart}",
                                            self.line.lineno, self.line.col(node.name))
                return f
            return DifferentialForm.basis(self.chart, node.name[1:])
        if isinstance(node, Opaque):
            return exterior_derivative(self._as_form(self.build(node.arg)))
        if isinstance(node, Sum):
            out = None
            for t in node.terms:
                v = self.build(t)
                out = v if out is None else self._add(out, v)
            return out
        if isinstance(node, Product):
            out = None
            for f in node.factors:
                v = self.build(f)
                out = v if out is None else self._mul(out, v)
            return out
        if isinstance(node, Power):
            base, ex = self.build(node.base), self.build(node.exponent)
            if isinstance(base, DifferentialForm) and isinstance(ex, DifferentialForm):
                return self._wedge(base, ex)
            if isinstance(base, DifferentialForm) and ex == MINUS_ONE:
                raise self._type_error("cannot divide by a form")
            raise self._type_error("powers of forms are not defined")
        raise self._type_error("forms cannot appear inside function calls")

    def _type_error(self, message):
        return ScriptSyntaxError(message, self.line.lineno, self.expr_col)

    def _as_form(self, v):
        return v if isinstance(v, DifferentialForm) else DifferentialForm.scalar(self.chart, v)

    def _add(self, a, b):
        if isinstance(a, Expr) and isinstance(b, Expr):
            return normalize(a + b)
        if isinstance(a, Expr) and a == ZERO:
            return b
        if isinstance(b, Expr) and b == ZERO:
            return a
        a, b = self._as_form(a), self._as_form(b)
        if a.degree != b.degree:
            raise self._type_error(f"cannot add a {a.degree}-form and a {b.degree}-form")
        return a + b

    def _mul(self, a, b):
        if isinstance(a, Expr) and isinstance(b, Expr):
            return normalize(a * b)
        if isinstance(a, Expr):
            return b.scale(a)
        if isinstance(b, Expr):
            return a.scale(b)
        return self._wedge(a, b)

    def _wedge(self, a, b):
        if a.degree + b.degree > self.chart.dim:
            raise DegreeOutOfRange(
                f"wedge of degrees {a.degree} and {b.degree} exceeds dimension {self.chart.dim}",
                self.line.lineno, self.expr_col)
        return wedge(a, b)


def _parse_expr_at(text, line: _Line, col: int, allowed=None):
    try:
        node = parse_raw(text)
    except ExprSyntaxError as exc:
        raise ScriptSyntaxError(str(exc), line.lineno, col + exc.offset) from None
    if allowed is not None:
        for s in node.free_symbols:
            if s not in allowed:
                raise line.undeclared(s)
    return node


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_CHART = re.compile(rf"^chart\s*\((?P<coords>[^)]*)\)\s*(?:params\s*\((?P<params>[^)]*)\))?"
                    r"\s*(?:assume\s+(?P<assume>.+))?$")
_FORM = re.compile(rf"^form\s+(?P<name>{_NAME})\s*=\s*(?P<expr>.+?)(?:\s+on\s*\((?P<on>[^)]*)\))?$")
_METRIC = re.compile(rf"^metric\s+(?P<name>{_NAME})\s*(?:on\s*\((?P<on>[^)]*)\))?\s*:\s*(?P<body>.+)$")
_CONN = re.compile(rf"^connection\s+(?P<name>{_NAME})\s*(?:on\s*\((?P<on>[^)]*)\))?\s*"
                   r"(?P<sep>[:=])\s*(?P<body>.+)$")
_PDE = re.compile(rf"^pde\s+(?P<name>{_NAME})\s*=\s*(?P<expr>.+?)\s+vars\s*\((?P<vars>[^)]*)\)"
                  r"(?:\s+params\s*\((?P<params>[^)]*)\))?$")
_COMPONENT = re.compile(r"^\(\s*(?P<idx>[^)]*)\)\s*=\s*(?P<expr>.+)$")


def _chart_for(ctx: _Ctx, on, line: _Line):
    if on is None:
        if ctx.current is None:
            raise UndeclaredName("no chart declared", line.lineno, 1)
        return ctx.current
    key = tuple(_split_names(on))
    if key not in ctx.charts:
        raise UndeclaredName(f"chart ({', '.join(key)}) is not declared", line.lineno, line.col(on))
    return ctx.charts[key]


def _new_name(ctx: _Ctx, name, line: _Line):
    if name in ctx.names():
        raise ScriptSyntaxError(f"name {name!r} already declared", line.lineno, line.col(name))


def _parse_chart(m, line, ctx):
    coords = _split_names(m["coords"])
    params = _split_names(m["params"] or "")
    positive = []
    if m["assume"]:
        for a in _split_names(m["assume"]):
            am = re.fullmatch(rf"({_NAME})\s*>\s*0", a)
            if not am:
                raise line.syntax(f"unsupported assumption {a!r}; use NAME>0", a)
            if am[1] not in coords and am[1] not in params:
                raise line.undeclared(am[1])
            positive.append(am[1])
    try:
        chart = Chart(coords, params=params, positive=positive)
    except ValueError as exc:
        raise line.syntax(str(exc)) from None
    ctx.charts[chart.coords] = chart
    ctx.current = chart
    return Decl("chart", str(chart), chart, line.lineno)


def _parse_form(m, line, ctx):
    name = m["name"]
    _new_name(ctx, name, line)
    chart = _chart_for(ctx, m["on"], line)
    col = line.col(m["expr"])
    node = _parse_expr_at(m["expr"], line, col)
    value = build_form(node, chart, ctx.forms, line, col)
    ctx.forms[name] = value
    return Decl("form", name, value, line.lineno, (node, chart, col))


def build_form(node, chart, forms, line, col) -> DifferentialForm:
    value = _FormBuilder(chart, forms, line, col).build(node)
    if not isinstance(value, DifferentialForm):
        value = DifferentialForm.scalar(chart, value)
    return value


def _scalar_at(text, line, chart):
    return normalize(_parse_expr_at(text.strip(), line, line.col(text.strip()),
                                    set(chart.coords) | set(chart.params)))


def _parse_metric(m, line, ctx):
    name = m["name"]
    _new_name(ctx, name, line)
    chart = _chart_for(ctx, m["on"], line)
    body = m["body"].strip()
    if body == "identity":
        metric = Metric(chart)
    else:
        dm = re.fullmatch(r"diag\((.*)\)", body)
        if not dm:
            raise line.syntax("metric body must be diag(...) or identity", body)
        entries = [_scalar_at(t, line, chart) for t in dm[1].split(",")]
        if len(entries) != chart.dim:
            raise line.syntax(f"diag needs {chart.dim} entries", body)
        metric = Metric.diagonal(chart, entries)
    ctx.metrics[name] = metric
    return Decl("metric", name, metric, line.lineno)


def _parse_connection(m, line, ctx):
    name = m["name"]
    _new_name(ctx, name, line)
    body = m["body"].strip()
    cm = re.fullmatch(rf"christoffel\(\s*({_NAME})\s*\)", body)
    if cm:
        if cm[1] not in ctx.metrics:
            raise line.undeclared(cm[1])
        conn = christoffel(ctx.metrics[cm[1]])
    else:
        chart = _chart_for(ctx, m["on"], line)
        comps = {}
        if body != "zero":
            for piece in body.split(";"):
                piece = piece.strip()
                if not piece:
                    continue
                pm = _COMPONENT.match(piece)
                if not pm:
                    raise line.syntax("expected (upper, lower, lower) = expr", piece)
                idx = _split_names(pm["idx"])
                if len(idx) != 3:
                    raise line.syntax("connection components take three indices", piece)
                for i in idx:
                    if i not in chart.coords:
                        raise line.undeclared(i)
                comps[tuple(idx)] = _scalar_at(pm["expr"], line, chart)
        conn = Connection.from_components(chart, comps)
    ctx.connections[name] = conn
    return Decl("connection", name, conn, line.lineno)


def _parse_pde(m, line, ctx):
    name = m["name"]
    _new_name(ctx, name, line)
    space = _split_names(m["vars"])
    params = _split_names(m["params"] or "")
    allowed = set(space) | {chars.momentum_name(v) for v in space} | {"u"} | set(params)
    node = _parse_expr_at(m["expr"], line, line.col(m["expr"]), allowed)
    try:
        pde = chars.FirstOrderPDE(space, normalize(node), params=params)
    except FormlabError as exc:
        raise line.syntax(str(exc), m["expr"]) from None
    ctx.pdes[name] = pde
    return Decl("pde", name, pde, line.lineno)


def _need_form(ctx, name, line):
    if name not in ctx.forms:
        raise line.undeclared(name)
    return ctx.forms[name]


def _with(rest, ctx, line, flag="with"):
    m = re.search(rf"\b{flag}\s+({_NAME})", rest)
    if not m:
        return None
    if m[1] not in ctx.connections:
        raise line.undeclared(m[1])
    return m[1]


def _constraints(text, line, chart):
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        cm = re.fullmatch(rf"({_NAME})\s*=\s*(.+)", piece)
        if not cm:
            raise line.syntax("expected COORD = expr", piece)
        if cm[1] not in chart.coords:
            raise line.undeclared(cm[1])
        out.append((cm[1], _scalar_at(cm[2], line, chart)))
    return out


def _parse_command(verb, rest, line: _Line, ctx: _Ctx) -> Command:
    am = _AS.match(rest)
    body, target = am["body"].strip(), am["as"]
    words = body.split()
    args = {}
    result = None  # form produced by the command (a placeholder of the right degree)

    def first_form():
        if not words:
            raise line.syntax(f"{verb} needs a form name")
        return words[0], _need_form(ctx, words[0], line)

    if verb == "wedge":
        if len(words) != 2:
            raise line.syntax("wedge takes two form names")
        a, b = (_need_form(ctx, w, line) for w in words)
        if a.chart.coords != b.chart.coords:
            raise line.syntax("wedge operands live on different charts", words[1])
        if a.degree + b.degree > a.chart.dim:
            raise DegreeOutOfRange(f"wedge of degrees {a.degree} and {b.degree} exceeds "
                                   f"dimension {a.chart.dim}", line.lineno, line.col(words[0]))
        args = {"a": words[0], "b": words[1]}
        result = wedge(a, b)
    elif verb in ("d", "potential"):
        name, w = first_form()
        if len(words) != 1:
            raise line.syntax(f"{verb} takes one form name", words[1])
        args = {"form": name}
        if verb == "d":
            result = exterior_derivative(w)
        else:
            if w.degree == 0:
                raise DegreeOutOfRange("a 0-form has no potential", line.lineno, line.col(name))
            result = DifferentialForm.zero(w.chart, w.degree - 1)
    elif verb == "star":
        name, w = first_form()
        metric = None
        mm = re.search(rf"\bmetric\s+({_NAME})", body)
        if mm:
            if mm[1] not in ctx.metrics:
                raise line.undeclared(mm[1])
            metric = mm[1]
        args = {"form": name, "metric": metric}
        result = DifferentialForm.zero(w.chart, w.chart.dim - w.degree)
    elif verb == "pullback":
        pm = re.fullmatch(rf"({_NAME})\s+to\s*\(([^)]*)\)\s*by\s*\((.*)\)", body)
        if not pm:
            raise line.syntax("usage: pullback w to (coords) by (expr, ...)")
        w = _need_form(ctx, pm[1], line)
        coords = _split_names(pm[2])
        try:
            tchart = Chart(coords, params=w.chart.params, positive=w.chart.positive)
        except ValueError as exc:
            raise line.syntax(str(exc), pm[2]) from None
        exprs = [_scalar_at(t, line, tchart) for t in pm[3].split(",")]
        if len(exprs) != w.chart.dim:
            raise line.syntax(f"map needs {w.chart.dim} components", pm[3])
        args = {"form": pm[1], "chart": tchart, "map": exprs}
        result = DifferentialForm.zero(tchart, w.degree)
    elif verb == "restrict":
        pm = re.fullmatch(rf"({_NAME})\s+where\s+(.+)", body)
        if not pm:
            raise line.syntax("usage: restrict w where x = expr, ...")
        w = _need_form(ctx, pm[1], line)
        args = {"form": pm[1], "constraints": _constraints(pm[2], line, w.chart)}
        try:
            result = restrict_to_pseudostructure(DifferentialForm.zero(w.chart, w.degree),
                                                 args["constraints"])
        except FormlabError as exc:
            raise line.syntax(str(exc), pm[2]) from None
    elif verb in ("closed", "commutator", "classify"):
        name, w = first_form()
        conn = _with(body, ctx, line)
        if verb == "commutator" and w.degree != 1:
            raise DegreeOutOfRange("commutator needs a 1-form", line.lineno, line.col(name))
        if conn and w.degree != 1:
            raise DegreeOutOfRange("a connection applies to 1-forms only", line.lineno,
                                   line.col(name))
        args = {"form": name, "connection": conn}
        psi = re.search(rf"\bpsi\s+({_NAME})", body)
        args["psi"] = psi[1] if psi else "psi"
    elif verb in ("frobenius", "intfactor"):
        name, w = first_form()
        if w.degree != 1:
            raise DegreeOutOfRange(f"{verb} needs a 1-form", line.lineno, line.col(name))
        args = {"form": name}
        om = re.search(r"\border\s*\(([^)]*)\)", body)
        if verb == "intfactor":
            if w.chart.dim != 2:
                raise DegreeOutOfRange("intfactor needs a 2D chart", line.lineno, line.col(name))
            args["order"] = _split_names(om[1]) if om else None
            for v in args["order"] or ():
                if v not in w.chart.coords:
                    raise line.undeclared(v)
    elif verb == "descend":
        pm = re.fullmatch(rf"({_NAME})\s+where\s+(.+)", body)
        if not pm:
            raise line.syntax("usage: descend w where x = 1; y = 1")
        w = _need_form(ctx, pm[1], line)
        steps = []
        chart = w.chart
        for piece in pm[2].split(";"):
            cons = _constraints(piece, line, chart)
            steps.append(cons)
            chart = Chart([c for c in chart.coords if c not in dict(cons)], params=chart.params,
                          positive=chart.positive)
        if len(steps) > w.degree:
            raise DegreeOutOfRange(f"{len(steps)} descent steps exceed degree {w.degree}",
                                   line.lineno, line.col(pm[2]))
        args = {"form": pm[1], "steps": steps}
    elif verb == "char":
        pm = re.fullmatch(rf"({_NAME})\s+init\s*\(([^)]*)\)\s+h\s+(\S+)\s+s_end\s+(\S+)"
                          r"(?:\s+params\s*\(([^)]*)\))?(?:\s+csv\s+(\S+))?", body)
        if not pm:
            raise line.syntax("usage: char H init (x=..., ...) h STEP s_end END [params (..)] "
                              "[csv PATH]")
        if pm[1] not in ctx.pdes:
            raise line.undeclared(pm[1])
        pde = ctx.pdes[pm[1]]
        init = _numeric_bindings(pm[2], line)
        consts = _numeric_bindings(pm[5] or "", line)
        missing = [n for n in pde.state_names if n not in init]
        if missing:
            raise line.syntax(f"initial values missing for {missing}", pm[2])
        try:
            h, s_end = float(pm[3]), float(pm[4])
        except ValueError:
            raise line.syntax("h and s_end must be numbers", pm[3]) from None
        args = {"pde": pm[1], "init": init, "h": h, "s_end": s_end, "constants": consts,
                "csv": pm[6]}
    elif verb == "corpus":
        if words and words[0] == "run":
            words = words[1:]
        if len(words) != 1 or words[0] not in (*corpus_mod.CASES, "all"):
            raise line.syntax(f"corpus case must be one of {sorted(corpus_mod.CASES)} or all")
        args = {"case": words[0]}
    elif verb == "metric-report":
        mm = re.search(rf"\bmetric\s+({_NAME})", body)
        cm = re.search(rf"\bconnection\s+({_NAME})", body)
        if mm and mm[1] not in ctx.metrics:
            raise line.undeclared(mm[1])
        if cm and cm[1] not in ctx.connections:
            raise line.undeclared(cm[1])
        if ctx.current is None and not (mm or cm):
            raise UndeclaredName("no chart declared", line.lineno, 1)
        args = {"metric": mm[1] if mm else None, "connection": cm[1] if cm else None,
                "chart": ctx.current}
    if target:
        if result is None:
            raise line.syntax(f"{verb} does not produce a form", target)
        _new_name(ctx, target, line)
        ctx.forms[target] = result
    args["as"] = target
    return Command(verb, args, line.lineno, line.text.strip())


def _numeric_bindings(text, line):
    out = {}
    for piece in _split_names(text):
        bm = re.fullmatch(rf"({_NAME})\s*=\s*(.+)", piece)
        if not bm:
            raise line.syntax("expected NAME = number", piece)
        node = _parse_expr_at(bm[2], line, line.col(bm[2]), set())
        out[bm[1]] = evaluate_numeric(normalize(node), {})
    return out


def parse_script(text: str) -> Script:
    """Parse and type-check a script; raises the first ScriptError found."""
    ctx = _Ctx()
    script = Script()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        line = _Line(raw, lineno)
        s = stripped.strip()
        head = s.split(None, 1)[0]
        rest = s[len(head):].strip()
        decl = None
        if head == "chart" or s.startswith("chart("):
            m = _CHART.match(s)
            if not m:
                raise line.syntax("usage: chart (x,y) [params (a,b)] [assume a>0]")
            decl = _parse_chart(m, line, ctx)
        elif head == "form":
            m = _FORM.match(s)
            if not m:
                raise line.syntax("usage: form NAME = EXPR [on (coords)]")
            decl = _parse_form(m, line, ctx)
        elif head == "metric":
            m = _METRIC.match(s)
            if not m:
                raise line.syntax("usage: metric NAME [on (coords)]: diag(...)")
            decl = _parse_metric(m, line, ctx)
        elif head == "connection":
            m = _CONN.match(s)
            if not m:
                raise line.syntax("usage: connection NAME [on (coords)]: (s,a,b) = expr; ...")
            decl = _parse_connection(m, line, ctx)
        elif head == "pde":
            m = _PDE.match(s)
            if not m:
                raise line.syntax("usage: pde NAME = EXPR vars (x,y) [params (a)]")
            decl = _parse_pde(m, line, ctx)
        elif head in VERBS:
            cmd = _parse_command(head, rest, line, ctx)
            script.commands.append(cmd)
            script.statements.append(cmd)
            continue
        else:
            raise line.syntax(f"unknown statement {head!r}", head)
        script.declarations.append(decl)
        script.statements.append(decl)
    return script


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


@dataclass
class CommandResult:
    index: int
    verb: str
    line: int
    status: str  # ok | fail | error
    result: dict
    text: str

    def to_json(self):
        return {"schema": SCHEMA, "index": self.index, "verb": self.verb, "line": self.line,
                "status": self.status, "result": self.result}


@dataclass
class RunReport:
    exit_code: int
    results: list

    def to_json_lines(self) -> str:
        from .report import dumps
        return "".join(dumps(r.to_json()) + "\n" for r in self.results)

    def to_text(self, color=False) -> str:
        from .report import paint
        out = []
        for r in self.results:
            tag = paint(r.status.upper(), r.status, color)
            out.append(f"[{r.index}] {r.verb} (line {r.line}) {tag}")
            out.extend("    " + t for t in r.text.splitlines())
        return "\n".join(out) + ("\n" if out else "")


class _Runner:
    def __init__(self):
        self.forms = {}
        self.metrics = {}
        self.connections = {}
        self.pdes = {}

    def declare(self, d: Decl):
        table = {"form": self.forms, "metric": self.metrics, "connection": self.connections,
                 "pde": self.pdes}.get(d.kind)
        if d.kind == "form":
            node, chart, col = d.source
            d_line = _Line("", d.line)
            self.forms[d.name] = build_form(node, chart, self.forms, d_line, col)
        elif table is not None:
            table[d.name] = d.value

    def run(self, cmd: Command):
        a = cmd.args
        fn = getattr(self, "do_" + cmd.verb.replace("-", "_"))
        status, result, text, value = fn(a)
        if a.get("as") and value is not None:
            self.forms[a["as"]] = value
        return status, result, text

    def conn(self, a):
        return self.connections[a["connection"]] if a.get("connection") else None

    @staticmethod
    def _form_out(w, label="form"):
        return "ok", {label: w.to_json(), "text": str(w)}, str(w), w

    def do_wedge(self, a):
        return self._form_out(wedge(self.forms[a["a"]], self.forms[a["b"]]))

    def do_d(self, a):
        return self._form_out(exterior_derivative(self.forms[a["form"]]))

    def do_potential(self, a):
        return self._form_out(potential(self.forms[a["form"]]), "potential")

    def do_star(self, a):
        w = self.forms[a["form"]]
        diag = None
        if a["metric"]:
            m = self.metrics[a["metric"]]
            diag = [m.g[i][i] for i in range(m.chart.dim)]
            if not m.is_diagonal():
                from .errors import MetricError
                raise MetricError("hodge star supports diagonal metrics only")
        return self._form_out(hodge_star(w, diag))

    def do_pullback(self, a):
        return self._form_out(pullback(self.forms[a["form"]], a["chart"], a["map"]))

    def do_restrict(self, a):
        return self._form_out(restrict_to_pseudostructure(self.forms[a["form"]], a["constraints"]))

    def do_closed(self, a):
        res = is_closed(self.forms[a["form"]], self.conn(a))
        status = "ok" if res.verdict is ZeroVerdict.ZERO else "fail"
        text = f"verdict {res.verdict.value}; residual {res.residual}"
        return status, {"verdict": res.verdict.value, "residual": res.residual.to_json()}, text, None

    def do_commutator(self, a):
        K = commutator_1form(self.forms[a["form"]], self.conn(a))
        lines = [str(K)]
        for (i, j), parts in sorted(K.contributions.items()):
            for label, v in parts:
                lines.append(f"  K[{K.chart.coords[i]},{K.chart.coords[j]}] <- {label}: {to_text(v)}")
        out = K.to_json()
        out["verdict"] = K.verdict().value
        return "ok", out, "\n".join(lines), None

    def do_classify(self, a):
        rel = classify_relation(a["psi"], self.forms[a["form"]], self.conn(a))
        return "ok", rel.to_json(), str(rel), None

    def do_frobenius(self, a):
        res = frobenius_test(self.forms[a["form"]])
        return "ok", res.to_json(), f"w^dw = {res.product}; verdict {res.verdict.value}", None

    def do_intfactor(self, a):
        f = find_integrating_factor(self.forms[a["form"]], a.get("order"))
        return "ok", f.to_json(), f"mu = {to_text(f.mu)}; potential {to_text(f.potential)}", None

    def do_descend(self, a):
        w = self.forms[a["form"]]
        rel = classify_relation("psi", w)
        steps = []
        lines = [str(rel)]
        for cons in a["steps"]:
            step = degree_descent(rel, cons)
            steps.append(step.to_json())
            lines.append(f"on {dict((k, to_text(v)) for k, v in step.constraints)}: "
                         f"potential {step.identical_on_pi.potential}; next {step.next}")
            rel = step.next
        return "ok", {"start": classify_relation("psi", w).to_json(), "steps": steps,
                      "final_degree": rel.degree}, "\n".join(lines), None

    def do_char(self, a):
        pde = self.pdes[a["pde"]]
        system = chars.characteristic_system(pde)
        traj = chars.integrate_characteristics(system, a["init"], a["s_end"], a["h"], a["constants"])
        rep = chars.verify_along(pde, traj, a["constants"])
        return char_output(system, traj, rep, a.get("csv"))

    def do_corpus(self, a):
        reports = corpus_mod.run_case(a["case"])
        status = "ok" if all(r.passed for r in reports) else "fail"
        return status, {"cases": [r.to_json() for r in reports]}, \
            "\n".join(r.summary() for r in reports), None

    def do_metric_report(self, a):
        metric = self.metrics[a["metric"]] if a["metric"] else None
        conn = self.connections[a["connection"]] if a["connection"] else None
        chart = (metric or conn).chart if (metric or conn) else a["chart"]
        rep = metric_closure_report(chart, metric, conn)
        text = ", ".join(f"{k} {v}" for k, v in rep.as_dict().items())
        return "ok", rep.as_dict(), text, None


def char_output(system, traj, rep, csv_path=None):
    if csv_path:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(traj.to_csv())
    final = {n: float(v) for n, v in zip(system.state_names,
                                          [*traj.x[-1], *traj.p[-1], traj.u[-1]])}
    result = {"system": system.to_json(), "residuals": rep.to_json(), "samples_path": csv_path,
              "samples": len(traj), "step": traj.step, "final": final,
              "singular_points": [float(s) for s in traj.singular]}
    text = (f"dx/ds = {result['system']['dx']}, dp/ds = {result['system']['dp']}, "
            f"du/ds = {result['system']['du']}\n"
            f"max |F| = {rep.max_F_residual:.3e}, max theta = {rep.max_theta_residual:.3e}, "
            f"{len(traj)} samples")
    return "ok", result, text, None


def run_script(script: Script | str) -> RunReport:
    """Execute commands in order. Exit 0 when all pass, 1 on a failed assertion, 2 on error."""
    if isinstance(script, str):
        script = parse_script(script)
    runner = _Runner()
    results = []
    code = 0
    index = 0
    for st in script.statements:
        if isinstance(st, Decl):
            runner.declare(st)
            continue
        try:
            status, result, text = runner.run(st)
        except (FormlabError, ValueError, ArithmeticError, OSError) as exc:
            results.append(CommandResult(index, st.verb, st.line, "error",
                                         {"error": type(exc).__name__, "message": str(exc)},
                                         f"{type(exc).__name__}: {exc}"))
            return RunReport(2, results)
        if status == "fail":
            code = 1
        results.append(CommandResult(index, st.verb, st.line, status, result, text))
        index += 1
    return RunReport(code, results)
