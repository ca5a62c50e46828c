"""Line-oriented ``.rxn`` model format.

::

    model mm
    alpha = 0.00167
    species S = 599
    species P = 0
    param vmax = 0.1/alpha
    param Km = 0.5/alpha
    reaction r1: S -> P @ mm(vmax, Km)
    unpack r1 mm(Etot=60, rho=100)
    conserve E + ES = 60

Rate laws: ``ma(c)``, ``mm(vmax, Km)``, ``hill(kms, J, n)`` and ``inf``
(immediate follow-up).  Arguments are parameter names or numbers.  An
empty reaction side is written ``0``.  ``#`` starts a comment.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

from .core import (Conservation, Hill, Immediate, MassAction, MichaelisMenten, Reaction,
                   ReactionNetwork, Species)
from .errors import ModelSyntaxError, RxError
from . import templates

_TOKEN = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?(?![A-Za-z_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<sym>[=:@(),+*/])
""", re.VERBOSE)

RATE_LAWS = ("ma", "mm", "hill", "inf")
MM_KEYS = ("Etot", "rho", "enzyme", "complex")
HILL_KEYS = ("K1", "s1", "s2", "k1", "k2", "k3", "k4", "gene", "Gtot")


@dataclass(frozen=True)
class ParamExpr:
    """A number optionally scaled by the document's ``alpha``."""
    value: float
    marker: str | None = None  # None, "*alpha" or "/alpha"

    def resolve(self, alpha: float | None, line: int = 0) -> float:
        if self.marker is None:
            return self.value
        if alpha is None:
            raise ModelSyntaxError("alpha is used but never declared", line)
        return self.value * alpha if self.marker == "*alpha" else self.value / alpha

    def __str__(self) -> str:
        return _num(self.value) + (self.marker or "")


Arg = Union[str, float]


@dataclass(frozen=True)
class RateLawStmt:
    kind: str
    args: tuple[Arg, ...] = ()


@dataclass(frozen=True)
class ReactionStmt:
    id: str
    reactants: tuple[tuple[str, int], ...]
    products: tuple[tuple[str, int], ...]
    law: RateLawStmt
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class UnpackStmt:
    reaction: str
    template: str
    options: tuple[tuple[str, object], ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ConserveStmt:
    terms: tuple[tuple[str, int], ...]
    total: ParamExpr
    line: int = field(default=0, compare=False)


@dataclass
class ModelDocument:
    name: str
    alpha: float | None = None
    species: list[tuple[str, int]] = field(default_factory=list)
    params: list[tuple[str, ParamExpr]] = field(default_factory=list)
    reactions: list[ReactionStmt] = field(default_factory=list)
    directives: list[Union[UnpackStmt, ConserveStmt]] = field(default_factory=list)

    def param_values(self) -> dict[str, float]:
        return {k: e.resolve(self.alpha) for k, e in self.params}


# -- lexing / parsing --------------------------------------------------------

@dataclass
class _Tok:
    kind: str
    text: str
    col: int


class _Line:
    def __init__(self, text: str, lineno: int):
        self.lineno = lineno
        self.toks: list[_Tok] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise ModelSyntaxError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
            kind = m.lastgroup
            if kind != "ws":
                self.toks.append(_Tok(kind, m.group(), pos + 1))
            pos = m.end()
        self.end_col = len(text) + 1
        self.i = 0

    def error(self, msg: str, tok: _Tok | None = None) -> ModelSyntaxError:
        tok = tok if tok is not None else self.peek()
        return ModelSyntaxError(msg, self.lineno, tok.col if tok else self.end_col)

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}, found end of line")
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next(repr(text))
        if tok.text != text:
            raise self.error(f"expected {text!r}, found {tok.text!r}", tok)
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.i += 1
            return True
        return False

    def ident(self, what: str = "identifier") -> str:
        tok = self.next(what)
        if tok.kind != "ident":
            raise self.error(f"expected {what}, found {tok.text!r}", tok)
        return tok.text

    def number(self, what: str = "number") -> float:
        tok = self.next(what)
        if tok.kind != "number":
            raise self.error(f"expected {what}, found {tok.text!r}", tok)
        return float(tok.text)

    def done(self):
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected {tok.text!r}", tok)


def _expr(ln: _Line) -> ParamExpr:
    value = ln.number("numeric value")
    tok = ln.peek()
    if tok is not None and tok.text in ("*", "/"):
        ln.i += 1
        name = ln.next("'alpha'")
        if name.text != "alpha":
            raise ln.error(f"only 'alpha' may scale a value, found {name.text!r}", name)
        return ParamExpr(value, tok.text + "alpha")
    return ParamExpr(value)


def _side(ln: _Line, stop: str | None) -> tuple[tuple[str, int], ...]:
    tok = ln.peek()
    if tok is not None and tok.kind == "number" and tok.text == "0":
        ln.i += 1
        return ()
    terms: dict[str, int] = {}
    if tok is None or tok.text == stop:
        return ()
    while True:
        tok = ln.peek()
        k = 1
        if tok is not None and tok.kind == "number":
            coef = ln.next("coefficient")
            k = float(coef.text)
            if k not in (1, 2):
                raise ln.error(f"stoichiometric coefficient must be 1 or 2, got {coef.text}", coef)
            k = int(k)
            ln.expect("*")
        name = ln.ident("species name")
        terms[name] = terms.get(name, 0) + k
        if not ln.accept("+"):
            break
    return tuple(terms.items())


def _law(ln: _Line) -> RateLawStmt:
    tok = ln.next("rate law")
    if tok.kind != "ident" or tok.text not in RATE_LAWS:
        raise ln.error(f"unknown rate law {tok.text!r}", tok)
    if tok.text == "inf":
        return RateLawStmt("inf")
    arity = {"ma": 1, "mm": 2, "hill": 3}[tok.text]
    ln.expect("(")
    args: list[Arg] = []
    while True:
        a = ln.next("argument")
        if a.kind == "ident":
            args.append(a.text)
        elif a.kind == "number":
            args.append(float(a.text))
        else:
            raise ln.error(f"bad argument {a.text!r}", a)
        if not ln.accept(","):
            break
    ln.expect(")")
    if len(args) != arity:
        raise ln.error(f"{tok.text} takes {arity} argument(s), got {len(args)}", tok)
    return RateLawStmt(tok.text, tuple(args))


def _options(ln: _Line, allowed: tuple[str, ...], template: str) -> tuple[tuple[str, object], ...]:
    ln.expect("(")
    opts: dict[str, object] = {}
    if ln.accept(")"):
        return ()
    while True:
        key_tok = ln.next("option name")
        if key_tok.kind != "ident" or key_tok.text not in allowed:
            raise ln.error(f"unknown {template} option {key_tok.text!r}", key_tok)
        if key_tok.text in opts:
            raise ln.error(f"duplicate option {key_tok.text!r}", key_tok)
        ln.expect("=")
        val = ln.peek()
        if val is not None and val.kind == "ident":
            ln.i += 1
            opts[key_tok.text] = val.text
        else:
            opts[key_tok.text] = _expr(ln)
        if not ln.accept(","):
            break
    ln.expect(")")
    return tuple(opts.items())


def parse_model(text: str) -> ModelDocument:
    """Parse ``.rxn`` source; every error carries its line and column."""
    doc: ModelDocument | None = None
    seen: dict[str, set] = {"species": set(), "param": set(), "reaction": set()}
    last_line = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.split("#", 1)[0].rstrip("\r")
        ln = _Line(line, lineno)
        if not ln.toks:
            continue
        head = ln.next("statement")
        if doc is None:
            if head.text != "model":
                raise ModelSyntaxError("expected model header", lineno, head.col)
            doc = ModelDocument(ln.ident("model name"))
            ln.done()
            continue
        kw = head.text
        if kw == "model":
            raise ln.error("duplicate model header", head)
        elif kw == "alpha":
            ln.expect("=")
            tok = ln.peek()
            doc.alpha = ln.number("alpha value")
            if not doc.alpha > 0:
                raise ln.error("alpha must be positive", tok)
        elif kw == "species":
            name_tok = ln.peek()
            name = ln.ident("species name")
            if name in seen["species"]:
                raise ln.error(f"duplicate species {name!r}", name_tok)
            ln.expect("=")
            tok = ln.peek()
            v = ln.number("initial count")
            if v != int(v) or v < 0:
                raise ln.error("initial count must be a non-negative integer", tok)
            seen["species"].add(name)
            doc.species.append((name, int(v)))
        elif kw == "param":
            name_tok = ln.peek()
            name = ln.ident("parameter name")
            if name in seen["param"] or name == "alpha":
                raise ln.error(f"duplicate parameter {name!r}", name_tok)
            ln.expect("=")
            seen["param"].add(name)
            doc.params.append((name, _expr(ln)))
        elif kw == "reaction":
            name_tok = ln.peek()
            rid = ln.ident("reaction id")
            if rid in seen["reaction"]:
                raise ln.error(f"duplicate reaction {rid!r}", name_tok)
            ln.expect(":")
            lhs = _side(ln, "->")
            ln.expect("->")
            rhs = _side(ln, "@")
            ln.expect("@")
            law = _law(ln)
            seen["reaction"].add(rid)
            doc.reactions.append(ReactionStmt(rid, lhs, rhs, law, lineno))
        elif kw == "unpack":
            rid = ln.ident("reaction id")
            tmpl_tok = ln.next("template name")
            if tmpl_tok.text == "mm":
                opts = _options(ln, MM_KEYS, "mm")
            elif tmpl_tok.text == "hill":
                opts = _options(ln, HILL_KEYS, "hill")
            else:
                raise ln.error(f"unknown template {tmpl_tok.text!r}", tmpl_tok)
            doc.directives.append(UnpackStmt(rid, tmpl_tok.text, opts, lineno))
        elif kw == "conserve":
            terms = _side(ln, "=")
            if not terms:
                raise ln.error("empty conservation")
            ln.expect("=")
            doc.directives.append(ConserveStmt(terms, _expr(ln), lineno))
        else:
            raise ln.error(f"unknown statement {kw!r}", head)
        ln.done()
    if doc is None:
        raise ModelSyntaxError("expected model header", 1 if not text.strip() else last_line)
    return doc


# -- serialisation -----------------------------------------------------------

def _num(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _terms(terms) -> str:
    if not terms:
        return "0"
    return " + ".join(s if k == 1 else f"{k}*{s}" for s, k in terms)


def _arg(a: Arg) -> str:
    return a if isinstance(a, str) else _num(a)


def serialize_model(doc: ModelDocument) -> str:
    """Canonical text; ``parse_model(serialize_model(d)) == d``."""
    out = [f"model {doc.name}"]
    if doc.alpha is not None:
        out.append(f"alpha = {_num(doc.alpha)}")
    out += [f"species {s} = {n}" for s, n in doc.species]
    out += [f"param {k} = {e}" for k, e in doc.params]
    for r in doc.reactions:
        law = "inf" if r.law.kind == "inf" else \
            f"{r.law.kind}({', '.join(_arg(a) for a in r.law.args)})"
        out.append(f"reaction {r.id}: {_terms(r.reactants)} -> {_terms(r.products)} @ {law}")
    for d in doc.directives:
        if isinstance(d, UnpackStmt):
            opts = ", ".join(f"{k}={v}" for k, v in d.options)
            out.append(f"unpack {d.reaction} {d.template}({opts})")
        else:
            out.append(f"conserve {_terms(d.terms)} = {d.total}")
    return "\n".join(out) + "\n"


# -- documents <-> networks --------------------------------------------------

def _fail(msg: str, line: int) -> ModelSyntaxError:
    return ModelSyntaxError(msg, line)


def build_network(doc: ModelDocument) -> ReactionNetwork:
    """Base network of ``doc`` with conservations but no unpacking."""
    values: dict[str, float] = {}
    for k, e in doc.params:
        values[k] = e.resolve(doc.alpha)

    def arg(a: Arg, line: int) -> tuple[float, str | None]:
        if isinstance(a, str):
            if a not in values:
                raise _fail(f"unknown parameter {a!r}", line)
            return values[a], a
        return float(a), None

    declared = {s for s, _ in doc.species}
    reactions = []
    for r in doc.reactions:
        for s, _ in (*r.reactants, *r.products):
            if s not in declared:
                raise _fail(f"reaction {r.id!r} references undeclared species {s!r}", r.line)
        law = r.law
        if law.kind == "ma":
            c, cn = arg(law.args[0], r.line)
            rl = MassAction(c, cn)
        elif law.kind == "mm":
            (v, vn), (km, kn) = (arg(a, r.line) for a in law.args)
            rl = MichaelisMenten(v, km, vn, kn)
        elif law.kind == "hill":
            (kms, kn), (j, jn), (n, nn) = (arg(a, r.line) for a in law.args)
            if n != int(n) or n < 1:
                raise _fail(f"Hill order must be a positive integer, got {n}", r.line)
            rl = Hill(kms, j, int(n), kn, jn, nn)
        else:
            rl = Immediate()
        reactions.append(Reaction(r.id, r.reactants, r.products, rl))
    conservations = []
    for d in doc.directives:
        if isinstance(d, UnpackStmt):
            break  # later conservations refer to the unpacked network
        conservations.append(_conservation(doc, d))
    return ReactionNetwork(doc.name, [Species(s, n) for s, n in doc.species], reactions,
                           values, conservations)


def _conservation(doc: ModelDocument, d: ConserveStmt) -> Conservation:
    return Conservation(d.terms, int(round(d.total.resolve(doc.alpha, d.line))))


def apply_directives(doc: ModelDocument, expansions: list | None = None) -> ReactionNetwork:
    """Build the network and execute directives in document order.

    A ``conserve`` line after an ``unpack`` line annotates the unpacked
    network.  Each TemplateExpansion is appended to ``expansions`` if given.
    """
    net = build_network(doc)
    unpacked = False
    for d in doc.directives:
        if isinstance(d, ConserveStmt):
            if unpacked:
                cons = _conservation(doc, d)
                missing = sorted({s for s, _ in cons.coefficients} - set(net.species_ids))
                if missing:
                    raise _fail(f"conservation references unknown species {missing}", d.line)
                init = {sp.id: sp.initial_count for sp in net.species}
                if cons.value(init) != cons.total:
                    raise _fail(f"conservation {cons.label()} = {cons.value(init)} initially, "
                                f"not {cons.total}", d.line)
                if not any(c.coefficients == cons.coefficients and c.total == cons.total
                           for c in net.conservations):
                    net = ReactionNetwork(net.name, net.species, net.reactions,
                                          net.parameters, (*net.conservations, cons))
            continue
        unpacked = True
        if d.reaction not in net.reaction_ids:
            raise _fail(f"unpack directive references missing reaction {d.reaction!r}", d.line)
        opts = dict(d.options)
        num = lambda k, default=None: (opts[k].resolve(doc.alpha, d.line)
                                       if isinstance(opts.get(k), ParamExpr) else default)
        name = lambda k: opts[k] if isinstance(opts.get(k), str) else None
        try:
            if d.template == "mm":
                etot = num("Etot")
                if etot is None:
                    raise _fail("mm unpacking needs Etot", d.line)
                net, exp = templates.unpack_mm(net, d.reaction, int(round(etot)),
                                             num("rho", templates.DEFAULT_RHO),
                                             name("enzyme"), name("complex"))
            else:
                law = net.reaction(d.reaction).rate_law
                if all(k in opts for k in ("k1", "k2", "k3", "k4")):
                    deriv = templates.HillDerivation.from_rates(
                        num("k1"), num("k2"), num("k3"), num("k4"))
                elif all(k in opts for k in ("K1", "s1", "s2")):
                    deriv = templates.derive_hill_params(getattr(law, "j", math.nan),
                                                         num("K1"), num("s1"), num("s2"))
                else:
                    raise _fail("hill unpacking needs K1, s1, s2 or k1..k4", d.line)
                names = {"gene": name("gene")} if name("gene") else None
                g_tot = int(round(num("Gtot", 1)))
                net, exp = templates.unpack_hill(net, d.reaction, deriv, names, g_tot)
            if expansions is not None:
                expansions.append(exp)
        except ModelSyntaxError:
            raise
        except RxError as exc:
            raise type(exc)(f"line {d.line}: {exc}") from exc
    return net


def document_from_network(net: ReactionNetwork, alpha: float | None = None) -> ModelDocument:
    """Flatten a network (e.g. after unpacking) into a directive-free document."""
    params = [(k, ParamExpr(float(v))) for k, v in net.parameters.items()]
    known = dict(net.parameters)

    def a(value, label):
        if label is not None and label in known and known[label] == value:
            return label
        return float(value)

    reactions = []
    for r in net.reactions:
        law = r.rate_law
        if isinstance(law, MassAction):
            st = RateLawStmt("ma", (a(law.c, law.c_name),))
        elif isinstance(law, MichaelisMenten):
            st = RateLawStmt("mm", (a(law.vmax, law.vmax_name), a(law.km, law.km_name)))
        elif isinstance(law, Hill):
            st = RateLawStmt("hill", (a(law.kms, law.kms_name), a(law.j, law.j_name),
                                      a(float(law.n), law.n_name)))
        else:
            st = RateLawStmt("inf")
        reactions.append(ReactionStmt(r.id, r.reactants, r.products, st))
    directives = [ConserveStmt(c.coefficients, ParamExpr(float(c.total)))
                  for c in net.conservations]
    return ModelDocument(net.name, alpha, [(s.id, s.initial_count) for s in net.species],
                         params, reactions, directives)


def load_model(path) -> ReactionNetwork:
    with open(path, encoding="utf-8") as fh:
        return apply_directives(parse_model(fh.read()))
