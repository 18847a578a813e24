"""Concrete surface syntax: text -> Program, and a pretty-printer back to text.

Grammar (whitespace-insensitive, ``//`` line comments):

    program      := (classdecl | layerdecl)* "main" "{" expr "}"
    classdecl    := "class" ID "extends" ID "{" fielddecl* methoddecl* "}"
    fielddecl    := ID ID ";"
    methoddecl   := ID ID "(" params? ")" "{" "return" expr ";" "}"
    layerdecl    := "swappable"? "layer" ID ("extends" ID)?
                    ("requires" ID ("," ID)*)? "{" pmethoddecl* "}"
    pmethoddecl  := ID ID "." ID "(" params? ")" "{" "return" expr ";" "}"
    expr         := primary (("." ID "(" args? ")") | ("." ID))*
    primary      := ID | "this" | "new" ID "(" args? ")"
                  | "proceed" "(" args? ")" | "superproceed" "(" args? ")"
                  | "super" "." ID "(" args? ")"
                  | "with" expr "{" expr "}"
                  | "swap" "(" expr "," ID ")" "{" expr "}"
                  | "(" expr ")"

A layer without ``extends`` extends Base; without ``requires`` it requires
nothing.  Type names and ``new`` targets are resolved against the parsed
tables after the whole file is read, so declaration order never matters.
Annotated runtime invocations render (for traces) but are not parseable.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Optional

from .syntax import (
    BASE, OBJECT, AnnotatedInvoke, CfjError, ClassDecl, ClassType, Cursor,
    Expr, FieldGet, Invoke, LayerDecl, LayerType, MethodDecl, NewClass,
    NewLayer, PartialMethodDecl, Proceed, Program, SourceSpan, SuperCall,
    SuperProceed, Swap, Type, ValidationReport, Var, With, validate_tables,
)

KEYWORDS = frozenset({
    "class", "extends", "layer", "swappable", "requires", "main",
    "new", "this", "return", "proceed", "superproceed", "super",
    "with", "swap",
})

EMPTY_SEQ = "•"  # how an empty layer sequence prints in cursors


class ParseError(CfjError):
    def __init__(self, message: str, span: SourceSpan, expected: tuple = ()):
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = expected

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


class ValidationError(CfjError):
    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


# ------------------------------------------------------------------
# Tokenizer
# ------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str   # "id", "punct", "eof"
    text: str
    span: SourceSpan


_PUNCT = {"{", "}", "(", ")", ";", ",", "."}


def _tokenize(text: str) -> list:
    toks = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "/" and text[i:i + 2] == "//":
            while i < n and text[i] != "\n":
                i += 1
            continue
        span_start = i
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = sys.intern(text[i:j])
            toks.append(Token("id", word, SourceSpan(span_start, j, line, col)))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            toks.append(Token("punct", ch, SourceSpan(i, i + 1, line, col)))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", SourceSpan(i, i + 1, line, col))
    toks.append(Token("eof", "", SourceSpan(n, n, line, col)))
    return toks


# ------------------------------------------------------------------
# Parser
# ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def error(self, expected: tuple) -> ParseError:
        got = self.cur.text or "end of input"
        want = " or ".join(repr(e) for e in expected)
        return ParseError(f"expected {want}, found {got!r}", self.cur.span, expected)

    def at(self, text: str) -> bool:
        return self.cur.text == text and self.cur.kind != "eof"

    def eat(self, text: str) -> Token:
        if not self.at(text):
            raise self.error((text,))
        tok = self.cur
        self.pos += 1
        return tok

    def ident(self) -> Token:
        tok = self.cur
        if tok.kind != "id" or tok.text in KEYWORDS:
            raise self.error(("identifier",))
        self.pos += 1
        return tok

    # -- program ----------------------------------------------------

    def program(self) -> tuple:
        classes = []
        layers = []
        while True:
            if self.at("class"):
                classes.append(self.classdecl())
            elif self.at("layer") or self.at("swappable"):
                layers.append(self.layerdecl())
            else:
                break
        self.eat("main")
        self.eat("{")
        main = self.expr()
        self.eat("}")
        if self.cur.kind != "eof":
            raise self.error(("end of input",))
        return classes, layers, main

    def classdecl(self) -> ClassDecl:
        start = self.eat("class")
        name = self.ident()
        self.eat("extends")
        sup = self.ident()
        self.eat("{")
        fields = []
        methods = {}
        while not self.at("}"):
            # Both fields and methods start with "type ID"; the next token
            # decides which it is.
            ahead = self.peek(2)
            if ahead.text == ";":
                ftype = self.ident()
                fname = self.ident()
                self.eat(";")
                fields.append((ClassType(ftype.text), fname.text))
            else:
                mname, decl = self.methoddecl(name.text)
                if mname in methods:
                    raise ParseError(f"duplicate method {name.text}.{mname}", self.cur.span)
                methods[mname] = decl
        end = self.eat("}")
        span = SourceSpan(start.span.start, end.span.end, start.span.line, start.span.col)
        return ClassDecl(name.text, sup.text, tuple(fields), methods, span)

    def methoddecl(self, classname: str) -> tuple:
        rtype = self.ident()
        mname = self.ident()
        params = self.params()
        body, span = self.method_body(rtype.span, in_partial=False)
        decl = MethodDecl(mname.text, ClassType(rtype.text), params, body, span)
        return mname.text, decl

    def layerdecl(self) -> LayerDecl:
        swappable = False
        if self.at("swappable"):
            start = self.eat("swappable")
            swappable = True
        else:
            start = self.cur
        self.eat("layer")
        name = self.ident()
        sup = BASE
        if self.at("extends"):
            self.eat("extends")
            sup = self.ident().text
        requires = []
        if self.at("requires"):
            self.eat("requires")
            requires.append(self.ident().text)
            while self.at(","):
                self.eat(",")
                requires.append(self.ident().text)
        self.eat("{")
        pms = {}
        while not self.at("}"):
            key, pm = self.pmethoddecl()
            if key in pms:
                raise ParseError(
                    f"duplicate partial method {key[0]}.{key[1]} in layer {name.text}",
                    self.cur.span)
            pms[key] = pm
        end = self.eat("}")
        span = SourceSpan(start.span.start, end.span.end, start.span.line, start.span.col)
        return LayerDecl(name.text, sup, swappable, tuple(requires), pms, span)

    def pmethoddecl(self) -> tuple:
        rtype = self.ident()
        target = self.ident()
        self.eat(".")
        mname = self.ident()
        params = self.params()
        body, span = self.method_body(rtype.span, in_partial=True)
        decl = PartialMethodDecl(
            target.text, mname.text, ClassType(rtype.text), params, body, span)
        return (target.text, mname.text), decl

    def params(self) -> tuple:
        self.eat("(")
        out = []
        if not self.at(")"):
            while True:
                ptype = self.ident()
                pname = self.ident()
                out.append((ClassType(ptype.text), pname.text))
                if self.at(","):
                    self.eat(",")
                else:
                    break
        self.eat(")")
        return tuple(out)

    def method_body(self, start: SourceSpan, in_partial: bool) -> tuple:
        self.eat("{")
        self.eat("return")
        old = self.in_partial_body
        self.in_partial_body = in_partial
        try:
            body = self.expr()
        finally:
            self.in_partial_body = old
        self.eat(";")
        end = self.eat("}")
        return body, SourceSpan(start.start, end.span.end, start.line, start.col)

    in_partial_body = False

    # -- expressions -------------------------------------------------

    def expr(self) -> Expr:
        e = self.primary()
        while self.at("."):
            self.eat(".")
            name = self.ident()
            if self.at("("):
                args = self.args()
                e = Invoke(e, name.text, args, name.span)
            else:
                e = FieldGet(e, name.text, name.span)
        return e

    def args(self) -> tuple:
        self.eat("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.at(","):
                self.eat(",")
                out.append(self.expr())
        self.eat(")")
        return tuple(out)

    def primary(self) -> Expr:
        tok = self.cur
        if self.at("("):
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return e
        if self.at("this"):
            self.eat("this")
            return Var("this", tok.span)
        if self.at("new"):
            self.eat("new")
            name = self.ident()
            args = self.args()
            # Class vs layer is settled by the resolution pass.
            return NewClass(name.text, args, name.span)
        if self.at("proceed"):
            if not self.in_partial_body:
                raise ParseError("proceed is only allowed inside a partial method body", tok.span)
            self.eat("proceed")
            return Proceed(self.args(), tok.span)
        if self.at("superproceed"):
            if not self.in_partial_body:
                raise ParseError("superproceed is only allowed inside a partial method body", tok.span)
            self.eat("superproceed")
            return SuperProceed(self.args(), tok.span)
        if self.at("super"):
            self.eat("super")
            self.eat(".")
            name = self.ident()
            return SuperCall(name.text, self.args(), tok.span)
        if self.at("with"):
            self.eat("with")
            layer_expr = self.expr()
            self.eat("{")
            body = self.expr()
            self.eat("}")
            return With(layer_expr, body, tok.span)
        if self.at("swap"):
            self.eat("swap")
            self.eat("(")
            layer_expr = self.expr()
            self.eat(",")
            target = self.ident()
            self.eat(")")
            self.eat("{")
            body = self.expr()
            self.eat("}")
            return Swap(layer_expr, target.text, body, tok.span)
        if tok.kind == "id" and tok.text not in KEYWORDS:
            self.ident()
            return Var(tok.text, tok.span)
        raise self.error(("expression",))


# ------------------------------------------------------------------
# Name resolution: ClassType vs LayerType, NewClass vs NewLayer
# ------------------------------------------------------------------

def _resolve_type(t: Type, classes: dict, layers: dict) -> Type:
    name = t.name
    if name in classes or name == OBJECT:
        return ClassType(name)
    if name in layers or name == BASE:
        return LayerType(name)
    return t  # left for validate_tables to report


def _resolve_expr(e: Expr, classes: dict, layers: dict) -> Expr:
    def go(e: Expr) -> Expr:
        if isinstance(e, Var):
            return e
        if isinstance(e, FieldGet):
            return FieldGet(go(e.obj), e.fieldname, e.span)
        if isinstance(e, Invoke):
            return Invoke(go(e.recv), e.method, tuple(go(a) for a in e.args), e.span)
        if isinstance(e, NewClass):
            if e.classname in layers or (e.classname == BASE and e.classname not in classes):
                if e.args:
                    raise ParseError(
                        f"layer instantiation new {e.classname}(...) takes no arguments",
                        e.span or SourceSpan(0, 0, 1, 1))
                return NewLayer(e.classname, e.span)
            return NewClass(e.classname, tuple(go(a) for a in e.args), e.span)
        if isinstance(e, NewLayer):
            return e
        if isinstance(e, With):
            return With(go(e.layer_expr), go(e.body), e.span)
        if isinstance(e, Swap):
            return Swap(go(e.layer_expr), e.swappable, go(e.body), e.span)
        if isinstance(e, Proceed):
            return Proceed(tuple(go(a) for a in e.args), e.span)
        if isinstance(e, SuperCall):
            return SuperCall(e.method, tuple(go(a) for a in e.args), e.span)
        if isinstance(e, SuperProceed):
            return SuperProceed(tuple(go(a) for a in e.args), e.span)
        raise CfjError(f"cannot resolve names in {type(e).__name__}")
    return go(e)


def _resolve_params(params: tuple, classes: dict, layers: dict) -> tuple:
    return tuple((_resolve_type(t, classes, layers), n) for t, n in params)


def parse_program(text: str, source_name: str = "<string>") -> Program:
    """Parse and validate a whole program, raising on any problem."""
    classdecls, layerdecls, main = _Parser(text).program()

    classes: dict = {}
    for decl in classdecls:
        if decl.name in classes:
            raise ParseError(f"duplicate class {decl.name}", decl.span)
        classes[decl.name] = decl
    layers: dict = {}
    for decl in layerdecls:
        if decl.name in layers:
            raise ParseError(f"duplicate layer {decl.name}", decl.span)
        if decl.name in classes:
            raise ParseError(f"{decl.name} declared as both class and layer", decl.span)
        layers[decl.name] = decl

    resolved_classes = {}
    for name, decl in classes.items():
        methods = {}
        for m, md in decl.methods.items():
            methods[m] = MethodDecl(
                md.name,
                _resolve_type(md.return_type, classes, layers),
                _resolve_params(md.params, classes, layers),
                _resolve_expr(md.body, classes, layers),
                md.span,
            )
        resolved_classes[name] = ClassDecl(
            decl.name,
            decl.superclass,
            tuple((_resolve_type(t, classes, layers), f) for t, f in decl.own_fields),
            methods,
            decl.span,
        )
    resolved_layers = {}
    for name, decl in layers.items():
        pms = {}
        for key, pm in decl.partial_methods.items():
            pms[key] = PartialMethodDecl(
                pm.target_class,
                pm.name,
                _resolve_type(pm.return_type, classes, layers),
                _resolve_params(pm.params, classes, layers),
                _resolve_expr(pm.body, classes, layers),
                pm.span,
            )
        resolved_layers[name] = LayerDecl(
            decl.name, decl.superlayer, decl.swappable, decl.requires, pms, decl.span)

    program = Program(
        resolved_classes,
        resolved_layers,
        _resolve_expr(main, classes, layers),
        source_name,
    )
    report = validate_tables(program)
    if not report.ok:
        raise ValidationError(report)
    return program


# ------------------------------------------------------------------
# Renderer
# ------------------------------------------------------------------

def _render_seq(seq: tuple) -> str:
    if not seq:
        return EMPTY_SEQ
    return "(" + ";".join(seq) + ")"


def _render_cursor(c: Cursor) -> str:
    if c.is_quad:
        return f"<{c.target},{c.layer},{_render_seq(c.prefix)},{_render_seq(c.full)}>"
    return f"<{c.target},{_render_seq(c.prefix)},{_render_seq(c.full)}>"


def render_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, FieldGet):
        return f"{render_expr(e.obj)}.{e.fieldname}"
    if isinstance(e, Invoke):
        args = ", ".join(render_expr(a) for a in e.args)
        return f"{render_expr(e.recv)}.{e.method}({args})"
    if isinstance(e, NewClass):
        args = ", ".join(render_expr(a) for a in e.args)
        return f"new {e.classname}({args})"
    if isinstance(e, NewLayer):
        return f"new {e.layername}()"
    if isinstance(e, With):
        return f"with {render_expr(e.layer_expr)} {{ {render_expr(e.body)} }}"
    if isinstance(e, Swap):
        return f"swap ({render_expr(e.layer_expr)}, {e.swappable}) {{ {render_expr(e.body)} }}"
    if isinstance(e, Proceed):
        args = ", ".join(render_expr(a) for a in e.args)
        return f"proceed({args})"
    if isinstance(e, SuperCall):
        args = ", ".join(render_expr(a) for a in e.args)
        return f"super.{e.method}({args})"
    if isinstance(e, SuperProceed):
        args = ", ".join(render_expr(a) for a in e.args)
        return f"superproceed({args})"
    if isinstance(e, AnnotatedInvoke):
        args = ", ".join(render_expr(a) for a in e.args)
        return f"{render_expr(e.recv)}{_render_cursor(e.cursor)}.{e.method}({args})"
    raise CfjError(f"cannot render {type(e).__name__}")


def _render_params(params: tuple) -> str:
    return ", ".join(f"{t} {n}" for t, n in params)


def _render_method(md: MethodDecl, indent: str) -> str:
    return (f"{indent}{md.return_type} {md.name}({_render_params(md.params)}) "
            f"{{ return {render_expr(md.body)}; }}")


def _render_class(decl: ClassDecl) -> str:
    lines = [f"class {decl.name} extends {decl.superclass} {{"]
    for t, f in decl.own_fields:
        lines.append(f"  {t} {f};")
    for md in decl.methods.values():
        lines.append(_render_method(md, "  "))
    lines.append("}")
    return "\n".join(lines)


def _render_layer(decl: LayerDecl) -> str:
    head = "swappable layer" if decl.swappable else "layer"
    head += f" {decl.name} extends {decl.superlayer}"
    if decl.requires:
        head += " requires " + ", ".join(decl.requires)
    lines = [head + " {"]
    for pm in decl.partial_methods.values():
        lines.append(f"  {pm.return_type} {pm.target_class}.{pm.name}"
                     f"({_render_params(pm.params)}) {{ return {render_expr(pm.body)}; }}")
    lines.append("}")
    return "\n".join(lines)


def render(node) -> str:
    """Render a Program, declaration, or expression back to surface syntax.

    For parseable nodes the output re-parses to a structurally identical
    tree (spans aside); runtime invocations render in cursor notation.
    """
    if isinstance(node, Program):
        parts = [_render_class(d) for d in node.classes.values()]
        parts += [_render_layer(d) for d in node.layers.values()]
        parts.append(f"main {{ {render_expr(node.main)} }}")
        return "\n\n".join(parts) + "\n"
    if isinstance(node, ClassDecl):
        return _render_class(node)
    if isinstance(node, LayerDecl):
        return _render_layer(node)
    return render_expr(node)
