"""Pretty-printer for the subset AST; output re-parses to an equal tree."""

from __future__ import annotations

from typing import List

from . import ast

__all__ = ["print_source_unit", "print_type", "print_expression"]

_INDENT = "    "

# larger binds tighter
_PRECEDENCE = {
    "||": 3, "&&": 4, "==": 5, "!=": 5, "<": 6, ">": 6, "<=": 6, ">=": 6,
    "|": 7, "^": 8, "&": 9, "<<": 10, ">>": 10, "+": 11, "-": 11,
    "*": 12, "/": 12, "%": 12, "**": 13,
}
_ASSIGN = 1
_CONDITIONAL = 2
_UNARY = 14
_POSTFIX = 15


def print_type(t: ast.TypeName) -> str:
    if isinstance(t, ast.ElementaryType):
        return "address payable" if t.payable else t.name
    if isinstance(t, ast.MappingType):
        return f"mapping({print_type(t.key)} => {print_type(t.value)})"
    if isinstance(t, ast.ArrayType):
        return f"{print_type(t.base)}[{'' if t.length is None else t.length}]"
    if isinstance(t, ast.UserType):
        return t.name
    raise TypeError(f"not a type name: {t!r}")


def _precedence(e: ast.Node) -> int:
    if isinstance(e, ast.Assignment):
        return _ASSIGN
    if isinstance(e, ast.Conditional):
        return _CONDITIONAL
    if isinstance(e, ast.BinaryOp):
        return _PRECEDENCE[e.op]
    if isinstance(e, ast.UnaryOp):
        return _UNARY if e.prefix else _POSTFIX
    return _POSTFIX + 1


def _wrap(e: ast.Node, minimum: int) -> str:
    text = print_expression(e)
    return f"({text})" if _precedence(e) < minimum else text


def print_expression(e: ast.Node) -> str:
    if isinstance(e, ast.Identifier):
        return e.name
    if isinstance(e, ast.NumberLiteral):
        return e.text if e.unit is None else f"{e.text} {e.unit}"
    if isinstance(e, ast.StringLiteral):
        return e.text
    if isinstance(e, ast.BoolLiteral):
        return "true" if e.value else "false"
    if isinstance(e, ast.TypeExpression):
        t = e.type_name
        if isinstance(t, ast.ElementaryType) and t.payable:
            return "payable"
        return print_type(t)
    if isinstance(e, ast.NewExpression):
        return f"new {print_type(e.type_name)}"
    if isinstance(e, ast.MemberAccess):
        return f"{_wrap(e.expression, _POSTFIX)}.{e.member}"
    if isinstance(e, ast.IndexAccess):
        index = "" if e.index is None else print_expression(e.index)
        return f"{_wrap(e.base, _POSTFIX)}[{index}]"
    if isinstance(e, ast.Call):
        args = ", ".join(print_expression(a) for a in e.arguments)
        return f"{_wrap(e.callee, _POSTFIX)}({args})"
    if isinstance(e, ast.UnaryOp):
        if e.prefix:
            sep = " " if e.op == "delete" else ""
            # keep "- -x" from collapsing into the "--" token
            inner = _wrap(e.operand, _UNARY)
            if e.op in ("-", "--") and inner.startswith("-") or e.op in ("+", "++") and inner.startswith("+"):
                inner = f"({inner})"
            return f"{e.op}{sep}{inner}"
        return f"{_wrap(e.operand, _POSTFIX)}{e.op}"
    if isinstance(e, ast.BinaryOp):
        p = _PRECEDENCE[e.op]
        if e.op == "**":
            # right associative
            left, right = _wrap(e.left, p + 1), _wrap(e.right, p)
        else:
            left, right = _wrap(e.left, p), _wrap(e.right, p + 1)
        return f"{left} {e.op} {right}"
    if isinstance(e, ast.Assignment):
        return f"{_wrap(e.target, _CONDITIONAL)} {e.op} {_wrap(e.value, _ASSIGN)}"
    if isinstance(e, ast.Conditional):
        return (f"{_wrap(e.condition, _CONDITIONAL + 1)} ? {_wrap(e.if_true, _ASSIGN)}"
                f" : {_wrap(e.if_false, _ASSIGN)}")
    if isinstance(e, ast.TupleExpression):
        items = ["" if i is None else print_expression(i) for i in e.items]
        text = ", ".join(items)
        if len(items) == 1 or (items and items[-1] == ""):
            text += ","
        return f"({text})"
    raise TypeError(f"not an expression: {e!r}")


def _param(p: ast.Parameter) -> str:
    parts = [print_type(p.type_name)]
    if p.location:
        parts.append(p.location)
    if p.indexed:
        parts.append("indexed")
    if p.name:
        parts.append(p.name)
    return " ".join(parts)


def _params(ps) -> str:
    return "(" + ", ".join(_param(p) for p in ps) + ")"


class _Printer:
    def __init__(self):
        self.lines: List[str] = []
        self.depth = 0

    def emit(self, text: str):
        self.lines.append(_INDENT * self.depth + text)

    def block_body(self, block: ast.Block):
        self.depth += 1
        for s in block.statements:
            self.statement(s)
        self.depth -= 1

    def block(self, block: ast.Block, head: str):
        prefix = f"{head} " if head else ""
        self.emit(f"{prefix}{'unchecked ' if block.unchecked else ''}{{")
        self.block_body(block)
        self.emit("}")

    def nested(self, stmt: ast.Node, head: str):
        if isinstance(stmt, ast.Block) and not stmt.unchecked:
            self.block(stmt, head)
        else:
            # braces would turn the body into a Block on re-parse
            self.emit(head)
            self.depth += 1
            self.statement(stmt)
            self.depth -= 1

    def simple(self, stmt: ast.Node) -> str:
        if isinstance(stmt, ast.VariableDeclaration):
            parts = [print_type(stmt.type_name)]
            if stmt.location:
                parts.append(stmt.location)
            parts.append(stmt.name)
            text = " ".join(parts)
            if stmt.initial is not None:
                text += f" = {print_expression(stmt.initial)}"
            return text
        if isinstance(stmt, ast.ExpressionStatement):
            return print_expression(stmt.expression)
        raise TypeError(f"not a simple statement: {stmt!r}")

    def statement(self, s: ast.Node):
        if isinstance(s, ast.Block):
            self.block(s, "")
        elif isinstance(s, (ast.VariableDeclaration, ast.ExpressionStatement)):
            self.emit(self.simple(s) + ";")
        elif isinstance(s, ast.If):
            self.nested(s.then, f"if ({print_expression(s.condition)})")
            if s.otherwise is not None:
                self.nested(s.otherwise, "else")
        elif isinstance(s, ast.For):
            init = self.simple(s.init) if s.init is not None else ""
            cond = print_expression(s.condition) if s.condition is not None else ""
            post = print_expression(s.post) if s.post is not None else ""
            self.nested(s.body, f"for ({init}; {cond}; {post})".replace("( ;", "(;"))
        elif isinstance(s, ast.While):
            self.nested(s.body, f"while ({print_expression(s.condition)})")
        elif isinstance(s, ast.Return):
            self.emit("return;" if s.value is None else f"return {print_expression(s.value)};")
        elif isinstance(s, ast.Emit):
            self.emit(f"emit {print_expression(s.event)};")
        elif isinstance(s, ast.Revert):
            self.emit(f"revert {print_expression(s.error)};")
        elif isinstance(s, ast.Break):
            self.emit("break;")
        elif isinstance(s, ast.Continue):
            self.emit("continue;")
        else:
            raise TypeError(f"not a statement: {s!r}")

    def member(self, m: ast.Node):
        if isinstance(m, ast.StateVariableDecl):
            parts = [print_type(m.type_name)]
            if m.visibility != "internal":
                parts.append(m.visibility)
            if m.mutability:
                parts.append(m.mutability)
            if m.override:
                parts.append("override")
            parts.append(m.name)
            text = " ".join(parts)
            if m.initial is not None:
                text += f" = {print_expression(m.initial)}"
            self.emit(text + ";")
        elif isinstance(m, ast.FunctionDecl):
            if m.kind == "constructor":
                head = f"constructor{_params(m.params)}"
            else:
                head = f"function {m.name}{_params(m.params)} {m.visibility}"
            if m.mutability != "default":
                head += f" {m.mutability}"
            if m.virtual:
                head += " virtual"
            if m.override:
                head += " override"
            if m.returns:
                head += f" returns {_params(m.returns)}"
            if m.body is None:
                self.emit(head + ";")
            else:
                self.block(m.body, head)
        elif isinstance(m, ast.StructDef):
            self.emit(f"struct {m.name} {{")
            self.depth += 1
            for p in m.members:
                self.emit(_param(p) + ";")
            self.depth -= 1
            self.emit("}")
        elif isinstance(m, ast.EventDef):
            self.emit(f"event {m.name}{_params(m.params)}{' anonymous' if m.anonymous else ''};")
        elif isinstance(m, ast.ErrorDef):
            self.emit(f"error {m.name}{_params(m.params)};")
        elif isinstance(m, ast.ContractDef):
            head = f"{'abstract ' if m.abstract else ''}contract {m.name}"
            if m.base:
                head += f" is {m.base}"
            self.emit(head + " {")
            self.depth += 1
            for inner in m.members:
                self.member(inner)
            self.depth -= 1
            self.emit("}")
        else:
            raise TypeError(f"not a declaration: {m!r}")


def print_source_unit(unit: ast.SourceUnit) -> str:
    p = _Printer()
    for pragma in unit.pragmas:
        p.emit(f"pragma {pragma};")
    for d in unit.definitions:
        p.member(d)
    return "\n".join(p.lines) + "\n"
