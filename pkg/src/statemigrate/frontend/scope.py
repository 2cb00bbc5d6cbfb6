"""Name resolution inside function bodies.

Walks a function body with proper block scoping and reports every reference
to a storage variable and every call, so that locals and parameters that
shadow state variables are not mistaken for storage accesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Set

from ..errors import ParseError
from . import ast

__all__ = ["Reference", "function_references", "check_pure_functions", "BUILTIN_CALLS"]

BUILTIN_CALLS = frozenset(
    "require assert revert keccak256 sha256 ripemd160 ecrecover addmod mulmod gasleft "
    "blockhash selfdestruct type".split()
)
BUILTIN_NAMES = frozenset("msg block tx abi this now".split())


@dataclass(frozen=True)
class Reference:
    kind: str  # "state" | "call" | "unknown_call"
    name: str
    node: ast.Node
    write: bool = False


class _Walker:
    def __init__(self, contract: ast.ContractUnit):
        self.state = {v.name for v in contract.storage_variables}
        self.constants = {v.name for v in contract.state_variables if v.is_constant_or_immutable}
        self.functions = {f.name for f in contract.functions}
        self.types = {s.name for s in contract.structs}
        self.events = {e.name for e in contract.events}
        self.errors = {e.name for e in contract.errors}
        self.scopes: List[Set[str]] = []
        self.refs: List[Reference] = []

    def is_local(self, name: str) -> bool:
        return any(name in scope for scope in self.scopes)

    def declare(self, name: Optional[str]):
        if name:
            self.scopes[-1].add(name)

    # -- statements

    def statement(self, stmt: ast.Node):
        if isinstance(stmt, ast.Block):
            self.scopes.append(set())
            for s in stmt.statements:
                self.statement(s)
            self.scopes.pop()
        elif isinstance(stmt, ast.VariableDeclaration):
            if stmt.initial is not None:
                self.expression(stmt.initial)
            self.declare(stmt.name)
        elif isinstance(stmt, ast.ExpressionStatement):
            self.expression(stmt.expression)
        elif isinstance(stmt, ast.If):
            self.expression(stmt.condition)
            self.scoped(stmt.then)
            if stmt.otherwise is not None:
                self.scoped(stmt.otherwise)
        elif isinstance(stmt, ast.For):
            self.scopes.append(set())
            if stmt.init is not None:
                self.statement(stmt.init)
            if stmt.condition is not None:
                self.expression(stmt.condition)
            if stmt.post is not None:
                self.expression(stmt.post)
            self.scoped(stmt.body)
            self.scopes.pop()
        elif isinstance(stmt, ast.While):
            self.expression(stmt.condition)
            self.scoped(stmt.body)
        elif isinstance(stmt, ast.Return):
            if stmt.value is not None:
                self.expression(stmt.value)
        elif isinstance(stmt, (ast.Emit, ast.Revert)):
            call = stmt.event if isinstance(stmt, ast.Emit) else stmt.error
            for arg in call.arguments:
                self.expression(arg)

    def scoped(self, stmt: ast.Node):
        self.scopes.append(set())
        self.statement(stmt)
        self.scopes.pop()

    # -- expressions

    def expression(self, expr: Optional[ast.Node], write: bool = False):
        if expr is None:
            return
        if isinstance(expr, ast.Identifier):
            name = expr.name
            if self.is_local(name):
                return
            if name in self.state:
                self.refs.append(Reference("state", name, expr, write))
            elif name in self.functions:
                # function used as a value still needs its data
                self.refs.append(Reference("call", name, expr))
        elif isinstance(expr, ast.Assignment):
            self.expression(expr.target, write=True)
            if expr.op != "=":
                self.expression(expr.target)
            self.expression(expr.value)
        elif isinstance(expr, ast.UnaryOp):
            mutates = expr.op in ("++", "--", "delete")
            self.expression(expr.operand, write=mutates)
            if expr.op in ("++", "--"):
                self.expression(expr.operand)
        elif isinstance(expr, ast.BinaryOp):
            self.expression(expr.left)
            self.expression(expr.right)
        elif isinstance(expr, ast.Conditional):
            self.expression(expr.condition)
            self.expression(expr.if_true)
            self.expression(expr.if_false)
        elif isinstance(expr, ast.TupleExpression):
            for item in expr.items:
                self.expression(item, write)
        elif isinstance(expr, ast.IndexAccess):
            self.expression(expr.base, write)
            self.expression(expr.index)
        elif isinstance(expr, ast.MemberAccess):
            mutating_member = expr.member in ("push", "pop")
            self.expression(expr.expression, write or mutating_member)
        elif isinstance(expr, ast.Call):
            self.call(expr)

    def call(self, call: ast.Call):
        callee = call.callee
        if isinstance(callee, ast.Identifier) and not self.is_local(callee.name):
            name = callee.name
            if name in self.functions:
                self.refs.append(Reference("call", name, call))
            elif name in self.state or name in self.constants:
                self.refs.append(Reference("unknown_call", name, call))
            elif not (name in BUILTIN_CALLS or name in self.types or name in self.errors or name in self.events):
                self.refs.append(Reference("unknown_call", name, call))
        elif isinstance(callee, ast.MemberAccess) and isinstance(callee.expression, ast.Identifier) \
                and callee.expression.name == "this" and callee.member in self.functions:
            self.refs.append(Reference("call", callee.member, call))
        else:
            self.expression(callee)
        for arg in call.arguments:
            self.expression(arg)


def function_references(contract: ast.ContractUnit, fn: ast.FunctionDecl) -> List[Reference]:
    """Storage references and calls made directly by ``fn``, in source order."""
    walker = _Walker(contract)
    walker.scopes.append({p.name for p in fn.params + fn.returns if p.name})
    if fn.body is not None:
        walker.statement(fn.body)
    return walker.refs


def state_references(contract: ast.ContractUnit, fn: ast.FunctionDecl) -> Iterator[Reference]:
    return (r for r in function_references(contract, fn) if r.kind == "state")


def check_pure_functions(contract: ast.ContractUnit, filename: str = "<input>"):
    for fn in contract.functions:
        if fn.mutability != "pure":
            continue
        for ref in state_references(contract, fn):
            line, col = contract.position(ref.node.span[0])
            raise ParseError(f"pure function {fn.name!r} references state variable {ref.name!r}",
                             filename, line, col)
