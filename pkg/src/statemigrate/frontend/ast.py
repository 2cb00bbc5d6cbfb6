"""Immutable AST for the Solidity subset.

Every node carries ``span = (start, end)`` character offsets into the source.
Spans are excluded from equality so that re-parsed, re-printed trees compare
structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Tuple, Union

Span = Tuple[int, int]
NO_SPAN: Span = (0, 0)


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


class Node:
    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            if f.name == "span":
                continue
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, tuple):
                for item in value:
                    if isinstance(item, Node):
                        yield item

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children():
            yield from child.walk()


# -- type names ---------------------------------------------------------------


@dataclass(frozen=True)
class ElementaryType(Node):
    name: str  # canonical: uint256, int8, address, bool, string, bytes, bytes32, ...
    payable: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class MappingType(Node):
    key: "TypeName"
    value: "TypeName"
    span: Span = _span()


@dataclass(frozen=True)
class ArrayType(Node):
    base: "TypeName"
    length: Optional[int]  # None means dynamic
    span: Span = _span()


@dataclass(frozen=True)
class UserType(Node):
    name: str
    span: Span = _span()


TypeName = Union[ElementaryType, MappingType, ArrayType, UserType]


# -- expressions --------------------------------------------------------------


@dataclass(frozen=True)
class Identifier(Node):
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class NumberLiteral(Node):
    text: str
    unit: Optional[str] = None
    span: Span = _span()


@dataclass(frozen=True)
class StringLiteral(Node):
    text: str  # as written, including quotes / hex prefix
    span: Span = _span()


@dataclass(frozen=True)
class BoolLiteral(Node):
    value: bool
    span: Span = _span()


@dataclass(frozen=True)
class TypeExpression(Node):
    """An elementary type used as a value, e.g. the callee in ``address(0)``."""

    type_name: TypeName
    span: Span = _span()


@dataclass(frozen=True)
class MemberAccess(Node):
    expression: "Expression"
    member: str
    span: Span = _span()


@dataclass(frozen=True)
class IndexAccess(Node):
    base: "Expression"
    index: Optional["Expression"]
    span: Span = _span()


@dataclass(frozen=True)
class Call(Node):
    callee: "Expression"
    arguments: Tuple["Expression", ...]
    span: Span = _span()


@dataclass(frozen=True)
class UnaryOp(Node):
    op: str
    operand: "Expression"
    prefix: bool = True
    span: Span = _span()


@dataclass(frozen=True)
class BinaryOp(Node):
    op: str
    left: "Expression"
    right: "Expression"
    span: Span = _span()


@dataclass(frozen=True)
class Assignment(Node):
    op: str  # "=", "+=", ...
    target: "Expression"
    value: "Expression"
    span: Span = _span()


@dataclass(frozen=True)
class Conditional(Node):
    condition: "Expression"
    if_true: "Expression"
    if_false: "Expression"
    span: Span = _span()


@dataclass(frozen=True)
class TupleExpression(Node):
    items: Tuple[Optional["Expression"], ...]
    span: Span = _span()


@dataclass(frozen=True)
class NewExpression(Node):
    type_name: TypeName
    span: Span = _span()


Expression = Union[
    Identifier, NumberLiteral, StringLiteral, BoolLiteral, TypeExpression, MemberAccess,
    IndexAccess, Call, UnaryOp, BinaryOp, Assignment, Conditional, TupleExpression, NewExpression,
]


# -- statements ---------------------------------------------------------------


@dataclass(frozen=True)
class Block(Node):
    statements: Tuple["Statement", ...]
    unchecked: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class VariableDeclaration(Node):
    type_name: TypeName
    location: Optional[str]
    name: str
    initial: Optional[Expression]
    span: Span = _span()


@dataclass(frozen=True)
class ExpressionStatement(Node):
    expression: Expression
    span: Span = _span()


@dataclass(frozen=True)
class If(Node):
    condition: Expression
    then: "Statement"
    otherwise: Optional["Statement"]
    span: Span = _span()


@dataclass(frozen=True)
class For(Node):
    init: Optional["Statement"]
    condition: Optional[Expression]
    post: Optional[Expression]
    body: "Statement"
    span: Span = _span()


@dataclass(frozen=True)
class While(Node):
    condition: Expression
    body: "Statement"
    span: Span = _span()


@dataclass(frozen=True)
class Return(Node):
    value: Optional[Expression]
    span: Span = _span()


@dataclass(frozen=True)
class Emit(Node):
    event: Call
    span: Span = _span()


@dataclass(frozen=True)
class Revert(Node):
    """``revert CustomError(...)``; the string form ``revert("..")`` is a plain call."""

    error: Call
    span: Span = _span()


@dataclass(frozen=True)
class Break(Node):
    span: Span = _span()


@dataclass(frozen=True)
class Continue(Node):
    span: Span = _span()


Statement = Union[
    Block, VariableDeclaration, ExpressionStatement, If, For, While, Return, Emit, Revert,
    Break, Continue,
]


# -- declarations -------------------------------------------------------------


@dataclass(frozen=True)
class Parameter(Node):
    type_name: TypeName
    location: Optional[str]
    name: Optional[str]
    indexed: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class StructDef(Node):
    name: str
    members: Tuple[Parameter, ...]
    span: Span = _span()


@dataclass(frozen=True)
class EventDef(Node):
    name: str
    params: Tuple[Parameter, ...]
    anonymous: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class ErrorDef(Node):
    name: str
    params: Tuple[Parameter, ...]
    span: Span = _span()


@dataclass(frozen=True)
class StateVariableDecl(Node):
    name: str
    type_name: TypeName
    visibility: str = "internal"  # public | internal | private
    mutability: str = ""  # "" | constant | immutable
    initial: Optional[Expression] = None
    override: bool = False
    span: Span = _span()

    @property
    def is_constant_or_immutable(self) -> bool:
        return self.mutability in ("constant", "immutable")


@dataclass(frozen=True)
class FunctionDecl(Node):
    name: str
    params: Tuple[Parameter, ...]
    returns: Tuple[Parameter, ...] = ()
    visibility: str = "public"  # public | external | internal | private
    mutability: str = "default"  # default | view | pure | payable
    body: Optional[Block] = None
    kind: str = "function"  # function | constructor
    virtual: bool = False
    override: bool = False
    span: Span = _span()

    @property
    def is_public(self) -> bool:
        return self.visibility in ("public", "external")


@dataclass(frozen=True)
class ContractDef(Node):
    """A contract exactly as written, before inheritance is resolved."""

    name: str
    base: Optional[str]
    members: Tuple[Node, ...]
    abstract: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class SourceUnit(Node):
    pragmas: Tuple[str, ...]
    definitions: Tuple[Node, ...]  # ContractDef | StructDef | EventDef | ErrorDef
    span: Span = _span()


@dataclass(frozen=True)
class ContractUnit:
    """A contract with its single-inheritance chain flattened base-first."""

    name: str
    base: Optional[str]
    state_variables: Tuple[StateVariableDecl, ...]
    functions: Tuple[FunctionDecl, ...]
    structs: Tuple[StructDef, ...] = ()
    events: Tuple[EventDef, ...] = ()
    errors: Tuple[ErrorDef, ...] = ()
    constructor: Optional[FunctionDecl] = None
    source_address: Optional[str] = None
    filename: str = field(default="<input>", compare=False, repr=False)
    source_text: Optional[str] = field(default=None, compare=False, repr=False)

    def position(self, offset: int) -> Tuple[int, int]:
        """1-based (line, column) of a character offset, or (0, 0) without source."""
        if self.source_text is None:
            return (0, 0)
        line = self.source_text.count("\n", 0, offset) + 1
        return (line, offset - (self.source_text.rfind("\n", 0, offset) + 1) + 1)

    @property
    def storage_variables(self) -> Tuple[StateVariableDecl, ...]:
        return tuple(v for v in self.state_variables if not v.is_constant_or_immutable)

    def struct(self, name: str) -> Optional[StructDef]:
        for s in self.structs:
            if s.name == name:
                return s
        return None

    def function(self, name: str) -> Optional[FunctionDecl]:
        for f in self.functions:
            if f.name == name:
                return f
        return None
