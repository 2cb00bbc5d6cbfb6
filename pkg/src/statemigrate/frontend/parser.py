"""Recursive-descent parser for the Solidity subset.

The subset covers what ERC-20/721/1155 style contracts need: one file, at most
one linear inheritance chain, state variables (value types, strings/bytes,
mappings, arrays, structs), events, custom errors, and function bodies built
from assignments, control flow, calls and arithmetic. Everything else is
rejected with an :class:`UnsupportedConstructError` naming the construct.
"""

from __future__ import annotations

from typing import Optional, Sequence

from ..errors import ParseError, UnsupportedConstructError
from . import ast
from .lexer import Token, TokenKind, is_elementary_keyword, tokenize

__all__ = ["parse", "parse_source", "parse_source_unit", "resolve_contract"]

_VISIBILITY = ("public", "private", "internal", "external")
_LOCATIONS = ("memory", "storage", "calldata")
_UNITS = frozenset("wei gwei ether seconds minutes hours days weeks".split())
_ASSIGN_OPS = frozenset("= += -= *= /= %= |= &= ^= <<= >>=".split())

# binary operators, loosest binding first
_BINARY_LEVELS: Sequence[frozenset] = (
    frozenset(["||"]),
    frozenset(["&&"]),
    frozenset(["==", "!="]),
    frozenset(["<", ">", "<=", ">="]),
    frozenset(["|"]),
    frozenset(["^"]),
    frozenset(["&"]),
    frozenset(["<<", ">>"]),
    frozenset(["+", "-"]),
    frozenset(["*", "/", "%"]),
)


def canonical_elementary(name: str) -> str:
    if name == "uint":
        return "uint256"
    if name == "int":
        return "int256"
    return name


class _Parser:
    def __init__(self, tokens: Sequence[Token], filename: str):
        self.tokens = list(tokens)
        self.pos = 0
        self.filename = filename

    # -- token helpers --------------------------------------------------------

    def peek(self, ahead: int = 0) -> Optional[Token]:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, text: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok is not None and tok.text == text and tok.kind != TokenKind.STRING

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        self.pos += 1
        return tok

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def expect_identifier(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != TokenKind.IDENTIFIER:
            self.error("expected identifier")
        return self.advance()

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line, col = (last.line, last.column + len(last.text)) if last else (1, 1)
            raise ParseError(f"{message}, found end of input", self.filename, line, col)
        raise ParseError(f"{message}, found {tok.text!r}", self.filename, tok.line, tok.column)

    def unsupported(self, construct: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        line, col = (tok.line, tok.column) if tok else (0, 0)
        raise UnsupportedConstructError(f"unsupported construct: {construct}", self.filename, line, col)

    def span_from(self, start: Token) -> ast.Span:
        last = self.tokens[self.pos - 1]
        return (start.offset, last.end)

    # -- source unit ----------------------------------------------------------

    def source_unit(self) -> ast.SourceUnit:
        pragmas = []
        definitions = []
        start = self.peek()
        while self.peek() is not None:
            tok = self.peek()
            if self.at("pragma"):
                self.advance()
                text = ""
                prev = None
                while not self.at(";"):
                    part = self.advance()
                    if prev is not None and part.offset > prev.end:
                        text += " "
                    text += part.text
                    prev = part
                self.expect(";")
                pragmas.append(text)
            elif self.at("contract") or self.at("abstract"):
                definitions.append(self.contract())
            elif self.at("struct"):
                definitions.append(self.struct())
            elif self.at("event"):
                definitions.append(self.event())
            elif self.at("error"):
                definitions.append(self.error_def())
            elif tok.text in ("library", "interface", "import", "enum", "using", "function"):
                self.unsupported(f"top-level {tok.text}")
            else:
                self.error("expected contract definition")
        span = (start.offset, self.tokens[-1].end) if start else ast.NO_SPAN
        return ast.SourceUnit(tuple(pragmas), tuple(definitions), span)

    def contract(self) -> ast.ContractDef:
        start = self.peek()
        abstract = bool(self.accept("abstract"))
        self.expect("contract")
        name = self.expect_identifier().text
        base = None
        if self.accept("is"):
            base = self.expect_identifier().text
            if self.at("("):
                self.unsupported("base constructor arguments")
            if self.at(","):
                self.unsupported("multiple inheritance")
        self.expect("{")
        members = []
        while not self.at("}"):
            members.append(self.contract_member())
        self.expect("}")
        self._check_unique(members)
        return ast.ContractDef(name, base, tuple(members), abstract, self.span_from(start))

    def _check_unique(self, members):
        seen = {}
        for m in members:
            if isinstance(m, ast.FunctionDecl) and m.kind == "constructor":
                key = "constructor"
            else:
                key = m.name
            if key in seen:
                raise ParseError(f"duplicate declaration of {key!r}", self.filename,
                                 *self._line_col(m.span[0]))
            seen[key] = m

    def _line_col(self, offset: int):
        for tok in self.tokens:
            if tok.offset == offset:
                return tok.line, tok.column
        return 0, 0

    def contract_member(self) -> ast.Node:
        tok = self.peek()
        if tok is None:
            self.error("expected '}'")
        text = tok.text
        if text == "struct":
            return self.struct()
        if text == "event":
            return self.event()
        if text == "error":
            return self.error_def()
        if text == "function":
            return self.function()
        if text == "constructor":
            return self.function(constructor=True)
        if text == "modifier":
            return self.unsupported("modifier definition")
        if text in ("enum", "using", "fallback", "receive", "assembly"):
            return self.unsupported(text)
        return self.state_variable()

    def struct(self) -> ast.StructDef:
        start = self.expect("struct")
        name = self.expect_identifier().text
        self.expect("{")
        members = []
        while not self.at("}"):
            mstart = self.peek()
            type_name = self.type_name()
            mname = self.expect_identifier().text
            self.expect(";")
            members.append(ast.Parameter(type_name, None, mname, span=self.span_from(mstart)))
        self.expect("}")
        return ast.StructDef(name, tuple(members), self.span_from(start))

    def event(self) -> ast.EventDef:
        start = self.expect("event")
        name = self.expect_identifier().text
        params = self.parameter_list(allow_indexed=True)
        anonymous = bool(self.accept("anonymous"))
        self.expect(";")
        return ast.EventDef(name, params, anonymous, self.span_from(start))

    def error_def(self) -> ast.ErrorDef:
        start = self.expect("error")
        name = self.expect_identifier().text
        params = self.parameter_list()
        self.expect(";")
        return ast.ErrorDef(name, params, self.span_from(start))

    def state_variable(self) -> ast.StateVariableDecl:
        start = self.peek()
        type_name = self.type_name()
        visibility = "internal"
        mutability = ""
        override = False
        while True:
            tok = self.peek()
            if tok is None:
                self.error("expected state variable name")
            if tok.text in _VISIBILITY:
                visibility = self.advance().text
                if visibility == "external":
                    self.error("state variables cannot be external", tok)
            elif tok.text in ("constant", "immutable"):
                mutability = self.advance().text
            elif tok.text == "override":
                self.advance()
                override = True
            else:
                break
        name = self.expect_identifier().text
        initial = None
        if self.accept("="):
            initial = self.expression()
        self.expect(";")
        return ast.StateVariableDecl(name, type_name, visibility, mutability, initial, override,
                                     self.span_from(start))

    def function(self, constructor: bool = False) -> ast.FunctionDecl:
        start = self.peek()
        if constructor:
            self.expect("constructor")
            name = "constructor"
        else:
            self.expect("function")
            tok = self.peek()
            if tok is None or tok.kind != TokenKind.IDENTIFIER:
                self.error("expected function name")
            name = self.advance().text
        params = self.parameter_list()
        visibility = "public" if constructor else None
        mutability = "default"
        virtual = override = False
        returns: tuple = ()
        while True:
            tok = self.peek()
            if tok is None:
                self.error("expected function body")
            if tok.text in _VISIBILITY:
                visibility = self.advance().text
            elif tok.text in ("view", "pure", "payable"):
                mutability = self.advance().text
            elif tok.text == "virtual":
                self.advance()
                virtual = True
            elif tok.text == "override":
                self.advance()
                override = True
                if self.at("("):
                    self.unsupported("override specifier list")
            elif tok.text == "returns":
                self.advance()
                returns = self.parameter_list()
            elif tok.kind == TokenKind.IDENTIFIER:
                self.unsupported(f"modifier invocation {tok.text!r}")
            else:
                break
        if visibility is None:
            self.error("function visibility must be explicit", start)
        body = None
        if not self.accept(";"):
            body = self.block()
        return ast.FunctionDecl(name, params, returns, visibility, mutability, body,
                                "constructor" if constructor else "function", virtual, override,
                                self.span_from(start))

    def parameter_list(self, allow_indexed: bool = False) -> tuple:
        self.expect("(")
        params = []
        while not self.at(")"):
            pstart = self.peek()
            type_name = self.type_name()
            location = None
            indexed = False
            if self.peek() is not None and self.peek().text in _LOCATIONS:
                location = self.advance().text
            if allow_indexed and self.accept("indexed"):
                indexed = True
            name = None
            if self.peek() is not None and self.peek().kind == TokenKind.IDENTIFIER:
                name = self.advance().text
            params.append(ast.Parameter(type_name, location, name, indexed, self.span_from(pstart)))
            if not self.accept(","):
                break
        self.expect(")")
        return tuple(params)

    # -- types ----------------------------------------------------------------

    def type_name(self) -> ast.TypeName:
        start = self.peek()
        if start is None:
            self.error("expected type name")
        if self.at("mapping"):
            self.advance()
            self.expect("(")
            key = self.type_name()
            if not isinstance(key, ast.ElementaryType):
                raise ParseError("mapping keys must be elementary types", self.filename, start.line, start.column)
            if self.peek() is not None and self.peek().kind == TokenKind.IDENTIFIER:
                self.advance()  # named key, ignored
            self.expect("=>")
            value = self.type_name()
            if self.peek() is not None and self.peek().kind == TokenKind.IDENTIFIER and self.at(")", 1):
                self.advance()  # named value, ignored
            self.expect(")")
            base: ast.TypeName = ast.MappingType(key, value, self.span_from(start))
        elif start.kind == TokenKind.KEYWORD and is_elementary_keyword(start.text):
            self.advance()
            payable = False
            if start.text == "address" and self.at("payable"):
                self.advance()
                payable = True
            base = ast.ElementaryType(canonical_elementary(start.text), payable, self.span_from(start))
        elif start.kind == TokenKind.IDENTIFIER:
            self.advance()
            if self.at("."):
                self.unsupported("qualified type name")
            base = ast.UserType(start.text, self.span_from(start))
        elif start.text == "function":
            self.unsupported("function type")
        else:
            self.error("expected type name")
        while self.at("["):
            self.advance()
            length = None
            if not self.at("]"):
                tok = self.advance()
                if tok.kind != TokenKind.NUMBER or not _is_plain_int(tok.text):
                    self.error("array length must be an integer literal", tok)
                length = int(tok.text.replace("_", ""), 0)
                if length <= 0:
                    self.error("array length must be positive", tok)
            self.expect("]")
            base = ast.ArrayType(base, length, self.span_from(start))
        return base

    # -- statements -----------------------------------------------------------

    def block(self, unchecked: bool = False) -> ast.Block:
        start = self.peek()
        if unchecked:
            self.expect("unchecked")
        self.expect("{")
        stmts = []
        while not self.at("}"):
            stmts.append(self.statement())
        self.expect("}")
        return ast.Block(tuple(stmts), unchecked, self.span_from(start))

    def statement(self) -> ast.Statement:
        tok = self.peek()
        if tok is None:
            self.error("expected statement")
        text = tok.text if tok.kind != TokenKind.STRING else None
        if text == "{":
            return self.block()
        if text == "unchecked":
            return self.block(unchecked=True)
        if text == "if":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement()
            otherwise = None
            if self.accept("else"):
                otherwise = self.statement()
            return ast.If(cond, then, otherwise, self.span_from(tok))
        if text == "for":
            self.advance()
            self.expect("(")
            init = None
            if not self.accept(";"):
                init = self.simple_statement()
            cond = None
            if not self.at(";"):
                cond = self.expression()
            self.expect(";")
            post = None
            if not self.at(")"):
                post = self.expression()
            self.expect(")")
            body = self.statement()
            return ast.For(init, cond, post, body, self.span_from(tok))
        if text == "while":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            body = self.statement()
            return ast.While(cond, body, self.span_from(tok))
        if text == "return":
            self.advance()
            value = None
            if not self.at(";"):
                value = self.expression()
            self.expect(";")
            return ast.Return(value, self.span_from(tok))
        if text == "emit":
            self.advance()
            call = self.expression()
            if not isinstance(call, ast.Call):
                self.error("expected event invocation", tok)
            self.expect(";")
            return ast.Emit(call, self.span_from(tok))
        if text == "revert" and self.peek(1) is not None and self.peek(1).kind == TokenKind.IDENTIFIER:
            self.advance()
            call = self.expression()
            if not isinstance(call, ast.Call):
                self.error("expected error invocation", tok)
            self.expect(";")
            return ast.Revert(call, self.span_from(tok))
        if text == "break":
            self.advance()
            self.expect(";")
            return ast.Break(self.span_from(tok))
        if text == "continue":
            self.advance()
            self.expect(";")
            return ast.Continue(self.span_from(tok))
        if text == "assembly":
            self.unsupported("inline assembly")
        if text in ("do", "try"):
            self.unsupported(f"{text} statement")
        return self.simple_statement()

    def simple_statement(self) -> ast.Statement:
        """Variable declaration or expression statement, terminated by ';'."""
        start = self.peek()
        decl = self._try_variable_declaration()
        if decl is not None:
            return decl
        expr = self.expression()
        self.expect(";")
        return ast.ExpressionStatement(expr, self.span_from(start))

    def _try_variable_declaration(self) -> Optional[ast.VariableDeclaration]:
        start = self.peek()
        if start.text == "(":
            return None
        saved = self.pos
        try:
            type_name = self.type_name()
        except UnsupportedConstructError:
            self.pos = saved
            return None
        except ParseError:
            self.pos = saved
            return None
        location = None
        if self.peek() is not None and self.peek().text in _LOCATIONS:
            location = self.advance().text
        tok = self.peek()
        if tok is None or tok.kind != TokenKind.IDENTIFIER:
            self.pos = saved
            return None
        name = self.advance().text
        initial = None
        if self.accept("="):
            initial = self.expression()
        self.expect(";")
        return ast.VariableDeclaration(type_name, location, name, initial, self.span_from(start))

    # -- expressions ----------------------------------------------------------

    def expression(self) -> ast.Expression:
        start = self.peek()
        left = self.conditional()
        tok = self.peek()
        if tok is not None and tok.kind == TokenKind.OPERATOR and tok.text in _ASSIGN_OPS:
            self.advance()
            value = self.expression()
            return ast.Assignment(tok.text, left, value, self.span_from(start))
        return left

    def conditional(self) -> ast.Expression:
        start = self.peek()
        cond = self.binary(0)
        if self.accept("?"):
            if_true = self.expression()
            self.expect(":")
            if_false = self.expression()
            return ast.Conditional(cond, if_true, if_false, self.span_from(start))
        return cond

    def binary(self, level: int) -> ast.Expression:
        if level == len(_BINARY_LEVELS):
            return self.exponent()
        start = self.peek()
        left = self.binary(level + 1)
        ops = _BINARY_LEVELS[level]
        while True:
            tok = self.peek()
            if tok is None or tok.kind != TokenKind.OPERATOR or tok.text not in ops:
                return left
            self.advance()
            right = self.binary(level + 1)
            left = ast.BinaryOp(tok.text, left, right, self.span_from(start))

    def exponent(self) -> ast.Expression:
        start = self.peek()
        base = self.unary()
        if self.accept("**"):
            power = self.exponent()  # right associative
            return ast.BinaryOp("**", base, power, self.span_from(start))
        return base

    def unary(self) -> ast.Expression:
        tok = self.peek()
        if tok is not None and tok.kind != TokenKind.STRING and tok.text in ("!", "-", "~", "++", "--", "delete"):
            self.advance()
            operand = self.unary()
            return ast.UnaryOp(tok.text, operand, True, self.span_from(tok))
        return self.postfix()

    def postfix(self) -> ast.Expression:
        start = self.peek()
        expr = self.primary()
        while True:
            if self.at("("):
                args = self.arguments()
                expr = ast.Call(expr, args, self.span_from(start))
            elif self.at("["):
                self.advance()
                index = None
                if not self.at("]"):
                    index = self.expression()
                    if self.at(":"):
                        self.unsupported("array slice")
                self.expect("]")
                expr = ast.IndexAccess(expr, index, self.span_from(start))
            elif self.at("."):
                self.advance()
                tok = self.advance()
                if tok.kind not in (TokenKind.IDENTIFIER, TokenKind.KEYWORD):
                    self.error("expected member name", tok)
                if tok.text in ("call", "delegatecall", "staticcall") and self.at("("):
                    self.unsupported(f"low-level {tok.text}", tok)
                expr = ast.MemberAccess(expr, tok.text, self.span_from(start))
            elif self.at("{"):
                self.unsupported("call options")
            elif self.at("++") or self.at("--"):
                op = self.advance().text
                expr = ast.UnaryOp(op, expr, False, self.span_from(start))
            else:
                return expr

    def arguments(self) -> tuple:
        self.expect("(")
        if self.at("{"):
            self.unsupported("named call arguments")
        args = []
        while not self.at(")"):
            args.append(self.expression())
            if not self.accept(","):
                break
        self.expect(")")
        return tuple(args)

    def primary(self) -> ast.Expression:
        tok = self.peek()
        if tok is None:
            self.error("expected expression")
        if tok.kind == TokenKind.NUMBER:
            self.advance()
            unit = None
            nxt = self.peek()
            if nxt is not None and nxt.kind == TokenKind.IDENTIFIER and nxt.text in _UNITS:
                unit = self.advance().text
            return ast.NumberLiteral(tok.text, unit, self.span_from(tok))
        if tok.kind == TokenKind.STRING:
            self.advance()
            return ast.StringLiteral(tok.text, self.span_from(tok))
        if tok.kind == TokenKind.IDENTIFIER:
            self.advance()
            return ast.Identifier(tok.text, self.span_from(tok))
        text = tok.text
        if text in ("true", "false"):
            self.advance()
            return ast.BoolLiteral(text == "true", self.span_from(tok))
        if text == "payable":
            self.advance()
            return ast.TypeExpression(ast.ElementaryType("address", True, self.span_from(tok)), self.span_from(tok))
        if tok.kind == TokenKind.KEYWORD and is_elementary_keyword(text):
            type_name = self.type_name()
            return ast.TypeExpression(type_name, self.span_from(tok))
        if text == "new":
            self.advance()
            type_name = self.type_name()
            return ast.NewExpression(type_name, self.span_from(tok))
        if text == "(":
            self.advance()
            items: list = []
            is_tuple = False
            while not self.at(")"):
                if self.at(","):
                    items.append(None)
                else:
                    items.append(self.expression())
                if self.accept(","):
                    is_tuple = True
                    if self.at(")"):
                        items.append(None)
                else:
                    break
            self.expect(")")
            if not is_tuple and len(items) == 1:
                return items[0]
            return ast.TupleExpression(tuple(items), self.span_from(tok))
        if text == "[":
            self.unsupported("inline array")
        if text == "assembly":
            self.unsupported("inline assembly")
        if text == "revert" and self.at("(", 1):
            self.advance()
            return ast.Identifier(text, self.span_from(tok))
        if text == "super":
            self.unsupported("super call")
        if text == "this":
            self.advance()
            return ast.Identifier(text, self.span_from(tok))
        self.error("expected expression")


def _is_plain_int(text: str) -> bool:
    t = text.replace("_", "")
    if t.lower().startswith("0x"):
        return True
    return t.isdigit()


# -- public API ----------------------------------------------------------------


def parse_source_unit(tokens: Sequence[Token], filename: str = "<input>") -> ast.SourceUnit:
    parser = _Parser(tokens, filename)
    return parser.source_unit()


def resolve_contract(unit: ast.SourceUnit, name: Optional[str] = None, filename: str = "<input>",
                     source_address: Optional[str] = None,
                     source_text: Optional[str] = None) -> ast.ContractUnit:
    """Flatten the named contract (default: the last one) and its base chain."""
    contracts = {d.name: d for d in unit.definitions if isinstance(d, ast.ContractDef)}
    if not contracts:
        raise ParseError("no contract definition found", filename, 1, 1)
    if name is None:
        target = [d for d in unit.definitions if isinstance(d, ast.ContractDef)][-1]
    elif name in contracts:
        target = contracts[name]
    else:
        raise ParseError(f"contract {name!r} not found", filename, 1, 1)

    chain = []
    seen = set()
    cur: Optional[ast.ContractDef] = target
    while cur is not None:
        if cur.name in seen:
            raise ParseError(f"cyclic inheritance through {cur.name!r}", filename, 0, 0)
        seen.add(cur.name)
        chain.append(cur)
        if cur.base is None:
            cur = None
        elif cur.base in contracts:
            cur = contracts[cur.base]
        else:
            raise ParseError(f"base contract {cur.base!r} is not defined in this input", filename, 0, 0)
    chain.reverse()

    file_level = [d for d in unit.definitions if not isinstance(d, ast.ContractDef)]
    state_vars: list = []
    functions: list = []
    structs = [d for d in file_level if isinstance(d, ast.StructDef)]
    events = [d for d in file_level if isinstance(d, ast.EventDef)]
    errors = [d for d in file_level if isinstance(d, ast.ErrorDef)]
    constructor = None
    for contract in chain:
        for member in contract.members:
            if isinstance(member, ast.StateVariableDecl):
                if any(v.name == member.name for v in state_vars):
                    raise ParseError(f"state variable {member.name!r} shadows an inherited one", filename, 0, 0)
                state_vars.append(member)
            elif isinstance(member, ast.FunctionDecl):
                if member.kind == "constructor":
                    constructor = member
                    continue
                for i, existing in enumerate(functions):
                    if existing.name == member.name:
                        functions[i] = member
                        break
                else:
                    functions.append(member)
            elif isinstance(member, ast.StructDef):
                structs.append(member)
            elif isinstance(member, ast.EventDef):
                events.append(member)
            elif isinstance(member, ast.ErrorDef):
                errors.append(member)

    from .scope import check_pure_functions

    result = ast.ContractUnit(
        name=target.name,
        base=target.base,
        state_variables=tuple(state_vars),
        functions=tuple(functions),
        structs=tuple(structs),
        events=tuple(events),
        errors=tuple(errors),
        constructor=constructor,
        source_address=source_address,
        filename=filename,
        source_text=source_text,
    )
    check_pure_functions(result, filename)
    return result


def parse(tokens: Sequence[Token], name: Optional[str] = None, filename: str = "<input>",
          source_address: Optional[str] = None, source_text: Optional[str] = None) -> ast.ContractUnit:
    """Parse tokens into a flattened :class:`ContractUnit`."""
    unit = parse_source_unit(tokens, filename)
    return resolve_contract(unit, name, filename, source_address, source_text)


def parse_source(source: str, name: Optional[str] = None, filename: str = "<input>",
                 source_address: Optional[str] = None) -> ast.ContractUnit:
    return parse(tokenize(source, filename), name, filename, source_address, source)
