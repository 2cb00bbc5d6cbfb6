"""Solidity-subset front end: tokens, AST, parser and printer."""

from .ast import ContractUnit, FunctionDecl, SourceUnit, StateVariableDecl
from .lexer import Token, TokenKind, tokenize
from .parser import parse, parse_source, parse_source_unit, resolve_contract
from .printer import print_source_unit

__all__ = [
    "ContractUnit",
    "FunctionDecl",
    "SourceUnit",
    "StateVariableDecl",
    "Token",
    "TokenKind",
    "parse",
    "parse_source",
    "parse_source_unit",
    "print_source_unit",
    "resolve_contract",
    "tokenize",
]
