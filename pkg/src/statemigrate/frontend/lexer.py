"""Tokenizer for the supported Solidity subset."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from ..errors import LexError

__all__ = ["Token", "TokenKind", "KEYWORDS", "tokenize"]


class TokenKind(str, enum.Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    NUMBER = "number-literal"
    STRING = "string-literal"
    PUNCTUATION = "punctuation"
    OPERATOR = "operator"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)

    def __repr__(self) -> str:
        return f"Token({self.kind.value}, {self.text!r}, {self.line}:{self.column})"


KEYWORDS = frozenset(
    """
    pragma import contract abstract interface library is struct enum event error
    function constructor modifier fallback receive returns return
    public private internal external view pure payable virtual override
    constant immutable memory storage calldata indexed anonymous
    mapping if else for while do break continue emit revert unchecked
    new delete true false assembly using
    address bool string bytes
    """.split()
)

_ELEMENTARY = re.compile(r"(?:u?int(?:8|16|24|32|40|48|56|64|72|80|88|96|104|112|120|128|136|144|152|160|168|176|184|192|200|208|216|224|232|240|248|256)?|bytes(?:[1-9]|[12][0-9]|3[0-2]))\Z")

# longest first so that e.g. ">>=" wins over ">>" and ">"
_OPERATORS = sorted(
    """
    ** ++ -- += -= *= /= %= |= &= ^= <<= >>= << >> <= >= == != && || => = + - * / %
    ! ~ & | ^ < > ? :
    """.split(),
    key=len,
    reverse=True,
)
_PUNCT = set("(){}[];,.")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n\f\v]+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<unterminated_comment>/\*)
  | (?P<number>0[xX][0-9a-fA-F_]+|(?:[0-9][0-9_]*)(?:\.[0-9_]+)?(?:[eE]-?[0-9_]+)?)
  | (?P<hexstr>hex(?:"[0-9a-fA-F_]*"|'[0-9a-fA-F_]*'))
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<unterminated_string>["'])
  | (?P<op>"""
    + "|".join(re.escape(op) for op in _OPERATORS)
    + r""")
  | (?P<punct>[(){}\[\];,.])
    """,
    re.VERBOSE | re.DOTALL,
)


def is_elementary_keyword(text: str) -> bool:
    return text in ("address", "bool", "string", "bytes") or bool(_ELEMENTARY.match(text))


def tokenize(source: str, filename: str = "<input>") -> list[Token]:
    """Split ``source`` into tokens, dropping whitespace and comments.

    Every token records its 1-based line/column and its character offset,
    so ``source[tok.offset:tok.end] == tok.text`` always holds.
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        column = pos - line_start + 1
        if m is None:
            raise LexError(f"illegal character {source[pos]!r}", filename, line, column)
        kind = m.lastgroup
        text = m.group()
        if kind == "unterminated_comment":
            raise LexError("unterminated block comment", filename, line, column)
        if kind == "unterminated_string":
            raise LexError("unterminated string literal", filename, line, column)
        if kind == "ident":
            tk = TokenKind.KEYWORD if (text in KEYWORDS or is_elementary_keyword(text)) else TokenKind.IDENTIFIER
            tokens.append(Token(tk, text, line, column, pos))
        elif kind == "number":
            tokens.append(Token(TokenKind.NUMBER, text, line, column, pos))
        elif kind in ("string", "hexstr"):
            tokens.append(Token(TokenKind.STRING, text, line, column, pos))
        elif kind == "op":
            tokens.append(Token(TokenKind.OPERATOR, text, line, column, pos))
        elif kind == "punct":
            tokens.append(Token(TokenKind.PUNCTUATION, text, line, column, pos))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    return tokens
