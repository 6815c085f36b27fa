"""Flex-style lexer for Java source.

Comments are dropped. String, text-block and char literals are kept as
single tokens so braces inside them never disturb brace matching.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

IDENT = "ident"
KEYWORD = "keyword"
NUMBER = "number"
STRING = "string"
CHAR = "char"
OP = "op"

STR_TOKEN = "<str>"

JAVA_KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while
    var record yield sealed permits non-sealed
    """.split()
)

# Literal keywords count as literals for Type-2 normalization.
LITERAL_WORDS = frozenset({"true", "false", "null"})

_OPERATORS = sorted(
    """
    >>>= <<= >>= >>> ... -> :: ++ -- && || == != <= >= += -= *= /= &= |= ^= %=
    << >> ( ) { } [ ] ; , . @ = > < ! ~ ? : + - * / & | ^ %
    """.split(),
    key=len,
    reverse=True,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?(?:\*/|\Z))
  | (?P<textblock>\"\"\".*?(?:(?<!\\)\"\"\"|\Z))
  | (?P<string>"(?:[^"\\\n]|\\.)*(?:"|$))
  | (?P<char>'(?:[^'\\\n]|\\.)*(?:'|$))
  | (?P<number>(?:0[xX][0-9a-fA-F_]+|0[bB][01_]+|(?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][+-]?\d+)?)[lLfFdD]?)
  | (?P<word>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>"""
    + "|".join(re.escape(op) for op in _OPERATORS)
    + r""")
  | (?P<other>.)
    """,
    re.VERBOSE | re.DOTALL | re.MULTILINE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int  # character offset into the lexed text
    end: int
    line: int  # 1-based

    @property
    def bag_text(self) -> str:
        """Text used in token bags: string literals collapse to ``<str>``."""
        return STR_TOKEN if self.kind == STRING else self.text


def tokenize(text: str) -> list[Token]:
    """Lex ``text`` into tokens, skipping whitespace and comments.

    Unknown characters (stray backslashes, unicode symbols) become ``op``
    tokens so the lexer is total.
    """
    tokens: list[Token] = []
    line = 1
    for m in _TOKEN_RE.finditer(text):
        group = m.lastgroup
        value = m.group()
        if group in ("ws", "line_comment", "block_comment"):
            line += value.count("\n")
            continue
        if group == "word":
            kind = KEYWORD if value in JAVA_KEYWORDS else IDENT
        elif group in ("string", "textblock"):
            kind = STRING
        elif group == "char":
            kind = CHAR
        elif group == "number":
            kind = NUMBER
        else:
            kind = OP
        tokens.append(Token(kind, value, m.start(), m.end(), line))
        line += value.count("\n")
    return tokens


def is_identifier(text: str) -> bool:
    return bool(re.fullmatch(r"[A-Za-z_$][A-Za-z0-9_$]*", text)) and (
        text not in JAVA_KEYWORDS and text not in LITERAL_WORDS
    )


def is_literal(text: str) -> bool:
    """Whether a bag token denotes a literal (number, char, string, true/false/null)."""
    if text == STR_TOKEN or text in LITERAL_WORDS:
        return True
    return text[:1].isdigit() or text.startswith("'") or (text[:1] == "." and text[1:2].isdigit())


def string_value(literal: str) -> str:
    """Strip the quotes off a string or text-block literal. Escapes are left as-is."""
    if literal.startswith('"""'):
        body = literal[3:]
        return body[:-3] if body.endswith('"""') else body
    body = literal[1:]
    return body[:-1] if body.endswith('"') else body
