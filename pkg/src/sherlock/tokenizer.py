"""C/C++ lexical analysis and fixed-length integer encoding.

This is deliberately not a compiler front end. The scanner strips comments
and whitespace, collapses every literal into a per-category placeholder,
keeps identifiers verbatim and matches operators with maximal munch, which
is enough to expose the token n-grams the downstream model learns from.
Anything unrecognized becomes a single-character punctuation token, so
noisy real-world input never aborts a scan.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError

PAD_ID = 0
OOV_ID = 1
FIRST_ENTRY_ID = 2

PAD_LEXEME = "<pad>"
OOV_LEXEME = "<oov>"

INT_PLACEHOLDER = "<int>"
FLOAT_PLACEHOLDER = "<float>"
STRING_PLACEHOLDER = "<str>"
CHAR_PLACEHOLDER = "<char>"
LITERAL_PLACEHOLDERS = (
    INT_PLACEHOLDER,
    FLOAT_PLACEHOLDER,
    STRING_PLACEHOLDER,
    CHAR_PLACEHOLDER,
)

DEFAULT_MAX_LEN = 500
DEFAULT_TOP_K = 10_000


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    INT_LITERAL = "int"
    FLOAT_LITERAL = "float"
    STRING_LITERAL = "string"
    CHAR_LITERAL = "char"
    OPERATOR = "operator"
    PUNCTUATION = "punctuation"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str


TokenStream = list[Token]

# C11 keywords plus the common C++ set; identifiers on this list lex as keywords.
KEYWORDS = frozenset(
    """
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Alignas _Alignof _Atomic _Bool _Complex _Generic _Imaginary _Noreturn
    _Static_assert _Thread_local
    alignas alignof and and_eq asm bitand bitor bool catch char8_t char16_t
    char32_t class compl concept const_cast consteval constexpr constinit
    co_await co_return co_yield decltype delete dynamic_cast explicit export
    false friend mutable namespace new noexcept not not_eq nullptr operator
    or or_eq private protected public reinterpret_cast requires static_assert
    static_cast template this thread_local throw true try typeid typename
    using virtual wchar_t xor xor_eq
    """.split()
)

# Structural delimiters; every other symbol lexes as an operator.
PUNCTUATION_LEXEMES = frozenset(
    ["(", ")", "{", "}", "[", "]", ";", ",", "...", "#", "##"]
)

OPERATOR_LEXEMES = frozenset(
    [
        "<<=", ">>=", "->*",
        "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
        "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=", "::", ".*",
        "+", "-", "*", "/", "%", "=", "<", ">", "!", "&", "|", "^", "~",
        "?", ":", ".",
    ]
)

SYMBOL_LEXEMES = OPERATOR_LEXEMES | PUNCTUATION_LEXEMES

# Longest lexeme first gives maximal munch; lexicographic second key keeps
# the compiled pattern stable across runs.
_SYMBOL_PATTERN = "|".join(
    re.escape(s) for s in sorted(SYMBOL_LEXEMES, key=lambda s: (-len(s), s))
)

_LEXER_RE = re.compile(
    r"""
      (?P<skip>\s+|//[^\n]*|/\*.*?\*/|/\*.*)
    | (?P<string>(?:u8|u|U|L)?
        (?:R"(?P<rsdelim>[^()\\\s]{0,16})\(.*?\)(?P=rsdelim)"
          |"(?:\\.|[^"\\\n])*"?))
    | (?P<char>(?:u8|u|U|L)?'(?:\\.|[^'\\\n])*'?)
    | (?P<float>(?:0[xX](?:[0-9a-fA-F]+(?:\.[0-9a-fA-F]*)?|\.[0-9a-fA-F]+)[pP][+-]?[0-9]+
                 |(?:[0-9]+\.[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?
                 |[0-9]+[eE][+-]?[0-9]+
                 )[fFlL]*)
    | (?P<int>(?:0[xX][0-9a-fA-F]+(?:'[0-9a-fA-F]+)*
               |0[bB][01]+(?:'[01]+)*
               |[0-9]+(?:'[0-9]+)*
               )[uUlLzZ]{0,3})
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<symbol>%s)
    """
    % _SYMBOL_PATTERN,
    re.VERBOSE | re.DOTALL,
)


def lex(source: str | bytes) -> TokenStream:
    """Tokenize one C/C++ function body.

    Accepts raw bytes (invalid UTF-8 is replaced, never fatal). Comments and
    whitespace are dropped, literals collapse to their category placeholder,
    and any character the scanner does not know becomes a one-character
    punctuation token.
    """
    if isinstance(source, (bytes, bytearray)):
        source = bytes(source).decode("utf-8", errors="replace")
    tokens: TokenStream = []
    pos = 0
    end = len(source)
    while pos < end:
        m = _LEXER_RE.match(source, pos)
        if m is None:
            tokens.append(Token(TokenKind.PUNCTUATION, source[pos]))
            pos += 1
            continue
        pos = m.end()
        if m.group("skip") is not None:
            continue
        if m.group("string") is not None:
            tokens.append(Token(TokenKind.STRING_LITERAL, STRING_PLACEHOLDER))
        elif m.group("char") is not None:
            tokens.append(Token(TokenKind.CHAR_LITERAL, CHAR_PLACEHOLDER))
        elif m.group("float") is not None:
            tokens.append(Token(TokenKind.FLOAT_LITERAL, FLOAT_PLACEHOLDER))
        elif m.group("int") is not None:
            tokens.append(Token(TokenKind.INT_LITERAL, INT_PLACEHOLDER))
        elif (ident := m.group("ident")) is not None:
            kind = TokenKind.KEYWORD if ident in KEYWORDS else TokenKind.IDENTIFIER
            tokens.append(Token(kind, ident))
        else:
            sym = m.group("symbol")
            kind = (
                TokenKind.PUNCTUATION
                if sym in PUNCTUATION_LEXEMES
                else TokenKind.OPERATOR
            )
            tokens.append(Token(kind, sym))
    return tokens


class Vocabulary:
    """Immutable lexeme -> id mapping; id 0 is padding, id 1 out-of-vocabulary."""

    def __init__(self, entries: dict[str, int]):
        expected = FIRST_ENTRY_ID
        for lexeme, token_id in entries.items():
            if token_id != expected:
                raise ConfigError(
                    f"vocabulary ids must be contiguous from {FIRST_ENTRY_ID}; "
                    f"got id {token_id} for {lexeme!r}, expected {expected}"
                )
            if lexeme in (PAD_LEXEME, OOV_LEXEME):
                raise ConfigError(f"{lexeme!r} is reserved and cannot be an entry")
            expected += 1
        self._entries = dict(entries)

    @property
    def size(self) -> int:
        """Total id count, including the two reserved ids."""
        return len(self._entries) + FIRST_ENTRY_ID

    def __len__(self) -> int:
        return self.size

    def __contains__(self, lexeme: str) -> bool:
        return lexeme in self._entries

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._entries == other._entries

    def id_of(self, lexeme: str) -> int:
        return self._entries.get(lexeme, OOV_ID)

    def items(self) -> list[tuple[str, int]]:
        return list(self._entries.items())

    def to_text(self) -> str:
        lines = [f"{PAD_LEXEME}\t{PAD_ID}", f"{OOV_LEXEME}\t{OOV_ID}"]
        lines.extend(f"{lexeme}\t{token_id}" for lexeme, token_id in self._entries.items())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Vocabulary":
        entries: dict[str, int] = {}
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line:
                continue
            lexeme, sep, raw_id = line.rpartition("\t")
            if not sep:
                raise DataError(f"vocabulary line {line_no} has no tab separator")
            token_id = int(raw_id)
            if token_id == PAD_ID or token_id == OOV_ID:
                continue  # reserved rows are informational
            entries[lexeme] = token_id
        return cls(entries)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def build_vocabulary(corpus: Iterable[TokenStream], top_k: int = DEFAULT_TOP_K) -> Vocabulary:
    """Closed base set (keywords, symbols, placeholders) plus the top_k most
    frequent identifiers, ties broken lexicographically."""
    if top_k < 0:
        raise ConfigError(f"top_k must be >= 0, got {top_k}")
    counts: Counter[str] = Counter()
    for stream in corpus:
        for token in stream:
            if token.kind is TokenKind.IDENTIFIER:
                counts[token.text] += 1
    kept = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]

    entries: dict[str, int] = {}
    next_id = FIRST_ENTRY_ID
    for lexeme in sorted(KEYWORDS | SYMBOL_LEXEMES | set(LITERAL_PLACEHOLDERS)):
        entries[lexeme] = next_id
        next_id += 1
    for lexeme, _ in kept:
        entries[lexeme] = next_id
        next_id += 1
    return Vocabulary(entries)


def encode(tokens: Sequence[Token], vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN) -> np.ndarray:
    """Map a token stream to exactly max_len ids: tail-truncated, zero-padded."""
    if max_len < 1:
        raise ConfigError(f"max_len must be >= 1, got {max_len}")
    ids = np.zeros(max_len, dtype=np.int64)
    for i, token in enumerate(tokens[:max_len]):
        ids[i] = vocab.id_of(token.text)
    return ids


@dataclass(frozen=True)
class EncodedSample:
    """Fixed-length id sequence plus the 5-slot binary label vector."""

    ids: np.ndarray
    labels: np.ndarray
