"""Tokenizer for `.clls` source and REPL input.

Maximal-munch scanner.  `--` starts a line comment, `/* */` a block comment
(nesting not supported).  Labels are `#` immediately followed by an
identifier.  String literals know only the `\\"` and `\\\\` escapes.
"""

from __future__ import annotations

from dataclasses import dataclass

from clls.diagnostics import Diagnostic, LexError, Span

KEYWORDS = frozenset(
    """
    proc type rec corec gen_rec and cut letc share par fwd send recv pair
    close wait case offer choice of call affine coaffine use discard drop
    release cell take put state statel usage if then else print println
    sleep lint lstring mod
    """.split()
)

# Multi-character operators first so maximal munch wins.
OPERATORS = (";;", "||", "<-", "->", "==", ";", "|", "{", "}", "(", ")",
             "[", "]", "<", ">", ":", ",", ".", "+", "-", "*", "~", "!",
             "?", "#")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | label | int | string | op | eof
    lexeme: str
    span: Span

    def is_kw(self, word: str) -> bool:
        return self.kind == "keyword" and self.lexeme == word

    def is_op(self, op: str) -> bool:
        return self.kind == "op" and self.lexeme == op

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.lexeme!r})"


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


class _Scanner:
    def __init__(self, source: str, filename: str):
        self.src = source
        self.file = filename
        self.pos = 0
        self.line = 1
        self.col = 1

    def span(self) -> Span:
        return Span(self.file, self.line, self.col)

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def advance(self) -> str:
        ch = self.src[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def error(self, rule: str, message: str, span: Span) -> LexError:
        return LexError(Diagnostic(rule, message, span))

    def skip_trivia(self) -> None:
        while self.pos < len(self.src):
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif ch == "-" and self.peek(1) == "-":
                while self.pos < len(self.src) and self.peek() != "\n":
                    self.advance()
            elif ch == "/" and self.peek(1) == "*":
                start = self.span()
                self.advance()
                self.advance()
                while True:
                    if self.pos >= len(self.src):
                        raise self.error("unterminated-comment",
                                         "block comment is never closed", start)
                    if self.peek() == "*" and self.peek(1) == "/":
                        self.advance()
                        self.advance()
                        break
                    self.advance()
            else:
                return

    def scan_string(self) -> Token:
        start = self.span()
        self.advance()  # opening quote
        chars: list[str] = []
        while True:
            if self.pos >= len(self.src) or self.peek() == "\n":
                raise self.error("unterminated-string",
                                 "string literal is never closed", start)
            ch = self.advance()
            if ch == '"':
                return Token("string", "".join(chars), start)
            if ch == "\\":
                esc = self.advance() if self.pos < len(self.src) else ""
                if esc == '"':
                    chars.append('"')
                elif esc == "\\":
                    chars.append("\\")
                else:
                    raise self.error("bad-escape",
                                     f"unknown escape \\{esc}", start)
            else:
                chars.append(ch)

    def next_token(self) -> Token:
        self.skip_trivia()
        start = self.span()
        if self.pos >= len(self.src):
            return Token("eof", "", start)
        ch = self.peek()
        if ch == '"':
            return self.scan_string()
        if ch.isdigit():
            digits: list[str] = []
            while self.pos < len(self.src) and self.peek().isdigit():
                digits.append(self.advance())
            return Token("int", "".join(digits), start)
        if ch == "#":
            self.advance()
            if not _is_ident_start(self.peek()):
                raise self.error("bad-label", "`#` must be followed by a name",
                                 start)
            name: list[str] = []
            while self.pos < len(self.src) and _is_ident_char(self.peek()):
                name.append(self.advance())
            return Token("label", "#" + "".join(name), start)
        if _is_ident_start(ch):
            name = []
            while self.pos < len(self.src) and _is_ident_char(self.peek()):
                name.append(self.advance())
            word = "".join(name)
            kind = "keyword" if word in KEYWORDS else "ident"
            return Token(kind, word, start)
        for op in OPERATORS:
            if self.src.startswith(op, self.pos):
                for _ in op:
                    self.advance()
                return Token("op", op, start)
        raise self.error("bad-character", f"unexpected character {ch!r}", start)


def tokenize(source: str, filename: str = "<input>") -> list[Token]:
    """Scan `source` into a token list terminated by one eof token."""
    scanner = _Scanner(source, filename)
    tokens: list[Token] = []
    while True:
        tok = scanner.next_token()
        tokens.append(tok)
        if tok.kind == "eof":
            return tokens
