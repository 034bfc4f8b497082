import pytest

from clls.diagnostics import LexError
from clls.lexer import tokenize


def kinds(src):
    return [(t.kind, t.lexeme) for t in tokenize(src)[:-1]]


def test_hello_world_line():
    toks = kinds('println("hello world "+(2*3));[]')
    assert toks == [
        ("keyword", "println"), ("op", "("), ("string", "hello world "),
        ("op", "+"), ("op", "("), ("int", "2"), ("op", "*"), ("int", "3"),
        ("op", ")"), ("op", ")"), ("op", ";"), ("op", "["), ("op", "]"),
    ]


def test_empty_input():
    toks = tokenize("")
    assert len(toks) == 1 and toks[0].kind == "eof"


def test_label_and_sugar_arrows():
    toks = kinds("#Dup c; c <- 2")
    assert toks == [
        ("label", "#Dup"), ("ident", "c"), ("op", ";"),
        ("ident", "c"), ("op", "<-"), ("int", "2"),
    ]


def test_double_semicolon_is_one_token():
    assert kinds("close x;;")[-1] == ("op", ";;")


def test_parallel_bar_max_munch():
    assert kinds("a || b") == [("ident", "a"), ("op", "||"), ("ident", "b")]


def test_comments_stripped():
    src = "close x -- trailing comment\n/* block\ncomment */ wait y"
    assert kinds(src) == [("keyword", "close"), ("ident", "x"),
                          ("keyword", "wait"), ("ident", "y")]


def test_string_escapes():
    toks = tokenize(r'"a\"b\\c"')
    assert toks[0].value if hasattr(toks[0], "value") else toks[0].lexeme == 'a"b\\c'


def test_unterminated_string():
    with pytest.raises(LexError) as e:
        tokenize('"never closed')
    assert e.value.diagnostic.rule == "unterminated-string"


def test_unterminated_comment():
    with pytest.raises(LexError) as e:
        tokenize("/* never closed")
    assert e.value.diagnostic.rule == "unterminated-comment"


def test_bad_escape():
    with pytest.raises(LexError) as e:
        tokenize(r'"\n"')
    assert e.value.diagnostic.rule == "bad-escape"


def test_spans_track_lines():
    toks = tokenize("close\nwait", "f.clls")
    assert toks[0].span.line == 1 and toks[1].span.line == 2
    assert toks[1].span.file == "f.clls"
