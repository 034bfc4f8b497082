import pytest

from clls import sessiontypes as st
from clls import terms as t
from clls.diagnostics import ParseError
from clls.parser import parse_program, parse_repl_input
from clls.pretty import format_program

from helpers import CORPUS_FILES, corpus_source


def test_menu_listing_shape():
    decls = parse_program(corpus_source("menu.clls"), "menu.clls")
    names = [d.name if isinstance(d, t.ProcDecl) else d.decls[0].name
             for d in decls]
    assert names == ["tmenu", "dtmenu", "menu", "alice0", "main0", "bob0",
                     "main1"]
    main0 = decls[4]
    body = main0.body
    assert isinstance(body, t.CutS)
    assert body.name == "s"
    assert body.annot == st.AppT("tmenu", (), dualized=True)
    assert isinstance(body.left, t.CallProc) and body.left.name == "menu"
    assert isinstance(body.right, t.CallProc) and body.right.name == "alice0"


def test_minimal_proc():
    decls = parse_program("proc p(x:close){ close x };;")
    (d,) = decls
    assert isinstance(d, t.ProcDecl)
    assert d.lin_params[0].annot == st.CloseT()
    assert isinstance(d.body, t.Close)


def test_mutually_recursive_type_group():
    decls = parse_program(
        "type rec LList(A){ state Node(A) } and Node(A){ choice of "
        "{ |#Nil: close |#Cons: pair A; LList(A) } };;")
    (group,) = decls
    assert isinstance(group, t.TypeGroup)
    assert group.rec_flag == "rec"
    assert [td.name for td in group.decls] == ["LList", "Node"]


def test_exponential_params_after_semicolon():
    (d,) = parse_program("proc p(x:close; k:~lint, s:~lint){ close x };;")
    assert [p.name for p in d.lin_params] == ["x"]
    assert [p.name for p in d.exp_params] == ["k", "s"]


def test_seq_type_inside_param_list():
    (d,) = parse_program(
        "proc p(ao:pair close; wait, b:close){ wait ao; par "
        "{ close b || [] } };;")
    # `pair close; wait` swallows its continuation; `b` is a second param
    assert len(d.lin_params) == 2
    assert d.lin_params[0].annot == st.SendT(st.CloseT(), st.WaitT())


def test_int_type_alias():
    (d,) = parse_program("proc p(x:state Int){ cell x(1) };;")
    assert d.lin_params[0].annot == st.StateT(st.PrimT("lint"))


def test_closure_forms():
    (d,) = parse_program(
        "proc p(c:state close){ cell c(n. close n) };;")
    assert isinstance(d.body.init, t.Closure)
    (d2,) = parse_program(
        "proc p(c:send close; close){ c <- { n. close n }; close c };;")
    assert isinstance(d2.body.arg, t.Closure)


def test_release_and_statel_synonyms():
    (d,) = parse_program(
        "proc p(u:~statel lint){ take u(x); put u(x); release u };;")
    assert d.lin_params[0].annot == st.dual(st.StateT(st.PrimT("lint")))
    drop = d.body.cont.cont
    assert isinstance(drop, t.DropName)


def test_terminal_sequencing_becomes_par():
    (d,) = parse_program("proc p(x:close, y:close){ close x; close y };;")
    assert isinstance(d.body, t.Par)


def test_if_with_and_without_then():
    src = ("proc p(;n:~lint){ if n==0 then { [] } else { [] } };;"
           "proc q(;n:~lint){ if (n==1) { [] } else { [] } };;")
    decls = parse_program(src)
    assert all(isinstance(d.body, t.If) for d in decls)


def test_parse_errors_carry_spans():
    with pytest.raises(ParseError) as e:
        parse_program("proc p(x:close){ close };;")
    assert e.value.diagnostic.rule == "syntax"
    assert e.value.diagnostic.span.line == 1


def test_every_corpus_file_parses():
    for name in CORPUS_FILES:
        assert parse_program(corpus_source(name), name)


def test_pretty_print_round_trip_fixed_point():
    for name in CORPUS_FILES:
        once = format_program(parse_program(corpus_source(name), name))
        twice = format_program(parse_program(once, name))
        assert once == twice, f"printer not a fixed point on {name}"


def test_repl_invocation():
    cmd = parse_repl_input("main();;")
    assert isinstance(cmd, t.ReplInvoke)
    assert cmd.name == "main" and cmd.exp_args == [] and cmd.lin_args == []


def test_repl_exponential_args():
    cmd = parse_repl_input("main_sa(;20);;")
    assert isinstance(cmd, t.ReplInvoke)
    assert cmd.name == "main_sa"
    assert len(cmd.exp_args) == 1
    assert isinstance(cmd.exp_args[0], t.IntLit)
    assert cmd.exp_args[0].value == 20


def test_repl_declaration():
    cmd = parse_repl_input("proc id(x:close,y:wait){ par { close x || "
                           "wait y; [] } };;")
    assert isinstance(cmd, t.ReplDeclare)
    assert cmd.decls[0].name == "id"


def test_repl_trailing_garbage():
    with pytest.raises(ParseError):
        parse_repl_input("main();; extra")
