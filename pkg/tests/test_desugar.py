from clls import sessiontypes as st
from clls import terms as t
from clls.desugar import desugar_decl, is_core
from clls.parser import parse_program

from helpers import CORPUS_FILES, corpus_source


def desugar_all(name):
    return [desugar_decl(d) for d in parse_program(corpus_source(name), name)]


def body_of(decls, name):
    for d in decls:
        if isinstance(d, t.ProcDecl) and d.name == name:
            return d.body
    raise KeyError(name)


def test_letc_becomes_cut():
    (d,) = parse_program("proc p(){ letc x:close { close x }; wait x; [] };;")
    desugar_decl(d)
    assert isinstance(d.body, t.Cut)
    assert d.body.annot == st.CloseT()


def test_surface_cut_annotation_types_right_side():
    decls = desugar_all("menu.clls")
    main0 = body_of(decls, "main0")
    assert isinstance(main0, t.Cut)
    # written |s:~tmenu|: the left component (menu) owns s at tmenu
    assert main0.annot == st.AppT("tmenu")


def test_alice0_desugars_to_core_chain():
    decls = desugar_all("menu.clls")
    p = body_of(decls, "alice0")
    assert isinstance(p, t.Select) and p.label == "#Dup"
    p = p.cont
    assert isinstance(p, t.Send)
    p = p.cont
    assert isinstance(p, t.Recv) and p.bound == "m"
    p = p.cont
    assert isinstance(p, t.Print)
    assert isinstance(p.cont, t.Close)


def test_put_closure_body():
    decls = desugar_all("barrier.clls")
    bwait = body_of(decls, "bwait")
    # take b(ws); ws -> n; if ...
    branch = bwait.cont.cont.then
    assert isinstance(branch, t.Par)
    put = branch.right
    assert isinstance(put, t.Put)
    assert isinstance(put.arg, t.Closure)
    inner = put.arg.body
    assert isinstance(inner, t.AffineIntro)
    assert isinstance(inner.cont, t.CallProc) and inner.cont.name == "init"


def test_sequenced_call_becomes_par():
    (d,) = parse_program(
        "proc p(x:close, y:close){ q(x); close y };;")
    desugar_decl(d)
    assert isinstance(d.body, t.Par)
    assert isinstance(d.body.left, t.CallProc)
    assert d.body.left.cont is None


def test_no_sugar_survives_on_corpus():
    for name in CORPUS_FILES:
        for d in desugar_all(name):
            if isinstance(d, t.ProcDecl):
                assert is_core(d.body), f"sugar survives in {name}/{d.name}"


def _binders_unique(p, in_scope):
    """No binder shadows a name already in scope in its subtree."""
    pairs = []
    if isinstance(p, t.Cut):
        pairs = [(p.name, [p.left, p.right])]
    elif isinstance(p, (t.Recv, t.Take, t.CallRepl)):
        pairs = [(p.bound, [p.cont])]
    elif isinstance(p, t.BangServer):
        pairs = [(p.bound, [p.body])]
    for bound, subtrees in pairs:
        assert bound not in in_scope, f"binder {bound} shadows"
        for sub in subtrees:
            _binders_unique(sub, in_scope | {bound})
        return
    for attr in ("left", "right", "cont", "body", "then", "els"):
        child = getattr(p, attr, None)
        if isinstance(child, t.Process):
            _binders_unique(child, in_scope)
    if isinstance(p, t.Case):
        for _, b in p.branches:
            _binders_unique(b, in_scope)
    for attr in ("arg", "init"):
        child = getattr(p, attr, None)
        if isinstance(child, t.Closure):
            assert child.bound not in in_scope
            _binders_unique(child.body, in_scope | {child.bound})


def test_alpha_uniqueness_after_desugar():
    for name in CORPUS_FILES:
        for d in desugar_all(name):
            if isinstance(d, t.ProcDecl):
                params = {p.name for p in d.lin_params}
                params |= {p.name for p in d.exp_params}
                _binders_unique(d.body, params)
