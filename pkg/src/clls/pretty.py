"""Debug pretty-printer for types, processes and declarations.

Printing is canonical (sugar like `pair`/`statel`/`release` comes out in
its core spelling), so printing a parsed program and reparsing it is a
fixed point.
"""

from __future__ import annotations

from clls import terms as t
from clls import sessiontypes as st


def format_type(ty: st.SessionType) -> str:
    if isinstance(ty, st.CloseT):
        return "close"
    if isinstance(ty, st.WaitT):
        return "wait"
    if isinstance(ty, st.PrimT):
        return ty.kind
    if isinstance(ty, st.DualPrimT):
        return f"~{ty.kind}"
    if isinstance(ty, st.SendT):
        return f"send {format_type(ty.payload)}; {format_type(ty.cont)}"
    if isinstance(ty, st.RecvT):
        return f"recv {format_type(ty.payload)}; {format_type(ty.cont)}"
    if isinstance(ty, st.OfferT):
        return "offer of {" + _branches(ty.branches) + "}"
    if isinstance(ty, st.ChoiceT):
        return "choice of {" + _branches(ty.branches) + "}"
    if isinstance(ty, st.BangT):
        return f"!{format_type(ty.inner)}"
    if isinstance(ty, st.QuestT):
        return f"?{format_type(ty.inner)}"
    if isinstance(ty, st.AffineT):
        return f"affine {format_type(ty.inner)}"
    if isinstance(ty, st.CoaffineT):
        return f"coaffine {format_type(ty.inner)}"
    if isinstance(ty, st.StateT):
        return f"state {format_type(ty.inner)}"
    if isinstance(ty, st.UsageT):
        return f"usage {format_type(ty.inner)}"
    if isinstance(ty, st.RecT):
        return f"rec {ty.var}. {format_type(ty.body)}"
    if isinstance(ty, st.CorecT):
        return f"corec {ty.var}. {format_type(ty.body)}"
    if isinstance(ty, st.VarT):
        return ("~" if ty.dualized else "") + ty.name
    if isinstance(ty, st.AppT):
        head = ("~" if ty.dualized else "") + ty.name
        if ty.args:
            return head + "(" + ", ".join(format_type(a) for a in ty.args) + ")"
        return head
    raise AssertionError(f"format_type: {ty!r}")


def _branches(branches: tuple[tuple[str, st.SessionType], ...]) -> str:
    return " ".join(f"| {lab}: {format_type(b)}" for lab, b in branches)


_PREC = {"==": 1, "+": 2, "-": 2, "*": 3, "mod": 3}


def format_expr(e: t.Expr, parent_prec: int = 0, rhs: bool = False) -> str:
    if isinstance(e, t.IntLit):
        return str(e.value)
    if isinstance(e, t.StrLit):
        body = e.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{body}"'
    if isinstance(e, t.NameExpr):
        return e.name
    if isinstance(e, t.BinOp):
        prec = _PREC[e.op]
        text = (f"{format_expr(e.left, prec)} {e.op} "
                f"{format_expr(e.right, prec, rhs=True)}")
        if prec < parent_prec or (prec == parent_prec and rhs):
            return f"({text})"
        return text
    raise AssertionError(f"format_expr: {e!r}")


def format_arg(arg: t.SendArg) -> str:
    if isinstance(arg, t.Closure):
        return f"{arg.bound}. {format_process(arg.body)}"
    return format_expr(arg)


def format_process(p: t.Process) -> str:
    if isinstance(p, t.Inert):
        return "[]"
    if isinstance(p, t.Forward):
        return f"fwd {p.left} {p.right}"
    if isinstance(p, t.Par):
        return f"par {{ {format_process(p.left)} || {format_process(p.right)} }}"
    if isinstance(p, t.CutS):
        return (f"cut {{ {format_process(p.left)} |{p.name}:"
                f"{format_type(p.annot)}| {format_process(p.right)} }}")
    if isinstance(p, t.LetC):
        annot = f" {format_type(p.annot)}" if p.annot is not None else ""
        return (f"letc {p.name}:{annot} {{ {format_process(p.body)} }}; "
                f"{format_process(p.cont)}")
    if isinstance(p, t.Cut):
        annot = f" {format_type(p.annot)}" if p.annot is not None else ""
        return (f"letc {p.name}:{annot} {{ {format_process(p.left)} }}; "
                f"{format_process(p.right)}")
    if isinstance(p, t.Share):
        return (f"share {p.name} {{ {format_process(p.left)} || "
                f"{format_process(p.right)} }}")
    if isinstance(p, t.CallProc):
        targs = ""
        if p.type_args:
            targs = "<" + ", ".join(format_type(a) for a in p.type_args) + ">"
        parts = ", ".join(p.lin_args)
        if p.exp_args:
            parts += ";" + ", ".join(format_expr(e) for e in p.exp_args)
        text = f"{p.name}{targs}({parts})"
        if p.cont is not None:
            text += f"; {format_process(p.cont)}"
        return text
    if isinstance(p, t.Send):
        if p.sugar:
            arg = format_arg(p.arg)
            if isinstance(p.arg, t.Closure):
                arg = "{ " + arg + " }"
            return f"{p.chan} <- {arg}; {format_process(p.cont)}"
        return f"send {p.chan}({format_arg(p.arg)}); {format_process(p.cont)}"
    if isinstance(p, t.Recv):
        if p.sugar:
            return f"{p.chan} -> {p.bound}; {format_process(p.cont)}"
        return f"recv {p.chan}({p.bound}); {format_process(p.cont)}"
    if isinstance(p, t.Select):
        return f"{p.label} {p.chan}; {format_process(p.cont)}"
    if isinstance(p, t.Case):
        inner = " ".join(f"| {lab}: {format_process(b)}" for lab, b in p.branches)
        return f"case {p.chan} of {{{inner}}}"
    if isinstance(p, t.Close):
        return f"close {p.chan}"
    if isinstance(p, t.Wait):
        return f"wait {p.chan}" + _cont(p.cont)
    if isinstance(p, t.BangServer):
        return f"!{p.chan}({p.bound}); {format_process(p.body)}"
    if isinstance(p, t.CallRepl):
        return f"call {p.chan}({p.bound}); {format_process(p.cont)}"
    if isinstance(p, t.AffineIntro):
        return f"affine {p.chan}; {format_process(p.cont)}"
    if isinstance(p, t.UseC):
        return f"use {p.chan}; {format_process(p.cont)}"
    if isinstance(p, t.Discard):
        return f"discard {p.chan}" + _cont(p.cont)
    if isinstance(p, t.CellNew):
        return f"cell {p.chan}({format_arg(p.init)})"
    if isinstance(p, t.Take):
        return f"take {p.chan}({p.bound}); {format_process(p.cont)}"
    if isinstance(p, t.Put):
        return f"put {p.chan}({format_arg(p.arg)}); {format_process(p.cont)}"
    if isinstance(p, t.DropName):
        return f"drop {p.chan}" + _cont(p.cont)
    if isinstance(p, t.If):
        return (f"if {format_expr(p.cond)} then {{ {format_process(p.then)} }} "
                f"else {{ {format_process(p.els)} }}")
    if isinstance(p, t.Print):
        word = "println" if p.newline else "print"
        return f"{word}({format_expr(p.expr)})" + _cont(p.cont)
    if isinstance(p, t.Sleep):
        return f"sleep {format_expr(p.expr)}" + _cont(p.cont)
    raise AssertionError(f"format_process: {p!r}")


def _cont(cont: t.Process) -> str:
    if isinstance(cont, t.Inert):
        return ""
    return f"; {format_process(cont)}"


def format_decl(d: t.Decl) -> str:
    if isinstance(d, t.ProcDecl):
        flag = f" {d.rec_flag}" if d.rec_flag else ""
        targs = ""
        if d.type_params:
            targs = "<" + ", ".join(d.type_params) + ">"
        parts = ", ".join(f"{p.name}: {format_type(p.annot)}" for p in d.lin_params)
        if d.exp_params:
            parts += "; " + ", ".join(f"{p.name}: {format_type(p.annot)}"
                                      for p in d.exp_params)
        return (f"proc{flag} {d.name}{targs}({parts}) {{\n"
                f"  {format_process(d.body)}\n}};;")
    if isinstance(d, t.TypeGroup):
        flag = f" {d.rec_flag}" if d.rec_flag else ""
        chunks = []
        for td in d.decls:
            params = "(" + ", ".join(td.params) + ")" if td.params else ""
            chunks.append(f"{td.name}{params} {{ {format_type(td.body)} }}")
        return f"type{flag} " + "\nand ".join(chunks) + ";;"
    raise AssertionError(f"format_decl: {d!r}")


def format_program(decls: list[t.Decl]) -> str:
    return "\n\n".join(format_decl(d) for d in decls) + "\n"
