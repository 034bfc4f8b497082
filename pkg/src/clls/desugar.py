"""Rewrites surface terms to core form.

- `letc x:A { P }; Q`  becomes `Cut(x, A, P, Q)` (P owns `x` at `A`);
- `cut { P |x:T| Q }`  becomes `Cut(x, ~T, P, Q)` (the written annotation
  types the right-hand component, as in the arithmetic-server listing);
- a sequenced call `f(..); Q` becomes `Par(f(..), Q)`;
- binders that would shadow an enclosing binder are renamed with an
  internal `%n` suffix so that every bound name is unique in its scope.
"""

from __future__ import annotations

import itertools

from clls import terms as t
from clls.sessiontypes import dual

_uniq = itertools.count(1)


def desugar_decl(decl: t.Decl) -> t.Decl:
    if isinstance(decl, t.ProcDecl):
        scope = {p.name for p in decl.lin_params} | {p.name for p in decl.exp_params}
        decl.body = _rewrite(decl.body, scope)
    return decl


def desugar_process(p: t.Process, in_scope: set[str] | None = None) -> t.Process:
    return _rewrite(p, set(in_scope or ()))


def _fresh(name: str) -> str:
    return f"{name}%{next(_uniq)}"


def _bind(name: str, scope: set[str]) -> tuple[str, dict[str, str]]:
    """Allocate `name` in `scope`, renaming when it shadows."""
    if name in scope:
        fresh = _fresh(name)
        return fresh, {name: fresh}
    return name, {}


def _rn(name: str, ren: dict[str, str]) -> str:
    return ren.get(name, name)


def _rn_expr(e: t.Expr, ren: dict[str, str]) -> t.Expr:
    if not ren:
        return e
    if isinstance(e, t.NameExpr):
        return t.NameExpr(_rn(e.name, ren), e.span)
    if isinstance(e, t.BinOp):
        return t.BinOp(e.op, _rn_expr(e.left, ren), _rn_expr(e.right, ren), e.span)
    return e


def _rewrite(p: t.Process, scope: set[str], ren: dict[str, str] | None = None) -> t.Process:
    """Desugar `p`, renaming via `ren`, with `scope` the set of live names."""
    ren = ren or {}

    if isinstance(p, t.Inert):
        return p
    if isinstance(p, t.Forward):
        return t.Forward(_rn(p.left, ren), _rn(p.right, ren), p.span)
    if isinstance(p, t.Par):
        return t.Par(_rewrite(p.left, set(scope), ren),
                     _rewrite(p.right, set(scope), ren), p.span)
    if isinstance(p, (t.LetC, t.CutS, t.Cut)):
        if isinstance(p, t.LetC):
            name, annot, left, right = p.name, p.annot, p.body, p.cont
        elif isinstance(p, t.CutS):
            name, annot, left, right = p.name, dual(p.annot), p.left, p.right
        else:
            name, annot, left, right = p.name, p.annot, p.left, p.right
        new, extra = _bind(name, scope)
        sub = {**ren, **extra}
        inner_scope = scope | {new}
        return t.Cut(new, annot,
                     _rewrite(left, set(inner_scope), sub),
                     _rewrite(right, set(inner_scope), sub), p.span)
    if isinstance(p, t.Share):
        return t.Share(_rn(p.name, ren),
                       _rewrite(p.left, set(scope), ren),
                       _rewrite(p.right, set(scope), ren), p.span)
    if isinstance(p, t.CallProc):
        call = t.CallProc(p.name, list(p.type_args),
                          [_rn(a, ren) for a in p.lin_args],
                          [_rn_expr(a, ren) for a in p.exp_args], None, p.span)
        if p.cont is not None:
            return t.Par(call, _rewrite(p.cont, set(scope), ren), p.span)
        return call
    if isinstance(p, t.Send):
        arg = _rewrite_arg(p.arg, scope, ren)
        return t.Send(_rn(p.chan, ren), arg,
                      _rewrite(p.cont, scope, ren), p.span, p.sugar)
    if isinstance(p, t.Recv):
        new, extra = _bind(p.bound, scope)
        sub = {**ren, **extra}
        return t.Recv(_rn(p.chan, ren), new,
                      _rewrite(p.cont, scope | {new}, sub), p.span, p.sugar)
    if isinstance(p, t.Select):
        return t.Select(p.label, _rn(p.chan, ren),
                        _rewrite(p.cont, scope, ren), p.span)
    if isinstance(p, t.Case):
        return t.Case(_rn(p.chan, ren),
                      [(lab, _rewrite(b, set(scope), ren))
                       for lab, b in p.branches], p.span)
    if isinstance(p, t.Close):
        return t.Close(_rn(p.chan, ren), p.span)
    if isinstance(p, t.Wait):
        return t.Wait(_rn(p.chan, ren), _rewrite(p.cont, scope, ren), p.span)
    if isinstance(p, t.BangServer):
        new, extra = _bind(p.bound, scope)
        sub = {**ren, **extra}
        return t.BangServer(_rn(p.chan, ren), new,
                            _rewrite(p.body, scope | {new}, sub), p.span)
    if isinstance(p, t.CallRepl):
        new, extra = _bind(p.bound, scope)
        sub = {**ren, **extra}
        return t.CallRepl(_rn(p.chan, ren), new,
                          _rewrite(p.cont, scope | {new}, sub), p.span)
    if isinstance(p, t.AffineIntro):
        return t.AffineIntro(_rn(p.chan, ren), _rewrite(p.cont, scope, ren), p.span)
    if isinstance(p, t.UseC):
        return t.UseC(_rn(p.chan, ren), _rewrite(p.cont, scope, ren), p.span)
    if isinstance(p, t.Discard):
        return t.Discard(_rn(p.chan, ren), _rewrite(p.cont, scope, ren), p.span)
    if isinstance(p, t.CellNew):
        return t.CellNew(_rn(p.chan, ren), _rewrite_arg(p.init, scope, ren), p.span)
    if isinstance(p, t.Take):
        new, extra = _bind(p.bound, scope)
        sub = {**ren, **extra}
        return t.Take(_rn(p.chan, ren), new,
                      _rewrite(p.cont, scope | {new}, sub), p.span)
    if isinstance(p, t.Put):
        return t.Put(_rn(p.chan, ren), _rewrite_arg(p.arg, scope, ren),
                     _rewrite(p.cont, scope, ren), p.span)
    if isinstance(p, t.DropName):
        return t.DropName(_rn(p.chan, ren), _rewrite(p.cont, scope, ren), p.span)
    if isinstance(p, t.If):
        return t.If(_rn_expr(p.cond, ren),
                    _rewrite(p.then, set(scope), ren),
                    _rewrite(p.els, set(scope), ren), p.span)
    if isinstance(p, t.Print):
        return t.Print(_rn_expr(p.expr, ren), p.newline,
                       _rewrite(p.cont, scope, ren), p.span)
    if isinstance(p, t.Sleep):
        return t.Sleep(_rn_expr(p.expr, ren), _rewrite(p.cont, scope, ren), p.span)
    raise AssertionError(f"desugar: unknown node {p!r}")


def _rewrite_arg(arg: t.SendArg, scope: set[str], ren: dict[str, str]) -> t.SendArg:
    if isinstance(arg, t.Closure):
        new, extra = _bind(arg.bound, scope)
        sub = {**ren, **extra}
        return t.Closure(new, _rewrite(arg.body, scope | {new}, sub), arg.span)
    return _rn_expr(arg, ren)


def is_core(p: t.Process) -> bool:
    """True when no surface sugar node remains anywhere in `p`."""
    sugar = (t.LetC, t.CutS)
    stack = [p]
    while stack:
        node = stack.pop()
        if isinstance(node, sugar):
            return False
        if isinstance(node, t.CallProc) and node.cont is not None:
            return False
        stack.extend(_children(node))
    return True


def _children(p: t.Process) -> list[t.Process]:
    out: list[t.Process] = []
    for attr in ("left", "right", "cont", "body", "then", "els"):
        child = getattr(p, attr, None)
        if isinstance(child, t.Process):
            out.append(child)
    if isinstance(p, t.Case):
        out.extend(b for _, b in p.branches)
    for attr in ("arg", "init"):
        child = getattr(p, attr, None)
        if isinstance(child, t.Closure):
            out.append(child.body)
    return out
