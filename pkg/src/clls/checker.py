"""Linear type checking.

Contexts are split eagerly at composition nodes using the free names of
each component, so promotion side conditions see exactly the resources a
component owns.  The checker runs on core (desugared) terms and leaves
annotations on the nodes (context splits, argument modes, drop kinds) that
the runtime replays verbatim.

Conventions, chosen to make the whole tutorial corpus check:

- `recv c(x)` binds `x` at the payload exactly as written in the
  receiver's own type; sending a name at payload `P` consumes a name of
  type `~P`.
- A binding whose type carries a primitive value (under any affine or
  exponential wrappers) becomes an unrestricted value binding.
- A linear binding of outer `?` type is absorbed into the unrestricted
  context (usable as a `call` target or exponential argument any number
  of times).
- Operating on a `coaffine` name implicitly applies `use`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from clls import terms as t
from clls import sessiontypes as st
from clls.desugar import desugar_decl
from clls.diagnostics import CheckError, Diagnostic, NO_SPAN, Span
from clls.pretty import format_type
from clls.program import ProcSig, Program


# ---------------------------------------------------------------------------
# Typing context
# ---------------------------------------------------------------------------

@dataclass
class LinearBinding:
    ty: st.SessionType
    held: bool = False  # a usage between take and put


@dataclass
class UnrestBinding:
    ty: st.SessionType  # inner type of an exponential, or the value's type
    is_value: bool      # carries a primitive value rather than a session
    linear_backed: bool = False  # value that may still be an unread endpoint


class Ctx:
    """Linear + unrestricted context for one control path."""

    def __init__(self, tenv: st.TypeEnv, procs: dict[str, ProcSig],
                 type_params: frozenset[str], scc: frozenset[str]):
        self.linear: dict[str, LinearBinding] = {}
        self.unrest: dict[str, UnrestBinding] = {}
        self.tenv = tenv
        self.procs = procs
        self.type_params = type_params
        self.scc = scc  # procs whose invocation counts as recursion

    def fork(self) -> "Ctx":
        out = Ctx(self.tenv, self.procs, self.type_params, self.scc)
        out.linear = {k: replace(v) for k, v in self.linear.items()}
        out.unrest = dict(self.unrest)
        return out


def _fail(rule: str, message: str, span: Span = NO_SPAN) -> CheckError:
    return CheckError(Diagnostic(rule, message, span))


# ---------------------------------------------------------------------------
# Free names (for eager context splitting)
# ---------------------------------------------------------------------------

def free_names(p: t.Process) -> frozenset[str]:
    if isinstance(p, t.Inert):
        return frozenset()
    if isinstance(p, t.Forward):
        return frozenset({p.left, p.right})
    if isinstance(p, t.Par):
        return free_names(p.left) | free_names(p.right)
    if isinstance(p, t.Cut):
        return (free_names(p.left) | free_names(p.right)) - {p.name}
    if isinstance(p, t.Share):
        return free_names(p.left) | free_names(p.right) | {p.name}
    if isinstance(p, t.CallProc):
        names = set(p.lin_args)
        for e in p.exp_args:
            names |= t.expr_names(e)
        if p.cont is not None:
            names |= free_names(p.cont)
        return frozenset(names)
    if isinstance(p, t.Send):
        return frozenset({p.chan}) | _arg_names(p.arg) | free_names(p.cont)
    if isinstance(p, t.Recv):
        return frozenset({p.chan}) | (free_names(p.cont) - {p.bound})
    if isinstance(p, t.Select):
        return frozenset({p.chan}) | free_names(p.cont)
    if isinstance(p, t.Case):
        names = frozenset({p.chan})
        for _, b in p.branches:
            names |= free_names(b)
        return names
    if isinstance(p, t.Close):
        return frozenset({p.chan})
    if isinstance(p, t.Wait):
        return frozenset({p.chan}) | free_names(p.cont)
    if isinstance(p, t.BangServer):
        return frozenset({p.chan}) | (free_names(p.body) - {p.bound})
    if isinstance(p, t.CallRepl):
        return frozenset({p.chan}) | (free_names(p.cont) - {p.bound})
    if isinstance(p, (t.AffineIntro, t.UseC, t.Discard, t.DropName)):
        return frozenset({p.chan}) | free_names(p.cont)
    if isinstance(p, t.CellNew):
        return frozenset({p.chan}) | _arg_names(p.init)
    if isinstance(p, t.Take):
        return frozenset({p.chan}) | (free_names(p.cont) - {p.bound})
    if isinstance(p, t.Put):
        return frozenset({p.chan}) | _arg_names(p.arg) | free_names(p.cont)
    if isinstance(p, t.If):
        return (frozenset(t.expr_names(p.cond)) | free_names(p.then)
                | free_names(p.els))
    if isinstance(p, t.Print):
        return frozenset(t.expr_names(p.expr)) | free_names(p.cont)
    if isinstance(p, t.Sleep):
        return frozenset(t.expr_names(p.expr)) | free_names(p.cont)
    raise AssertionError(f"free_names: unexpected node {p!r}")


def _arg_names(arg: t.SendArg) -> frozenset[str]:
    if isinstance(arg, t.Closure):
        return free_names(arg.body) - {arg.bound}
    return frozenset(t.expr_names(arg))


# ---------------------------------------------------------------------------
# The checker proper
# ---------------------------------------------------------------------------

class Checker:
    def __init__(self, ctx: Ctx):
        self.ctx = ctx

    # -- context helpers ----------------------------------------------------

    def wf(self, ty: st.SessionType, span: Span) -> st.SessionType:
        return st.well_formed(ty, self.ctx.tenv, self.ctx.type_params, span)

    def bind(self, name: str, ty: st.SessionType, span: Span) -> None:
        """Introduce a binding, classifying it as linear or unrestricted."""
        env = self.ctx.tenv
        head = st.whnf(ty, env) if not isinstance(ty, st.VarT) else ty
        if isinstance(head, st.QuestT):
            self.ctx.unrest[name] = UnrestBinding(head.inner, is_value=False)
            return
        if not isinstance(ty, st.VarT) and st.carries_value(ty, env) is not None:
            self.ctx.unrest[name] = UnrestBinding(
                ty, is_value=True,
                linear_backed=not st.is_unrestricted_value(ty, env))
            return
        self.ctx.linear[name] = LinearBinding(ty)

    def take_linear(self, name: str, span: Span) -> LinearBinding:
        b = self.ctx.linear.pop(name, None)
        if b is None:
            if name in self.ctx.unrest:
                raise _fail("linearity-reuse",
                            f"`{name}` is not a linear session here", span)
            raise _fail("linearity-reuse",
                        f"`{name}` is not available (already consumed or "
                        "never bound)", span)
        return b

    def peek_linear(self, name: str, span: Span) -> LinearBinding:
        b = self.ctx.linear.get(name)
        if b is None:
            raise _fail("linearity-reuse",
                        f"`{name}` is not available (already consumed or "
                        "never bound)", span)
        return b

    def use_unwrap(self, ty: st.SessionType) -> st.SessionType:
        """Implicitly apply `use` to coaffine layers."""
        head = st.whnf(ty, self.ctx.tenv)
        while isinstance(head, st.CoaffineT):
            head = st.whnf(head.inner, self.ctx.tenv)
        return head

    def require_empty(self, span: Span, what: str) -> None:
        leftovers = [n for n, b in self.ctx.linear.items()]
        if leftovers:
            names = ", ".join(sorted(leftovers))
            raise _fail("leak", f"linear name(s) {names} left unconsumed "
                                f"at {what}", span)

    def moved_values(self, fv_here: frozenset[str],
                     fv_there: frozenset[str], span: Span) -> frozenset[str]:
        """Value bindings that may still be unread endpoints move with the
        component that reads them; both components reading one is an error."""
        out = set()
        for name in fv_here:
            u = self.ctx.unrest.get(name)
            if u is None or not u.linear_backed:
                continue
            if name in fv_there:
                raise _fail("linearity-reuse",
                            f"value `{name}` is consumed by both parallel "
                            "components", span)
            out.add(name)
        return frozenset(out)

    def split_off(self, names: frozenset[str]) -> "Checker":
        """Move `names ∩ linear` into a fresh context (same unrest view)."""
        sub = Ctx(self.ctx.tenv, self.ctx.procs, self.ctx.type_params,
                  self.ctx.scc)
        for n in list(self.ctx.linear):
            if n in names:
                sub.linear[n] = self.ctx.linear.pop(n)
        sub.unrest = dict(self.ctx.unrest)
        return Checker(sub)

    # -- expressions ----------------------------------------------------------

    def check_expr(self, e: t.Expr, span: Span) -> str:
        """Type an expression; returns "lint" | "lstring" | "bool"."""
        if isinstance(e, t.IntLit):
            return "lint"
        if isinstance(e, t.StrLit):
            return "lstring"
        if isinstance(e, t.NameExpr):
            u = self.ctx.unrest.get(e.name)
            if u is not None:
                kind = st.value_kind(u.ty, self.ctx.tenv)
                if kind is None:
                    raise _fail("type-mismatch",
                                f"`{e.name}` is a session, not a value",
                                e.span)
                return kind
            b = self.ctx.linear.get(e.name)
            if b is not None:
                kind = st.carries_value(b.ty, self.ctx.tenv)
                if kind is None:
                    raise _fail("type-mismatch",
                                f"`{e.name}` is a session and cannot appear "
                                "in an expression", e.span)
                self.take_linear(e.name, e.span)
                return kind
            raise _fail("unknown-name", f"`{e.name}` is not bound", e.span)
        if isinstance(e, t.BinOp):
            lk = self.check_expr(e.left, span)
            rk = self.check_expr(e.right, span)
            if e.op == "==":
                if lk == rk == "lint":
                    return "bool"
                raise _fail("type-mismatch", "`==` compares integers", e.span)
            if e.op == "+":
                if "bool" in (lk, rk):
                    raise _fail("type-mismatch", "`+` on a boolean", e.span)
                return "lstring" if "lstring" in (lk, rk) else "lint"
            if lk == rk == "lint":
                return "lint"
            raise _fail("type-mismatch", f"`{e.op}` needs integers", e.span)
        raise AssertionError(f"check_expr: {e!r}")

    # -- payload provisioning (send / put / cell) -----------------------------

    def provide(self, node, arg: t.SendArg, payload: st.SessionType,
                span: Span, into_cell: bool,
                later_fv: frozenset[str] = frozenset()) -> str:
        """Check that `arg` provides an object of type `payload`.

        Returns the argument mode: "name", "value" or "closure".
        """
        env = self.ctx.tenv
        if isinstance(arg, t.Closure):
            capture = free_names(arg.body) - {arg.bound}
            value_moves = self.moved_values(capture, later_fv, span)
            moved: list[str] = list(value_moves)
            copied: list[str] = []
            sub = self.split_off(capture)
            for n in sorted(capture):
                if n in sub.ctx.linear:
                    b = sub.ctx.linear[n]
                    if b.held:
                        raise _fail("cell-protocol",
                                    f"`{n}` is held between take and put and "
                                    "cannot be captured", span)
                    if into_cell and not st.is_disposable(b.ty, env):
                        raise _fail("affine-promotion",
                                    f"cell-stored closure captures linear "
                                    f"`{n}` of non-disposable type "
                                    f"{format_type(b.ty)}", span)
                    moved.append(n)
                elif n in sub.ctx.unrest:
                    copied.append(n)
                else:
                    raise _fail("unknown-name", f"`{n}` is not bound", span)
            arg.capture = frozenset(moved)
            arg.fv = frozenset(capture)
            sub.bind(arg.bound, payload, span)
            sub.check(arg.body)
            return "closure"
        if isinstance(arg, t.NameExpr):
            b = self.ctx.linear.get(arg.name)
            if b is not None and st.compatible(b.ty, st.dual(payload), env):
                if b.held:
                    raise _fail("cell-protocol",
                                f"`{arg.name}` is held between take and put",
                                span)
                self.take_linear(arg.name, span)
                return "name"
            u = self.ctx.unrest.get(arg.name)
            if (u is not None and not u.is_value
                    and st.compatible(st.QuestT(u.ty), st.dual(payload), env)):
                return "name"
        kind = st.value_kind(payload, env)
        if kind is None:
            raise _fail("cell-content" if into_cell else "type-mismatch",
                        f"cannot provide {format_type(payload)} from this "
                        "argument", span)
        got = self.check_expr(arg, span)
        if got != kind:
            raise _fail("type-mismatch",
                        f"expected a {kind} value, got {got}", span)
        return "value"

    # -- process checking ------------------------------------------------------

    def check(self, p: t.Process, guarded: bool = False) -> None:
        env = self.ctx.tenv

        if isinstance(p, t.Inert):
            self.require_empty(p.span, "the inert process")
            return

        if isinstance(p, t.Forward):
            def _fwd_operand(name: str) -> st.SessionType:
                if name in self.ctx.linear:
                    b = self.take_linear(name, p.span)
                    if b.held:
                        raise _fail("cell-protocol",
                                    "forwarding a held usage", p.span)
                    return b.ty
                u = self.ctx.unrest.get(name)
                if u is not None and u.is_value:
                    return u.ty
                raise _fail("linearity-reuse",
                            f"`{name}` is not available (already consumed "
                            "or never bound)", p.span)
            ta = _fwd_operand(p.left)
            tb = _fwd_operand(p.right)
            if not st.compatible(tb, st.dual(ta), env):
                raise _fail("type-mismatch",
                            f"fwd requires dual types; got "
                            f"{format_type(ta)} and {format_type(tb)}",
                            p.span)
            self.require_empty(p.span, "a forwarder")
            return

        if isinstance(p, t.Par):
            fl, fr = free_names(p.left), free_names(p.right)
            shared = fl & fr & self.ctx.linear.keys()
            if shared:
                raise _fail("par-shared",
                            f"parallel components share linear name(s) "
                            f"{', '.join(sorted(shared))}", p.span)
            stray = set(self.ctx.linear) - fl - fr
            if stray:
                raise _fail("leak",
                            f"linear name(s) {', '.join(sorted(stray))} used "
                            "by neither parallel component", p.span)
            p.split_left = frozenset(fl & self.ctx.linear.keys()) \
                | self.moved_values(fl, fr, p.span)
            self.moved_values(fr, fl, p.span)
            p.fv_left = frozenset(fl)
            left = self.split_off(p.split_left)
            left.check(p.left, guarded)
            self.check(p.right, guarded)
            return

        if isinstance(p, t.Cut):
            if p.annot is None:
                p.annot = self.fill_hole(p)
            annot = self.wf(p.annot, p.span)
            p.annot = annot
            fl, fr = free_names(p.left), free_names(p.right)
            shared = (fl & fr & self.ctx.linear.keys()) - {p.name}
            if shared:
                raise _fail("cut-arity",
                            f"cut components share linear name(s) "
                            f"{', '.join(sorted(shared))} besides the cut "
                            "name", p.span)
            stray = set(self.ctx.linear) - fl - fr
            if stray:
                raise _fail("leak",
                            f"linear name(s) {', '.join(sorted(stray))} used "
                            "by neither side of the cut", p.span)
            p.split_left = frozenset(fl & self.ctx.linear.keys()) \
                | self.moved_values(fl - {p.name}, fr - {p.name}, p.span)
            self.moved_values(fr - {p.name}, fl - {p.name}, p.span)
            p.fv_left = frozenset(fl)
            left = self.split_off(p.split_left)
            left.bind(p.name, annot, p.span)
            left.check(p.left, guarded)
            self.bind(p.name, st.dual(annot), p.span)
            self.check(p.right, guarded)
            return

        if isinstance(p, t.Share):
            b = self.peek_linear(p.name, p.span)
            if b.held:
                raise _fail("cell-protocol",
                            f"`{p.name}` is held between take and put", p.span)
            if not isinstance(self.use_unwrap(b.ty), st.UsageT):
                raise _fail("share-arity",
                            f"share needs a cell usage, got "
                            f"{format_type(b.ty)}", p.span)
            fl = free_names(p.left)
            fr = free_names(p.right)
            shared = (fl & fr & self.ctx.linear.keys()) - {p.name}
            if shared:
                raise _fail("share-arity",
                            f"share components share linear name(s) "
                            f"{', '.join(sorted(shared))} besides the cell",
                            p.span)
            stray = set(self.ctx.linear) - fl - fr - {p.name}
            if stray:
                raise _fail("leak",
                            f"linear name(s) {', '.join(sorted(stray))} used "
                            "by neither side of the share", p.span)
            binding = self.take_linear(p.name, p.span)
            p.split_left = frozenset(fl & self.ctx.linear.keys()) \
                | self.moved_values(fl - {p.name}, fr - {p.name}, p.span)
            self.moved_values(fr - {p.name}, fl - {p.name}, p.span)
            p.fv_left = frozenset(fl)
            left = self.split_off(p.split_left)
            left.ctx.linear[p.name] = LinearBinding(binding.ty)
            left.check(p.left, guarded)
            self.ctx.linear[p.name] = LinearBinding(binding.ty)
            self.check(p.right, guarded)
            return

        if isinstance(p, t.CallProc):
            assert p.cont is None, "sequenced call survived desugaring"
            self.check_call(p, guarded)
            return

        if isinstance(p, t.Send):
            b = self.take_linear(p.chan, p.span)
            if b.held:
                raise _fail("cell-protocol",
                            f"send on held usage `{p.chan}`", p.span)
            head = self.use_unwrap(b.ty)
            if isinstance(head, (st.PrimT, st.DualPrimT)):
                p.prim_send = True
                if isinstance(p.arg, t.Closure):
                    raise _fail("type-mismatch",
                                "a primitive session carries a value, not a "
                                "closure", p.span)
                got = self.check_expr(p.arg, p.span)
                if got != head.kind:
                    raise _fail("type-mismatch",
                                f"expected {head.kind}, got {got}", p.span)
                p.arg_mode = "value"
                self.check(p.cont, guarded=True)
                return
            if not isinstance(head, st.SendT):
                raise _fail("type-mismatch",
                            f"`{p.chan}` cannot send at type "
                            f"{format_type(b.ty)}", p.span)
            p.arg_mode = self.provide(p, p.arg, head.payload, p.span,
                                      into_cell=False,
                                      later_fv=free_names(p.cont))
            self.bind(p.chan, head.cont, p.span)
            self.check(p.cont, guarded=True)
            return

        if isinstance(p, t.Recv):
            b = self.take_linear(p.chan, p.span)
            if b.held:
                raise _fail("cell-protocol",
                            f"recv on held usage `{p.chan}`", p.span)
            head = self.use_unwrap(b.ty)
            if not isinstance(head, st.RecvT):
                raise _fail("type-mismatch",
                            f"`{p.chan}` cannot receive at type "
                            f"{format_type(b.ty)}", p.span)
            self.bind(p.bound, head.payload, p.span)
            self.bind(p.chan, head.cont, p.span)
            self.check(p.cont, guarded=True)
            return

        if isinstance(p, t.Select):
            b = self.take_linear(p.chan, p.span)
            head = self.use_unwrap(b.ty)
            if not isinstance(head, st.ChoiceT):
                raise _fail("type-mismatch",
                            f"`{p.chan}` offers no selection at type "
                            f"{format_type(b.ty)}", p.span)
            bm = head.branch_map()
            if p.label not in bm:
                raise _fail("label",
                            f"label {p.label} is not offered by "
                            f"{format_type(b.ty)}", p.span)
            self.bind(p.chan, bm[p.label], p.span)
            self.check(p.cont, guarded=True)
            return

        if isinstance(p, t.Case):
            b = self.take_linear(p.chan, p.span)
            head = self.use_unwrap(b.ty)
            if not isinstance(head, st.OfferT):
                raise _fail("type-mismatch",
                            f"`{p.chan}` cannot be cased at type "
                            f"{format_type(b.ty)}", p.span)
            bm = head.branch_map()
            have = {lab for lab, _ in p.branches}
            if have != bm.keys():
                missing = ", ".join(sorted(bm.keys() - have))
                extra = ", ".join(sorted(have - bm.keys()))
                parts = []
                if missing:
                    parts.append(f"missing {missing}")
                if extra:
                    parts.append(f"unknown {extra}")
                raise _fail("case-branches",
                            f"case on `{p.chan}` does not match the offered "
                            f"labels ({'; '.join(parts)})", p.span)
            for lab, branch in p.branches:
                sub = Checker(self.ctx.fork())
                sub.bind(p.chan, bm[lab], p.span)
                sub.check(branch, guarded=True)
            self.ctx.linear.clear()
            return

        if isinstance(p, t.Close):
            b = self.take_linear(p.chan, p.span)
            if not isinstance(self.use_unwrap(b.ty), st.CloseT):
                raise _fail("type-mismatch",
                            f"`{p.chan}` is not at close type", p.span)
            self.require_empty(p.span, f"close of `{p.chan}`")
            return

        if isinstance(p, t.Wait):
            b = self.take_linear(p.chan, p.span)
            if not isinstance(self.use_unwrap(b.ty), st.WaitT):
                raise _fail("type-mismatch",
                            f"`{p.chan}` is not at wait type", p.span)
            self.check(p.cont, guarded)
            return

        if isinstance(p, t.BangServer):
            b = self.take_linear(p.chan, p.span)
            head = st.whnf(b.ty, env)
            if not isinstance(head, st.BangT):
                raise _fail("type-mismatch",
                            f"`{p.chan}` is not a replicated server type",
                            p.span)
            if self.ctx.linear:
                others = ", ".join(sorted(self.ctx.linear))
                raise _fail("promotion",
                            f"a replicated server may not capture linear "
                            f"name(s) {others}", p.span)
            p.fv = free_names(p.body) - {p.bound}
            for n in sorted(p.fv):
                u = self.ctx.unrest.get(n)
                if u is not None and u.linear_backed:
                    raise _fail("promotion",
                                f"a replicated server may not capture the "
                                f"one-shot value `{n}`", p.span)
            sub = Checker(self.ctx.fork())
            sub.bind(p.bound, head.inner, p.span)
            sub.check(p.body, guarded=True)
            return

        if isinstance(p, t.CallRepl):
            u = self.ctx.unrest.get(p.chan)
            if u is None or u.is_value:
                raise _fail("type-mismatch",
                            f"`{p.chan}` is not an exponential session",
                            p.span)
            self.bind(p.bound, u.ty, p.span)
            self.check(p.cont, guarded=True)
            return

        if isinstance(p, t.AffineIntro):
            b = self.take_linear(p.chan, p.span)
            head = st.whnf(b.ty, env)
            if not isinstance(head, st.AffineT):
                raise _fail("type-mismatch",
                            f"`affine {p.chan}` needs an affine type, got "
                            f"{format_type(b.ty)}", p.span)
            bad = [n for n, ob in self.ctx.linear.items()
                   if not st.is_disposable(ob.ty, env)]
            if bad:
                raise _fail("affine-promotion",
                            f"affine promotion over non-disposable name(s) "
                            f"{', '.join(sorted(bad))}", p.span)
            self.bind(p.chan, head.inner, p.span)
            self.check(p.cont, guarded)
            return

        if isinstance(p, t.UseC):
            b = self.take_linear(p.chan, p.span)
            head = st.whnf(b.ty, env)
            if not isinstance(head, st.CoaffineT):
                raise _fail("type-mismatch",
                            f"`use {p.chan}` needs a coaffine type", p.span)
            self.bind(p.chan, head.inner, p.span)
            self.check(p.cont, guarded)
            return

        if isinstance(p, t.Discard):
            b = self.take_linear(p.chan, p.span)
            if not isinstance(st.whnf(b.ty, env), st.CoaffineT):
                raise _fail("type-mismatch",
                            f"`discard {p.chan}` needs a coaffine type, got "
                            f"{format_type(b.ty)}", p.span)
            self.check(p.cont, guarded)
            return

        if isinstance(p, t.DropName):
            b = self.peek_linear(p.chan, p.span)
            head = st.whnf(b.ty, env)
            if isinstance(head, st.UsageT):
                if b.held:
                    raise _fail("cell-protocol",
                                f"drop of `{p.chan}` while its content is "
                                "taken out", p.span)
                p.drop_kind = "cell"
            elif isinstance(head, st.CoaffineT):
                p.drop_kind = "coaffine"
            else:
                raise _fail("type-mismatch",
                            f"`drop {p.chan}` needs a usage or coaffine "
                            f"type, got {format_type(b.ty)}", p.span)
            self.take_linear(p.chan, p.span)
            self.check(p.cont, guarded)
            return

        if isinstance(p, t.CellNew):
            b = self.take_linear(p.chan, p.span)
            head = st.whnf(b.ty, env)
            if not isinstance(head, st.StateT):
                raise _fail("type-mismatch",
                            f"`cell {p.chan}` needs a state type, got "
                            f"{format_type(b.ty)}", p.span)
            p.arg_mode = self.provide(p, p.init, head.inner, p.span,
                                      into_cell=True)
            self.require_empty(p.span, "a cell constructor")
            return

        if isinstance(p, t.Take):
            b = self.peek_linear(p.chan, p.span)
            head = self.use_unwrap(b.ty)
            if not isinstance(head, st.UsageT):
                raise _fail("type-mismatch",
                            f"take on `{p.chan}` which is not a usage "
                            f"({format_type(b.ty)})", p.span)
            if b.held:
                raise _fail("cell-protocol",
                            f"take on `{p.chan}` while already holding its "
                            "content", p.span)
            b.ty = head
            b.held = True
            self.bind(p.bound, head.inner, p.span)
            self.check(p.cont, guarded=True)
            return

        if isinstance(p, t.Put):
            b = self.peek_linear(p.chan, p.span)
            head = st.whnf(b.ty, env)
            if not isinstance(head, st.UsageT):
                raise _fail("type-mismatch",
                            f"put on `{p.chan}` which is not a usage", p.span)
            if not b.held:
                raise _fail("cell-protocol",
                            f"put on `{p.chan}` without a preceding take",
                            p.span)
            stored = st.dual(head.inner)
            p.arg_mode = self.provide(p, p.arg, stored, p.span, into_cell=True,
                                      later_fv=free_names(p.cont))
            b.held = False
            self.check(p.cont, guarded)
            return

        if isinstance(p, t.If):
            kind = self.check_expr(p.cond, p.span)
            if kind != "bool":
                raise _fail("type-mismatch",
                            "the condition of `if` must be boolean", p.span)
            sub = Checker(self.ctx.fork())
            sub.check(p.then, guarded)
            self.check(p.els, guarded)
            return

        if isinstance(p, t.Print):
            kind = self.check_expr(p.expr, p.span)
            if kind == "bool":
                raise _fail("type-mismatch", "cannot print a boolean", p.span)
            self.check(p.cont, guarded)
            return

        if isinstance(p, t.Sleep):
            kind = self.check_expr(p.expr, p.span)
            if kind != "lint":
                raise _fail("type-mismatch", "sleep needs an integer", p.span)
            self.check(p.cont, guarded)
            return

        raise AssertionError(f"check: unexpected node {p!r}")

    # -- calls -----------------------------------------------------------------

    def check_call(self, p: t.CallProc, guarded: bool) -> None:
        sig = self.ctx.procs.get(p.name)
        if sig is None:
            raise _fail("unknown-proc", f"process `{p.name}` is not defined",
                        p.span)
        if len(p.type_args) != len(sig.type_params):
            raise _fail("call-arity",
                        f"`{p.name}` expects {len(sig.type_params)} type "
                        f"argument(s), got {len(p.type_args)}", p.span)
        p.type_args = [self.wf(a, p.span) for a in p.type_args]
        inst = dict(zip(sig.type_params, p.type_args))
        if len(p.lin_args) != len(sig.lin_params):
            raise _fail("call-arity",
                        f"`{p.name}` expects {len(sig.lin_params)} linear "
                        f"argument(s), got {len(p.lin_args)}", p.span)
        if len(p.exp_args) != len(sig.exp_params):
            raise _fail("call-arity",
                        f"`{p.name}` expects {len(sig.exp_params)} "
                        f"exponential argument(s), got {len(p.exp_args)}",
                        p.span)
        env = self.ctx.tenv
        for arg, param in zip(p.lin_args, sig.lin_params):
            want = st.subst(param.annot, inst)
            b = self.ctx.linear.get(arg)
            if b is not None:
                expects_held = param.name in sig.held_params
                if b.held and not expects_held:
                    raise _fail("cell-protocol",
                                f"`{arg}` is held between take and put and "
                                f"`{p.name}` does not refill it", p.span)
                if expects_held and not b.held:
                    raise _fail("cell-protocol",
                                f"`{p.name}` expects `{param.name}` with its "
                                "content taken out", p.span)
                if not (st.compatible(b.ty, want, env)
                        or st.compatible(self.use_unwrap(b.ty), want, env)):
                    raise _fail("type-mismatch",
                                f"argument `{arg}` has type "
                                f"{format_type(b.ty)}, expected "
                                f"{format_type(want)}", p.span)
                self.take_linear(arg, p.span)
                continue
            u = self.ctx.unrest.get(arg)
            if u is not None:
                ok = (st.compatible(u.ty, want, env)
                      or (not u.is_value
                          and st.compatible(st.QuestT(u.ty), want, env)))
                if not ok:
                    raise _fail("type-mismatch",
                                f"argument `{arg}` has type "
                                f"{format_type(u.ty)}, expected "
                                f"{format_type(want)}", p.span)
                continue
            raise _fail("unknown-name", f"`{arg}` is not bound", p.span)
        p.exp_modes = []
        for arg, param in zip(p.exp_args, sig.exp_params):
            want = st.subst(param.annot, inst)
            if isinstance(arg, t.NameExpr) and arg.name in self.ctx.unrest:
                u = self.ctx.unrest[arg.name]
                if u.is_value:
                    kind = st.value_kind(want, env)
                    if kind is None or st.value_kind(u.ty, env) != kind:
                        raise _fail("type-mismatch",
                                    f"exponential argument `{arg.name}` does "
                                    f"not match {format_type(want)}", p.span)
                elif not st.compatible(u.ty, want, env):
                    raise _fail("type-mismatch",
                                f"exponential argument `{arg.name}` has type "
                                f"{format_type(u.ty)}, expected "
                                f"{format_type(want)}", p.span)
                p.exp_modes.append("value" if u.is_value else "ref")
                continue
            kind = st.value_kind(want, env)
            if kind is None:
                raise _fail("type-mismatch",
                            "an expression cannot provide exponential "
                            f"argument of type {format_type(want)}", p.span)
            got = self.check_expr(arg, p.span)
            if got != kind:
                raise _fail("type-mismatch",
                            f"exponential argument is {got}, expected {kind}",
                            p.span)
            p.exp_modes.append("value")
        self.require_empty(p.span, f"the call of `{p.name}`")

    # -- letc hole filling -------------------------------------------------------

    def fill_hole(self, cut: t.Cut) -> st.SessionType:
        call = _first_call_using(cut.left, cut.name)
        if call is None:
            raise _fail("cannot-infer",
                        f"no call fixes the type of `{cut.name}`; annotate "
                        "the letc", cut.span)
        sig = self.ctx.procs.get(call.name)
        if sig is None:
            raise _fail("unknown-proc",
                        f"process `{call.name}` is not defined", call.span)
        if len(call.lin_args) != len(sig.lin_params) or \
                len(call.type_args) != len(sig.type_params):
            raise _fail("call-arity",
                        f"`{call.name}` called with wrong arity", call.span)
        hits = [param for arg, param in zip(call.lin_args, sig.lin_params)
                if arg == cut.name]
        if len(hits) != 1:
            raise _fail("cannot-infer",
                        f"`{cut.name}` must appear exactly once in the first "
                        "call using it", call.span)
        inst = dict(zip(sig.type_params,
                        [self.wf(a, call.span) for a in call.type_args]))
        return st.subst(hits[0].annot, inst)


def _first_call_using(p: t.Process, name: str) -> t.CallProc | None:
    stack = [p]
    while stack:
        node = stack.pop(0)
        if isinstance(node, t.CallProc) and name in node.lin_args:
            return node
        for attr in ("left", "right", "cont", "body", "then", "els"):
            child = getattr(node, attr, None)
            if isinstance(child, t.Process):
                stack.append(child)
        if isinstance(node, t.Case):
            stack.extend(b for _, b in node.branches)
        for attr in ("arg", "init"):
            child = getattr(node, attr, None)
            if isinstance(child, t.Closure):
                stack.append(child.body)
    return None


# ---------------------------------------------------------------------------
# Cell protocol oracle
# ---------------------------------------------------------------------------

def check_cell_protocol(uses: list[str]) -> Diagnostic | None:
    """Validate one alias' use sequence against (take;put)*;drop."""
    held = False
    for i, op in enumerate(uses):
        if op == "take":
            if held:
                return Diagnostic("cell-protocol",
                                  f"take at position {i} while holding")
            held = True
        elif op == "put":
            if not held:
                return Diagnostic("cell-protocol",
                                  f"put at position {i} without a take")
            held = False
        elif op == "drop":
            if held:
                return Diagnostic("cell-protocol",
                                  f"drop at position {i} while holding")
            if i != len(uses) - 1:
                return Diagnostic("cell-protocol",
                                  "use after drop")
            return None
        else:
            return Diagnostic("cell-protocol", f"unknown cell op {op!r}")
    if held:
        return Diagnostic("cell-protocol", "sequence ends while holding")
    return Diagnostic("leak", "usage never dropped")


# ---------------------------------------------------------------------------
# Guardedness
# ---------------------------------------------------------------------------

def check_guardedness(sig: ProcSig, scc: frozenset[str]) -> None:
    """Recursive calls must sit behind at least one communication or cell
    action on their control path (`gen_rec` opts out)."""
    if sig.rec_flag == "gen_rec":
        return

    def walk(p: t.Process, guarded: bool) -> None:
        if isinstance(p, t.CallProc):
            if p.name in scc and not guarded:
                raise _fail("unguarded-recursion",
                            f"recursive call to `{p.name}` in `{sig.name}` "
                            "is not guarded; declare it gen_rec if general "
                            "recursion is intended", p.span)
            return
        after = guarded or isinstance(
            p, (t.Recv, t.Case, t.Send, t.Select, t.Take, t.CallRepl,
                t.BangServer))
        for attr in ("left", "right", "then", "els"):
            child = getattr(p, attr, None)
            if isinstance(child, t.Process):
                walk(child, guarded)
        cont = getattr(p, "cont", None)
        if isinstance(cont, t.Process):
            walk(cont, after)
        body = getattr(p, "body", None)
        if isinstance(body, t.Process):
            walk(body, after)
        if isinstance(p, t.Case):
            for _, b in p.branches:
                walk(b, after)
        for attr in ("arg", "init"):
            child = getattr(p, attr, None)
            if isinstance(child, t.Closure):
                walk(child.body, guarded)

    walk(sig.body, False)


def _infer_held_params(body: t.Process, params: set[str]) -> frozenset[str]:
    """Usage parameters whose first cell operation is `put` arrive with
    their content already taken out by the caller (cf. a free() helper that
    refills and drops)."""
    verdict: dict[str, bool] = {}

    def walk(p: t.Process) -> None:
        if isinstance(p, t.Put):
            verdict.setdefault(p.chan, True)
        elif isinstance(p, t.Take):
            verdict.setdefault(p.chan, False)
        elif isinstance(p, t.Share):
            verdict.setdefault(p.name, False)
        elif isinstance(p, t.DropName):
            verdict.setdefault(p.chan, False)
        for attr in ("left", "right", "cont", "body", "then", "els"):
            child = getattr(p, attr, None)
            if isinstance(child, t.Process):
                walk(child)
        if isinstance(p, t.Case):
            for _, b in p.branches:
                walk(b)
        for attr in ("arg", "init"):
            child = getattr(p, attr, None)
            if isinstance(child, t.Closure):
                walk(child.body)

    walk(body)
    return frozenset(n for n in params if verdict.get(n))


def _call_targets(p: t.Process) -> set[str]:
    out: set[str] = set()
    stack = [p]
    while stack:
        node = stack.pop()
        if isinstance(node, t.CallProc):
            out.add(node.name)
        for attr in ("left", "right", "cont", "body", "then", "els"):
            child = getattr(node, attr, None)
            if isinstance(child, t.Process):
                stack.append(child)
        if isinstance(node, t.Case):
            stack.extend(b for _, b in node.branches)
        for attr in ("arg", "init"):
            child = getattr(node, attr, None)
            if isinstance(child, t.Closure):
                stack.append(child.body)
    return out


def _sccs(graph: dict[str, set[str]]) -> list[set[str]]:
    """Tarjan's strongly connected components."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    out: list[set[str]] = []
    counter = [0]

    def strong(v: str) -> None:
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in graph.get(v, ()):
            if w not in graph:
                continue
            if w not in index:
                strong(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = set()
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.add(w)
                if w == v:
                    break
            out.append(comp)

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10000))
    try:
        for v in graph:
            if v not in index:
                strong(v)
    finally:
        sys.setrecursionlimit(old)
    return out


# ---------------------------------------------------------------------------
# Whole-program checking
# ---------------------------------------------------------------------------

def check_program(decls: list[t.Decl],
                  base: Program | None = None
                  ) -> tuple[Program, list[Diagnostic]]:
    """Check a batch of declarations on top of `base` (two-pass, so later
    declarations may be referenced by earlier bodies).  Returns the extended
    program and the diagnostics (empty means everything checked)."""
    prog = base.copy() if base is not None else Program()
    diags: list[Diagnostic] = []

    decls = [desugar_decl(d) for d in decls]

    # Pass 1: type definitions (register every name first so groups and
    # later declarations can reference each other, then normalize).
    for d in decls:
        if not isinstance(d, t.TypeGroup):
            continue
        group = frozenset(td.name for td in d.decls)
        recursive = bool(d.rec_flag)
        for td in d.decls:
            prog.tenv.define(st.TypeDef(td.name, tuple(td.params), td.body,
                                        recursive, group, td.span))
    for d in decls:
        if not isinstance(d, t.TypeGroup):
            continue
        group = frozenset(td.name for td in d.decls)
        recursive = bool(d.rec_flag)
        try:
            for td in d.decls:
                params = frozenset(td.params)
                body = st.well_formed(td.body, prog.tenv, params, td.span)
                prog.tenv.define(st.TypeDef(td.name, tuple(td.params), body,
                                            recursive, group, td.span))
            st.check_group_contractive(prog.tenv, group, d.span)
        except CheckError as e:
            diags.append(e.diagnostic)

    # Pass 2: process signatures (forward references allowed).
    sigs: list[ProcSig] = []
    for d in decls:
        if not isinstance(d, t.ProcDecl):
            continue
        params = frozenset(d.type_params)
        try:
            lin = [t.Param(p.name, st.well_formed(p.annot, prog.tenv, params,
                                                  p.span), p.span)
                   for p in d.lin_params]
            exp = [t.Param(p.name, st.well_formed(p.annot, prog.tenv, params,
                                                  p.span), p.span)
                   for p in d.exp_params]
        except CheckError as e:
            diags.append(e.diagnostic)
            continue
        sig = ProcSig(d.name, tuple(d.type_params), lin, exp, d.rec_flag,
                      d.body, d.span,
                      held_params=_infer_held_params(
                          d.body, {pp.name for pp in lin}))
        sigs.append(sig)
        prog.procs[d.name] = sig

    # Pass 3: recursion structure.
    graph = {name: _call_targets(sig.body) & prog.procs.keys()
             for name, sig in prog.procs.items()}
    comps = _sccs(graph)
    scc_of: dict[str, frozenset[str]] = {}
    for comp in comps:
        cyclic = len(comp) > 1 or any(n in graph[n] for n in comp)
        for name in comp:
            scc_of[name] = frozenset(comp) if cyclic else frozenset()

    # Pass 4: bodies.
    for sig in sigs:
        own = scc_of.get(sig.name, frozenset())
        try:
            if own and not sig.rec_flag:
                raise _fail("unguarded-recursion",
                            f"`{sig.name}` is recursive but not declared "
                            "rec/gen_rec", sig.span)
            check_guardedness(sig, own)
            ctx = Ctx(prog.tenv, prog.procs, frozenset(sig.type_params), own)
            checker = Checker(ctx)
            for p in sig.lin_params:
                checker.bind(p.name, p.annot, p.span)
                if p.name in sig.held_params:
                    binding = ctx.linear.get(p.name)
                    if binding is None or not isinstance(
                            st.whnf(binding.ty, prog.tenv), st.UsageT):
                        raise _fail("cell-protocol",
                                    f"parameter `{p.name}` is refilled "
                                    "before a take but is not a usage",
                                    p.span)
                    binding.held = True
            for p in sig.exp_params:
                ctx.unrest[p.name] = UnrestBinding(
                    p.annot,
                    is_value=st.value_kind(p.annot, prog.tenv) is not None)
            checker.check(sig.body, guarded=False)
        except CheckError as e:
            diags.append(e.diagnostic)

    return prog, diags


def check_entry(prog: Program, name: str, exp_args: list[object],
                span: Span = NO_SPAN) -> ProcSig:
    """Validate an invocation `name(;args)` from the CLI or REPL."""
    sig = prog.procs.get(name)
    if sig is None:
        raise _fail("unknown-proc", f"process `{name}` is not defined", span)
    if sig.lin_params:
        raise _fail("entry-linear",
                    f"`{name}` has linear parameters and cannot be invoked "
                    "directly", span)
    if len(exp_args) != len(sig.exp_params):
        raise _fail("call-arity",
                    f"`{name}` expects {len(sig.exp_params)} exponential "
                    f"argument(s), got {len(exp_args)}", span)
    for value, param in zip(exp_args, sig.exp_params):
        kind = st.value_kind(param.annot, prog.tenv)
        want = "lint" if isinstance(value, int) else "lstring"
        if kind != want:
            raise _fail("type-mismatch",
                        f"argument for `{param.name}` should be {kind}", span)
    return sig
