"""The session type algebra.

Types are immutable trees.  Named definitions live in a `TypeEnv`; aliases
(non-recursive definitions) are transparent to equality, while recursive
definitions and the structural `rec`/`corec` binders are compared
iso-recursively.  The checker uses the laxer coinductive `compatible`
relation, which also identifies a recursive type with its unfoldings.

Polarity: `dual` is a structural involution.  References to named
definitions and to free type parameters carry a `dualized` flag instead of
being expanded; variables bound by an enclosing binder are left untouched
by `dual` (they rebind to the dualized fixed point), which is what makes
duality commute with unfolding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from clls.diagnostics import CheckError, Diagnostic, Span, NO_SPAN


class SessionType:
    """Base class; concrete variants are frozen dataclasses below."""

    __slots__ = ()


@dataclass(frozen=True)
class CloseT(SessionType):
    pass


@dataclass(frozen=True)
class WaitT(SessionType):
    pass


@dataclass(frozen=True)
class SendT(SessionType):
    payload: SessionType
    cont: SessionType


@dataclass(frozen=True)
class RecvT(SessionType):
    payload: SessionType
    cont: SessionType


@dataclass(frozen=True)
class OfferT(SessionType):
    """Branch point consumed by `case` (surface form `offer of`)."""

    branches: tuple[tuple[str, SessionType], ...]

    def branch_map(self) -> dict[str, SessionType]:
        return dict(self.branches)


@dataclass(frozen=True)
class ChoiceT(SessionType):
    """Branch point exercised by label selection (surface `case of`/`choice of`)."""

    branches: tuple[tuple[str, SessionType], ...]

    def branch_map(self) -> dict[str, SessionType]:
        return dict(self.branches)


@dataclass(frozen=True)
class BangT(SessionType):
    inner: SessionType


@dataclass(frozen=True)
class QuestT(SessionType):
    inner: SessionType


@dataclass(frozen=True)
class AffineT(SessionType):
    inner: SessionType


@dataclass(frozen=True)
class CoaffineT(SessionType):
    inner: SessionType


@dataclass(frozen=True)
class StateT(SessionType):
    inner: SessionType


@dataclass(frozen=True)
class UsageT(SessionType):
    inner: SessionType


@dataclass(frozen=True)
class RecT(SessionType):
    var: str
    body: SessionType


@dataclass(frozen=True)
class CorecT(SessionType):
    var: str
    body: SessionType


@dataclass(frozen=True)
class VarT(SessionType):
    name: str
    dualized: bool = False


@dataclass(frozen=True)
class AppT(SessionType):
    """Reference to a named definition (possibly the enclosing one)."""

    name: str
    args: tuple[SessionType, ...] = ()
    dualized: bool = False


@dataclass(frozen=True)
class PrimT(SessionType):
    kind: str  # "lint" | "lstring"


@dataclass(frozen=True)
class DualPrimT(SessionType):
    kind: str


LINT = PrimT("lint")
LSTRING = PrimT("lstring")

_BRANCHED = (OfferT, ChoiceT)
_WRAPPERS = {
    BangT: QuestT,
    QuestT: BangT,
    AffineT: CoaffineT,
    CoaffineT: AffineT,
    StateT: UsageT,
    UsageT: StateT,
}


@dataclass
class TypeDef:
    name: str
    params: tuple[str, ...]
    body: SessionType
    recursive: bool
    group: frozenset[str]
    span: Span = NO_SPAN


class TypeEnv:
    """Named type definitions, registered in declaration order."""

    def __init__(self) -> None:
        self.defs: dict[str, TypeDef] = {}

    def copy(self) -> "TypeEnv":
        out = TypeEnv()
        out.defs = dict(self.defs)
        return out

    def lookup(self, name: str) -> TypeDef | None:
        return self.defs.get(name)

    def define(self, d: TypeDef) -> None:
        self.defs[d.name] = d


def _err(rule: str, message: str, span: Span = NO_SPAN) -> CheckError:
    return CheckError(Diagnostic(rule, message, span))


# ---------------------------------------------------------------------------
# Duality
# ---------------------------------------------------------------------------

def dual(t: SessionType, _bound: frozenset[str] = frozenset()) -> SessionType:
    """Structural dual.  Involutive: dual(dual(t)) == t."""
    if isinstance(t, CloseT):
        return WaitT()
    if isinstance(t, WaitT):
        return CloseT()
    if isinstance(t, SendT):
        return RecvT(dual(t.payload, _bound), dual(t.cont, _bound))
    if isinstance(t, RecvT):
        return SendT(dual(t.payload, _bound), dual(t.cont, _bound))
    if isinstance(t, OfferT):
        return ChoiceT(tuple((l, dual(b, _bound)) for l, b in t.branches))
    if isinstance(t, ChoiceT):
        return OfferT(tuple((l, dual(b, _bound)) for l, b in t.branches))
    if isinstance(t, tuple(_WRAPPERS)):
        return _WRAPPERS[type(t)](dual(t.inner, _bound))
    if isinstance(t, RecT):
        return CorecT(t.var, dual(t.body, _bound | {t.var}))
    if isinstance(t, CorecT):
        return RecT(t.var, dual(t.body, _bound | {t.var}))
    if isinstance(t, VarT):
        if t.name in _bound:
            return t
        return VarT(t.name, not t.dualized)
    if isinstance(t, AppT):
        return AppT(t.name, t.args, not t.dualized)
    if isinstance(t, PrimT):
        return DualPrimT(t.kind)
    if isinstance(t, DualPrimT):
        return PrimT(t.kind)
    raise AssertionError(f"dual: unknown type {t!r}")


# ---------------------------------------------------------------------------
# Substitution / instantiation / unfolding
# ---------------------------------------------------------------------------

_fresh_counter = itertools.count()


def _freshen(name: str) -> str:
    return f"{name}%{next(_fresh_counter)}"


def free_type_vars(t: SessionType) -> frozenset[str]:
    if isinstance(t, VarT):
        return frozenset({t.name})
    if isinstance(t, (RecT, CorecT)):
        return free_type_vars(t.body) - {t.var}
    if isinstance(t, (SendT, RecvT)):
        return free_type_vars(t.payload) | free_type_vars(t.cont)
    if isinstance(t, _BRANCHED):
        out: frozenset[str] = frozenset()
        for _, b in t.branches:
            out |= free_type_vars(b)
        return out
    if isinstance(t, tuple(_WRAPPERS)):
        return free_type_vars(t.inner)
    if isinstance(t, AppT):
        out = frozenset()
        for a in t.args:
            out |= free_type_vars(a)
        return out
    return frozenset()


def subst(t: SessionType, mapping: dict[str, SessionType]) -> SessionType:
    """Capture-avoiding substitution of type variables.

    A dualized occurrence `~X` is replaced by the dual of the image of `X`.
    """
    if not mapping:
        return t
    if isinstance(t, VarT):
        if t.name in mapping:
            img = mapping[t.name]
            return dual(img) if t.dualized else img
        return t
    if isinstance(t, (RecT, CorecT)):
        mapping = {k: v for k, v in mapping.items() if k != t.var}
        if not mapping:
            return t
        clashing = any(t.var in free_type_vars(v) for v in mapping.values())
        var, body = t.var, t.body
        if clashing:
            fresh = _freshen(var)
            body = subst(body, {var: VarT(fresh)})
            var = fresh
        cls = RecT if isinstance(t, RecT) else CorecT
        return cls(var, subst(body, mapping))
    if isinstance(t, SendT):
        return SendT(subst(t.payload, mapping), subst(t.cont, mapping))
    if isinstance(t, RecvT):
        return RecvT(subst(t.payload, mapping), subst(t.cont, mapping))
    if isinstance(t, _BRANCHED):
        return type(t)(tuple((l, subst(b, mapping)) for l, b in t.branches))
    if isinstance(t, tuple(_WRAPPERS)):
        return type(t)(subst(t.inner, mapping))
    if isinstance(t, AppT):
        return AppT(t.name, tuple(subst(a, mapping) for a in t.args), t.dualized)
    return t


def instantiate(env: TypeEnv, name: str, args: tuple[SessionType, ...],
                dualized: bool = False, span: Span = NO_SPAN) -> SessionType:
    """Expand a named definition applied to `args` (dualizing if requested)."""
    d = env.lookup(name)
    if d is None:
        raise _err("unknown-type", f"type `{name}` is not defined", span)
    if len(d.params) != len(args):
        raise _err("type-arity",
                   f"type `{name}` expects {len(d.params)} argument(s), "
                   f"got {len(args)}", span)
    body = subst(d.body, dict(zip(d.params, args)))
    return dual(body) if dualized else body


def unfold(t: SessionType, env: TypeEnv) -> SessionType:
    """One-step unfolding of a recursive binder or named reference."""
    if isinstance(t, AppT):
        return instantiate(env, t.name, t.args, t.dualized)
    if isinstance(t, (RecT, CorecT)):
        return subst(t.body, {t.var: t})
    raise _err("not-unfoldable", "only recursive types can be unfolded")


def whnf(t: SessionType, env: TypeEnv, fuel: int = 512) -> SessionType:
    """Expand named references and binders until a structural head appears."""
    while isinstance(t, (AppT, RecT, CorecT)):
        fuel -= 1
        if fuel <= 0:
            raise _err("type-expansion-depth",
                       "type does not reach a structural constructor "
                       "(non-contractive recursion?)")
        t = unfold(t, env)
    return t


# ---------------------------------------------------------------------------
# Equality and compatibility
# ---------------------------------------------------------------------------

def _resolve_aliases(t: SessionType, env: TypeEnv) -> SessionType:
    while isinstance(t, AppT):
        d = env.lookup(t.name)
        if d is None or d.recursive:
            return t
        t = instantiate(env, t.name, t.args, t.dualized)
    return t


def type_equal(a: SessionType, b: SessionType, env: TypeEnv) -> bool:
    """Iso-recursive equality: aliases are transparent, recursive names and
    binders are nominal/structural.  Branch order is irrelevant."""
    return _iso_eq(a, b, env, {}, {}, 0)


def _iso_eq(a: SessionType, b: SessionType, env: TypeEnv,
            amap: dict[str, int], bmap: dict[str, int], depth: int) -> bool:
    a = _resolve_aliases(a, env)
    b = _resolve_aliases(b, env)
    if isinstance(a, VarT) or isinstance(b, VarT):
        if not (isinstance(a, VarT) and isinstance(b, VarT)):
            return False
        if a.dualized != b.dualized:
            return False
        ai, bi = amap.get(a.name), bmap.get(b.name)
        if ai is None and bi is None:
            return a.name == b.name  # both free
        return ai == bi
    if isinstance(a, (RecT, CorecT)) or isinstance(b, (RecT, CorecT)):
        if type(a) is not type(b):
            return False
        amap2 = dict(amap)
        bmap2 = dict(bmap)
        amap2[a.var] = depth
        bmap2[b.var] = depth
        return _iso_eq(a.body, b.body, env, amap2, bmap2, depth + 1)
    if isinstance(a, AppT) or isinstance(b, AppT):
        if not (isinstance(a, AppT) and isinstance(b, AppT)):
            return False
        if a.name != b.name or a.dualized != b.dualized:
            return False
        return len(a.args) == len(b.args) and all(
            _iso_eq(x, y, env, amap, bmap, depth)
            for x, y in zip(a.args, b.args))
    if type(a) is not type(b):
        return False
    if isinstance(a, _BRANCHED):
        am, bm = a.branch_map(), b.branch_map()
        if am.keys() != bm.keys():
            return False
        return all(_iso_eq(am[l], bm[l], env, amap, bmap, depth) for l in am)
    if isinstance(a, (SendT, RecvT)):
        return (_iso_eq(a.payload, b.payload, env, amap, bmap, depth)
                and _iso_eq(a.cont, b.cont, env, amap, bmap, depth))
    if isinstance(a, tuple(_WRAPPERS)):
        return _iso_eq(a.inner, b.inner, env, amap, bmap, depth)
    if isinstance(a, (PrimT, DualPrimT)):
        return a.kind == b.kind
    return True  # CloseT/WaitT


def compatible(a: SessionType, b: SessionType, env: TypeEnv) -> bool:
    """Coinductive equality of infinite unfoldings (used at every checker
    matching point; identifies a recursive type with its unfoldings)."""
    return _co_eq(a, b, env, set())


def _co_eq(a: SessionType, b: SessionType, env: TypeEnv,
           seen: set[tuple[SessionType, SessionType]]) -> bool:
    key = (a, b)
    if key in seen:
        return True
    if len(seen) > 4096:
        raise _err("type-compare-depth", "type comparison did not converge")
    seen.add(key)
    wa = whnf(a, env)
    wb = whnf(b, env)
    if isinstance(wa, VarT) or isinstance(wb, VarT):
        return wa == wb
    if type(wa) is not type(wb):
        return False
    if isinstance(wa, _BRANCHED):
        am, bm = wa.branch_map(), wb.branch_map()
        if am.keys() != bm.keys():
            return False
        return all(_co_eq(am[l], bm[l], env, seen) for l in am)
    if isinstance(wa, (SendT, RecvT)):
        return (_co_eq(wa.payload, wb.payload, env, seen)
                and _co_eq(wa.cont, wb.cont, env, seen))
    if isinstance(wa, tuple(_WRAPPERS)):
        return _co_eq(wa.inner, wb.inner, env, seen)
    if isinstance(wa, (PrimT, DualPrimT)):
        return wa.kind == wb.kind
    return True


# ---------------------------------------------------------------------------
# Well-formedness and normalization
# ---------------------------------------------------------------------------

def well_formed(t: SessionType, env: TypeEnv,
                params: frozenset[str] = frozenset(),
                span: Span = NO_SPAN) -> SessionType:
    """Validate `t` and return its normal form.

    Checks name resolution, arity and contractiveness.  Normalization turns
    nullary references to in-scope parameters into variables and wraps cell
    contents that are neither affine nor cell-typed in an implicit `affine`
    (applied on both the `state` and the `usage` view, so the two stay dual).
    """
    return _wf(t, env, params, frozenset(), span)


def _wf(t: SessionType, env: TypeEnv, params: frozenset[str],
        bound: frozenset[str], span: Span) -> SessionType:
    if isinstance(t, (CloseT, WaitT, PrimT, DualPrimT)):
        return t
    if isinstance(t, VarT):
        if t.name not in params and t.name not in bound:
            raise _err("unknown-type", f"type variable `{t.name}` is not in scope",
                       span)
        return t
    if isinstance(t, AppT):
        if not t.args and t.name in params:
            return VarT(t.name, t.dualized)
        if not t.args and t.name in bound:
            return VarT(t.name, t.dualized)
        d = env.lookup(t.name)
        if d is None:
            raise _err("unknown-type", f"type `{t.name}` is not defined", span)
        if len(d.params) != len(t.args):
            raise _err("type-arity",
                       f"type `{t.name}` expects {len(d.params)} argument(s), "
                       f"got {len(t.args)}", span)
        return AppT(t.name, tuple(_wf(a, env, params, bound, span)
                                  for a in t.args), t.dualized)
    if isinstance(t, SendT):
        return SendT(_wf(t.payload, env, params, bound, span),
                     _wf(t.cont, env, params, bound, span))
    if isinstance(t, RecvT):
        return RecvT(_wf(t.payload, env, params, bound, span),
                     _wf(t.cont, env, params, bound, span))
    if isinstance(t, _BRANCHED):
        labels = [l for l, _ in t.branches]
        if not labels:
            raise _err("empty-branches", "branch type with no labels", span)
        if len(set(labels)) != len(labels):
            raise _err("duplicate-label", "duplicate label in branch type", span)
        return type(t)(tuple((l, _wf(b, env, params, bound, span))
                             for l, b in t.branches))
    if isinstance(t, (BangT, QuestT, AffineT, CoaffineT)):
        return type(t)(_wf(t.inner, env, params, bound, span))
    if isinstance(t, StateT):
        inner = _wf(t.inner, env, params, bound, span)
        if not _is_cell_content(inner, env, affine_like=True):
            inner = AffineT(inner)
        return StateT(inner)
    if isinstance(t, UsageT):
        inner = _wf(t.inner, env, params, bound, span)
        if not _is_cell_content(inner, env, affine_like=False):
            inner = CoaffineT(inner)
        return UsageT(inner)
    if isinstance(t, (RecT, CorecT)):
        if _exposed_var(t.body, t.var):
            raise _err("non-contractive",
                       f"recursion variable `{t.var}` is not guarded by a "
                       "constructor", span)
        body = _wf(t.body, env, params, bound | {t.var}, span)
        return type(t)(t.var, body)
    raise AssertionError(f"well_formed: unknown type {t!r}")


def _is_cell_content(t: SessionType, env: TypeEnv, affine_like: bool) -> bool:
    """Is `t` already a legal cell content (affine or cell typed)?"""
    seen: set[SessionType] = set()
    while isinstance(t, AppT):
        if t in seen:
            return False
        seen.add(t)
        d = env.lookup(t.name)
        if d is None:
            return False
        t = instantiate(env, t.name, t.args, t.dualized)
    if affine_like:
        return isinstance(t, (AffineT, StateT))
    return isinstance(t, (CoaffineT, UsageT))


def _exposed_var(t: SessionType, var: str) -> bool:
    """True when `var` occurs with no intervening structural constructor."""
    if isinstance(t, VarT):
        return t.name == var
    if isinstance(t, (RecT, CorecT)):
        if t.var == var:
            return False
        return _exposed_var(t.body, var)
    return False


def check_group_contractive(env: TypeEnv, group: frozenset[str],
                            span: Span = NO_SPAN) -> None:
    """Reject recursion groups whose members expand to themselves without
    crossing a structural constructor (`type rec X { X }`)."""
    for name in group:
        d0 = env.lookup(name)
        if d0 is None:
            continue
        seen: set[str] = set()
        t: SessionType = AppT(name, tuple(VarT(p) for p in d0.params))
        while isinstance(t, AppT):
            if t.name in seen:
                raise _err("non-contractive",
                           f"type `{name}` unfolds to itself without a "
                           "constructor", span)
            seen.add(t.name)
            d = env.lookup(t.name)
            if d is None:
                break
            t = instantiate(env, t.name, t.args, t.dualized)


# ---------------------------------------------------------------------------
# Classification helpers used by checker and runtime
# ---------------------------------------------------------------------------

def is_disposable(t: SessionType, env: TypeEnv) -> bool:
    """May a name of this type be silently dropped / cancelled?"""
    head = whnf(t, env)
    return isinstance(head, (AffineT, CoaffineT, StateT, UsageT, QuestT))


def value_kind(t: SessionType, env: TypeEnv) -> str | None:
    """If `t` carries a primitive value (possibly under affine/exponential
    wrappers), return "lint" or "lstring"; else None."""
    fuel = 64
    while fuel:
        fuel -= 1
        head = whnf(t, env)
        if isinstance(head, (PrimT, DualPrimT)):
            return head.kind
        if isinstance(head, (AffineT, CoaffineT, BangT, QuestT)):
            t = head.inner
            continue
        return None
    return None


def carries_value(t: SessionType, env: TypeEnv) -> str | None:
    """Like `value_kind` but only for consumer-polarity bindings: the chain
    of affine/exponential wrappers must end in a received primitive, not a
    production obligation."""
    fuel = 64
    while fuel:
        fuel -= 1
        head = whnf(t, env)
        if isinstance(head, DualPrimT):
            return head.kind
        if isinstance(head, (AffineT, CoaffineT, BangT, QuestT)):
            t = head.inner
            continue
        return None
    return None


def is_unrestricted_value(t: SessionType, env: TypeEnv) -> bool:
    """True when a value binding of this type may be used any number of
    times (it sits under an exponential layer)."""
    fuel = 64
    while fuel:
        fuel -= 1
        head = whnf(t, env)
        if isinstance(head, (BangT, QuestT)):
            return value_kind(head.inner, env) is not None
        if isinstance(head, (AffineT, CoaffineT)):
            t = head.inner
            continue
        return False
    return False
