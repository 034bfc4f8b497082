"""Surface and core process terms.

The parser produces surface terms (sugar nodes `LetC`/`CutS` included and
call nodes may carry a sequenced continuation); `clls.desugar` rewrites
them to the core forms the checker and runtime operate on.  Checker
annotations (context splits, argument modes) are stored on the nodes so
the runtime replays exactly the splits the checker validated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from clls.diagnostics import NO_SPAN, Span
from clls.sessiontypes import SessionType


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------

class Expr:
    __slots__ = ()


@dataclass
class IntLit(Expr):
    value: int
    span: Span = NO_SPAN


@dataclass
class StrLit(Expr):
    value: str
    span: Span = NO_SPAN


@dataclass
class NameExpr(Expr):
    name: str
    span: Span = NO_SPAN


@dataclass
class BinOp(Expr):
    op: str  # + - * mod ==
    left: Expr
    right: Expr
    span: Span = NO_SPAN


def expr_names(e: Expr) -> set[str]:
    if isinstance(e, NameExpr):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_names(e.left) | expr_names(e.right)
    return set()


# --------------------------------------------------------------------------
# Processes
# --------------------------------------------------------------------------

class Process:
    __slots__ = ()


@dataclass
class Closure:
    """A suspended process `(x. P)` sent on a session or stored in a cell."""

    bound: str
    body: Process
    span: Span = NO_SPAN
    capture: Optional[frozenset[str]] = None  # linear names moved inside
    fv: Optional[frozenset[str]] = None       # every captured name


SendArg = Union[Expr, Closure]


@dataclass
class Inert(Process):
    span: Span = NO_SPAN


@dataclass
class Forward(Process):
    left: str
    right: str
    span: Span = NO_SPAN


@dataclass
class Par(Process):
    left: Process
    right: Process
    span: Span = NO_SPAN
    split_left: Optional[frozenset[str]] = None
    fv_left: Optional[frozenset[str]] = None


@dataclass
class Cut(Process):
    """Core cut: `left` uses `name` at `annot`, `right` at its dual."""

    name: str
    annot: Optional[SessionType]
    left: Process
    right: Process
    span: Span = NO_SPAN
    split_left: Optional[frozenset[str]] = None
    fv_left: Optional[frozenset[str]] = None


@dataclass
class CutS(Process):
    """Surface `cut { P |x:T| Q }`; the annotation types the right side."""

    name: str
    annot: SessionType
    left: Process
    right: Process
    span: Span = NO_SPAN


@dataclass
class LetC(Process):
    """Surface `letc x:T { P }; Q` (annotation may be omitted)."""

    name: str
    annot: Optional[SessionType]
    body: Process
    cont: Process
    span: Span = NO_SPAN


@dataclass
class Share(Process):
    name: str
    left: Process
    right: Process
    span: Span = NO_SPAN
    split_left: Optional[frozenset[str]] = None
    fv_left: Optional[frozenset[str]] = None


@dataclass
class CallProc(Process):
    name: str
    type_args: list[SessionType] = field(default_factory=list)
    lin_args: list[str] = field(default_factory=list)
    exp_args: list[Expr] = field(default_factory=list)
    cont: Optional[Process] = None  # surface only; desugars to Par
    span: Span = NO_SPAN
    exp_modes: Optional[list[str]] = None  # "ref" | "value" per argument


@dataclass
class Send(Process):
    chan: str
    arg: SendArg
    cont: Process
    span: Span = NO_SPAN
    sugar: bool = False  # printed as `c <- e`
    arg_mode: Optional[str] = None  # "name" | "value" | "closure"
    prim_send: bool = False  # delivery on a bare primitive session


@dataclass
class Recv(Process):
    chan: str
    bound: str
    cont: Process
    span: Span = NO_SPAN
    sugar: bool = False


@dataclass
class Select(Process):
    label: str
    chan: str
    cont: Process
    span: Span = NO_SPAN


@dataclass
class Case(Process):
    chan: str
    branches: list[tuple[str, Process]] = field(default_factory=list)
    span: Span = NO_SPAN


@dataclass
class Close(Process):
    chan: str
    span: Span = NO_SPAN


@dataclass
class Wait(Process):
    chan: str
    cont: Process = field(default_factory=Inert)
    span: Span = NO_SPAN


@dataclass
class BangServer(Process):
    chan: str
    bound: str
    body: Process
    span: Span = NO_SPAN
    fv: Optional[frozenset[str]] = None


@dataclass
class CallRepl(Process):
    chan: str
    bound: str
    cont: Process
    span: Span = NO_SPAN


@dataclass
class AffineIntro(Process):
    chan: str
    cont: Process
    span: Span = NO_SPAN


@dataclass
class UseC(Process):
    chan: str
    cont: Process
    span: Span = NO_SPAN


@dataclass
class Discard(Process):
    chan: str
    cont: Process = field(default_factory=Inert)
    span: Span = NO_SPAN


@dataclass
class CellNew(Process):
    chan: str
    init: SendArg = None  # type: ignore[assignment]
    span: Span = NO_SPAN
    arg_mode: Optional[str] = None


@dataclass
class Take(Process):
    chan: str
    bound: str
    cont: Process = field(default_factory=Inert)
    span: Span = NO_SPAN


@dataclass
class Put(Process):
    chan: str
    arg: SendArg = None  # type: ignore[assignment]
    cont: Process = field(default_factory=Inert)
    span: Span = NO_SPAN
    arg_mode: Optional[str] = None


@dataclass
class DropName(Process):
    """Surface `drop c` / `release c`; the checker resolves the kind."""

    chan: str
    cont: Process = field(default_factory=Inert)
    span: Span = NO_SPAN
    drop_kind: Optional[str] = None  # "cell" | "coaffine"


@dataclass
class If(Process):
    cond: Expr
    then: Process
    els: Process
    span: Span = NO_SPAN


@dataclass
class Print(Process):
    expr: Expr
    newline: bool
    cont: Process = field(default_factory=Inert)
    span: Span = NO_SPAN


@dataclass
class Sleep(Process):
    expr: Expr
    cont: Process = field(default_factory=Inert)
    span: Span = NO_SPAN


# --------------------------------------------------------------------------
# Declarations
# --------------------------------------------------------------------------

@dataclass
class Param:
    name: str
    annot: SessionType
    span: Span = NO_SPAN


@dataclass
class ProcDecl:
    name: str
    type_params: list[str]
    lin_params: list[Param]
    exp_params: list[Param]
    rec_flag: str  # "" | "rec" | "corec" | "gen_rec"
    body: Process
    span: Span = NO_SPAN


@dataclass
class TypeDecl:
    name: str
    params: list[str]
    body: SessionType
    span: Span = NO_SPAN


@dataclass
class TypeGroup:
    rec_flag: str  # "" | "rec" | "corec"
    decls: list[TypeDecl]
    span: Span = NO_SPAN


Decl = Union[ProcDecl, TypeGroup]


# --------------------------------------------------------------------------
# REPL commands
# --------------------------------------------------------------------------

@dataclass
class ReplInvoke:
    name: str
    lin_args: list[str]
    exp_args: list[Expr]
    span: Span = NO_SPAN


@dataclass
class ReplDeclare:
    decls: list[Decl]
    span: Span = NO_SPAN


ReplCommand = Union[ReplInvoke, ReplDeclare]
