"""Checked-program container shared by checker, runtime, CLI and REPL."""

from __future__ import annotations

from dataclasses import dataclass, field

from clls.diagnostics import NO_SPAN, Span
from clls import sessiontypes as st
from clls import terms as t


@dataclass
class ProcSig:
    name: str
    type_params: tuple[str, ...]
    lin_params: list[t.Param]
    exp_params: list[t.Param]
    rec_flag: str
    body: t.Process
    span: Span = NO_SPAN
    held_params: frozenset[str] = frozenset()


class Program:
    """Type definitions plus checked process definitions."""

    def __init__(self) -> None:
        self.tenv = st.TypeEnv()
        self.procs: dict[str, ProcSig] = {}

    def copy(self) -> "Program":
        out = Program()
        out.tenv = self.tenv.copy()
        out.procs = dict(self.procs)
        return out
