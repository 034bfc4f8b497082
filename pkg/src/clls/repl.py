"""Interactive top level.

Declarations and invocations end with `;;` (input may span lines).  Each
invocation runs on a fresh runtime over the accumulated environment;
declarations extend (or replace) existing definitions, and a rejected
batch leaves the environment untouched.  `:quit` leaves the session.
"""

from __future__ import annotations

import sys

from clls import terms as t
from clls.checker import check_entry, check_program
from clls.diagnostics import CllsError, Diagnostic, NO_SPAN
from clls.parser import parse_repl_input
from clls.program import Program
from clls.runtime import run_program


class Repl:
    def __init__(self, seed: int = 0, step_budget: int = 10_000_000,
                 out=None):
        self.program = Program()
        self.seed = seed
        self.budget = step_budget
        self.out = out if out is not None else sys.stdout

    def handle(self, source: str) -> bool:
        """Process one `;;`-terminated command; False to exit the loop."""
        stripped = source.strip()
        if not stripped:
            return True
        if stripped in (":quit", ":q"):
            return False
        try:
            command = parse_repl_input(source)
            if isinstance(command, t.ReplDeclare):
                prog, diags = check_program(command.decls, base=self.program)
                if diags:
                    for d in diags:
                        print(d.render(), file=sys.stderr)
                else:
                    self.program = prog
                    names = ", ".join(self._decl_names(command.decls))
                    print(f"defined {names}", file=self.out)
            else:
                if command.lin_args:
                    print("error: invocations take only exponential "
                          "arguments, e.g. main(;5);;", file=sys.stderr)
                    return True
                args = [self._arg_value(a) for a in command.exp_args]
                sig = check_entry(self.program, command.name, args,
                                  command.span)
                result = run_program(self.program, sig, args, seed=self.seed,
                                     step_budget=self.budget)
                self.out.write(result.transcript)
                self.out.flush()
                if not result.ok:
                    print(f"error: {result.error.render()}", file=sys.stderr)
        except CllsError as e:
            print(e.diagnostic.render(), file=sys.stderr)
        return True

    @staticmethod
    def _decl_names(decls: list[t.Decl]) -> list[str]:
        names = []
        for d in decls:
            if isinstance(d, t.ProcDecl):
                names.append(d.name)
            else:
                names.extend(td.name for td in d.decls)
        return names

    @staticmethod
    def _arg_value(expr: t.Expr) -> object:
        if isinstance(expr, t.IntLit):
            return expr.value
        if isinstance(expr, t.StrLit):
            return expr.value
        raise CllsError(Diagnostic(
            "repl-args",
            "exponential arguments must be integer or string literals",
            getattr(expr, "span", NO_SPAN)))

    def loop(self, infile=None) -> None:
        infile = infile if infile is not None else sys.stdin
        buffer: list[str] = []
        interactive = infile is sys.stdin and sys.stdin.isatty()
        while True:
            if interactive:
                prompt = "> " if not buffer else "  "
                self.out.write(prompt)
                self.out.flush()
            line = infile.readline()
            if not line:
                break
            buffer.append(line)
            text = "".join(buffer)
            if text.strip() in (":quit", ":q"):
                break
            if not text.rstrip().endswith(";;"):
                if text.strip():
                    continue
                buffer = []
                continue
            buffer = []
            if not self.handle(text):
                break
