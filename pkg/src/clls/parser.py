"""Recursive-descent parser for declarations, processes, types and REPL input.

The grammar is statement-prefixed: every process form announces itself with
a keyword, label or the sugar arrows `<-`/`->`, and `;` sequences a prefix
with its continuation.  Sequencing after an inherently terminal form
(`close`, `fwd`, `cell`, a process call) denotes independent parallel
composition and is represented surface-side (the call keeps a `cont`, the
others wrap in `Par`).
"""

from __future__ import annotations

from clls.diagnostics import Diagnostic, ParseError, Span
from clls.lexer import Token, tokenize
from clls import terms as t
from clls import sessiontypes as st

# Statements that may be followed by `; P` where P runs in parallel.
_TYPE_PREFIX_KEYWORDS = {
    "affine": st.AffineT,
    "coaffine": st.CoaffineT,
    "state": st.StateT,
    "statel": st.StateT,
    "usage": st.UsageT,
}


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        i = min(self.pos + offset, len(self.toks) - 1)
        return self.toks[i]

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_kw(self, word: str) -> bool:
        return self.peek().is_kw(word)

    def at_op(self, op: str) -> bool:
        return self.peek().is_op(op)

    def error(self, message: str, span: Span | None = None) -> ParseError:
        sp = span or self.peek().span
        return ParseError(Diagnostic("syntax", message, sp))

    def expect_op(self, op: str, what: str = "") -> Token:
        if not self.at_op(op):
            want = what or f"`{op}`"
            raise self.error(f"expected {want}, found `{self.peek().lexeme}`")
        return self.advance()

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            raise self.error(f"expected `{word}`, found `{self.peek().lexeme}`")
        return self.advance()

    def expect_ident(self, what: str = "a name") -> Token:
        if self.peek().kind != "ident":
            raise self.error(f"expected {what}, found `{self.peek().lexeme}`")
        return self.advance()

    # -- declarations ------------------------------------------------------

    def parse_program(self) -> list[t.Decl]:
        decls: list[t.Decl] = []
        while self.peek().kind != "eof":
            decls.append(self.parse_decl())
            self.expect_op(";;", "`;;` after the declaration")
        return decls

    def parse_decl(self) -> t.Decl:
        if self.at_kw("proc"):
            return self.parse_proc_decl()
        if self.at_kw("type"):
            return self.parse_type_group()
        raise self.error("expected `proc` or `type` declaration")

    def parse_proc_decl(self) -> t.ProcDecl:
        span = self.expect_kw("proc").span
        rec_flag = ""
        for flag in ("rec", "gen_rec", "corec"):
            if self.at_kw(flag):
                self.advance()
                rec_flag = flag
                break
        name = self.expect_ident("a process name").lexeme
        type_params: list[str] = []
        if self.at_op("<"):
            self.advance()
            type_params.append(self.expect_ident("a type parameter").lexeme)
            while self.at_op(","):
                self.advance()
                type_params.append(self.expect_ident("a type parameter").lexeme)
            self.expect_op(">")
        self.expect_op("(")
        lin_params: list[t.Param] = []
        exp_params: list[t.Param] = []
        current = lin_params
        if not self.at_op(")"):
            if self.at_op(";"):
                self.advance()
                current = exp_params
            while True:
                p_tok = self.expect_ident("a parameter name")
                self.expect_op(":")
                annot = self.parse_type()
                current.append(t.Param(p_tok.lexeme, annot, p_tok.span))
                if self.at_op(","):
                    self.advance()
                    continue
                if self.at_op(";") and current is lin_params:
                    self.advance()
                    current = exp_params
                    if self.at_op(")"):
                        break
                    continue
                break
        self.expect_op(")")
        self.expect_op("{")
        body = self.parse_process()
        self.expect_op("}")
        return t.ProcDecl(name, type_params, lin_params, exp_params,
                          rec_flag, body, span)

    def parse_type_group(self) -> t.TypeGroup:
        span = self.expect_kw("type").span
        rec_flag = ""
        if self.at_kw("rec") or self.at_kw("corec"):
            rec_flag = self.advance().lexeme
        decls = [self.parse_type_def()]
        while self.at_kw("and"):
            self.advance()
            decls.append(self.parse_type_def())
        return t.TypeGroup(rec_flag, decls, span)

    def parse_type_def(self) -> t.TypeDecl:
        name_tok = self.expect_ident("a type name")
        params: list[str] = []
        if self.at_op("("):
            self.advance()
            params.append(self.expect_ident("a type parameter").lexeme)
            while self.at_op(","):
                self.advance()
                params.append(self.expect_ident("a type parameter").lexeme)
            self.expect_op(")")
        self.expect_op("{")
        body = self.parse_type()
        self.expect_op("}")
        return t.TypeDecl(name_tok.lexeme, params, body, name_tok.span)

    # -- types ---------------------------------------------------------------

    def parse_type(self) -> st.SessionType:
        """A full type; `send`/`recv`/`pair` consume their `;` continuation."""
        tok = self.peek()
        if tok.kind == "keyword" and tok.lexeme in ("send", "recv", "pair"):
            self.advance()
            payload = self.parse_type_operand()
            self.expect_op(";", "`;` between payload and continuation type")
            cont = self.parse_type()
            if tok.lexeme == "recv":
                return st.RecvT(payload, cont)
            return st.SendT(payload, cont)
        return self.parse_type_operand()

    def parse_type_operand(self) -> st.SessionType:
        """A type without a top-level `;` continuation."""
        tok = self.peek()
        if tok.is_op("~"):
            self.advance()
            return st.dual(self.parse_type_operand())
        if tok.is_op("!"):
            self.advance()
            return st.BangT(self.parse_type_operand())
        if tok.is_op("?"):
            self.advance()
            return st.QuestT(self.parse_type_operand())
        if tok.kind == "keyword" and tok.lexeme in _TYPE_PREFIX_KEYWORDS:
            self.advance()
            inner = self.parse_type()
            return _TYPE_PREFIX_KEYWORDS[tok.lexeme](inner)
        if tok.is_kw("close"):
            self.advance()
            return st.CloseT()
        if tok.is_kw("wait"):
            self.advance()
            return st.WaitT()
        if tok.is_kw("lint"):
            self.advance()
            return st.PrimT("lint")
        if tok.is_kw("lstring"):
            self.advance()
            return st.PrimT("lstring")
        if tok.kind == "keyword" and tok.lexeme in ("offer", "case", "choice"):
            self.advance()
            self.expect_kw("of")
            self.expect_op("{")
            branches = self.parse_type_branches()
            self.expect_op("}")
            if tok.lexeme == "offer":
                return st.OfferT(branches)
            return st.ChoiceT(branches)
        if tok.kind == "ident":
            self.advance()
            args: list[st.SessionType] = []
            if self.at_op("("):
                self.advance()
                args.append(self.parse_type())
                while self.at_op(","):
                    self.advance()
                    args.append(self.parse_type())
                self.expect_op(")")
            if tok.lexeme == "Int" and not args:
                return st.PrimT("lint")
            return st.AppT(tok.lexeme, tuple(args))
        raise self.error(f"expected a type, found `{tok.lexeme}`")

    def parse_type_branches(self) -> tuple[tuple[str, st.SessionType], ...]:
        branches: list[tuple[str, st.SessionType]] = []
        if self.at_op("|"):
            self.advance()
        while True:
            lab = self.peek()
            if lab.kind != "label":
                raise self.error("expected a `#Label` branch")
            self.advance()
            self.expect_op(":")
            branches.append((lab.lexeme, self.parse_type()))
            if self.at_op("|"):
                self.advance()
                continue
            return tuple(branches)

    # -- processes -----------------------------------------------------------

    def parse_process(self) -> t.Process:
        tok = self.peek()
        span = tok.span

        if tok.is_op("["):
            self.advance()
            self.expect_op("]")
            return t.Inert(span)
        if tok.is_op("("):
            self.advance()
            self.expect_op(")")
            return t.Inert(span)

        if tok.is_kw("fwd"):
            self.advance()
            a = self.expect_ident().lexeme
            b = self.expect_ident().lexeme
            return self.terminal_seq(t.Forward(a, b, span))

        if tok.is_kw("par"):
            self.advance()
            self.expect_op("{")
            left = self.parse_process()
            self.expect_op("||")
            right = self.parse_process()
            self.expect_op("}")
            return t.Par(left, right, span)

        if tok.is_kw("cut"):
            self.advance()
            self.expect_op("{")
            left = self.parse_process()
            self.expect_op("|")
            name = self.expect_ident("the cut name").lexeme
            self.expect_op(":")
            annot = self.parse_type()
            self.expect_op("|")
            right = self.parse_process()
            self.expect_op("}")
            return t.CutS(name, annot, left, right, span)

        if tok.is_kw("letc"):
            self.advance()
            name = self.expect_ident("the letc name").lexeme
            self.expect_op(":")
            annot = None if self.at_op("{") else self.parse_type()
            self.expect_op("{")
            body = self.parse_process()
            self.expect_op("}")
            self.expect_op(";", "`;` after the letc body")
            cont = self.parse_process()
            return t.LetC(name, annot, body, cont, span)

        if tok.is_kw("share"):
            self.advance()
            name = self.expect_ident("the shared name").lexeme
            self.expect_op("{")
            left = self.parse_process()
            self.expect_op("||")
            right = self.parse_process()
            self.expect_op("}")
            return t.Share(name, left, right, span)

        if tok.is_kw("case"):
            self.advance()
            chan = self.expect_ident("the cased name").lexeme
            self.expect_kw("of")
            self.expect_op("{")
            branches: list[tuple[str, t.Process]] = []
            if self.at_op("|"):
                self.advance()
            while True:
                lab = self.peek()
                if lab.kind != "label":
                    raise self.error("expected a `#Label` case branch")
                self.advance()
                self.expect_op(":")
                branches.append((lab.lexeme, self.parse_process()))
                if self.at_op("|"):
                    self.advance()
                    continue
                break
            self.expect_op("}")
            return t.Case(chan, branches, span)

        if tok.kind == "label":
            self.advance()
            chan = self.expect_ident("the channel of the selection").lexeme
            self.expect_op(";", "`;` after the label selection")
            cont = self.parse_process()
            return t.Select(tok.lexeme, chan, cont, span)

        if tok.is_kw("send"):
            self.advance()
            chan = self.expect_ident().lexeme
            self.expect_op("(")
            arg = self.parse_send_arg()
            self.expect_op(")")
            self.expect_op(";")
            return t.Send(chan, arg, self.parse_process(), span)

        if tok.is_kw("recv"):
            self.advance()
            chan = self.expect_ident().lexeme
            self.expect_op("(")
            bound = self.expect_ident("the received name").lexeme
            self.expect_op(")")
            self.expect_op(";")
            return t.Recv(chan, bound, self.parse_process(), span)

        if tok.is_kw("close"):
            self.advance()
            chan = self.expect_ident().lexeme
            return self.terminal_seq(t.Close(chan, span))

        if tok.is_kw("wait"):
            self.advance()
            chan = self.expect_ident().lexeme
            return t.Wait(chan, self.opt_cont(), span)

        if tok.is_op("!"):
            self.advance()
            chan = self.expect_ident("the server channel").lexeme
            self.expect_op("(")
            bound = self.expect_ident("the session name").lexeme
            self.expect_op(")")
            self.expect_op(";")
            return t.BangServer(chan, bound, self.parse_process(), span)

        if tok.is_kw("call"):
            self.advance()
            chan = self.expect_ident().lexeme
            self.expect_op("(")
            bound = self.expect_ident("the fresh session name").lexeme
            self.expect_op(")")
            self.expect_op(";")
            return t.CallRepl(chan, bound, self.parse_process(), span)

        if tok.is_kw("affine"):
            self.advance()
            chan = self.expect_ident().lexeme
            self.expect_op(";")
            return t.AffineIntro(chan, self.parse_process(), span)

        if tok.is_kw("use"):
            self.advance()
            chan = self.expect_ident().lexeme
            self.expect_op(";")
            return t.UseC(chan, self.parse_process(), span)

        if tok.is_kw("discard"):
            self.advance()
            chan = self.expect_ident().lexeme
            return t.Discard(chan, self.opt_cont(), span)

        if tok.is_kw("drop") or tok.is_kw("release"):
            self.advance()
            chan = self.expect_ident().lexeme
            return t.DropName(chan, self.opt_cont(), span)

        if tok.is_kw("cell"):
            self.advance()
            chan = self.expect_ident().lexeme
            self.expect_op("(")
            init = self.parse_send_arg()
            self.expect_op(")")
            return self.terminal_seq(t.CellNew(chan, init, span))

        if tok.is_kw("take"):
            self.advance()
            chan = self.expect_ident().lexeme
            self.expect_op("(")
            bound = self.expect_ident("the taken name").lexeme
            self.expect_op(")")
            self.expect_op(";")
            return t.Take(chan, bound, self.parse_process(), span)

        if tok.is_kw("put"):
            self.advance()
            chan = self.expect_ident().lexeme
            self.expect_op("(")
            arg = self.parse_send_arg()
            self.expect_op(")")
            self.expect_op(";")
            return t.Put(chan, arg, self.parse_process(), span)

        if tok.is_kw("if"):
            self.advance()
            cond = self.parse_expr()
            if self.at_kw("then"):
                self.advance()
            self.expect_op("{")
            then = self.parse_process()
            self.expect_op("}")
            self.expect_kw("else")
            self.expect_op("{")
            els = self.parse_process()
            self.expect_op("}")
            return t.If(cond, then, els, span)

        if tok.is_kw("print") or tok.is_kw("println"):
            self.advance()
            expr = self.parse_expr()
            return t.Print(expr, tok.lexeme == "println", self.opt_cont(), span)

        if tok.is_kw("sleep"):
            self.advance()
            expr = self.parse_expr()
            return t.Sleep(expr, self.opt_cont(), span)

        if tok.kind == "ident":
            nxt = self.peek(1)
            if nxt.is_op("<-"):
                self.advance()
                self.advance()
                arg = self.parse_send_arg()
                self.expect_op(";")
                return t.Send(tok.lexeme, arg, self.parse_process(), span,
                              sugar=True)
            if nxt.is_op("->"):
                self.advance()
                self.advance()
                bound = self.expect_ident("the received name").lexeme
                self.expect_op(";")
                return t.Recv(tok.lexeme, bound, self.parse_process(), span,
                              sugar=True)
            if nxt.is_op("(") or nxt.is_op("<"):
                return self.parse_call(span)
        raise self.error(f"expected a process, found `{tok.lexeme}`")

    def opt_cont(self) -> t.Process:
        if self.at_op(";"):
            self.advance()
            return self.parse_process()
        return t.Inert(self.peek().span)

    def terminal_seq(self, proc: t.Process) -> t.Process:
        """`close c; P` (and friends) compose `P` in parallel."""
        if self.at_op(";"):
            self.advance()
            return t.Par(proc, self.parse_process(), proc.span)
        return proc

    def parse_call(self, span: Span) -> t.Process:
        name = self.expect_ident("a process name").lexeme
        type_args: list[st.SessionType] = []
        if self.at_op("<"):
            self.advance()
            type_args.append(self.parse_type())
            while self.at_op(","):
                self.advance()
                type_args.append(self.parse_type())
            self.expect_op(">")
        self.expect_op("(")
        lin_args: list[str] = []
        exp_args: list[t.Expr] = []
        if not self.at_op(")"):
            if self.at_op(";"):
                self.advance()
                exp_args.append(self.parse_expr())
                while self.at_op(","):
                    self.advance()
                    exp_args.append(self.parse_expr())
            else:
                lin_args.append(self.expect_ident("a linear argument").lexeme)
                while self.at_op(","):
                    self.advance()
                    lin_args.append(self.expect_ident("a linear argument").lexeme)
                if self.at_op(";"):
                    self.advance()
                    exp_args.append(self.parse_expr())
                    while self.at_op(","):
                        self.advance()
                        exp_args.append(self.parse_expr())
        self.expect_op(")")
        call = t.CallProc(name, type_args, lin_args, exp_args, None, span)
        if self.at_op(";"):
            self.advance()
            call.cont = self.parse_process()
        return call

    def parse_send_arg(self) -> t.SendArg:
        tok = self.peek()
        if tok.is_op("{"):
            self.advance()
            bound = self.expect_ident("the closure-bound name").lexeme
            self.expect_op(".")
            body = self.parse_process()
            self.expect_op("}")
            return t.Closure(bound, body, tok.span)
        if tok.kind == "ident" and self.peek(1).is_op("."):
            self.advance()
            self.advance()
            body = self.parse_process()
            return t.Closure(tok.lexeme, body, tok.span)
        return self.parse_expr()

    # -- expressions -----------------------------------------------------------

    def parse_expr(self) -> t.Expr:
        left = self.parse_addsub()
        if self.at_op("=="):
            span = self.advance().span
            right = self.parse_addsub()
            return t.BinOp("==", left, right, span)
        return left

    def parse_addsub(self) -> t.Expr:
        left = self.parse_mul()
        while self.at_op("+") or self.at_op("-"):
            op = self.advance()
            right = self.parse_mul()
            left = t.BinOp(op.lexeme, left, right, op.span)
        return left

    def parse_mul(self) -> t.Expr:
        left = self.parse_expr_atom()
        while self.at_op("*") or self.at_kw("mod"):
            op = self.advance()
            right = self.parse_expr_atom()
            left = t.BinOp("mod" if op.lexeme == "mod" else "*",
                           left, right, op.span)
        return left

    def parse_expr_atom(self) -> t.Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return t.IntLit(int(tok.lexeme), tok.span)
        if tok.kind == "string":
            self.advance()
            return t.StrLit(tok.lexeme, tok.span)
        if tok.kind == "ident":
            self.advance()
            return t.NameExpr(tok.lexeme, tok.span)
        if tok.is_op("("):
            self.advance()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        raise self.error(f"expected an expression, found `{tok.lexeme}`")


# --------------------------------------------------------------------------
# Entry points
# --------------------------------------------------------------------------

def parse_program(source: str, filename: str = "<input>") -> list[t.Decl]:
    return Parser(tokenize(source, filename)).parse_program()


def parse_repl_input(line: str) -> t.ReplCommand:
    """One REPL line: either declarations or an invocation, ending in `;;`."""
    toks = tokenize(line, "<repl>")
    p = Parser(toks)
    first = p.peek()
    if first.is_kw("proc") or first.is_kw("type"):
        decls = p.parse_program()
        return t.ReplDeclare(decls, first.span)
    if first.kind != "ident":
        raise p.error("expected a declaration or an invocation `name(args);;`")
    name = p.advance().lexeme
    p.expect_op("(")
    lin_args: list[str] = []
    exp_args: list[t.Expr] = []
    if not p.at_op(")"):
        if p.at_op(";"):
            p.advance()
            exp_args.append(p.parse_expr())
            while p.at_op(","):
                p.advance()
                exp_args.append(p.parse_expr())
        else:
            lin_args.append(p.expect_ident("an argument").lexeme)
            while p.at_op(","):
                p.advance()
                lin_args.append(p.expect_ident("an argument").lexeme)
            if p.at_op(";"):
                p.advance()
                exp_args.append(p.parse_expr())
                while p.at_op(","):
                    p.advance()
                    exp_args.append(p.parse_expr())
    p.expect_op(")")
    p.expect_op(";;", "`;;` to finish the command")
    if p.peek().kind != "eof":
        raise p.error("unexpected input after `;;`")
    return t.ReplInvoke(name, lin_args, exp_args, first.span)
