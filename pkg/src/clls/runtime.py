"""Concurrent execution of checked programs.

One cooperative scheduler runs tasks over rendezvous endpoints and
reference-counted cells.  A task executes micro-steps until it blocks,
finishes or exhausts its slice; spawning nodes (cut/par/share/call) end
the slice so the seeded scheduler can vary interleavings.  With a fixed
seed the transcript is byte-reproducible; `preemptive` mode reschedules
after every micro-step and preserves only the safety invariants.

Cancellation is cooperative poisoning: discarding a coaffine endpoint
marks the session; the producing task aborts when it next touches it (or
immediately when it is blocked on it), recursively disposing the
resources it still owns.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Optional

from clls import terms as t
from clls.diagnostics import Diagnostic, RuntimeFault
from clls.program import ProcSig, Program

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

SLICE = 4096


# ---------------------------------------------------------------------------
# Runtime values
# ---------------------------------------------------------------------------

class Endpoint:
    """One side of a rendezvous session."""

    _ids = itertools.count()

    __slots__ = ("eid", "peer", "parked", "waiting", "released",
                 "cancelled", "exponential")

    def __init__(self) -> None:
        self.eid = next(Endpoint._ids)
        self.peer: "Endpoint" = self
        self.parked: Optional["Parked"] = None      # one pending out-op
        self.waiting: list["Parked"] = []           # pending in-ops (FIFO)
        self.released = False
        self.cancelled = False
        self.exponential = False

    def __repr__(self) -> str:
        return f"<ep{self.eid}>"


@dataclass
class Parked:
    """An operation waiting on (the owner side of) an endpoint.

    Out kinds carry a payload: msg | label | close | replica.
    In kinds bind a name: recv | case | wait | get.  A "get" is an internal
    read used to resolve cell references and to force primitive values.
    """

    kind: str
    payload: Any = None
    task: Optional["Task"] = None
    bind: Optional[str] = None
    final: bool = False
    persistent: bool = False

    @property
    def is_out(self) -> bool:
        return self.kind in ("msg", "label", "close", "replica")


@dataclass
class ClosureV:
    bound: str
    body: t.Process
    env: dict[str, Any]


@dataclass
class ReplicaV:
    bound: str
    body: t.Process
    env: dict[str, Any]


class Cell:
    _ids = itertools.count()

    __slots__ = ("cid", "contents", "full", "refcount", "waiters", "holder",
                 "poisoned")

    def __init__(self, contents: Any) -> None:
        self.cid = next(Cell._ids)
        self.contents = contents
        self.full = True
        self.refcount = 1
        self.waiters: list[tuple["Task", str]] = []
        self.holder: Optional["Task"] = None
        self.poisoned = False

    def __repr__(self) -> str:
        return f"<cell{self.cid}>"


@dataclass
class CellRef:
    cell: Cell


class Task:
    _ids = itertools.count()

    __slots__ = ("tid", "node", "env", "status", "blocked_on", "slice_left",
                 "parked_at", "waiting_cell")

    def __init__(self, node: t.Process, env: dict[str, Any]):
        self.tid = next(Task._ids)
        self.node = node
        self.env = env
        self.status = "runnable"  # runnable|blocked|sleeping|done|aborted
        self.blocked_on = ""
        self.slice_left = SLICE
        self.parked_at: Optional[Endpoint] = None
        self.waiting_cell: Optional[Cell] = None

    def __repr__(self) -> str:
        return f"<task{self.tid}>"


@dataclass
class RunResult:
    status: str  # ok | deadlock | budget | fault
    transcript: str
    stats: dict[str, int]
    error: Optional[Diagnostic] = None
    events: list[tuple] = field(default_factory=list)
    trace_text: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def leaks(self) -> dict[str, int]:
        return {
            "channels": self.stats["endpoints_live"],
            "cells": self.stats["cells_live"],
            "refcount": self.stats["refs_live"],
        }


def _fault(rule: str, message: str) -> RuntimeFault:
    return RuntimeFault(Diagnostic(rule, message))


# ---------------------------------------------------------------------------
# The scheduler / interpreter
# ---------------------------------------------------------------------------

class Runtime:
    def __init__(self, prog: Program, seed: int = 0,
                 step_budget: int = 10_000_000, trace: bool = False,
                 preemptive: bool = False, collect_events: bool = False):
        self.prog = prog
        self.rng = random.Random(seed)
        self.budget = step_budget
        self.trace = trace
        self.preemptive = preemptive
        self.collect_events = collect_events or trace

        self.runnable: list[Task] = []
        self.sleeping: list[tuple[int, int, Task]] = []
        self.blocked: set[Task] = set()
        self.transcript: list[str] = []
        self.events: list[tuple] = []
        self.trace_lines: list[str] = []
        self.tick = 0
        self.steps = 0
        self.current: Optional[Task] = None
        self._seq = itertools.count()

        self.endpoints_created = 0
        self.endpoints_released = 0
        self.cells_created = 0
        self.cells_freed = 0
        self.refs_created = 0
        self.refs_dropped = 0

    # -- bookkeeping ---------------------------------------------------------

    def event(self, *ev: Any) -> None:
        if self.collect_events:
            self.events.append(ev)
            if self.trace:
                name, *rest = ev
                tid = self.current.tid if self.current else "-"
                args = " ".join(str(r) for r in rest)
                self.trace_lines.append(
                    f"step {self.steps} task {tid} {name} {args}".rstrip())

    def new_session(self) -> tuple[Endpoint, Endpoint]:
        a, b = Endpoint(), Endpoint()
        a.peer, b.peer = b, a
        self.endpoints_created += 2
        return a, b

    def release(self, e: Endpoint) -> None:
        if not e.released:
            e.released = True
            self.endpoints_released += 1

    def stats(self) -> dict[str, int]:
        return {
            "steps": self.steps,
            "endpoints_created": self.endpoints_created,
            "endpoints_live": self.endpoints_created - self.endpoints_released,
            "cells_created": self.cells_created,
            "cells_live": self.cells_created - self.cells_freed,
            "refs_live": self.refs_created - self.refs_dropped,
        }

    # -- task management -------------------------------------------------------

    def spawn(self, node: t.Process, env: dict[str, Any]) -> Task:
        task = Task(node, env)
        self.runnable.append(task)
        self.event("spawn", task.tid)
        return task

    def wake(self, task: Task) -> None:
        if task.status in ("done", "aborted"):
            return
        self.blocked.discard(task)
        task.parked_at = None
        task.waiting_cell = None
        task.status = "runnable"
        task.blocked_on = ""
        if task is not self.current:
            self.runnable.append(task)
            self.event("wake", task.tid)

    def block(self, task: Task, why: str) -> None:
        task.status = "blocked"
        task.blocked_on = why
        self.blocked.add(task)
        self.event("block", task.tid, why)

    def finish(self, task: Task) -> None:
        if task.status in ("done", "aborted"):
            return
        task.status = "done"
        self.blocked.discard(task)
        self.event("done", task.tid)
        leftovers, task.env = list(task.env.values()), {}
        for v in leftovers:
            self.dispose(v)

    def abort(self, task: Task) -> None:
        if task.status in ("done", "aborted"):
            return
        task.status = "aborted"
        self.blocked.discard(task)
        if task in self.runnable:
            self.runnable.remove(task)
        if task.parked_at is not None:
            e = task.parked_at
            if e.parked is not None and e.parked.task is task:
                parked, e.parked = e.parked, None
                if parked.payload is not None:
                    self.dispose(parked.payload)
            e.waiting = [w for w in e.waiting if w.task is not task]
            task.parked_at = None
            self.dispose(e)  # nobody will complete this session
        if task.waiting_cell is not None:
            cell = task.waiting_cell
            cell.waiters = [(w, b) for w, b in cell.waiters if w is not task]
            task.waiting_cell = None
        self.event("aborted", task.tid)
        leftovers, task.env = list(task.env.values()), {}
        for v in leftovers:
            self.dispose(v)

    # -- disposal (affine cancellation, refcounting) -----------------------------

    def dispose(self, v: Any) -> None:
        stack = [v]
        while stack:
            v = stack.pop()
            if isinstance(v, Endpoint):
                self._dispose_endpoint(v)
            elif isinstance(v, CellRef):
                stack.extend(self._cell_drop(v.cell))
            elif isinstance(v, ClosureV):
                stack.extend(v.env.values())
            # ints, strings, replicas need no cleanup

    def _dispose_endpoint(self, e: Endpoint) -> None:
        if e.exponential:
            return
        self.release(e)
        e.cancelled = True
        for side in (e, e.peer):
            if side.parked is not None:
                parked, side.parked = side.parked, None
                if parked.payload is not None:
                    self.dispose(parked.payload)
                if parked.task is not None:
                    self.abort(parked.task)
                elif side is e.peer:
                    self.release(side)
            for w in side.waiting:
                if w.task is not None:
                    self.abort(w.task)
            side.waiting = []
            if side is side.peer:
                break
        self.event("cancel", e.eid)

    def _cell_drop(self, cell: Cell) -> list[Any]:
        self.refs_dropped += 1
        cell.refcount -= 1
        self.event("dropref", cell.cid, cell.refcount)
        if cell.refcount > 0:
            return []
        self.cells_freed += 1
        self.event("free", cell.cid)
        for wtask, _ in cell.waiters:
            self.abort(wtask)
        cell.waiters.clear()
        if cell.full:
            cell.full = False
            contents, cell.contents = cell.contents, None
            return [contents]
        return []

    # -- program entry ------------------------------------------------------------

    def start(self, entry: ProcSig, exp_args: list[Any]) -> None:
        env = {p.name: v for p, v in zip(entry.exp_params, exp_args)}
        self.spawn(entry.body, env)

    def run(self) -> RunResult:
        status, error = "ok", None
        try:
            self._loop()
        except RuntimeFault as e:
            error = e.diagnostic
            status = {"runtime-deadlock": "deadlock",
                      "step-budget": "budget"}.get(e.diagnostic.rule, "fault")
        return RunResult(status, "".join(self.transcript), self.stats(),
                         error, self.events, "\n".join(self.trace_lines))

    def _loop(self) -> None:
        while True:
            while self.sleeping and self.sleeping[0][0] <= self.tick:
                _, _, sleeper = heapq.heappop(self.sleeping)
                if sleeper.status == "sleeping":
                    sleeper.status = "runnable"
                    self.runnable.append(sleeper)
                    self.event("wake", sleeper.tid)
            if not self.runnable:
                if self.sleeping:
                    self.tick = self.sleeping[0][0]
                    continue
                if self.blocked:
                    self._report_deadlock()
                return
            idx = self.rng.randrange(len(self.runnable))
            task = self.runnable.pop(idx)
            self.tick += 1
            task.slice_left = 1 if self.preemptive else SLICE
            self._run_task(task)

    def _report_deadlock(self) -> None:
        lines = [f"task {task.tid} blocked on {task.blocked_on}"
                 for task in sorted(self.blocked, key=lambda x: x.tid)]
        raise _fault("runtime-deadlock",
                     "no task can make progress: " + "; ".join(lines))

    def _run_task(self, task: Task) -> None:
        while task.status == "runnable":
            if task.slice_left <= 0:
                self.runnable.append(task)
                return
            task.slice_left -= 1
            self.steps += 1
            if self.steps > self.budget:
                raise _fault("step-budget",
                             f"step budget of {self.budget} exhausted")
            self.current = task
            signal = self.step(task)
            self.current = None
            if signal == "yield" and task.status == "runnable":
                self.runnable.append(task)
                return

    # -- expression evaluation -----------------------------------------------------

    def ensure_ready(self, task: Task, expr: t.Expr) -> bool:
        """Force endpoint/replica bindings referenced by `expr` into plain
        values.  False means: re-step this node later (the task may have
        blocked)."""
        for name in sorted(t.expr_names(expr)):
            v = task.env.get(name)
            if isinstance(v, ReplicaV):
                task.env[name] = self.call_replica(v)
                return False
            if isinstance(v, Endpoint):
                self.attempt(task, v, Parked("get", task=task, bind=name))
                return False
            if isinstance(v, ClosureV):
                task.env[name] = self.wire_closure(v)
                return False
        return True

    def eval(self, task: Task, expr: t.Expr) -> Any:
        if isinstance(expr, t.IntLit):
            return expr.value
        if isinstance(expr, t.StrLit):
            return expr.value
        if isinstance(expr, t.NameExpr):
            v = task.env[expr.name]
            assert isinstance(v, (int, str)), f"unrealized value {v!r}"
            return v
        if isinstance(expr, t.BinOp):
            left = self.eval(task, expr.left)
            right = self.eval(task, expr.right)
            op = expr.op
            if op == "+" and (isinstance(left, str) or isinstance(right, str)):
                return self._render(left) + self._render(right)
            if op == "==":
                return left == right
            if op == "+":
                out = left + right
            elif op == "-":
                out = left - right
            elif op == "*":
                out = left * right
            elif op == "mod":
                if right == 0:
                    raise _fault("mod-zero", "mod by zero")
                out = left % right
            else:
                raise AssertionError(op)
            if not (INT_MIN <= out <= INT_MAX):
                raise _fault("overflow", "64-bit integer overflow")
            return out
        raise AssertionError(f"eval: {expr!r}")

    @staticmethod
    def _render(v: Any) -> str:
        if isinstance(v, bool):
            return "true" if v else "false"
        return str(v)

    # -- rendezvous ---------------------------------------------------------------

    def attempt(self, task: Optional[Task], e: Endpoint, op: Parked) -> None:
        """Try to complete `op` on endpoint `e`, else park it there."""
        if e.cancelled or e.peer.cancelled:
            if op.payload is not None:
                self.dispose(op.payload)
            self.release(e)
            if task is not None:
                self.abort(task)
            return
        if op.is_out:
            if e.peer.waiting:
                inp = e.peer.waiting.pop(0)
                self.complete(e, op, e.peer, inp)
                return
            e.parked = op
        else:
            other = e.peer.parked
            if other is not None:
                if not other.persistent:
                    e.peer.parked = None
                    if other.task is not None:
                        other.task.parked_at = None
                self.complete(e.peer, other, e, op)
                return
            e.waiting.append(op)
        if task is not None:
            task.parked_at = e
            self.block(task, f"ep{e.eid}:{op.kind}")
        else:
            self.release(e)  # detached delivery: the producer is finished

    def complete(self, eo: Endpoint, out: Parked, ei: Endpoint,
                 inp: Parked) -> None:
        """Fire a matched rendezvous (both ops already unparked)."""
        assert out.is_out and not inp.is_out, (out.kind, inp.kind)
        if out.task is not None:
            out.task.parked_at = None
        if inp.task is not None:
            inp.task.parked_at = None

        if out.kind == "close":
            assert inp.kind == "wait", f"close met {inp.kind}"
            self.release(eo)
            self.release(ei)
            self.event("closewait", eo.eid)
            if inp.task is not None:
                self.wake(inp.task)
            if out.task is not None:
                self.finish(out.task)
            return

        if out.kind == "label":
            assert inp.kind == "case", f"label met {inp.kind}"
            receiver = inp.task
            assert receiver is not None
            assert isinstance(receiver.node, t.Case)
            receiver.node = dict(receiver.node.branches)[out.payload]
            self.event("select", eo.eid, out.payload)
            self.wake(receiver)
            if out.task is not None:
                self.wake(out.task)
            return

        if out.kind == "replica":
            receiver = inp.task
            assert receiver is not None and inp.bind is not None
            receiver.env[inp.bind] = out.payload
            self.event("replica-take", eo.eid)
            self.wake(receiver)
            return

        assert out.kind == "msg", f"unexpected match {out.kind}/{inp.kind}"
        receiver = inp.task
        assert receiver is not None and inp.bind is not None
        value = out.payload
        if inp.kind == "recv" and isinstance(value, ClosureV):
            receiver.env[inp.bind] = self.wire_closure(value)
        else:
            receiver.env[inp.bind] = value
        if out.final:
            self.release(eo)
            self.release(ei)
        self.event("rendezvous", eo.eid)
        self.wake(receiver)
        if out.task is not None:
            if out.final and isinstance(out.task.node, t.Forward):
                self.finish(out.task)
            else:
                self.wake(out.task)

    def wire_closure(self, closure: ClosureV) -> Endpoint:
        inner, outer = self.new_session()
        env = dict(closure.env)
        env[closure.bound] = inner
        self.spawn(closure.body, env)
        return outer

    def call_replica(self, replica: ReplicaV) -> Endpoint:
        inner, outer = self.new_session()
        env = dict(replica.env)
        env[replica.bound] = inner
        self.spawn(replica.body, env)
        self.event("replicate", inner.eid)
        return outer

    # -- environment handling ------------------------------------------------------

    def split_env(self, task: Task, moved: frozenset[str],
                  all_names: frozenset[str]) -> dict[str, Any]:
        env: dict[str, Any] = {}
        for name in all_names:
            if name not in task.env:
                continue
            if name in moved:
                env[name] = task.env.pop(name)
            else:
                env[name] = task.env[name]
        return env

    def pop_binding(self, task: Task, name: str) -> Any:
        v = task.env.pop(name, None)
        assert v is not None, f"binding {name} missing"
        return v

    def take_arg(self, task: Task, name: str) -> Any:
        """A linear argument: values copy, resources move, exponentials copy."""
        v = task.env.get(name)
        assert v is not None, f"binding {name} missing"
        if isinstance(v, (int, str)) or isinstance(v, ReplicaV):
            return v
        if isinstance(v, Endpoint) and v.exponential:
            return v
        return self.pop_binding(task, name)

    def make_arg(self, task: Task, arg: t.SendArg, mode: str):
        """Build a transmitted value; None when a referenced name is not
        realized yet (the task blocked or should re-step)."""
        if mode == "closure":
            assert isinstance(arg, t.Closure)
            env = self.split_env(task, arg.capture or frozenset(),
                                 arg.fv or frozenset())
            return ClosureV(arg.bound, arg.body, env)
        if mode == "name":
            assert isinstance(arg, t.NameExpr)
            return self.take_arg(task, arg.name)
        if not self.ensure_ready(task, arg):
            return None
        return self.eval(task, arg)

    # -- the interpreter ------------------------------------------------------------

    def step(self, task: Task) -> str:
        node = task.node

        if isinstance(node, t.Inert):
            self.finish(task)
            return "done"

        if isinstance(node, t.Forward):
            va = self.pop_binding(task, node.left)
            vb = self.pop_binding(task, node.right)
            return self._forward(task, va, vb)

        if isinstance(node, t.Par):
            env = self.split_env(task, node.split_left or frozenset(),
                                 node.fv_left or frozenset())
            self.spawn(node.left, env)
            task.node = node.right
            return "yield"

        if isinstance(node, t.Cut):
            left_end, right_end = self.new_session()
            env = self.split_env(task, node.split_left or frozenset(),
                                 node.fv_left or frozenset())
            env[node.name] = left_end
            self.spawn(node.left, env)
            task.env[node.name] = right_end
            task.node = node.right
            return "yield"

        if isinstance(node, t.Share):
            v = task.env.get(node.name)
            if isinstance(v, Endpoint):
                self.attempt(task, v, Parked("get", task=task,
                                             bind=node.name))
                return self._signal(task)
            assert isinstance(v, CellRef), f"share of {v!r}"
            v.cell.refcount += 1
            self.refs_created += 1
            self.event("share", v.cell.cid, v.cell.refcount)
            env = self.split_env(task, node.split_left or frozenset(),
                                 node.fv_left or frozenset())
            env[node.name] = CellRef(v.cell)
            self.spawn(node.left, env)
            task.node = node.right
            return "yield"

        if isinstance(node, t.CallProc):
            sig = self.prog.procs[node.name]
            modes = node.exp_modes or ["value"] * len(node.exp_args)
            for e, mode in zip(node.exp_args, modes):
                if mode == "value" and not self.ensure_ready(task, e):
                    return self._signal(task)
            env: dict[str, Any] = {}
            for arg, param in zip(node.lin_args, sig.lin_params):
                env[param.name] = self.take_arg(task, arg)
            for e, param, mode in zip(node.exp_args, sig.exp_params, modes):
                if mode == "ref":
                    assert isinstance(e, t.NameExpr)
                    env[param.name] = task.env[e.name]
                else:
                    env[param.name] = self.eval(task, e)
            task.env = env
            task.node = sig.body
            self.event("call", node.name)
            return "yield"

        if isinstance(node, t.Send):
            chan = task.env.get(node.chan)
            assert isinstance(chan, Endpoint), f"send on {chan!r}"
            if chan.cancelled or chan.peer.cancelled:
                self.abort(task)
                return "aborted"
            value = self.make_arg(task, node.arg, node.arg_mode or "value")
            if value is None:
                return self._signal(task)
            if node.prim_send:
                self.pop_binding(task, node.chan)
                task.node = node.cont
                self.attempt(task, chan, Parked("msg", value, task,
                                                final=True))
            else:
                task.node = node.cont
                self.attempt(task, chan, Parked("msg", value, task))
            return self._signal(task)

        if isinstance(node, t.Recv):
            chan = task.env.get(node.chan)
            assert isinstance(chan, Endpoint), f"recv on {chan!r}"
            if chan.cancelled or chan.peer.cancelled:
                self.abort(task)
                return "aborted"
            task.node = node.cont
            self.attempt(task, chan, Parked("recv", task=task,
                                            bind=node.bound))
            return self._signal(task)

        if isinstance(node, t.Select):
            chan = task.env.get(node.chan)
            assert isinstance(chan, Endpoint), f"select on {chan!r}"
            if chan.cancelled or chan.peer.cancelled:
                self.abort(task)
                return "aborted"
            task.node = node.cont
            self.attempt(task, chan, Parked("label", node.label, task))
            return self._signal(task)

        if isinstance(node, t.Case):
            chan = task.env.get(node.chan)
            assert isinstance(chan, Endpoint), f"case on {chan!r}"
            if chan.cancelled or chan.peer.cancelled:
                self.abort(task)
                return "aborted"
            # the node stays; completion rewrites it to the selected branch
            self.attempt(task, chan, Parked("case", task=task))
            return self._signal(task)

        if isinstance(node, t.Close):
            chan = self.pop_binding(task, node.chan)
            assert isinstance(chan, Endpoint)
            self.attempt(task, chan, Parked("close", task=task, final=True))
            return self._signal(task)

        if isinstance(node, t.Wait):
            chan = task.env.get(node.chan)
            assert isinstance(chan, Endpoint)
            if chan.cancelled or chan.peer.cancelled:
                self.abort(task)
                return "aborted"
            task.env.pop(node.chan, None)
            task.node = node.cont
            self.attempt(task, chan, Parked("wait", task=task,
                                            bind=node.chan))
            return self._signal(task)

        if isinstance(node, t.BangServer):
            chan = self.pop_binding(task, node.chan)
            assert isinstance(chan, Endpoint)
            if chan.cancelled or chan.peer.cancelled:
                self.dispose(chan)
                self.abort(task)
                return "aborted"
            env = {n: task.env.pop(n) for n in (node.fv or frozenset())
                   if n in task.env}
            replica = ReplicaV(node.bound, node.body, env)
            chan.exponential = True
            chan.peer.exponential = True
            self.release(chan)
            self.release(chan.peer)
            for waiting in chan.peer.waiting:
                assert waiting.task is not None and waiting.bind is not None
                waiting.task.env[waiting.bind] = replica
                self.wake(waiting.task)
            chan.peer.waiting = []
            chan.parked = Parked("replica", replica, None, persistent=True)
            self.event("server", chan.eid)
            self.finish(task)
            return "done"

        if isinstance(node, t.CallRepl):
            v = task.env.get(node.chan)
            if isinstance(v, Endpoint):
                offer = v.peer.parked
                if offer is None or offer.kind != "replica":
                    self.attempt(task, v, Parked("get", task=task,
                                                 bind=node.chan))
                    return self._signal(task)
                v = offer.payload
                task.env[node.chan] = v
            assert isinstance(v, ReplicaV), f"call on {v!r}"
            task.env[node.bound] = self.call_replica(v)
            task.node = node.cont
            return "yield"

        if isinstance(node, t.AffineIntro):
            v = task.env.get(node.chan)
            if isinstance(v, Endpoint) and (v.cancelled or v.peer.cancelled):
                self.abort(task)
                return "aborted"
            task.node = node.cont
            return "continue"

        if isinstance(node, t.UseC):
            task.node = node.cont
            return "continue"

        if isinstance(node, t.Discard):
            v = self.pop_binding(task, node.chan)
            self.dispose(v)
            self.event("discard", node.chan)
            task.node = node.cont
            return "continue"

        if isinstance(node, t.CellNew):
            chan = task.env.get(node.chan)
            assert isinstance(chan, Endpoint)
            if chan.cancelled or chan.peer.cancelled:
                self.abort(task)
                return "aborted"
            value = self.make_arg(task, node.init, node.arg_mode or "value")
            if value is None:
                return self._signal(task)
            self.pop_binding(task, node.chan)
            cell = Cell(value)
            self.cells_created += 1
            self.refs_created += 1
            self.event("cell", cell.cid)
            self.attempt(None, chan, Parked("msg", CellRef(cell), None,
                                            final=True))
            self.finish(task)
            return "done"

        if isinstance(node, t.Take):
            v = task.env.get(node.chan)
            if isinstance(v, Endpoint):
                self.attempt(task, v, Parked("get", task=task,
                                             bind=node.chan))
                return self._signal(task)
            assert isinstance(v, CellRef), f"take on {v!r}"
            cell = v.cell
            if cell.poisoned:
                self.abort(task)
                return "aborted"
            if cell.full:
                self._grant(cell, task, node.bound)
                task.node = node.cont
                return "continue"
            cell.waiters.append((task, node.bound))
            task.waiting_cell = cell
            self.block(task, f"cell{cell.cid}:take")
            self.event("take-wait", cell.cid, task.tid)
            return "blocked"

        if isinstance(node, t.Put):
            v = task.env.get(node.chan)
            assert isinstance(v, CellRef), f"put on {v!r}"
            value = self.make_arg(task, node.arg, node.arg_mode or "value")
            if value is None:
                return self._signal(task)
            cell = v.cell
            cell.holder = None
            cell.contents = value
            cell.full = True
            self.event("put", cell.cid, task.tid)
            if cell.waiters:
                wtask, wbind = cell.waiters.pop(0)
                wtask.waiting_cell = None
                self._grant(cell, wtask, wbind)
                assert isinstance(wtask.node, t.Take)
                wtask.node = wtask.node.cont
                self.wake(wtask)
            task.node = node.cont
            return "continue"

        if isinstance(node, t.DropName):
            if node.drop_kind == "coaffine":
                v = self.pop_binding(task, node.chan)
                self.dispose(v)
                self.event("discard", node.chan)
                task.node = node.cont
                return "continue"
            v = task.env.get(node.chan)
            if isinstance(v, Endpoint):
                self.attempt(task, v, Parked("get", task=task,
                                             bind=node.chan))
                return self._signal(task)
            assert isinstance(v, CellRef), f"drop on {v!r}"
            task.env.pop(node.chan, None)
            for kept in self._cell_drop(v.cell):
                self.dispose(kept)
            task.node = node.cont
            return "continue"

        if isinstance(node, t.If):
            if not self.ensure_ready(task, node.cond):
                return self._signal(task)
            cond = self.eval(task, node.cond)
            assert isinstance(cond, bool), "non-boolean condition"
            task.node = node.then if cond else node.els
            return "continue"

        if isinstance(node, t.Print):
            if not self.ensure_ready(task, node.expr):
                return self._signal(task)
            text = self._render(self.eval(task, node.expr))
            if node.newline:
                text += "\n"
            self.transcript.append(text)
            self.event("print", repr(text))
            task.node = node.cont
            return "continue"

        if isinstance(node, t.Sleep):
            if not self.ensure_ready(task, node.expr):
                return self._signal(task)
            ticks = self.eval(task, node.expr)
            task.node = node.cont
            task.status = "sleeping"
            heapq.heappush(self.sleeping,
                           (self.tick + max(0, ticks), next(self._seq), task))
            self.event("sleep", ticks)
            return "blocked"

        raise AssertionError(f"step: unexpected node {node!r}")

    @staticmethod
    def _signal(task: Task) -> str:
        return "continue" if task.status == "runnable" else "blocked"

    # -- helpers -------------------------------------------------------------------

    def _grant(self, cell: Cell, task: Task, bind: str) -> None:
        contents = cell.contents
        cell.contents = None
        cell.full = False
        cell.holder = task
        if isinstance(contents, ClosureV):
            task.env[bind] = self.wire_closure(contents)
        else:
            task.env[bind] = contents
        self.event("take", cell.cid, task.tid)

    def _forward(self, task: Task, va: Any, vb: Any) -> str:
        if isinstance(va, Endpoint) and isinstance(vb, Endpoint):
            if va.cancelled or va.peer.cancelled or vb.cancelled \
                    or vb.peer.cancelled:
                self.dispose(va)
                self.dispose(vb)
                self.abort(task)
                return "aborted"
            pa, pb = va.peer, vb.peer
            pa.peer, pb.peer = pb, pa
            self.release(va)
            self.release(vb)
            self.event("fwd", va.eid, vb.eid)
            for out_side, in_side in ((pa, pb), (pb, pa)):
                if out_side.parked is not None and in_side.waiting:
                    out = out_side.parked
                    if not out.persistent:
                        out_side.parked = None
                    inp = in_side.waiting.pop(0)
                    self.complete(out_side, out, in_side, inp)
                    break
            self.finish(task)
            return "done"
        if isinstance(va, Endpoint) or isinstance(vb, Endpoint):
            chan, value = (va, vb) if isinstance(va, Endpoint) else (vb, va)
            if chan.cancelled or chan.peer.cancelled:
                self.dispose(value)
                self.dispose(chan)
                self.abort(task)
                return "aborted"
            self.attempt(task, chan, Parked("msg", value, task, final=True))
            if task.status == "blocked":
                return "blocked"
            self.finish(task)
            return "done"
        raise AssertionError(f"fwd between {va!r} and {vb!r}")


def run_program(prog: Program, entry: ProcSig, exp_args: list[Any],
                seed: int = 0, step_budget: int = 10_000_000,
                trace: bool = False, preemptive: bool = False,
                collect_events: bool = False) -> RunResult:
    rt = Runtime(prog, seed=seed, step_budget=step_budget, trace=trace,
                 preemptive=preemptive, collect_events=collect_events)
    rt.start(entry, exp_args)
    return rt.run()
