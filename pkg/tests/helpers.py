"""Shared fixtures: corpus loading and program running."""

from __future__ import annotations

from pathlib import Path

from clls.checker import check_entry, check_program
from clls.parser import parse_program
from clls.program import Program
from clls.runtime import RunResult, run_program

CORPUS = Path(__file__).resolve().parent.parent / "src" / "clls" / "corpus"

CORPUS_FILES = [
    "hello.clls", "menu.clls", "rserver.clls", "list.clls", "sieve.clls",
    "cells.clls", "barrier.clls", "llist.clls", "wallet.clls", "queue.clls",
]

# Every runnable scenario: (file, entry, exponential args)
SCENARIOS = [
    ("hello.clls", "main", []),
    ("menu.clls", "main0", []),
    ("menu.clls", "main1", []),
    ("rserver.clls", "main", []),
    ("list.clls", "main", []),
    ("sieve.clls", "main_sa", [20]),
    ("cells.clls", "main0m", []),
    ("cells.clls", "main1m", []),
    ("cells.clls", "pass", []),
    ("barrier.clls", "mainb", [4]),
    ("llist.clls", "main", []),
    ("wallet.clls", "main", []),
    ("queue.clls", "main_fifo", [16]),
    ("queue.clls", "mainq", [8]),
]

_cache: dict[str, Program] = {}


def corpus_source(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


def load_corpus(name: str) -> Program:
    if name not in _cache:
        prog, diags = check_program(parse_program(corpus_source(name), name))
        assert not diags, [str(d) for d in diags]
        _cache[name] = prog
    return _cache[name]


def load_source(source: str, filename: str = "<test>") -> Program:
    prog, diags = check_program(parse_program(source, filename))
    assert not diags, [str(d) for d in diags]
    return prog


def check_source(source: str, filename: str = "<test>"):
    """Returns the diagnostics list (may be empty)."""
    return check_program(parse_program(source, filename))[1]


def run(prog: Program, entry: str, args: list | None = None, seed: int = 0,
        **kw) -> RunResult:
    args = args or []
    sig = check_entry(prog, entry, args)
    return run_program(prog, sig, args, seed=seed, **kw)


def run_corpus(name: str, entry: str, args: list | None = None,
               seed: int = 0, **kw) -> RunResult:
    return run(load_corpus(name), entry, args, seed, **kw)


NO_LEAKS = {"channels": 0, "cells": 0, "refcount": 0}


def assert_clean(result: RunResult) -> None:
    assert result.ok, (result.status, result.error)
    assert result.leaks() == NO_LEAKS, result.leaks()
