"""Expected-transcript files for corpus programs.

A `.expected` file holds one or more scenarios:

    [main1m]
    entry: main1m          # defaults to the scenario name
    args: 4 "label"        # exponential arguments
    seeds: 100             # sweep seeds 0..99 (default 1)
    alt:                   # one of several acceptable transcripts ...
    | 2
    | 3
    alt:
    | 2
    | 1
    cover-all: yes         # ... and each must be observed in the sweep
    count: 4 ^thread \\d+ started\\.$
    before: ^on wait$ ^wake up\\.$   # all matches of A precede every B

`exact:` introduces a single acceptable transcript.  Transcript blocks are
`| `-prefixed lines joined with newlines (plus a final newline); an empty
block means empty output.  Leak-freedom and clean termination are always
required.
"""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field

from clls.runtime import RunResult


@dataclass
class Scenario:
    name: str
    entry: str
    args: list[object] = field(default_factory=list)
    seeds: int = 1
    budget: int = 10_000_000
    exacts: list[str] = field(default_factory=list)
    cover_all: bool = False
    counts: list[tuple[int, str]] = field(default_factory=list)
    befores: list[tuple[str, str]] = field(default_factory=list)


def parse_expected(text: str) -> list[Scenario]:
    scenarios: list[Scenario] = []
    current: Scenario | None = None
    block: list[str] | None = None

    def close_block() -> None:
        nonlocal block
        if block is not None and current is not None:
            current.exacts.append("".join(line + "\n" for line in block))
        block = None

    for raw in text.splitlines():
        if block is not None and raw.startswith("|"):
            block.append(raw[2:] if raw.startswith("| ") else raw[1:])
            continue
        close_block()
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = re.match(r"\[(.+)\]$", line)
        if m:
            current = Scenario(m.group(1), entry=m.group(1))
            scenarios.append(current)
            continue
        if current is None:
            raise ValueError("directive before any [scenario] header")
        key, _, rest = line.partition(":")
        key = key.strip()
        rest = rest.strip()
        if key == "entry":
            current.entry = rest
        elif key == "args":
            current.args = [int(tok) if re.fullmatch(r"-?\d+", tok) else tok
                            for tok in shlex.split(rest)]
        elif key == "seeds":
            current.seeds = int(rest)
        elif key == "budget":
            current.budget = int(rest)
        elif key in ("exact", "alt"):
            block = []
        elif key == "cover-all":
            current.cover_all = rest.lower() in ("yes", "true", "1")
        elif key == "count":
            n, _, pattern = rest.partition(" ")
            current.counts.append((int(n), pattern.strip()))
        elif key == "before":
            first, second = rest.split(" ", 1)
            current.befores.append((first.strip(), second.strip()))
        else:
            raise ValueError(f"unknown directive {key!r}")
    close_block()
    return scenarios


def judge_one(scn: Scenario, result: RunResult, seed: int) -> str | None:
    """Check one run against the scenario; None means it passed."""
    if not result.ok:
        return f"seed {seed}: terminated with {result.status} ({result.error})"
    leaks = result.leaks()
    if any(leaks.values()):
        return f"seed {seed}: leak audit failed {leaks}"
    transcript = result.transcript
    if scn.exacts and transcript not in scn.exacts:
        return (f"seed {seed}: transcript {transcript!r} not among the "
                f"{len(scn.exacts)} accepted alternative(s)")
    lines = transcript.splitlines()
    for n, pattern in scn.counts:
        got = sum(1 for line in lines if re.search(pattern, line))
        if got != n:
            return (f"seed {seed}: expected {n} line(s) matching "
                    f"{pattern!r}, found {got}")
    for first, second in scn.befores:
        first_idx = [i for i, line in enumerate(lines) if re.search(first, line)]
        second_idx = [i for i, line in enumerate(lines) if re.search(second, line)]
        if first_idx and second_idx and max(first_idx) > min(second_idx):
            return (f"seed {seed}: a line matching {second!r} precedes one "
                    f"matching {first!r}")
    return None


def judge_sweep(scn: Scenario, results: list[tuple[int, RunResult]]) -> str | None:
    observed: set[str] = set()
    for seed, result in results:
        failure = judge_one(scn, result, seed)
        if failure is not None:
            return failure
        observed.add(result.transcript)
    if scn.cover_all and scn.exacts:
        missing = [alt for alt in scn.exacts if alt not in observed]
        if missing:
            return (f"{len(missing)} accepted alternative(s) never observed "
                    f"across {len(results)} seeds")
    return None
