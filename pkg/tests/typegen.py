"""Seeded random generator of well-formed session types.

Used by the acceptance suite for the duality properties; the hypothesis
strategies in test_properties build on the same constructors.
"""

from __future__ import annotations

import random

from clls import sessiontypes as st


def random_type(rng: random.Random, depth: int = 4,
                bound: tuple[str, ...] = ()) -> st.SessionType:
    leaves = ["close", "wait", "lint", "dlint", "lstring", "dlstring"]
    if bound:
        leaves += ["var", "var"]
    if depth <= 0:
        kind = rng.choice(leaves)
    else:
        kind = rng.choice(leaves + [
            "send", "recv", "offer", "choice", "bang", "quest", "affine",
            "coaffine", "state", "usage", "rec", "corec",
        ])
    if kind == "close":
        return st.CloseT()
    if kind == "wait":
        return st.WaitT()
    if kind == "lint":
        return st.PrimT("lint")
    if kind == "dlint":
        return st.DualPrimT("lint")
    if kind == "lstring":
        return st.PrimT("lstring")
    if kind == "dlstring":
        return st.DualPrimT("lstring")
    if kind == "var":
        return st.VarT(rng.choice(bound), rng.random() < 0.3)
    sub = lambda: random_type(rng, depth - 1, bound)
    if kind == "send":
        return st.SendT(sub(), sub())
    if kind == "recv":
        return st.RecvT(sub(), sub())
    if kind in ("offer", "choice"):
        labels = rng.sample(["#A", "#B", "#C", "#D"], rng.randint(1, 3))
        branches = tuple((lab, sub()) for lab in labels)
        return st.OfferT(branches) if kind == "offer" else st.ChoiceT(branches)
    if kind == "bang":
        return st.BangT(sub())
    if kind == "quest":
        return st.QuestT(sub())
    if kind == "affine":
        return st.AffineT(sub())
    if kind == "coaffine":
        return st.CoaffineT(sub())
    if kind == "state":
        return st.StateT(sub())
    if kind == "usage":
        return st.UsageT(sub())
    var = f"X{len(bound)}"
    body = _guarded(rng, depth - 1, bound + (var,))
    return (st.RecT if kind == "rec" else st.CorecT)(var, body)


def _guarded(rng: random.Random, depth: int,
             bound: tuple[str, ...]) -> st.SessionType:
    """A binder body whose head is a proper constructor (contractive)."""
    sub = lambda: random_type(rng, max(depth - 1, 0), bound)
    kind = rng.choice(["send", "recv", "offer", "choice", "affine", "bang"])
    if kind == "send":
        return st.SendT(sub(), sub())
    if kind == "recv":
        return st.RecvT(sub(), sub())
    if kind in ("offer", "choice"):
        labels = rng.sample(["#A", "#B", "#C"], rng.randint(1, 2))
        branches = tuple((lab, sub()) for lab in labels)
        return st.OfferT(branches) if kind == "offer" else st.ChoiceT(branches)
    if kind == "affine":
        return st.AffineT(sub())
    return st.BangT(sub())


def random_recursive_type(rng: random.Random, depth: int = 4) -> st.SessionType:
    var = "X0"
    body = _guarded(rng, depth, (var,))
    return (st.RecT if rng.random() < 0.5 else st.CorecT)(var, body)
