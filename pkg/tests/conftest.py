"""Shared fixtures and generators for the test suite.

Randomized property tests draw from a ``random.Random`` seeded via the
``CORESOLVE_SEED`` environment variable (default fixed), so every run is
reproducible.
"""

import os
import random
from pathlib import Path

import pytest

from coresolve.program import parse_program, parse_query
from coresolve.terms import FreshVars, Struct, Symbol, Var

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"

DEFAULT_SEED = 20260823


def seed() -> int:
    return int(os.environ.get("CORESOLVE_SEED", DEFAULT_SEED))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(seed())


def load(name: str):
    """Parse a corpus program; returns (program, fresh-id source)."""
    fresh = FreshVars()
    text = (PROGRAMS / f"{name}.lp").read_text(encoding="utf-8")
    return parse_program(text, fresh), fresh


def load_query(name: str, query: str):
    """Parse a corpus program and a query against one fresh-id source."""
    fresh = FreshVars()
    text = (PROGRAMS / f"{name}.lp").read_text(encoding="utf-8")
    prog = parse_program(text, fresh)
    return prog, parse_query(query, fresh), fresh


# --- random term generation ---------------------------------------------------

SIGNATURE = [
    Symbol("a", 0),
    Symbol("b", 0),
    Symbol("f", 1),
    Symbol("g", 2),
    Symbol("h", 3),
]


def random_term(rnd: random.Random, depth: int, vars_pool):
    """A random term over the shared signature, depth-bounded, drawing
    variables from the given pool."""
    if depth <= 0 or rnd.random() < 0.3:
        if vars_pool and rnd.random() < 0.5:
            return rnd.choice(vars_pool)
        return Struct(rnd.choice(SIGNATURE[:2]))
    sym = rnd.choice(SIGNATURE[2:])
    return Struct(
        sym, tuple(random_term(rnd, depth - 1, vars_pool) for _ in range(sym.arity))
    )


def var_pool(n: int, start: int = 1):
    return [Var(start + i, f"V{i}") for i in range(n)]
