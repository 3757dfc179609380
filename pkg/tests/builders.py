"""Shared generators for the test suite: canonical instances and random LPs."""

import itertools
import random
from fractions import Fraction

from cspgap import Constraint, Instance, LpProblem, cut_family, dicut_family


def cycle_instance(n, fam=None, name="cut"):
    fam = fam or cut_family()
    constraints = tuple(Constraint(name, (i, i % n + 1)) for i in range(1, n + 1))
    return Instance(fam, n, constraints)


def triangle():
    return cycle_instance(3)


def single_edge():
    return Instance(cut_family(), 2, (Constraint("cut", (1, 2)),))


def constraint_universe(fam, n):
    return [
        (p.name, combo)
        for p in fam.predicates
        for combo in itertools.permutations(range(1, n + 1), fam.k)
    ]


def random_instance(rng, fam, n, m, max_weight=1):
    universe = constraint_universe(fam, n)
    constraints = tuple(
        Constraint(name, combo, rng.randint(1, max_weight))
        for name, combo in (rng.choice(universe) for _ in range(m))
    )
    return Instance(fam, n, constraints)


def random_lp(rng, max_vars=12, max_rows=5):
    """Small random standard-form LP with a mix of outcomes.

    Roughly half the problems get a simplex-style bounding row so that
    optimal instances are well represented next to infeasible and unbounded
    ones.
    """
    n = rng.randint(1, max_vars)
    m = rng.randint(0, min(n, max_rows))
    rows = [
        [Fraction(rng.randint(-3, 3)) for _ in range(n)] for _ in range(m)
    ]
    rhs = [Fraction(rng.randint(-4, 4), rng.randint(1, 2)) for _ in range(m)]
    if rng.random() < 0.5:
        rows.append([Fraction(1)] * n)
        rhs.append(Fraction(rng.randint(1, 3)))
    objective = tuple(Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n))
    labels = tuple(f"v{j}" for j in range(n))
    return LpProblem(objective, tuple(tuple(r) for r in rows), tuple(rhs), labels)


def dicut_complete(t):
    """Complete bidirected instance: every ordered pair gets a dicut constraint."""
    fam = dicut_family()
    constraints = tuple(
        Constraint("dicut", pair)
        for pair in itertools.permutations(range(1, t + 1), 2)
    )
    return Instance(fam, t, constraints)


def seeded(seed):
    return random.Random(seed)
