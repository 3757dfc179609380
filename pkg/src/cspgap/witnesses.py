"""Matched-marginal witness distributions over (predicate, tuple) pairs.

A gap between the relaxation and the true optimum converts mechanically into
a pair of distributions on F x [q]^k: the "yes" side samples a constraint by
weight and then a tuple from its local distribution; the "no" side samples
the same constraint but draws each coordinate independently from the shared
variable marginals.  Both sides have identical marginal vectors, the yes
side's expected satisfaction equals the relaxation objective, and the no
side's satisfaction after any symbol-by-symbol rerandomization kernel is an
average CSP value, hence at most the instance optimum.

This module implements those objects exactly: marginal vectors, yes/no
values under kernels, a deterministic kernel-search falsifier, the
one-wise-independence support decision (an exact LP feasibility question),
and its lift to families.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import lp
from .basic_lp import LocalDistributionSolution, verify_local_solution
from .core import Predicate, PredicateFamily, Instance, rho_product_lower, rho_upper_empirical
from .errors import BudgetError, InternalError, ValidationError
from .rationals import RAT, to_fraction

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class PairDistribution:
    """Exact distribution over (predicate name, tuple in [q]^k) atoms."""

    family: PredicateFamily
    mass: dict

    def __post_init__(self):
        order = {name: i for i, name in enumerate(self.family.names)}
        k, q = self.family.k, self.family.q
        cleaned = {}
        total = Fraction(0)
        for (name, values), weight in sorted(
            self.mass.items(), key=lambda item: (order.get(item[0][0], -1), item[0][1])
        ):
            if name not in order:
                raise ValidationError(f"unknown predicate {name!r} in distribution")
            values = tuple(int(v) for v in values)
            if len(values) != k or any(v < 0 or v >= q for v in values):
                raise ValidationError(f"bad tuple {values} for predicate {name!r}")
            weight = to_fraction(weight)
            if weight < 0:
                raise ValidationError("distribution has a negative mass")
            total += weight
            if weight:
                cleaned[(name, values)] = weight
        if total != 1:
            raise ValidationError(f"distribution mass sums to {total}, not 1")
        object.__setattr__(self, "mass", cleaned)

    def atoms(self):
        return self.mass.items()


@dataclass(frozen=True)
class MarginalVector:
    """Dense (predicate, position, symbol) array of joint coordinate marginals.

    The (f, l, s) entry is the probability that the sampled atom uses
    predicate f *and* has symbol s at position l; for each (f, l) the
    entries over s sum to the predicate's total mass.
    """

    names: tuple
    k: int
    q: int
    entries: tuple  # entries[f][l][s], aligned with `names`

    def entry(self, name: str, position: int, symbol: int) -> Fraction:
        return self.entries[self.names.index(name)][position][symbol]


def marginal_vector(dist: PairDistribution) -> MarginalVector:
    fam = dist.family
    k, q = fam.k, fam.q
    grid = {name: [[Fraction(0)] * q for _ in range(k)] for name in fam.names}
    for (name, values), weight in dist.atoms():
        rows = grid[name]
        for position, symbol in enumerate(values):
            rows[position][symbol] += weight
    entries = tuple(
        tuple(tuple(row) for row in grid[name]) for name in fam.names
    )
    return MarginalVector(fam.names, k, q, entries)


def yes_value(dist: PairDistribution) -> Fraction:
    """Expected satisfaction of the sampled atom."""
    total = Fraction(0)
    for (name, values), weight in dist.atoms():
        if dist.family[name].value(values):
            total += weight
    return total


@dataclass(frozen=True)
class SymbolKernel:
    """One rerandomization distribution over [q] per input symbol."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.rows)
        q = len(rows)
        for row in rows:
            if len(row) != q:
                raise ValidationError("kernel must be square over [q]")
            if any(v < 0 for v in row) or sum(row) != 1:
                raise ValidationError("kernel rows must be distributions")
        object.__setattr__(self, "rows", rows)

    @property
    def q(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, q: int) -> "SymbolKernel":
        return cls(tuple(
            tuple(Fraction(1) if i == j else Fraction(0) for j in range(q))
            for i in range(q)
        ))

    @classmethod
    def uniform(cls, q: int) -> "SymbolKernel":
        row = tuple(Fraction(1, q) for _ in range(q))
        return cls((row,) * q)

    @classmethod
    def deterministic(cls, mapping) -> "SymbolKernel":
        q = len(mapping)
        return cls(tuple(
            tuple(Fraction(1) if j == mapping[i] else Fraction(0) for j in range(q))
            for i in range(q)
        ))


class _KernelScorer:
    """Precompiled evaluator for the no-side value of one distribution."""

    def __init__(self, dist: PairDistribution):
        fam = dist.family
        self.q = fam.q
        groups = {}
        for (name, values), weight in dist.atoms():
            groups.setdefault(name, []).append((values, RAT(weight)))
        self.groups = [
            (fam[name].satisfying_tuples(), atoms) for name, atoms in groups.items()
        ]

    def score(self, rows):
        total = RAT(0)
        for satisfying, atoms in self.groups:
            if not satisfying:
                continue
            for values, weight in atoms:
                hit = RAT(0)
                for target in satisfying:
                    term = weight
                    for source, out in zip(values, target):
                        term = term * rows[source][out]
                        if not term:
                            break
                    hit += term
                total += hit
        return total


def no_value(dist: PairDistribution, kernel: SymbolKernel) -> Fraction:
    """Expected satisfaction after rerandomizing each coordinate through the kernel.

    The sampled tuple a is replaced by b with b_l drawn independently from
    the kernel row of a_l, and the predicate is evaluated on b.
    """
    if kernel.q != dist.family.q:
        raise ValidationError("kernel alphabet does not match the family")
    rows = tuple(tuple(RAT(v) for v in row) for row in kernel.rows)
    return to_fraction(_KernelScorer(dist).score(rows))


def _lattice_rows(q: int, denominator: int):
    """All kernel rows with the given denominator, lexicographic order."""

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first, *rest)

    return [
        tuple(Fraction(c, denominator) for c in counts)
        for counts in compositions(denominator, q)
    ]


def no_sup_search(
    dist: PairDistribution,
    budget: int = 160,
    seed: int = 0,
    snap_denominator: int = 64,
):
    """Best rerandomization kernel found within a fixed evaluation budget.

    Scans all q^q deterministic kernels, a coordinate lattice, and seeded
    multistart local ascent (step sizes snapped to `snap_denominator` so
    every reported kernel is an exact rational point).  The result is a
    certified lower bound on the supremum over all kernels; ties break
    toward the lexicographically smallest kernel.  Deterministic for a
    fixed (budget, seed) pair.
    """
    if budget < 1:
        raise ValidationError("kernel search needs a positive budget")
    q = dist.family.q
    scorer = _KernelScorer(dist)
    state = {"evals": 0, "best": None, "best_rows": None}

    def score(rows):
        state["evals"] += 1
        value = scorer.score(tuple(tuple(RAT(v) for v in row) for row in rows))
        if (
            state["best"] is None
            or value > state["best"]
            or (value == state["best"] and rows < state["best_rows"])
        ):
            state["best"] = value
            state["best_rows"] = rows
        return value

    for mapping in itertools.product(range(q), repeat=q):
        if state["evals"] >= budget:
            break
        score(SymbolKernel.deterministic(mapping).rows)

    lattice = _lattice_rows(q, 4 if q == 2 else 2)
    for combo in itertools.product(lattice, repeat=q):
        if state["evals"] >= budget:
            break
        score(tuple(combo))

    rng = random.Random(seed)
    snap = snap_denominator
    moves = [
        (sigma, up, down, Fraction(1, den))
        for sigma in range(q)
        for up in range(q)
        for down in range(q)
        if up != down
        for den in (4, 16, snap)
    ]
    while state["evals"] < budget:
        counts = []
        for _ in range(q):
            row = [0] * q
            remaining = snap
            for j in range(q - 1):
                row[j] = rng.randint(0, remaining)
                remaining -= row[j]
            row[q - 1] = remaining
            counts.append(row)
        current = tuple(tuple(Fraction(c, snap) for c in row) for row in counts)
        current_value = score(current)
        improved = True
        while improved and state["evals"] < budget:
            improved = False
            for sigma, up, down, delta in moves:
                row = list(current[sigma])
                if row[down] < delta:
                    continue
                row[down] -= delta
                row[up] += delta
                candidate = tuple(
                    tuple(row) if s == sigma else current[s] for s in range(q)
                )
                value = score(candidate)
                if value > current_value:
                    current, current_value = candidate, value
                    improved = True
                    break
                if state["evals"] >= budget:
                    break
    return to_fraction(state["best"]), SymbolKernel(state["best_rows"])


def construct_yes_no(inst: Instance, sol: LocalDistributionSolution):
    """Derive the matched-marginal yes/no distribution pair from a solution.

    The yes side pushes each constraint's local distribution forward onto its
    predicate; the no side replaces the local distribution by the product of
    the constraint's variable marginals.  Both are reweighted by constraint
    weight.  Before returning, the pair is checked exactly: equal marginal
    vectors, and yes-side satisfaction equal to the solution objective.
    """
    verify_local_solution(inst, sol)
    fam = inst.family
    q, k = fam.q, fam.k
    size = q**k
    weight_total = inst.total_weight
    yes_mass = {}
    no_mass = {}
    for ci, constraint in enumerate(inst.constraints):
        share = Fraction(constraint.weight, weight_total)
        pred = fam[constraint.predicate]
        masses = sol.locals_[ci]
        for rank in range(size):
            if masses[rank]:
                key = (constraint.predicate, pred.tuple_of(rank))
                yes_mass[key] = yes_mass.get(key, Fraction(0)) + share * masses[rank]
        marginals = [sol.marginals[v - 1] for v in constraint.variables]
        for values in itertools.product(range(q), repeat=k):
            prob = share
            for pos in range(k):
                prob *= marginals[pos][values[pos]]
                if not prob:
                    break
            if prob:
                key = (constraint.predicate, values)
                no_mass[key] = no_mass.get(key, Fraction(0)) + prob
    yes_dist = PairDistribution(fam, yes_mass)
    no_dist = PairDistribution(fam, no_mass)
    if marginal_vector(yes_dist) != marginal_vector(no_dist):
        raise InternalError("yes/no construction produced mismatched marginals")
    if yes_value(yes_dist) != sol.value:
        raise InternalError("yes-side satisfaction differs from the solution objective")
    return yes_dist, no_dist


@dataclass(frozen=True)
class OnewiseSupport:
    """Outcome of the one-wise independence support decision for a predicate."""

    predicate: str
    witness: Optional[dict]
    refutation: Optional[tuple]

    @property
    def supports(self) -> bool:
        return self.witness is not None

    def __bool__(self) -> bool:
        return self.supports


def onewise_support(pred: Predicate) -> OnewiseSupport:
    """Decide whether some satisfying distribution has all-uniform marginals.

    Posed as an exact feasibility problem over masses on the satisfying
    tuples with every positional marginal pinned to 1/q; the answer is a
    verified witness distribution or the Farkas vector refuting one.
    """
    q, k = pred.q, pred.k
    satisfying = pred.satisfying_tuples()
    labels = tuple("m[" + "".join(_DIGITS[v] for v in a) + "]" for a in satisfying)
    rows = []
    rhs = []
    for position in range(k):
        for symbol in range(q):
            rows.append(tuple(
                Fraction(1) if a[position] == symbol else Fraction(0)
                for a in satisfying
            ))
            rhs.append(Fraction(1, q))
    problem = lp.LpProblem(
        tuple(Fraction(0) for _ in satisfying), tuple(rows), tuple(rhs), labels
    )
    result = lp.check_feasible(problem)
    if not result:
        return OnewiseSupport(pred.name, None, result.farkas)
    witness = {
        a: result.point[label] for a, label in zip(satisfying, labels) if result.point[label]
    }
    total = sum(witness.values())
    if total != 1:
        raise InternalError(f"one-wise witness mass sums to {total}")
    for position in range(k):
        for symbol in range(q):
            marginal = sum(w for a, w in witness.items() if a[position] == symbol)
            if marginal != Fraction(1, q):
                raise InternalError("one-wise witness has a non-uniform marginal")
    return OnewiseSupport(pred.name, witness, None)


STRONG = "strong"
WEAK = "weak"
NONE = "none"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class SupportClassification:
    kind: str
    subfamily: Optional[tuple]
    supporting: tuple


def support_classification(
    fam: PredicateFamily,
    rho_precision=Fraction(1, 64),
    n_max: int = 4,
    upper_budget: int = 128,
    subfamily_cap: int = 4096,
) -> SupportClassification:
    """Classify how the family supports one-wise independence.

    "strong" needs every predicate to support it individually.  Otherwise a
    strongly-supporting subfamily qualifies as "weak" when the threshold
    brackets prove its trivial threshold equals the full family's: the
    subfamily's empirical upper bound must not exceed the family's product
    lower bound (thresholds only drop when predicates are added, so the
    chain collapses to equality).  Overlapping brackets leave "unknown";
    no supporting subfamily at all is "none".
    """
    decisions = [onewise_support(p) for p in fam.predicates]
    supporting = tuple(d.predicate for d in decisions if d.supports)
    if len(supporting) == len(fam.predicates):
        return SupportClassification(STRONG, tuple(fam.names), supporting)
    if not supporting:
        return SupportClassification(NONE, None, supporting)
    if 2 ** len(supporting) - 1 > subfamily_cap:
        raise BudgetError(
            f"{2 ** len(supporting) - 1} candidate subfamilies exceed the cap"
        )
    lower_full = rho_product_lower(fam, rho_precision)
    for size in range(len(supporting), 0, -1):
        for names in itertools.combinations(supporting, size):
            sub = fam.subfamily(names)
            upper_sub = rho_upper_empirical(sub, n_max, budget=upper_budget)
            if upper_sub <= lower_full:
                return SupportClassification(WEAK, names, supporting)
    return SupportClassification(UNKNOWN, None, supporting)
