"""The canonical local-distribution LP relaxation of a Max-CSP instance.

Each constraint C = (f, j) gets a local distribution Y_C over [q]^k and each
variable i a marginal distribution X_i over [q]; the relaxation maximizes the
weighted expected satisfaction E_C E_{a ~ Y_C} f(a) subject to every position
of every local distribution agreeing exactly with the shared variable
marginal.  Integral assignments embed as point masses, so the relaxed value
dominates the true optimum; the gap between the two is what the rest of the
toolkit hunts for.

Solutions are decoded into `LocalDistributionSolution` objects and eagerly
re-verified: sums, signs, marginal consistency, and the objective value are
all checked with exact arithmetic before anything is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import lp
from .core import (
    DEFAULT_ASSIGNMENT_BUDGET,
    Instance,
    brute_force_opt,
    csp_value,
    width,
)
from .errors import InternalError, ValidationError
from .rationals import to_fraction


@dataclass(frozen=True)
class LocalDistributionSolution:
    """A feasible relaxation solution in distributional form.

    `locals_` holds one mass vector per constraint (rank-indexed over [q]^k,
    lexicographic order) and `marginals` one mass vector per variable.
    """

    instance: Instance
    locals_: tuple
    marginals: tuple
    value: Fraction

    def local_distribution(self, index: int) -> dict:
        """Mass of constraint `index` as a {tuple: Fraction} map (zeros omitted)."""
        pred = self.instance.family[self.instance.constraints[index].predicate]
        return {
            pred.tuple_of(rank): mass
            for rank, mass in enumerate(self.locals_[index])
            if mass
        }


def verify_local_solution(inst: Instance, sol: LocalDistributionSolution) -> None:
    """Exact feasibility and objective check; raises ValidationError on any miss."""
    q, k = inst.family.q, inst.family.k
    size = q**k
    if len(sol.locals_) != inst.m:
        raise ValidationError("one local distribution required per constraint")
    if len(sol.marginals) != inst.n:
        raise ValidationError("one marginal distribution required per variable")
    for i, marg in enumerate(sol.marginals):
        if len(marg) != q:
            raise ValidationError(f"marginal of variable {i + 1} has wrong length")
        if any(v < 0 for v in marg):
            raise ValidationError(f"marginal of variable {i + 1} has a negative entry")
        if sum(marg) != 1:
            raise ValidationError(f"marginal of variable {i + 1} does not sum to 1")
    objective = Fraction(0)
    weight_total = inst.total_weight
    for ci, constraint in enumerate(inst.constraints):
        masses = sol.locals_[ci]
        if len(masses) != size:
            raise ValidationError(f"local distribution {ci} has wrong length")
        if any(v < 0 for v in masses):
            raise ValidationError(f"local distribution {ci} has a negative entry")
        if sum(masses) != 1:
            raise ValidationError(f"local distribution {ci} does not sum to 1")
        pred = inst.family[constraint.predicate]
        for pos in range(k):
            stride = q ** (k - 1 - pos)
            variable = constraint.variables[pos]
            for symbol in range(q):
                slice_sum = sum(
                    masses[rank]
                    for rank in range(size)
                    if (rank // stride) % q == symbol
                )
                if slice_sum != sol.marginals[variable - 1][symbol]:
                    raise ValidationError(
                        f"constraint {ci} position {pos} disagrees with the"
                        f" marginal of variable {variable} at symbol {symbol}"
                    )
        satisfied = sum(masses[rank] for rank, bit in enumerate(pred.table) if bit)
        objective += Fraction(constraint.weight, weight_total) * satisfied
    if objective != sol.value:
        raise ValidationError(
            f"stated objective {sol.value} differs from recomputed {objective}"
        )


def _x_label(i: int, b: int) -> str:
    return f"x[{i},{b}]"


def _y_label(ci: int, digits: str) -> str:
    return f"y[{ci},{digits}]"


_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _rank_digits(rank: int, q: int, k: int) -> str:
    out = []
    for _ in range(k):
        rank, d = divmod(rank, q)
        out.append(_DIGITS[d])
    return "".join(reversed(out))


def build_basic_lp(inst: Instance) -> lp.LpProblem:
    """Emit the relaxation as a standard-form LP.

    Variables: x[i,b] for every variable/symbol pair and y[C,a] for every
    constraint/tuple pair (labels carry the coordinates).  Rows: one simplex
    row per variable, and one marginal-consistency row per (constraint,
    position, symbol).  The objective weights each satisfying tuple's mass
    by the constraint's share of the total weight.
    """
    fam = inst.family
    q, k, n = fam.q, fam.k, inst.n
    size = q**k
    num_x = n * q
    num_vars = num_x + inst.m * size

    labels = [_x_label(i, b) for i in range(1, n + 1) for b in range(q)]
    for ci in range(1, inst.m + 1):
        labels.extend(_y_label(ci, _rank_digits(r, q, k)) for r in range(size))

    objective = [Fraction(0)] * num_vars
    weight_total = inst.total_weight
    for ci, constraint in enumerate(inst.constraints):
        share = Fraction(constraint.weight, weight_total)
        table = fam[constraint.predicate].table
        base = num_x + ci * size
        for rank, bit in enumerate(table):
            if bit:
                objective[base + rank] = share

    rows = []
    rhs = []
    zero_row = [Fraction(0)] * num_vars
    for i in range(n):
        row = zero_row[:]
        for b in range(q):
            row[i * q + b] = Fraction(1)
        rows.append(tuple(row))
        rhs.append(Fraction(1))
    one = Fraction(1)
    for ci, constraint in enumerate(inst.constraints):
        base = num_x + ci * size
        for pos in range(k):
            stride = q ** (k - 1 - pos)
            variable = constraint.variables[pos]
            for symbol in range(q):
                row = zero_row[:]
                for rank in range(size):
                    if (rank // stride) % q == symbol:
                        row[base + rank] = one
                row[(variable - 1) * q + symbol] = -one
                rows.append(tuple(row))
                rhs.append(Fraction(0))
    return lp.LpProblem(tuple(objective), tuple(rows), tuple(rhs), tuple(labels))


def decode_primal(inst: Instance, primal: dict, value: Fraction) -> LocalDistributionSolution:
    """Turn a labeled primal vector back into verified local distributions."""
    fam = inst.family
    q, k = fam.q, fam.k
    size = q**k
    marginals = tuple(
        tuple(primal[_x_label(i, b)] for b in range(q)) for i in range(1, inst.n + 1)
    )
    locals_ = tuple(
        tuple(
            primal[_y_label(ci, _rank_digits(r, q, k))] for r in range(size)
        )
        for ci in range(1, inst.m + 1)
    )
    sol = LocalDistributionSolution(inst, locals_, marginals, value)
    try:
        verify_local_solution(inst, sol)
    except ValidationError as exc:
        raise InternalError(f"decoded solution fails verification: {exc}") from exc
    return sol


def solve_basic_lp(inst: Instance) -> LocalDistributionSolution:
    """Exact optimum of the relaxation, decoded and verified."""
    problem = build_basic_lp(inst)
    solution = lp.solve(problem)
    if solution.status != lp.OPTIMAL:
        raise InternalError(
            f"relaxation reported {solution.status}; it is a nonempty polytope"
        )
    return decode_primal(inst, solution.primal, solution.value)


@dataclass(frozen=True)
class GapReport:
    """Exact relaxed and integral optima of one instance, with witnesses."""

    instance: Instance
    lp_value: Fraction
    csp_value: Fraction
    csp_witness: tuple
    lp_witness: LocalDistributionSolution

    def __post_init__(self):
        if not (0 <= self.csp_value <= self.lp_value <= 1):
            raise InternalError(
                f"impossible value pair (lp={self.lp_value}, csp={self.csp_value})"
            )

    def is_gap(self, gamma, beta) -> bool:
        return self.lp_value >= to_fraction(gamma) and self.csp_value <= to_fraction(beta)

    @property
    def gap(self) -> Fraction:
        return self.lp_value - self.csp_value


def gap_report(inst: Instance, assignment_budget: int = DEFAULT_ASSIGNMENT_BUDGET) -> GapReport:
    """Pair the relaxation optimum with the brute-force optimum."""
    sol = solve_basic_lp(inst)
    best, witness = brute_force_opt(inst, budget=assignment_budget)
    return GapReport(inst, sol.value, best, witness, sol)


def point_mass_solution(inst: Instance, assignment) -> LocalDistributionSolution:
    """Embed an integral assignment as a feasible point-mass solution."""
    value = csp_value(inst, assignment)
    q, k = inst.family.q, inst.family.k
    size = q**k
    marginals = []
    for v in assignment:
        row = [Fraction(0)] * q
        row[v] = Fraction(1)
        marginals.append(tuple(row))
    locals_ = []
    for constraint in inst.constraints:
        pred = inst.family[constraint.predicate]
        rank = pred.index_of(tuple(assignment[v - 1] for v in constraint.variables))
        masses = [Fraction(0)] * size
        masses[rank] = Fraction(1)
        locals_.append(tuple(masses))
    sol = LocalDistributionSolution(inst, tuple(locals_), tuple(marginals), value)
    verify_local_solution(inst, sol)
    return sol


def _uniform_marginals(n: int, q: int) -> tuple:
    uniform = tuple(Fraction(1, q) for _ in range(q))
    return tuple(uniform for _ in range(n))


def lp_from_onewise(inst: Instance, witnesses: dict) -> LocalDistributionSolution:
    """Feasible solution of value 1 from uniform-marginal satisfying distributions.

    `witnesses` maps predicate names to distributions over [q]^k that are
    supported on satisfying tuples and have all single-coordinate marginals
    uniform.  Every constraint reuses its predicate's distribution and every
    variable marginal is uniform, which is consistent by construction; the
    objective is exactly 1 because no mass sits on unsatisfying tuples.
    """
    fam = inst.family
    q, k = fam.q, fam.k
    size = q**k
    used = {c.predicate for c in inst.constraints}
    tables = {}
    for name in sorted(used):
        if name not in witnesses:
            raise ValidationError(f"no one-wise witness supplied for predicate {name!r}")
        pred = fam[name]
        masses = [Fraction(0)] * size
        for a, mass in witnesses[name].items():
            masses[pred.index_of(a)] = to_fraction(mass)
        if any(v < 0 for v in masses) or sum(masses) != 1:
            raise ValidationError(f"witness for {name!r} is not a distribution")
        if any(mass and not bit for mass, bit in zip(masses, pred.table)):
            raise ValidationError(
                f"witness for {name!r} puts mass on an unsatisfying tuple"
            )
        for pos in range(k):
            stride = q ** (k - 1 - pos)
            for symbol in range(q):
                marginal = sum(
                    masses[rank]
                    for rank in range(size)
                    if (rank // stride) % q == symbol
                )
                if marginal != Fraction(1, q):
                    raise ValidationError(
                        f"witness for {name!r} has a non-uniform marginal"
                    )
        tables[name] = tuple(masses)
    locals_ = tuple(tables[c.predicate] for c in inst.constraints)
    sol = LocalDistributionSolution(
        inst, locals_, _uniform_marginals(inst.n, q), Fraction(1)
    )
    verify_local_solution(inst, sol)
    return sol


def lp_from_width(inst: Instance) -> LocalDistributionSolution:
    """Feasible solution from constant-shift orbits over Z_q.

    Each constraint's local distribution is uniform over the q constant
    shifts of its predicate's best base point, so its contribution is
    exactly the predicate's width and every coordinate marginal is uniform.
    The objective therefore meets or exceeds the family width.
    """
    fam = inst.family
    q, k = fam.q, fam.k
    size = q**k
    report = width(fam)
    tables = {}
    weight_total = inst.total_weight
    value = Fraction(0)
    for constraint in inst.constraints:
        name = constraint.predicate
        if name not in tables:
            pred = fam[name]
            base = report.per_predicate[name].base
            masses = [Fraction(0)] * size
            for a in range(q):
                shifted = tuple((v + a) % q for v in base)
                masses[pred.index_of(shifted)] += Fraction(1, q)
            tables[name] = tuple(masses)
        value += Fraction(constraint.weight, weight_total) * report.per_predicate[name].width
    locals_ = tuple(tables[c.predicate] for c in inst.constraints)
    sol = LocalDistributionSolution(inst, locals_, _uniform_marginals(inst.n, q), value)
    verify_local_solution(inst, sol)
    return sol
