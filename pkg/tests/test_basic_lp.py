"""Relaxation construction, decoding, and the special-purpose feasible solutions."""

from fractions import Fraction

import pytest

from builders import cycle_instance, random_instance, seeded, single_edge, triangle
from cspgap import (
    Constraint,
    Instance,
    ValidationError,
    brute_force_opt,
    build_basic_lp,
    csp_value,
    cut_family,
    dicut_family,
    gap_report,
    lp_from_onewise,
    lp_from_width,
    onewise_support,
    point_mass_solution,
    solve_basic_lp,
    verify_local_solution,
)
from cspgap.basic_lp import LocalDistributionSolution, decode_primal


def test_build_sizes_single_edge():
    problem = build_basic_lp(single_edge())
    assert problem.num_variables == 2 * 2 + 1 * 4 == 8
    assert problem.num_rows == 2 + 1 * 2 * 2


def test_build_sizes_c5():
    problem = build_basic_lp(cycle_instance(5))
    assert problem.num_variables == 5 * 2 + 5 * 4 == 30
    assert problem.num_rows == 5 + 5 * 2 * 2 == 25


def test_objective_coefficients_are_weight_shares():
    inst = Instance(
        cut_family(),
        3,
        (Constraint("cut", (1, 2), 3), Constraint("cut", (2, 3), 1)),
    )
    problem = build_basic_lp(inst)
    coeff = dict(zip(problem.labels, problem.objective))
    assert coeff["y[1,01]"] == Fraction(3, 4)
    assert coeff["y[1,10]"] == Fraction(3, 4)
    assert coeff["y[1,00]"] == 0
    assert coeff["y[2,01]"] == Fraction(1, 4)
    assert coeff["x[1,0]"] == 0


def test_solve_c5_and_triangle():
    assert solve_basic_lp(cycle_instance(5)).value == 1
    assert solve_basic_lp(triangle()).value == 1


def test_single_satisfiable_constraint_reaches_one():
    sol = solve_basic_lp(single_edge())
    assert sol.value == 1


def test_gap_report_values():
    report = gap_report(cycle_instance(5))
    assert (report.lp_value, report.csp_value) == (1, Fraction(4, 5))
    assert report.is_gap(1, Fraction(4, 5))
    assert not report.is_gap(1, Fraction(1, 2))
    report3 = gap_report(triangle())
    assert (report3.lp_value, report3.csp_value) == (1, Fraction(2, 3))
    edge = gap_report(single_edge())
    assert (edge.lp_value, edge.csp_value) == (1, 1)


def test_decode_round_trip_consistency():
    inst = cycle_instance(4)
    problem = build_basic_lp(inst)
    from cspgap import solve

    solution = solve(problem)
    decoded = decode_primal(inst, solution.primal, solution.value)
    verify_local_solution(inst, decoded)  # exact consistency equalities hold


def test_point_mass_embedding_matches_csp_value():
    rng = seeded(3)
    for _ in range(15):
        inst = random_instance(rng, cut_family(), 4, rng.randint(1, 5), max_weight=2)
        a = tuple(rng.randrange(2) for _ in range(4))
        sol = point_mass_solution(inst, a)
        assert sol.value == csp_value(inst, a)


def test_relaxation_dominates_brute_force():
    rng = seeded(17)
    for fam in (cut_family(), dicut_family()):
        for _ in range(10):
            inst = random_instance(rng, fam, 4, rng.randint(1, 6), max_weight=2)
            best, _ = brute_force_opt(inst)
            assert solve_basic_lp(inst).value >= best


def test_verify_rejects_broken_solutions():
    inst = single_edge()
    sol = solve_basic_lp(inst)
    # Perturb one local mass: the distribution no longer sums to one.
    broken_locals = (tuple(
        v + Fraction(1, 1000) if rank == 0 else v
        for rank, v in enumerate(sol.locals_[0])
    ),)
    broken = LocalDistributionSolution(inst, broken_locals, sol.marginals, sol.value)
    with pytest.raises(ValidationError):
        verify_local_solution(inst, broken)
    wrong_value = LocalDistributionSolution(
        inst, sol.locals_, sol.marginals, sol.value - Fraction(1, 7)
    )
    with pytest.raises(ValidationError):
        verify_local_solution(inst, wrong_value)


def test_lp_from_onewise_cut():
    witness = onewise_support(cut_family().predicates[0]).witness
    for inst in (cycle_instance(5), cycle_instance(4), triangle()):
        sol = lp_from_onewise(inst, {"cut": witness})
        assert sol.value == 1
        assert sol.marginals[0] == (Fraction(1, 2), Fraction(1, 2))


def test_lp_from_onewise_requires_witness():
    with pytest.raises(ValidationError):
        lp_from_onewise(triangle(), {})
    bad = {(0, 0): Fraction(1)}  # supported on an unsatisfying tuple
    with pytest.raises(ValidationError):
        lp_from_onewise(triangle(), {"cut": bad})
    skewed = {(0, 1): Fraction(1)}  # non-uniform marginals
    with pytest.raises(ValidationError):
        lp_from_onewise(triangle(), {"cut": skewed})


def test_lp_from_width_dicut():
    rng = seeded(23)
    for _ in range(10):
        inst = random_instance(rng, dicut_family(), 5, rng.randint(1, 6), max_weight=2)
        sol = lp_from_width(inst)
        assert sol.value == Fraction(1, 2)
        # Each local distribution is the two-point shift orbit of (0, 1).
        for ci in range(inst.m):
            dist = sol.local_distribution(ci)
            assert dist == {(0, 1): Fraction(1, 2), (1, 0): Fraction(1, 2)}
        assert solve_basic_lp(inst).value >= Fraction(1, 2)


def test_lp_from_width_cut_and_constant():
    assert lp_from_width(cycle_instance(5)).value == 1
    from cspgap import constant_one_family

    fam = constant_one_family()
    inst = Instance(fam, 2, (Constraint("one", (1, 2)),))
    assert lp_from_width(inst).value == 1
