"""Instance enumeration, gap search, and certificate verification."""

import itertools
from fractions import Fraction

import pytest

from builders import cycle_instance, triangle
from cspgap import (
    SearchConfig,
    ValidationError,
    build_certificate,
    certificate_from_dict,
    certificate_to_dict,
    cut_family,
    enumerate_instances,
    gap_report,
    search_gap,
    verify_certificate,
)


def cfg(**kwargs):
    defaults = dict(
        family=cut_family(),
        n_min=2,
        n_max=3,
        max_constraints=3,
        gamma=Fraction(1),
        beta=Fraction(4, 5),
        budget=500,
    )
    defaults.update(kwargs)
    return SearchConfig(**defaults)


def test_config_validation():
    with pytest.raises(ValidationError):
        cfg(gamma=Fraction(1, 2), beta=Fraction(1, 2))
    with pytest.raises(ValidationError):
        cfg(gamma=Fraction(3, 2))
    with pytest.raises(ValidationError):
        cfg(n_min=1)
    with pytest.raises(ValidationError):
        cfg(budget=0)
    with pytest.raises(ValidationError):
        cfg(mode="other")


def test_enumeration_is_lexicographic_and_includes_triangle():
    stream = list(itertools.islice(enumerate_instances(cfg()), 500))
    tri = triangle()
    assert any(
        inst.n == 3 and inst.constraints == tri.constraints for inst in stream
    )
    # unit weights and sorted constraint lists throughout
    for inst in stream:
        assert all(c.weight == 1 for c in inst.constraints)
        assert list(inst.constraints) == sorted(
            inst.constraints, key=lambda c: (c.predicate, c.variables)
        )


def test_enumeration_single_constraint_block():
    config = cfg(n_min=2, n_max=2, max_constraints=1)
    stream = list(enumerate_instances(config))
    assert [c.variables for inst in stream for c in inst.constraints] == [
        (1, 2),
        (2, 1),
    ]


def test_random_stream_is_deterministic():
    config = cfg(mode="random", seed=42, budget=30)
    first = [
        inst.constraints
        for inst in itertools.islice(enumerate_instances(config), 30)
    ]
    second = [
        inst.constraints
        for inst in itertools.islice(enumerate_instances(config), 30)
    ]
    assert first == second


def test_search_finds_triangle_first():
    outcome = search_gap(cfg(beta=Fraction(2, 3)))
    assert outcome.found
    cert = outcome.certificate
    assert cert.instance.n == 3
    assert cert.lp_value == 1
    assert cert.csp_value == Fraction(2, 3)
    assert {c.variables for c in cert.instance.constraints} == {
        (1, 2), (1, 3), (2, 3),
    }
    assert verify_certificate(cert).ok


def test_search_none_within_budget():
    # Gap targets nothing can reach: every nonempty cut instance has an
    # assignment cutting at least half the weight.
    outcome = search_gap(cfg(beta=Fraction(1, 3), n_max=3, budget=300))
    assert not outcome.found
    # the whole exhaustive space for this configuration fits the budget
    assert outcome.evaluated == 9 + 83 == 92
    assert outcome.qualifying == 0


def test_search_single_constraint_instances_have_no_gap():
    outcome = search_gap(cfg(max_constraints=1, beta=Fraction(99, 100), budget=50))
    assert not outcome.found


def test_search_maximize_gap_scans_budget():
    config = cfg(n_max=4, max_constraints=3, beta=Fraction(4, 5), budget=400)
    first = search_gap(config)
    best = search_gap(config, maximize_gap=True)
    assert first.found and best.found
    assert best.evaluated == 400
    gap_of = lambda c: c.lp_value - c.csp_value
    assert gap_of(best.certificate) >= gap_of(first.certificate)


def test_search_threads_match_sequential():
    config = cfg(beta=Fraction(2, 3), budget=200)
    seq = search_gap(config, threads=1)
    par = search_gap(config, threads=3)
    assert seq.found and par.found
    assert certificate_to_dict(seq.certificate) == certificate_to_dict(par.certificate)


def test_enumerated_strong_family_instances_all_reach_one():
    # Every predicate of the family carries a uniform-marginal satisfying
    # distribution, so every enumerated instance relaxes to exactly 1.
    from cspgap import solve_basic_lp

    stream = itertools.islice(enumerate_instances(cfg(n_max=3)), 60)
    for inst in stream:
        assert solve_basic_lp(inst).value == 1


def test_enumerated_instances_dominate_family_width():
    from cspgap import dicut_family, solve_basic_lp, width

    config = cfg(family=dicut_family(), beta=Fraction(1, 4), n_max=3)
    floor = width(dicut_family()).value
    for inst in itertools.islice(enumerate_instances(config), 60):
        assert solve_basic_lp(inst).value >= floor


def test_build_certificate_requires_gap():
    report = gap_report(cycle_instance(4))  # lp = csp = 1
    with pytest.raises(ValidationError):
        build_certificate(report, Fraction(1), Fraction(1, 2))


def test_certificate_round_trip_and_verification():
    report = gap_report(cycle_instance(5))
    cert = build_certificate(report, Fraction(1), Fraction(4, 5), seed=5)
    data = certificate_to_dict(cert)
    restored = certificate_from_dict(data)
    assert restored == cert
    result = verify_certificate(restored)
    assert result.ok and result.failure is None


def test_certificate_verification_catches_perturbations():
    report = gap_report(cycle_instance(5))
    cert = build_certificate(report, Fraction(1), Fraction(4, 5))
    base = certificate_to_dict(cert)

    def expect_failure(mutate):
        data = certificate_to_dict(certificate_from_dict(base))
        mutate(data)
        try:
            result = verify_certificate(certificate_from_dict(data))
        except ValidationError:
            return
        assert not result.ok

    # One local mass nudged by 1/1000: consistency equalities break.
    def bump_local(data):
        key = sorted(data["solution"]["locals"][0])[0]
        data["solution"]["locals"][0][key] = "1001/2000"

    expect_failure(bump_local)
    expect_failure(lambda d: d.__setitem__("lp_value", "9/10"))
    expect_failure(lambda d: d.__setitem__("csp_value", "1/5"))
    expect_failure(lambda d: d["marginal_vector"]["cut"][0].__setitem__(0, "1/3"))
    expect_failure(lambda d: d["yes_distribution"].__setitem__("cut:00", "1/2"))
    expect_failure(lambda d: d["no_sup"].__setitem__("bound", "1/3"))
    expect_failure(lambda d: d.__setitem__("seed", cert.seed + 1))
    expect_failure(lambda d: d.__setitem__("digest", "0" * 64))


def test_verification_downgrades_on_budget():
    report = gap_report(cycle_instance(5))
    cert = build_certificate(report, Fraction(1), Fraction(4, 5))
    result = verify_certificate(cert, assignment_budget=4)
    assert result.ok and result.downgraded
    assert any(name == "csp_optimum" and "skipped" in detail
               for name, _, detail in result.checks)
