"""Cross-cutting pipeline cases: weights, random-mode search, env, budgets."""

import subprocess
import sys
from fractions import Fraction

import pytest

from cspgap import (
    BudgetError,
    Constraint,
    Instance,
    Predicate,
    PredicateFamily,
    SearchConfig,
    build_certificate,
    cut_family,
    dicut_family,
    gap_report,
    search_gap,
    support_classification,
    verify_certificate,
)
from cspgap.serialize import canonical_dumps, family_to_dict


def test_weighted_cycle_gap_certificate():
    # Doubling one edge of the five-cycle forces the optimum to spare a unit
    # edge: weight 5 of 6 is cut, while the relaxation still reaches 1.
    constraints = tuple(
        Constraint("cut", (i, i % 5 + 1), 2 if i == 1 else 1) for i in range(1, 6)
    )
    inst = Instance(cut_family(), 5, constraints)
    report = gap_report(inst)
    assert report.lp_value == 1
    assert report.csp_value == Fraction(5, 6)
    assert report.csp_witness[0] == 0 and report.csp_witness[1] == 1
    cert = build_certificate(report, Fraction(1), Fraction(5, 6), seed=1)
    assert verify_certificate(cert).ok


def test_directed_cycle_gap_values():
    inst = Instance(
        dicut_family(),
        3,
        (
            Constraint("dicut", (1, 2)),
            Constraint("dicut", (2, 3)),
            Constraint("dicut", (3, 1)),
        ),
    )
    report = gap_report(inst)
    assert report.lp_value == Fraction(1, 2)
    assert report.csp_value == Fraction(1, 3)


def test_random_mode_search_certifies_dicut_gap():
    cfg = SearchConfig(
        family=dicut_family(),
        n_min=2,
        n_max=3,
        max_constraints=4,
        gamma=Fraction(1, 2),
        beta=Fraction(1, 3),
        mode="random",
        seed=5,
        budget=300,
    )
    outcome = search_gap(cfg)
    assert outcome.found
    assert outcome.certificate.lp_value >= Fraction(1, 2)
    assert outcome.certificate.csp_value <= Fraction(1, 3)
    assert verify_certificate(outcome.certificate).ok
    rerun = search_gap(cfg)
    assert rerun.certificate == outcome.certificate


def test_two_predicate_family_search_order():
    mixed = PredicateFamily(cut_family().predicates + dicut_family().predicates)
    cfg = SearchConfig(
        family=mixed,
        n_min=2,
        n_max=2,
        max_constraints=1,
        gamma=Fraction(1),
        beta=Fraction(1, 2),
        budget=10,
    )
    from cspgap import enumerate_instances

    names = [inst.constraints[0].predicate for inst in enumerate_instances(cfg)]
    assert names == ["cut", "cut", "dicut", "dicut"]  # family order, then tuples


def test_support_classification_subfamily_cap():
    ones = tuple(
        Predicate(2, 2, f"one{i}", (1, 1, 1, 1)) for i in range(13)
    ) + (Predicate(2, 2, "is0", (1, 1, 0, 0)),)
    fam = PredicateFamily(ones)
    with pytest.raises(BudgetError):
        support_classification(fam, subfamily_cap=4096)


def test_threads_env_is_validated(tmp_path):
    fam_path = tmp_path / "cut.json"
    fam_path.write_text(canonical_dumps(family_to_dict(cut_family())))
    proc = subprocess.run(
        [
            sys.executable, "-m", "cspgap.cli", "gap-search",
            "--family", str(fam_path), "--gamma", "1/1", "--beta", "4/5",
            "--n-max", "3", "--budget", "50",
        ],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "CSPGAP_THREADS": "lots"},
    )
    assert proc.returncode == 2
    assert "CSPGAP_THREADS" in proc.stderr


def test_threads_env_sizes_pool(tmp_path):
    fam_path = tmp_path / "cut.json"
    fam_path.write_text(canonical_dumps(family_to_dict(cut_family())))
    out = tmp_path / "cert.json"
    proc = subprocess.run(
        [
            sys.executable, "-m", "cspgap.cli", "gap-search",
            "--family", str(fam_path), "--gamma", "1/1", "--beta", "2/3",
            "--n-max", "3", "--max-constraints", "3", "--budget", "200",
            "--out", str(out),
        ],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "CSPGAP_THREADS": "4"},
    )
    assert proc.returncode == 0
    verify = subprocess.run(
        [sys.executable, "-m", "cspgap.cli", "verify-cert", str(out)],
        capture_output=True,
        text=True,
    )
    assert verify.returncode == 0
