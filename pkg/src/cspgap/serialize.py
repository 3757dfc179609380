"""JSON codecs for families, instances, solutions, and witness objects.

Conventions, shared by every file format this package reads or writes:
rationals are "p/q" strings (never decimals), tuples over the alphabet are
digit strings in base q (digits 0-9a-z, so q <= 36), variable indices are
1-based, and emitted JSON is canonical: sorted keys, two-space indent, one
trailing newline.  Canonical output makes byte-identical reruns a testable
contract.
"""

from __future__ import annotations

import json
import os
import warnings
from fractions import Fraction

from .basic_lp import LocalDistributionSolution, verify_local_solution
from .core import Constraint, Instance, Predicate, PredicateFamily
from .errors import ValidationError
from .rationals import format_rational, parse_rational
from .witnesses import MarginalVector, PairDistribution, SymbolKernel

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def tuple_to_digits(values) -> str:
    return "".join(_DIGITS[v] for v in values)


def digits_to_tuple(text: str, q: int) -> tuple:
    values = tuple(_DIGITS.index(ch) for ch in text)
    if any(v >= q for v in values):
        raise ValidationError(f"digit string {text!r} is not base {q}")
    return values


def canonical_dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def family_to_dict(fam: PredicateFamily) -> dict:
    return {
        "q": fam.q,
        "k": fam.k,
        "predicates": [
            {"name": p.name, "table": list(p.table)} for p in fam.predicates
        ],
    }


def family_from_dict(data: dict) -> PredicateFamily:
    try:
        q = int(data["q"])
        k = int(data["k"])
        predicates = tuple(
            Predicate(q, k, entry["name"], tuple(entry["table"]))
            for entry in data["predicates"]
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed family object: {exc!r}") from exc
    return PredicateFamily(predicates)


def instance_to_dict(inst: Instance, family="inline") -> dict:
    """`family` is either "inline" (embed the family) or a path string."""
    return {
        "family": family_to_dict(inst.family) if family == "inline" else family,
        "n": inst.n,
        "constraints": [
            {"f": c.predicate, "vars": list(c.variables), "w": c.weight}
            for c in inst.constraints
        ],
    }


def instance_from_dict(data: dict, base_dir: str = ".") -> Instance:
    try:
        family_field = data["family"]
        n = int(data["n"])
        raw_constraints = data["constraints"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed instance object: {exc!r}") from exc
    if isinstance(family_field, str):
        fam = load_family(os.path.join(base_dir, family_field))
    else:
        fam = family_from_dict(family_field)
    constraints = []
    for entry in raw_constraints:
        try:
            name = entry["f"]
            variables = tuple(int(v) for v in entry["vars"])
            weight = int(entry.get("w", 1))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed constraint object: {exc!r}") from exc
        if weight == 0:
            warnings.warn(
                f"dropping zero-weight constraint {name}{variables}",
                stacklevel=2,
            )
            continue
        constraints.append(Constraint(name, variables, weight))
    return Instance(fam, n, tuple(constraints))


def load_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON at line {exc.lineno},"
                                  f" column {exc.colno}: {exc.msg}") from exc


def load_family(path: str) -> PredicateFamily:
    return family_from_dict(load_json(path))


def load_instance(path: str) -> Instance:
    return instance_from_dict(load_json(path), base_dir=os.path.dirname(path) or ".")


def save_json(path: str, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(canonical_dumps(data))


def solution_to_dict(sol: LocalDistributionSolution) -> dict:
    inst = sol.instance
    q, k = inst.family.q, inst.family.k
    locals_ = []
    for ci in range(inst.m):
        masses = sol.locals_[ci]
        pred = inst.family[inst.constraints[ci].predicate]
        locals_.append({
            tuple_to_digits(pred.tuple_of(rank)): format_rational(mass)
            for rank, mass in enumerate(masses)
            if mass
        })
    return {
        "objective": format_rational(sol.value),
        "marginals": [[format_rational(v) for v in row] for row in sol.marginals],
        "locals": locals_,
    }


def solution_from_dict(data: dict, inst: Instance) -> LocalDistributionSolution:
    q, k = inst.family.q, inst.family.k
    size = q**k
    try:
        value = parse_rational(data["objective"])
        marginals = tuple(
            tuple(parse_rational(v) for v in row) for row in data["marginals"]
        )
        locals_ = []
        for entry in data["locals"]:
            masses = [Fraction(0)] * size
            for digits, mass in entry.items():
                values = digits_to_tuple(digits, q)
                if len(values) != k:
                    raise ValidationError(f"tuple {digits!r} has wrong arity")
                rank = 0
                for v in values:
                    rank = rank * q + v
                masses[rank] = parse_rational(mass)
            locals_.append(tuple(masses))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed solution object: {exc!r}") from exc
    sol = LocalDistributionSolution(inst, tuple(locals_), marginals, value)
    verify_local_solution(inst, sol)
    return sol


def pair_distribution_to_dict(dist: PairDistribution) -> dict:
    return {
        f"{name}:{tuple_to_digits(values)}": format_rational(mass)
        for (name, values), mass in dist.atoms()
    }


def pair_distribution_from_dict(data: dict, fam: PredicateFamily) -> PairDistribution:
    mass = {}
    for key, value in data.items():
        name, _, digits = key.rpartition(":")
        if not name:
            raise ValidationError(f"malformed atom key {key!r}")
        mass[(name, digits_to_tuple(digits, fam.q))] = parse_rational(value)
    return PairDistribution(fam, mass)


def marginal_vector_to_dict(mv: MarginalVector) -> dict:
    return {
        name: [[format_rational(v) for v in row] for row in mv.entries[fi]]
        for fi, name in enumerate(mv.names)
    }


def marginal_vector_from_dict(data: dict, fam: PredicateFamily) -> MarginalVector:
    try:
        entries = tuple(
            tuple(tuple(parse_rational(v) for v in row) for row in data[name])
            for name in fam.names
        )
    except KeyError as exc:
        raise ValidationError(f"marginal vector is missing predicate {exc}") from exc
    return MarginalVector(fam.names, fam.k, fam.q, entries)


def kernel_to_dict(kernel: SymbolKernel) -> list:
    return [[format_rational(v) for v in row] for row in kernel.rows]


def kernel_from_dict(data) -> SymbolKernel:
    return SymbolKernel(tuple(tuple(parse_rational(v) for v in row) for row in data))
