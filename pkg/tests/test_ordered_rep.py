import math
from itertools import combinations

import numpy as np
import pytest

from conftest import random_symbolic_system
from emz_spectral.catalog import ImpulseOnUnit, OperatorSpec
from emz_spectral.errors import EnumerationBudgetExceeded
from emz_spectral.ordered_rep import (build_multiplicity_sets, build_ordered_representation,
                                      detect_distortion, families_equivalent, oracle_agreement,
                                      pointwise_multiplicity)
from emz_spectral.realset import RealSet
from emz_spectral.vectorop import EMZSystem


def test_single_operator(fixture_system):
    sys_ = fixture_system("single_operator")
    rep = build_ordered_representation(sys_)
    d = sys_.rep_data["T3"]
    assert rep.theta.equivalent(d.theta)
    assert rep.mult_sets[0] == RealSet.full(sys_.window)
    assert rep.mult_sets[1].is_empty()
    assert len(rep.provenance.layers) == 1 and rep.provenance.steps == []
    assert build_multiplicity_sets(sys_) == [RealSet.full(sys_.window)]


def test_example1_theta(fixture_system):
    sys_ = fixture_system("example1_case1")
    rep = build_ordered_representation(sys_)
    w = sys_.window
    ac = RealSet.build(w, [(w[0], 0), (0, w[1])])
    assert rep.theta.ac_support.closure() == ac.closure()
    assert not rep.theta.ac_support.contains(0.0)
    assert rep.theta.pp_support == sys_.rep_data["T3"].theta.pp_support


def test_identical_impulses_force_a_second_layer():
    w = (-20, 20)
    sys_ = EMZSystem([OperatorSpec("A", ImpulseOnUnit(1.0)), OperatorSpec("B", ImpulseOnUnit(1.0))], w)
    rep = build_ordered_representation(sys_)
    atoms = RealSet.progression(w, -1.0, 2 * math.pi)
    assert rep.theta.pp_support == atoms and rep.theta.ac_support.is_empty()
    (step,) = rep.provenance.steps
    assert step["min"] == "B" and RealSet.from_dict(step["overlap"]) == atoms
    assert [[p.slot for p in layer] for layer in rep.provenance.layers] == [["A"], ["B"]]
    assert rep.mult_sets[1] == atoms and rep.spectral_multiplicity == 2


def test_null_overlap_gives_empty_second_set(fixture_system):
    sets = build_multiplicity_sets(fixture_system("disjoint_pair"))
    assert sets[1].is_empty()


def test_example2_multiplicity_sets(fixture_system):
    sys_ = fixture_system("example2")
    rep = build_ordered_representation(sys_)
    integers = RealSet.progression(sys_.window, 0, 1)
    assert rep.mult_sets[1] == integers
    assert rep.mult_sets[2].is_empty()
    # pairwise union of first multiplicity sets, built directly
    e1 = [sys_.rep_data[op.id].mult_sets[0] for op in sys_.operators]
    pairwise = RealSet.empty(sys_.window)
    for a, b in combinations(e1, 2):
        pairwise = pairwise | (a & b)
    assert pairwise == rep.mult_sets[1]


@pytest.mark.parametrize("lam, expect", [(0.0, 2), (3.0, 2), (-4.0, 2), (0.5, 0)])
def test_pointwise_multiplicity_example2(fixture_system, lam, expect):
    assert pointwise_multiplicity(fixture_system("example2"), lam) == expect


def test_pointwise_multiplicity_prefers_atoms(fixture_system):
    sys_ = fixture_system("example1_case2")
    # -4 is an atom of T1 and sits inside the ac part of T2
    assert pointwise_multiplicity(sys_, -4.0) == 1
    assert pointwise_multiplicity(sys_, 1.5) == 1


@pytest.mark.parametrize("name, expect", [
    ("example1_case1", (2, 1, True)), ("example1_case2", (3, 1, True)),
    ("example2", (3, 2, True)), ("disjoint_pair", (1, 1, False)),
    ("double_impulse", (2, 2, False)),
])
def test_distortion(fixture_system, name, expect):
    d = detect_distortion(fixture_system(name))
    assert (d["lambda"], d["multiplicity"], d["distorted"]) == expect


def test_family_equivalence(fixture_system):
    ex2 = fixture_system("example2")
    assert families_equivalent(ex2, ex2)
    permuted = EMZSystem(list(reversed(ex2.operators)), ex2.window)
    assert families_equivalent(ex2, permuted)
    first_two = EMZSystem(ex2.operators[:2], ex2.window)
    assert not families_equivalent(ex2, first_two)


def test_budget_overflow_keeps_partial(fixture_system):
    with pytest.raises(EnumerationBudgetExceeded) as info:
        build_multiplicity_sets(fixture_system("example2"), budget=3)
    assert info.value.partial[0] == RealSet.full((-10, 10))


@pytest.mark.parametrize("name", ["example1_case1", "example1_case2", "example2",
                                  "double_impulse", "impulse_dirichlet"])
def test_oracle_agreement_on_fixtures(fixture_system, name):
    assert oracle_agreement(fixture_system(name))["agree"]


@pytest.mark.parametrize("seed", range(10))
def test_oracle_agreement_random(seed):
    report = oracle_agreement(random_symbolic_system(np.random.default_rng(100 + seed)))
    assert report["agree"], report["examples"]


def test_report_round_trip(fixture_system):
    rep = build_ordered_representation(fixture_system("example2"))
    d = rep.to_dict()
    assert d["lambda"] == 3 and d["multiplicity"] == 2 and d["distorted"]
    assert RealSet.from_dict(d["s_n"][1]) == rep.mult_sets[1]
