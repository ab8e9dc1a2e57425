"""Acceptance criteria, one test each.

Every test prints one ``PASS``/``FAIL`` line with the measured numbers, also
under pytest output capture.  Run ``python3 tests/test_acceptance.py`` for
the lines alone.
"""

import math
import sys
import time
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_symbolic_system  # noqa: E402
from oracles import brute_force_min_partition, probe_edges  # noqa: E402
from emz_spectral.catalog import HalfLineKinetic, ImpulseOnUnit, OperatorSpec  # noqa: E402
from emz_spectral.cli import parse_function  # noqa: E402
from emz_spectral.expansion import (analytic_decomposition, build_kernels, dropped_tail,  # noqa: E402
                                    expand, kernel_operator, matrix_measure, transform)
from emz_spectral.ordered_rep import (build_ordered_representation, detect_distortion,  # noqa: E402
                                      oracle_agreement)
from emz_spectral.quasidiff import lagrange_convergence, matrix_from_dict  # noqa: E402
from emz_spectral.realset import RealSet  # noqa: E402
from emz_spectral.systemio import bundled, load_json, load_system  # noqa: E402
from emz_spectral.vectorop import (EMZSystem, borel_calculus_apply,  # noqa: E402
                                   build_superposition_graph, random_vector, spectral_index)

PP_FIXTURES = ("double_impulse", "impulse_dirichlet")


def verdict(request, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'}  {request.node.name}: {detail}"
    capman = request.config.pluginmanager.getplugin("capturemanager")
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
    else:
        print(line, flush=True)
    assert ok, line


def example1(k, s, alpha, window=(-20.0, 20.0)):
    return EMZSystem([OperatorSpec("T1", HalfLineKinetic("-", k)),
                      OperatorSpec("T2", HalfLineKinetic("+", s)),
                      OperatorSpec("T3", ImpulseOnUnit(alpha))], window)


def test_example1_nonpositive_or_infinite_k(request):
    fails, worst = [], 0.0
    for k in (math.inf, 0.0, -1.0, -3.5):
        for s in (math.inf, 0.0, -1.0, -3.5):
            for alpha in (0.0, 1.0, math.pi / 2, 4.0):
                t0 = time.perf_counter()
                sys_ = example1(k, s, alpha)
                part = spectral_index(sys_)
                d = detect_distortion(sys_)
                worst = max(worst, time.perf_counter() - t0)
                got = (part.lam, part.groups, d["multiplicity"], d["distorted"])
                if got != (2, [["T1", "T2"], ["T3"]], 1, True):
                    fails.append(((k, s, alpha), got))
    verdict(request, not fails and worst < 1.0,
            f"64 (k, s, alpha) cases, Lambda=2 groups {{T1,T2}},{{T3}} multiplicity 1 distorted; "
            f"failures={fails[:3]} slowest={worst:.3f}s (<1 s)")


def test_example1_half_k(request):
    fails, worst = [], 0.0
    for alpha in (1.0, 2.0, 0.3, 5.5):
        t0 = time.perf_counter()
        sys_ = example1(0.5, 0.5, alpha)
        d = detect_distortion(sys_)
        worst = max(worst, time.perf_counter() - t0)
        # generic alpha: neither bound state -4 nor +4 is an impulse eigenvalue
        generic = not sys_.rep_data["T3"].theta.pp_support.contains(4.0) and \
            not sys_.rep_data["T3"].theta.pp_support.contains(-4.0)
        if not generic or (d["lambda"], d["multiplicity"]) != (3, 1):
            fails.append((alpha, d))
    verdict(request, not fails and worst < 1.0,
            f"k=s=0.5, 4 generic alphas, Lambda=3 multiplicity 1; failures={fails} "
            f"slowest={worst:.3f}s (<1 s)")


def test_example2(request):
    t0 = time.perf_counter()
    sys_ = load_system(bundled("example2.json"))
    rep = build_ordered_representation(sys_)
    elapsed = time.perf_counter() - t0
    integers = RealSet.progression(sys_.window, 0, 1)
    e1 = [sys_.rep_data[op.id].mult_sets[0] for op in sys_.operators]
    pairwise = RealSet.empty(sys_.window)
    for a, b in combinations(e1, 2):
        pairwise = pairwise | (a & b)
    ok = (rep.lam == 3 and rep.spectral_multiplicity == 2 and rep.distorted
          and rep.mult_sets[1] == integers and rep.mult_sets[2].is_empty()
          and pairwise == rep.mult_sets[1] and elapsed < 1.0)
    verdict(request, ok, f"Lambda={rep.lam} multiplicity={rep.spectral_multiplicity} "
                         f"distorted={rep.distorted} s_2={rep.mult_sets[1]!r} "
                         f"s_3={rep.mult_sets[2]!r} pairwise-union-equal={pairwise == rep.mult_sets[1]} "
                         f"time={elapsed:.3f}s (<1 s)")


def test_multiplicity_set_oracle(request):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    bad, probes, null_hits = [], 0, 0
    for i in range(50):
        sys_ = random_symbolic_system(rng, max_slots=6, max_levels=3)
        r = oracle_agreement(sys_, grid=1001)
        probes += r["probes"]
        null_hits += r["mismatches"]["null-boundary"]
        if not r["agree"]:
            bad.append((i, r["examples"][:2]))
    elapsed = time.perf_counter() - t0
    verdict(request, not bad and elapsed < 30,
            f"50 systems, {probes} probes, atom/interior mismatches in {len(bad)} systems, "
            f"{null_hits} theta-null boundary mismatches; time={elapsed:.2f}s (<30 s)")


def test_coloring_optimality(request):
    rng = np.random.default_rng(77)
    t0 = time.perf_counter()
    bad, below, nodes = [], [], 0
    for i in range(100):
        sys_ = random_symbolic_system(rng, max_slots=9, max_levels=3)
        g = build_superposition_graph(sys_)
        nodes = max(nodes, len(g.nodes))
        part = spectral_index(sys_, g)
        if part.lam != brute_force_min_partition(g.nodes, probe_edges(sys_)):
            bad.append(i)
        if part.lam < max(sys_.multiplicities.values()):
            below.append(i)
    elapsed = time.perf_counter() - t0
    verdict(request, not bad and not below and nodes <= 9 and elapsed < 60,
            f"100 systems (<= {nodes} nodes), mismatches vs brute force={bad}, "
            f"Lambda < max m_i in {below}; time={elapsed:.2f}s (<60 s)")


def test_parseval_round_trip(request):
    t0 = time.perf_counter()
    worst = {"parseval": 0.0, "round_trip": 0.0, "truncation": 0.0}
    for name in PP_FIXTURES:
        sys_ = load_system(bundled(f"{name}.json"))
        rep = build_ordered_representation(sys_)
        kernels = build_kernels(sys_, rep)
        n_atoms = len(rep.theta_pp.positions)
        rng = np.random.default_rng(42)
        for _ in range(100):
            w = random_vector(sys_, rng)
            c = transform(sys_, kernels, w)
            worst["parseval"] = max(worst["parseval"], abs(c.parseval() - w.norm2()))
            worst["round_trip"] = max(worst["round_trip"],
                                      math.sqrt((w - expand(sys_, kernels, c)).norm2()))
            n = int(rng.integers(0, n_atoms + 1))
            err2 = (w - expand(sys_, kernels, c, n)).norm2()
            worst["truncation"] = max(worst["truncation"],
                                      abs(err2 - dropped_tail(kernels, c, n)))
    elapsed = time.perf_counter() - t0
    ok = all(v < 1e-10 for v in worst.values()) and elapsed < 10
    verdict(request, ok, ", ".join(f"{k}={v:.2e}" for k, v in worst.items())
            + f" (<1e-10) over 2x100 vectors; time={elapsed:.2f}s (<10 s)")


def _random_F(rng):
    a, b, c, d, e = rng.uniform(-2, 2, size=5)
    expr = f"{a:.6f}*exp(-{abs(b) + 0.01:.6f}*lam**2/100) + {c:.6f}*sin({d:.6f}*lam) " \
           f"+ I*{e:.6f}*cos(lam/7)"
    return expr, parse_function(expr)


def test_kernel_operator_equivalence(request):
    t0 = time.perf_counter()
    worst = 0.0
    for name in PP_FIXTURES:
        sys_ = load_system(bundled(f"{name}.json"))
        rep = build_ordered_representation(sys_)
        kernels = build_kernels(sys_, rep)
        full = RealSet.full(sys_.window)
        rng = np.random.default_rng(8)
        for _ in range(20):
            _, F = _random_F(rng)
            f = random_vector(sys_, rng)
            diff = kernel_operator(sys_, kernels, F, full).apply(f) - borel_calculus_apply(sys_, F, f)
            worst = max(worst, math.sqrt(diff.norm2()))
    elapsed = time.perf_counter() - t0
    verdict(request, worst < 1e-8 and elapsed < 10,
            f"max norm difference {worst:.2e} (<1e-8) over 2x20 (F, f); "
            f"time={elapsed:.2f}s (<10 s)")


def test_lagrange_identity(request):
    doc = load_json(bundled("laplacian_matrix.json"))
    t0 = time.perf_counter()
    A = matrix_from_dict(doc["matrix"])
    residuals, slopes = [], []
    for pair in doc["pairs"]:
        runs, slope = lagrange_convergence(
            A, pair["f"]["initial"], pair["g"]["initial"], panels=(2, 4, 8, 16, 32, 10_000),
            f_rhs=parse_function(pair["f"]["forcing"], "x"),
            g_rhs=parse_function(pair["g"]["forcing"], "x"))
        residuals.append(runs[-1].residual)
        slopes.append(slope)
    elapsed = time.perf_counter() - t0
    ok = (len(residuals) == 5 and max(residuals) < 1e-8
          and all(abs(s - 4) <= 0.3 for s in slopes) and elapsed < 5)
    verdict(request, ok, f"5 pairs, max residual at 1e4 panels {max(residuals):.2e} (<1e-8), "
                         f"fitted orders {[round(s, 3) for s in slopes]} (4 +- 0.3); "
                         f"time={elapsed:.2f}s (<5 s)")


def test_matrix_measure(request):
    t0 = time.perf_counter()
    herm = add = 0.0
    min_eig = math.inf
    for name in PP_FIXTURES:
        sys_ = load_system(bundled(f"{name}.json"))
        rep = build_ordered_representation(sys_)
        dec = analytic_decomposition(sys_, build_kernels(sys_, rep))
        lo, hi = sys_.window
        rng = np.random.default_rng(21)
        for _ in range(20):
            a, b = np.sort(rng.uniform(lo, hi, size=2))
            cut = rng.uniform(a, b)
            whole = RealSet.build(sys_.window, [(a, b, True, True)])
            left = RealSet.build(sys_.window, [(a, cut, True, False)])
            right = RealSet.build(sys_.window, [(cut, b, True, True)])
            r, r1, r2 = (matrix_measure(dec, rep.theta_pp, d) for d in (whole, left, right))
            herm = max(herm, r.hermitian_error())
            min_eig = min(min_eig, r.min_eigenvalue())
            add = max(add, float(np.max(np.abs(r.matrix - r1.matrix - r2.matrix))))
    elapsed = time.perf_counter() - t0
    ok = herm <= 1e-12 and min_eig >= -1e-10 and add <= 1e-12 and elapsed < 5
    verdict(request, ok, f"40 random Delta: hermitian error {herm:.1e}, min eigenvalue "
                         f"{min_eig:.3e} (>= -1e-10), additivity error {add:.1e} (<=1e-12); "
                         f"time={elapsed:.2f}s (<5 s)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
