import numpy as np
import pytest

from emz_spectral.catalog import OperatorSpec, OrderedRepData, SymbolicSpectral
from emz_spectral.realset import RealSet, SpectralMeasureClass
from emz_spectral.systemio import bundled, load_system
from emz_spectral.vectorop import EMZSystem

WINDOW = (-10.0, 10.0)


def _random_set(rng, window=WINDOW, max_iv=2, max_atoms=4):
    lo, hi = int(window[0]), int(window[1])
    ivs = []
    for _ in range(rng.integers(0, max_iv + 1)):
        a, b = sorted(rng.choice(np.arange(lo, hi + 1), size=2, replace=False))
        ivs.append((float(a), float(b), bool(rng.integers(2)), bool(rng.integers(2))))
    atoms = [float(x) for x in rng.integers(lo, hi + 1, size=rng.integers(0, max_atoms + 1))]
    return RealSet.build(window, ivs, atoms)


def random_symbolic_system(rng, max_slots=6, max_levels=3, window=WINDOW):
    """Symbolic operators with integer-endpoint supports and nested e_k,
    at most ``max_slots`` slots in total."""
    ops, slots, i = [], 0, 0
    target = int(rng.integers(1, max_slots + 1))
    while slots < target:
        support = _random_set(rng, window)
        if support.is_empty():
            continue
        theta = SpectralMeasureClass.from_set(support)
        if theta.is_null():
            continue
        levels = [theta.support()]
        for _ in range(int(rng.integers(0, max_levels))):
            nxt = levels[-1] & _random_set(rng, window, max_iv=2, max_atoms=6)
            if theta.restrict(nxt).is_null():
                break
            levels.append(nxt)
        levels = levels[:target - slots]
        ops.append(OperatorSpec(f"S{i}", SymbolicSpectral(OrderedRepData(theta, levels))))
        slots += len(levels)
        i += 1
    return EMZSystem(ops, window)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fixture_system():
    return lambda name, **kw: load_system(bundled(f"{name}.json"), **kw)
