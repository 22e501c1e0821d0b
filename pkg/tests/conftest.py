from functools import lru_cache
from itertools import permutations

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from ancillaw.algebra import BasisState, OneParticleKet, ProductKet, Spin, Statistics

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

POOL = [BasisState(m, s) for m in ("A", "B", "C") for s in Spin]


@lru_cache(maxsize=None)
def _perm_table(n):
    perms = np.array(list(permutations(range(n))))
    inversions = np.array([sum(p[i] > p[j] for i in range(n) for j in range(i + 1, n)) for p in perms])
    return perms, np.where(inversions % 2, -1, 1)


def perm_sum(m, signed):
    """O(n!) permutation-sum oracle written without the package's kernels."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    perms, signs = _perm_table(n)
    products = m[np.arange(n), perms].prod(axis=1)
    return complex((products * signs).sum() if signed else products.sum())


def random_ket(rng, pool=POOL, max_support=3):
    k = rng.integers(1, max_support + 1)
    idx = rng.choice(len(pool), size=k, replace=False)
    amps = rng.normal(size=k) + 1j * rng.normal(size=k)
    return OneParticleKet({pool[i]: a for i, a in zip(idx, amps)})


def random_product(rng, n_slots, stats, **kw):
    return ProductKet(tuple(random_ket(rng, **kw) for _ in range(n_slots)), stats)


complex_amp = st.builds(
    complex,
    st.floats(-1, 1, allow_nan=False).filter(lambda x: abs(x) > 1e-3),
    st.floats(-1, 1, allow_nan=False),
)

one_particle = st.dictionaries(st.sampled_from(POOL), complex_amp, min_size=1, max_size=3).map(OneParticleKet)
statistics = st.sampled_from(list(Statistics))


@st.composite
def product_kets(draw, min_slots=1, max_slots=4, stats=None):
    n = draw(st.integers(min_slots, max_slots))
    s = stats if stats is not None else draw(statistics)
    return ProductKet(tuple(draw(one_particle) for _ in range(n)), s)


@st.composite
def ket_pairs(draw, max_slots=4):
    n = draw(st.integers(1, max_slots))
    s = draw(statistics)
    a = ProductKet(tuple(draw(one_particle) for _ in range(n)), s)
    b = ProductKet(tuple(draw(one_particle) for _ in range(n)), s)
    return a, b


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
