import random
from fractions import Fraction as F

import numpy as np
import pytest

from arakelov.errors import InvalidMeasure, InvalidSurface
from arakelov.green_discrete import (
    DiscreteSurface,
    GreenKernel,
    change_of_measure,
    first_nonzero_eigenvalue,
    green_matrix,
    random_instance,
    spectral_bound_check,
    verify_green_identities,
)

HALF = (F(1, 2), F(1, 2))
TILT = (F(3, 4), F(1, 4))


@pytest.fixture
def two_point():
    return DiscreteSurface.build([[1, -1], [-1, 1]], HALF)


def test_two_point_kernels(two_point):
    assert green_matrix(two_point).G == ((F(1, 4), F(-1, 4)), (F(-1, 4), F(1, 4)))
    assert green_matrix(two_point, TILT).G == ((F(1, 16), F(-3, 16)), (F(-3, 16), F(9, 16)))


def test_two_point_change_of_measure(two_point):
    a, c = change_of_measure(two_point, HALF, TILT)
    assert a == [F(-1, 8), F(1, 8)]
    assert c == F(1, 16)
    assert change_of_measure(two_point, HALF, HALF) == ([0, 0], 0)


def test_two_point_spectral_check(two_point):
    sc = spectral_bound_check(two_point, HALF, TILT)
    assert sc.c_exact == F(1, 16)
    assert sc.f_norm_sq == F(1, 4)
    assert sc.lambda1 == pytest.approx(4, rel=1e-12)
    assert sc.bound_resolvent == pytest.approx(1 / 16, rel=1e-12)
    assert sc.bound_paper == pytest.approx(1 / 8, rel=1e-12)
    assert sc.holds()


def test_pseudoinverse_oracle():
    # G_nu = P Q^+ P^T with P = I - 1 nu^T, checked in floating point
    s, mu, nu = random_instance(99, 7)
    G = np.array(green_matrix(s, nu).G, dtype=float)
    P = np.eye(7) - np.outer(np.ones(7), np.array(nu, dtype=float))
    oracle = P @ np.linalg.pinv(np.array(s.Q, dtype=float)) @ P.T
    assert np.allclose(G, oracle, atol=1e-10)


def test_eigenvalue_oracle():
    s, mu, _ = random_instance(5, 9)
    D = np.diag([float(x) for x in mu])
    ev = np.sort(np.linalg.eigvals(np.linalg.solve(D, np.array(s.Q, dtype=float))).real)
    assert first_nonzero_eigenvalue(s, mu) == pytest.approx(ev[1], rel=1e-10)


@pytest.mark.parametrize("seed", range(60))
def test_random_instances_pass(seed):
    n = 2 + seed % 11
    s, mu, nu = random_instance(seed, n)
    rep = verify_green_identities(s, mu, nu)
    assert rep.passed, rep.first_failure
    assert spectral_bound_check(s, mu, nu).holds()


def test_equal_measures_degenerate():
    s, mu, _ = random_instance(3, 6)
    rep = verify_green_identities(s, mu, mu)
    assert rep.passed
    assert change_of_measure(s, mu, mu)[1] == 0


def test_broken_kernel_is_flagged():
    s, mu, nu = random_instance(8, 5)
    good = green_matrix(s, mu)
    rows = [list(r) for r in good.G]
    rows[1][2] += F(1, 1000)
    broken = GreenKernel(tuple(tuple(r) for r in rows), good.measure)
    rep = verify_green_identities(s, mu, nu, kernels=(broken, green_matrix(s, nu)))
    assert not rep.passed
    assert rep.first_failure == "g_mu: Q G = I - nu 1^T"


def test_invalid_inputs():
    with pytest.raises(InvalidSurface):
        DiscreteSurface.build([[1, -1, 0, 0], [-1, 1, 0, 0], [0, 0, 1, -1], [0, 0, -1, 1]], [F(1, 4)] * 4)
    with pytest.raises(InvalidSurface):
        DiscreteSurface.build([[1, -2], [-1, 1]], HALF)
    with pytest.raises(InvalidSurface):
        DiscreteSurface.build([[-1, 1], [1, -1]], HALF)
    with pytest.raises(InvalidMeasure):
        DiscreteSurface.build([[1, -1], [-1, 1]], (F(1, 2), F(1, 3)))
    with pytest.raises(InvalidMeasure):
        DiscreteSurface.build([[1, -1], [-1, 1]], (1, 0))


def test_random_instance_is_reproducible():
    a, b = random_instance(42, 8), random_instance(42, 8)
    assert a == b
    rng = random.Random(0)
    assert random_instance(rng.randrange(100), 4)[0].n == 4
