import math

import numpy as np
import pytest

from app.services import lfunc
from app.services.characters import character
from app.services.stats import (
    estimate_nF,
    geometric_checkpoints,
    nF_additivity_check,
    orthogonality_sum,
    pole_divergence_sum,
    selberg_sum,
)
from app.utils.errors import DegenerateFitError, DomainError, RealizationError

X = 1_000_000


@pytest.fixture(scope="module")
def zeta_big():
    """Zeta realized to the estimation range"""
    return lfunc.zeta(X)


class TestCheckpoints:
    """Tests for checkpoint ladders"""

    def test_geometric_from_sqrt(self):
        xs = geometric_checkpoints(1e6)
        assert xs[0] == pytest.approx(1000.0)
        assert xs[-1] == 1e6
        assert np.all(np.diff(xs) > 0)

    def test_rejects_ratio_one(self):
        with pytest.raises(DomainError):
            geometric_checkpoints(1e6, ratio=1.0)


class TestSeries:
    """Tests for cumulative prime sums"""

    def test_selberg_sum_counts_reciprocal_primes(self, zeta):
        series = selberg_sum(zeta, [10, 100])
        assert series.partial_sums[0].real == pytest.approx(1 / 2 + 1 / 3 + 1 / 5 + 1 / 7)
        assert series.kind == "selberg"

    def test_rows_mark_small_checkpoints(self, zeta):
        rows = selberg_sum(zeta, [2, 100]).rows()
        assert math.isnan(rows[0][3])
        assert rows[1][3] == pytest.approx(math.log(math.log(100)))

    def test_realization_exceeded(self, zeta):
        with pytest.raises(RealizationError):
            selberg_sum(zeta, [zeta.N + 1])

    def test_pole_divergence_increases(self, zeta):
        """Test sum a_p / p grows without bound for zeta at alpha = 0"""
        series = pole_divergence_sum(zeta, 0.0, [10, 100, 1000, 10_000])
        assert np.all(np.diff(series.partial_sums.real) > 0)

    def test_pole_divergence_oscillates_off_axis(self, zeta):
        series = pole_divergence_sum(zeta, 5.0, [1000, 10_000])
        assert abs(series.partial_sums[-1]) < 2.0

    def test_orthogonality_is_hermitian(self, delta):
        """Test swapping F and G conjugates every partial sum"""
        F = lfunc.dirichlet_l(character(7, 1), 10_000)
        for G in (lfunc.dirichlet_l(character(7, 3), 10_000), delta):
            xs = geometric_checkpoints(10_000, start=10)
            forward = orthogonality_sum(F, G, xs).partial_sums
            backward = orthogonality_sum(G, F, xs).partial_sums
            assert np.allclose(forward, np.conj(backward), rtol=0.0, atol=1e-13)

    def test_selberg_sum_is_monotone(self, delta):
        series = selberg_sum(delta, geometric_checkpoints(10_000, ratio=1.3, start=2.0))
        assert np.all(np.diff(series.partial_sums.real) >= 0)
        assert np.all(series.partial_sums.imag == 0)

    def test_pole_divergence_tracks_loglog(self, zeta):
        """Test sum 1/p - log log x settles near the Mertens constant over ten checkpoints"""
        xs = np.geomspace(10, 10_000, 10)
        series = pole_divergence_sum(zeta, 0.0, xs)
        assert len(series.checkpoints) == 10
        assert np.all(np.diff(series.partial_sums.real) > 0)
        assert series.partial_sums[-1].real - math.log(math.log(10_000)) == pytest.approx(0.2615, abs=0.02)
        bounded = pole_divergence_sum(zeta, 5.0, xs)
        assert np.all(np.abs(bounded.partial_sums) < 2.0)

    def test_orthogonality_mod_seven(self):
        F = lfunc.dirichlet_l(character(7, 1), 100_000)
        G = lfunc.dirichlet_l(character(7, 2), 100_000)
        series = orthogonality_sum(F, G, geometric_checkpoints(100_000, start=100))
        assert np.all(np.abs(series.partial_sums) <= 2.0)


@pytest.mark.slow
class TestOrthogonalityRange:
    """Tests for character sums out to 10^6"""

    def test_mod_seven_to_a_million(self):
        F = lfunc.dirichlet_l(character(7, 1), X)
        G = lfunc.dirichlet_l(character(7, 2), X)
        xs = np.geomspace(100, X, 10)
        cross = orthogonality_sum(F, G, xs)
        assert np.all(np.abs(cross.partial_sums) <= 2.0)
        own = orthogonality_sum(F, F, xs).partial_sums.real
        assert own[-1] - own[0] > 0.5
        assert own[-1] - own[0] > 5 * abs(cross.partial_sums[-1] - cross.partial_sums[0])


@pytest.mark.slow
class TestNFEstimate:
    """Tests for the n_F slope estimator"""

    def test_zeta(self, zeta_big):
        estimate = estimate_nF(zeta_big, X)
        assert abs(estimate.slope - 1.0) <= 0.15
        assert estimate.nearest_integer == 1

    def test_zeta_squared(self, zeta_big):
        report = nF_additivity_check([(zeta_big, 2)], X)
        assert report.target == 4
        assert report.coefficient_identity_holds
        assert report.distance <= 0.6

    def test_dirichlet_mod_five(self):
        F = lfunc.dirichlet_l(character(5, 1), X)
        assert abs(estimate_nF(F, X).slope - 1.0) <= 0.15

    def test_delta(self):
        estimate = estimate_nF(lfunc.delta(X), X)
        assert estimate.nearest_integer == 1

    def test_too_few_checkpoints(self, zeta):
        with pytest.raises(DegenerateFitError):
            estimate_nF(zeta, 1000, checkpoint_count=3)

    def test_rejects_small_x(self, zeta):
        with pytest.raises(DomainError):
            estimate_nF(zeta, 500)

    def test_additivity_needs_realization(self, zeta):
        with pytest.raises(RealizationError):
            nF_additivity_check([(zeta, 1)], 2 * zeta.N)
