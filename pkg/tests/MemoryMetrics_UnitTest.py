# ----------------------------------------------------------------------
# |
# |  MemoryMetrics_UnitTest.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-04 15:27:51
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""Unit tests for MemoryMetrics.py"""

import math

import numpy as np
import pytest

from OscillatorMemory.Errors import DimensionError, DomainError, IsolatedRegimeError
from OscillatorMemory.Isolation import IsolatingF
from OscillatorMemory.MatKernel import Expm, GramianMethod
from OscillatorMemory.MemoryMetrics import *
from OscillatorMemory.NetworkModel import Assemble

import TestHelpers


# ----------------------------------------------------------------------
@pytest.fixture
def canonical():
    return Assemble(TestHelpers.CanonicalSpec()), TestHelpers.CanonicalTask()


# ----------------------------------------------------------------------
class TestCanonical:
    # ----------------------------------------------------------------------
    def test_DeltaStar(self, canonical):
        _, task = canonical

        assert DeltaStar(task) == pytest.approx(1.0, abs=1e-15)

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("method", list(GramianMethod))
    def test_Deviation(self, canonical, method):
        model, task = canonical

        for t in [0.0, 0.01, 0.5, 1.0, 3.0]:
            assert Deviation(model, task, t, method) == pytest.approx(
                2.0 * (1.0 - math.exp(-t)),
                abs=1e-10,
            )

    # ----------------------------------------------------------------------
    def test_Derivatives(self, canonical):
        model, task = canonical

        first, second = DeltaDerivatives0(model, task)

        assert first == pytest.approx(2.0, abs=1e-14)
        assert second == pytest.approx(-2.0, abs=1e-14)

    # ----------------------------------------------------------------------
    def test_Curve(self, canonical):
        model, task = canonical

        curve = CalculateDeviationCurve(model, task)

        assert curve.grid.shape == (DEFAULT_CURVE_POINTS,)
        assert curve.grid[0] == 0.0
        assert curve.grid[-1] == pytest.approx(CURVE_HORIZON_FACTOR / math.sqrt(2.0))
        assert np.max(np.abs(curve.values - 2.0 * (1.0 - np.exp(-curve.grid)))) <= 1e-8
        assert curve.deriv0 == pytest.approx(2.0)
        assert curve.deriv2_0 == pytest.approx(-2.0)

    # ----------------------------------------------------------------------
    def test_CurveNonUniformGrid(self, canonical):
        model, task = canonical

        grid = [0.1, 0.2, 0.5, 1.5, 4.0]
        curve = CalculateDeviationCurve(model, task, grid)

        assert np.max(np.abs(curve.values - 2.0 * (1.0 - np.exp(-np.array(grid))))) <= 1e-10

    # ----------------------------------------------------------------------
    def test_DecoherenceTime(self, canonical):
        model, task = canonical

        result = DecoherenceTime(model, task, 0.01)

        assert result.reached
        assert not result.tangent
        assert result.threshold == pytest.approx(0.01)
        assert result.tau == pytest.approx(-math.log(0.995), abs=1e-10)
        assert result.tau == pytest.approx(5.01254e-3, abs=1e-8)

    # ----------------------------------------------------------------------
    def test_DecoherenceTimeNotReached(self, canonical):
        model, task = canonical

        # Delta(t) never exceeds 2, so eps = 3 cannot be reached
        result = DecoherenceTime(model, task, 3.0, t_max=10.0)

        assert not result.reached
        assert result.tau is None
        assert result.horizon == 10.0

    # ----------------------------------------------------------------------
    def test_TauTaylor(self, canonical):
        model, task = canonical

        result = TauTaylor(model, task)

        assert result.tau1 == pytest.approx(0.5, abs=1e-12)
        assert result.tau2 == pytest.approx(0.25, abs=1e-12)
        assert result.Evaluate(0.01) == pytest.approx(5.0125e-3, abs=1e-15)

    # ----------------------------------------------------------------------
    def test_TaylorRemainder(self, canonical):
        model, task = canonical

        ratios = []

        for eps in [1e-1, 1e-2, 1e-3]:
            tau = DecoherenceTime(model, task, eps).tau
            assert tau is not None

            ratios.append(abs(tau - TauTaylor(model, task).Evaluate(eps)) / eps**3)

        assert max(ratios) <= 3.0 * min(ratios)

    # ----------------------------------------------------------------------
    def test_SecondMoment(self, canonical):
        model, task = canonical

        real, imag = SecondMoment(model, task, 0.7)

        assert float(np.sum(task.Sigma * real)) == pytest.approx(Deviation(model, task, 0.7))
        assert np.allclose(imag, -imag.T, rtol=0.0, atol=1e-13)

    # ----------------------------------------------------------------------
    def test_NoncommutativityCheck(self, canonical):
        model, task = canonical

        assert NoncommutativityCheck(task, model.Theta)
        assert not NoncommutativityCheck(MemoryTask.Create([[1.0, 0.0]], task.P), model.Theta)


# ----------------------------------------------------------------------
class TestValidateTask:
    # ----------------------------------------------------------------------
    def test_Valid(self, canonical):
        model, task = canonical

        assert ValidateTask(task, model.Theta) == []
        EnsureValidTask(task, model.Theta)

    # ----------------------------------------------------------------------
    def test_Shapes(self, canonical):
        model, _ = canonical

        violations = ValidateTask(MemoryTask.Create(np.eye(3), np.eye(3)), model.Theta)

        assert len(violations) == 2
        assert "F must have 2 columns" in violations[0]
        assert "P must be 2x2" in violations[1]

    # ----------------------------------------------------------------------
    def test_RankDeficient(self, canonical):
        model, task = canonical

        violations = ValidateTask(MemoryTask.Create([[1.0, 0.0], [2.0, 0.0]], task.P), model.Theta)

        assert any("full row rank" in violation for violation in violations)

    # ----------------------------------------------------------------------
    def test_Unphysical(self, canonical):
        model, task = canonical

        violations = ValidateTask(MemoryTask.Create(task.F, 0.1 * np.eye(2)), model.Theta)

        assert len(violations) == 1
        assert "positive semidefinite" in violations[0]

    # ----------------------------------------------------------------------
    def test_Asymmetric(self, canonical):
        model, task = canonical

        violations = ValidateTask(MemoryTask.Create(task.F, [[1.0, 0.5], [0.0, 1.0]]), model.Theta)

        assert "P must be symmetric." in violations

    # ----------------------------------------------------------------------
    def test_BadEpsilon(self, canonical):
        model, task = canonical

        violations = ValidateTask(MemoryTask.Create(task.F, task.P, [0.01, -1.0]), model.Theta)

        assert violations == ["Fidelity levels must be positive (-1.0)."]

        with pytest.raises(DomainError, match="is not valid"):
            EnsureValidTask(MemoryTask.Create(task.F, task.P, [0.0]), model.Theta)


# ----------------------------------------------------------------------
class TestErrors:
    # ----------------------------------------------------------------------
    def test_NegativeTime(self, canonical):
        model, task = canonical

        with pytest.raises(DomainError):
            Deviation(model, task, -1.0)

        with pytest.raises(DomainError):
            SecondMoment(model, task, -1.0)

    # ----------------------------------------------------------------------
    def test_NonConforming(self, canonical):
        model, _ = canonical

        with pytest.raises(DimensionError):
            Deviation(model, MemoryTask.Create(np.eye(4), np.eye(4)), 1.0)

    # ----------------------------------------------------------------------
    def test_BadEpsilon(self, canonical):
        model, task = canonical

        with pytest.raises(DomainError):
            DecoherenceTime(model, task, 0.0)

    # ----------------------------------------------------------------------
    def test_BadGrid(self, canonical):
        model, task = canonical

        with pytest.raises(DomainError):
            CalculateDeviationCurve(model, task, [0.0, 0.5, 0.5])

        with pytest.raises(DomainError):
            CalculateDeviationCurve(model, task, points=1)

    # ----------------------------------------------------------------------
    def test_IsolatedRegime(self):
        model = Assemble(TestHelpers.FieldlessNodeSpec())
        task = MemoryTask.Create(IsolatingF(model), 0.5 * np.eye(4))

        with pytest.raises(IsolatedRegimeError):
            TauTaylor(model, task)


# ----------------------------------------------------------------------
class TestRandomModels:
    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_ImaginaryGramianIdentity(self, seed):
        model = Assemble(TestHelpers.RandomValidSpec(np.random.default_rng(seed)))

        t = 0.5 / np.linalg.norm(model.A)
        transition = Expm(t * model.A)

        _, imag = LambdaParts(model, t)
        expected = model.Theta - transition @ model.Theta @ transition.T

        assert np.linalg.norm(imag - expected) <= 1e-8 * max(np.linalg.norm(expected), 1e-300)

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_LambdaDerivatives(self, seed):
        model = Assemble(TestHelpers.RandomValidSpec(np.random.default_rng(seed)))

        (first_real, first_imag), (second_real, _) = LambdaDerivatives0(model)

        assert np.array_equal(first_real, model.B @ model.B.T)
        assert np.array_equal(first_imag, model.B @ model.Jmat @ model.B.T)
        assert np.allclose(second_real, second_real.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(second_real).max()))

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_CurveMatchesDeviation(self, seed):
        rng = np.random.default_rng(seed)

        model = Assemble(TestHelpers.RandomValidSpec(rng))
        task = TestHelpers.IdentityTask(rng, model.n)

        curve = CalculateDeviationCurve(model, task, points=20)

        for index in [1, 7, 19]:
            expected = Deviation(model, task, float(curve.grid[index]))
            assert abs(curve.values[index] - expected) <= 1e-8 * (1.0 + abs(expected))

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_SecondDerivative(self, seed):
        rng = np.random.default_rng(seed)

        model = Assemble(TestHelpers.RandomValidSpec(rng, min_nodes=2))
        task = TestHelpers.IdentityTask(rng, model.n)

        first, second = DeltaDerivatives0(model, task)

        a = np.linalg.norm(model.A)
        t = 1e-3 / a

        estimate = 2.0 * (Deviation(model, task, t) - first * t) / (t * t)

        # The third derivative is bounded by ||Sigma|| (6 a^3 ||P|| + 4 a^2 ||B B^T||)
        bound = 1e-2 * np.linalg.norm(task.Sigma) * (
            a * a * np.linalg.norm(task.P) + a * np.linalg.norm(model.B @ model.B.T)
        )

        assert abs(estimate - second) <= bound

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(20))
    def test_FirstDerivativeRichardson(self, seed):
        rng = np.random.default_rng(seed)

        model = Assemble(TestHelpers.RandomValidSpec(rng))
        task = TestHelpers.IdentityTask(rng, model.n)

        first, _ = DeltaDerivatives0(model, task)

        a = np.linalg.norm(model.A)
        h = 1e-3 / a

        # Delta(0) = 0, so Delta(h) / h = Delta'(0) + Delta''(0) h / 2 + O(h^2)
        estimate = 2.0 * Deviation(model, task, h / 2) / (h / 2) - Deviation(model, task, h) / h

        bound = 1e-6 * np.linalg.norm(task.Sigma) * (a * np.linalg.norm(task.P) + np.linalg.norm(model.B @ model.B.T))

        assert first > 0.0
        assert abs(estimate - first) <= bound

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(20))
    def test_FirstHitting(self, seed):
        rng = np.random.default_rng(seed)

        model = Assemble(TestHelpers.RandomValidSpec(rng, max_nodes=3))
        task = TestHelpers.IdentityTask(rng, model.n)

        result = DecoherenceTime(model, task, 1e-3)

        assert result.reached
        assert result.threshold == pytest.approx(1e-3 * DeltaStar(task))

        for t in np.linspace(0.0, result.tau, 50)[1:-1]:
            assert Deviation(model, task, float(t)) < result.threshold

        assert abs(Deviation(model, task, result.tau) - result.threshold) <= 1e-8 * result.threshold

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(20))
    def test_MonotoneInEpsilon(self, seed):
        rng = np.random.default_rng(seed)

        model = Assemble(TestHelpers.RandomValidSpec(rng, max_nodes=3))
        task = TestHelpers.IdentityTask(rng, model.n)

        results = [DecoherenceTime(model, task, eps) for eps in [1e-4, 1e-3, 1e-2, 1e-1]]
        taus = [result.tau for result in results if result.reached]

        assert results[0].reached

        # Levels that are not reached before the horizon come last
        assert all(result.reached for result in results[: len(taus)])
        assert all(lower < upper for lower, upper in zip(taus, taus[1:]))
