# ----------------------------------------------------------------------
# |
# |  CouplingOptimizer_UnitTest.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-05 13:48:02
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""Unit tests for CouplingOptimizer.py"""

import numpy as np
import pytest

from OscillatorMemory.CouplingOptimizer import *
from OscillatorMemory.Errors import ConvergenceError, DimensionError, ModeMismatchError
from OscillatorMemory.Isolation import IsolatingF
from OscillatorMemory.MatKernel import Vec
from OscillatorMemory.MemoryMetrics import DeltaDerivatives0, MemoryTask, TauTaylor
from OscillatorMemory.NetworkModel import Assemble, ReplaceEnergyEdges

import TestHelpers


# ----------------------------------------------------------------------
def _RandomProblem(seed: int):
    rng = np.random.default_rng(seed)

    spec = TestHelpers.RandomValidSpec(rng, min_nodes=2, min_edges=1, max_edges=4)
    model = Assemble(spec)
    task = TestHelpers.IdentityTask(rng, model.n)

    return rng, spec, model, task


# ----------------------------------------------------------------------
def _RandomCandidate(rng, spec) -> EdgeUnknowns:
    return EdgeUnknowns(
        tuple((edge.j, edge.k) for edge in spec.energy_edges),
        tuple(rng.standard_normal(edge.R0_jk.shape) for edge in spec.energy_edges),
    )


# ----------------------------------------------------------------------
def _ObjectiveAt(spec, task, candidate: EdgeUnknowns) -> float:
    return DeltaDerivatives0(Assemble(ReplaceEnergyEdges(spec, candidate.blocks)), task)[1]


# ----------------------------------------------------------------------
class TestEdgeUnknowns:
    # ----------------------------------------------------------------------
    def test_Vector(self):
        spec = TestHelpers.TwoNodeLinkSpec()

        unknowns = EdgeUnknowns.FromSpec(spec)

        assert unknowns.edges == (("a", "b"),)
        assert unknowns.size == 4
        assert unknowns.ToVector()[:, 0].tolist() == [0.3, 0.0, 0.1, 0.2]

        restored = EdgeUnknowns.FromVector(spec, unknowns.ToVector())

        assert np.array_equal(restored.blocks[0], spec.energy_edges[0].R0_jk)

    # ----------------------------------------------------------------------
    def test_Zeros(self):
        unknowns = EdgeUnknowns.Zeros(TestHelpers.TwoNodeLinkSpec())

        assert np.array_equal(unknowns.blocks[0], np.zeros((2, 2)))

    # ----------------------------------------------------------------------
    def test_Empty(self):
        unknowns = EdgeUnknowns.FromSpec(TestHelpers.CanonicalSpec())

        assert unknowns.size == 0
        assert unknowns.ToVector().shape == (0, 1)

    # ----------------------------------------------------------------------
    def test_WrongSize(self):
        with pytest.raises(DimensionError):
            EdgeUnknowns.FromVector(TestHelpers.TwoNodeLinkSpec(), np.zeros((5, 1)))


# ----------------------------------------------------------------------
class TestOperators:
    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_QMatrix(self, seed):
        rng, spec, model, _ = _RandomProblem(seed)

        # A selection of fewer variables than the network has
        F = np.linalg.qr(rng.standard_normal((model.n, model.n)))[0][: model.n // 2]
        task = MemoryTask.Create(F, TestHelpers.RandomCovariance(rng, model.n))

        data = ObjectiveData.Create(model, task)

        for edge in spec.energy_edges:
            Q, asymmetry = QMatrix(data, edge.j, edge.k)
            N = rng.standard_normal(edge.R0_jk.shape)

            assert asymmetry <= 1e-12 * (1.0 + np.linalg.norm(Q))
            assert np.allclose(Q @ Vec(N), Vec(GApply(data, edge.j, edge.k, N)), rtol=0.0, atol=1e-10)
            assert np.max(np.linalg.eigvalsh(Q)) <= 1e-12 * (1.0 + np.linalg.norm(Q))

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_GApplyTransposeSymmetry(self, seed):
        rng, spec, model, task = _RandomProblem(seed)

        data = ObjectiveData.Create(model, task)

        for edge in spec.energy_edges:
            N = rng.standard_normal(edge.R0_jk.shape)

            assert np.allclose(
                GApply(data, edge.j, edge.k, N),
                GApply(data, edge.k, edge.j, N.T).T,
                rtol=0.0,
                atol=1e-10,
            )

    # ----------------------------------------------------------------------
    def test_GApplyWrongShape(self):
        model = Assemble(TestHelpers.TwoNodeLinkSpec())
        data = ObjectiveData.Create(model, TestHelpers.IdentityTask(np.random.default_rng(0), model.n))

        with pytest.raises(DimensionError):
            GApply(data, "a", "b", np.zeros((2, 3)))

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_ResidualIsScaledGradient(self, seed):
        rng, spec, model, task = _RandomProblem(seed)

        candidate = _RandomCandidate(rng, spec)

        residuals = Residuals(spec, model, task, candidate)
        gradient = GradientOracle(spec, model, task, candidate)

        for residual, per_edge in zip(residuals, gradient.per_edge):
            assert np.allclose(
                residual,
                -per_edge / 16.0,
                rtol=0.0,
                atol=1e-10 * (1.0 + np.abs(per_edge).max()),
            )

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(5))
    def test_GradientFiniteDifferences(self, seed):
        rng, spec, model, task = _RandomProblem(seed)

        candidate = _RandomCandidate(rng, spec)
        gradient = GradientOracle(spec, model, task, candidate)

        h = 1e-3

        for edge_index, block in enumerate(candidate.blocks):
            for row in range(block.shape[0]):
                for col in range(block.shape[1]):
                    # ----------------------------------------------------------------------
                    def Shifted(
                        delta: float,
                    ) -> EdgeUnknowns:
                        blocks = list(candidate.blocks)
                        blocks[edge_index] = blocks[edge_index].copy()
                        blocks[edge_index][row, col] += delta

                        return EdgeUnknowns(candidate.edges, tuple(blocks))

                    # ----------------------------------------------------------------------

                    # The objective is quadratic, so central differences are exact up to rounding
                    estimate = (_ObjectiveAt(spec, task, Shifted(h)) - _ObjectiveAt(spec, task, Shifted(-h))) / (
                        2.0 * h
                    )
                    expected = gradient.per_edge[edge_index][row, col]

                    assert abs(estimate - expected) <= 1e-6 * (1.0 + np.abs(gradient.full).max())


# ----------------------------------------------------------------------
class TestSolveGlobal:
    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_Stationary(self, seed):
        _, spec, model, task = _RandomProblem(seed)

        initial_norms = [np.linalg.norm(r) for r in Residuals(spec, model, task, EdgeUnknowns.Zeros(spec))]

        report = SolveGlobal(spec, model, task)

        scale = (1.0 + max(initial_norms)) * (1.0 + np.linalg.norm(report.solution.ToVector()))

        assert not report.non_unique
        assert 0.0 < report.global_system_rcond <= 1.0
        assert report.method == OptimizerMethod.global_
        assert report.mode == OptimizerMode.standard
        assert max(report.per_edge_residual_norms) <= 1e-8 * scale

        gradient = GradientOracle(spec, model, task, report.solution)

        for per_edge in gradient.per_edge:
            assert np.abs(per_edge).max() <= 1e-6 * scale

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_Minimizes(self, seed):
        rng, spec, model, task = _RandomProblem(seed)

        report = SolveGlobal(spec, model, task)

        assert report.objective_before == pytest.approx(DeltaDerivatives0(model, task)[1])
        assert report.objective_after <= report.objective_before + 1e-9 * (1.0 + abs(report.objective_before))
        assert report.objective_after == pytest.approx(_ObjectiveAt(spec, task, report.solution))

        for _ in range(50):
            scale = 10.0 ** rng.uniform(-3.0, 1.0)

            perturbed = EdgeUnknowns(
                report.solution.edges,
                tuple(block + scale * rng.standard_normal(block.shape) for block in report.solution.blocks),
            )

            assert report.objective_after <= _ObjectiveAt(spec, task, perturbed) + 1e-9 * (
                1.0 + abs(report.objective_after)
            )

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_SingleEdgeClosedForm(self, seed):
        rng = np.random.default_rng(seed)

        spec = TestHelpers.RandomValidSpec(rng, min_nodes=2, min_edges=1, max_edges=1)
        model = Assemble(spec)
        task = TestHelpers.IdentityTask(rng, model.n)

        assert len(spec.energy_edges) == 1
        edge = spec.energy_edges[0]

        data = ObjectiveData.Create(model, task)
        Q, _ = QMatrix(data, edge.j, edge.k)

        # With a single edge, every other energy term is the field-only energy matrix
        field_only = Assemble(ReplaceEnergyEdges(spec, [np.zeros_like(edge.R0_jk)])).R
        K = KApply(data, edge.j, edge.k, field_only, OptimizerMode.standard)

        expected = -np.linalg.solve(Q, Vec(K))

        report = SolveGlobal(spec, model, task)

        assert np.linalg.norm(report.solution.ToVector() - expected) <= 1e-8 * (1.0 + np.linalg.norm(expected))

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("method", list(OptimizerMethod))
    @pytest.mark.parametrize("seed", range(10))
    def test_TauHatDoesNotDecrease(self, seed, method):
        _, spec, model, task = _RandomProblem(seed)

        report = Optimize(spec, model, task, method, sweeps=20000, tol=1e-12)

        before = TauTaylor(model, task)
        after = TauTaylor(Assemble(report.optimized_spec), task)

        # tau'(0) depends on B alone, which the energy edges do not change
        assert after.tau1 == pytest.approx(before.tau1, rel=1e-12)
        assert after.tau2 >= before.tau2 - 1e-9 * (1.0 + abs(before.tau2))

        for eps in [1e-3, 1e-2, 1e-1]:
            assert after.Evaluate(eps) >= before.Evaluate(eps) - 1e-9 * (1.0 + abs(before.Evaluate(eps)))

    # ----------------------------------------------------------------------
    def test_OptimizedSpec(self):
        _, spec, model, task = _RandomProblem(3)

        report = SolveGlobal(spec, model, task)

        assert [node.id for node in report.optimized_spec.nodes] == [node.id for node in spec.nodes]
        assert len(report.optimized_spec.field_links) == len(spec.field_links)

        for edge, block in zip(report.optimized_spec.energy_edges, report.solution.blocks):
            assert np.array_equal(edge.R0_jk, block)

    # ----------------------------------------------------------------------
    def test_NoEdges(self):
        spec = TestHelpers.CanonicalSpec()
        model = Assemble(spec)
        task = TestHelpers.CanonicalTask()

        report = Optimize(spec, model, task)

        assert report.per_edge_residual_norms == []
        assert report.global_system_rcond == 1.0
        assert report.objective_after == report.objective_before == pytest.approx(-2.0)
        assert report.optimized_spec is spec


# ----------------------------------------------------------------------
class TestSolveFixedPoint:
    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("seed", range(10))
    def test_MatchesGlobal(self, seed):
        _, spec, model, task = _RandomProblem(seed)

        global_report = SolveGlobal(spec, model, task)
        fixed_report = Optimize(
            spec,
            model,
            task,
            OptimizerMethod.fixed_point,
            sweeps=20000,
            tol=1e-12,
        )

        expected = global_report.solution.ToVector()

        assert fixed_report.method == OptimizerMethod.fixed_point
        assert fixed_report.iterations == len(fixed_report.residual_history)
        assert fixed_report.residual_history[-1] <= 1e-12
        assert np.linalg.norm(fixed_report.solution.ToVector() - expected) <= 1e-6 * (
            1.0 + np.linalg.norm(expected)
        )
        assert fixed_report.objective_after == pytest.approx(global_report.objective_after, rel=1e-8, abs=1e-8)

    # ----------------------------------------------------------------------
    def test_NoEdges(self):
        spec = TestHelpers.CanonicalSpec()

        report = SolveFixedPoint(spec, Assemble(spec), TestHelpers.CanonicalTask())

        assert report.iterations == 0
        assert report.per_edge_residual_norms == []

    # ----------------------------------------------------------------------
    def test_NotConverged(self):
        _, spec, model, task = _RandomProblem(1)

        with pytest.raises(ConvergenceError) as ex:
            SolveFixedPoint(spec, model, task, sweeps=1, tol=0.0)

        assert ex.value.sweeps == 1
        assert len(ex.value.residual_history) == 1


# ----------------------------------------------------------------------
class TestIsolatedMode:
    # ----------------------------------------------------------------------
    @pytest.fixture
    def problem(self):
        spec = TestHelpers.FieldlessNodeSpec()
        model = Assemble(spec)
        task = MemoryTask.Create(
            IsolatingF(model),
            TestHelpers.RandomCovariance(np.random.default_rng(11), model.n),
        )

        return spec, model, task

    # ----------------------------------------------------------------------
    @pytest.mark.parametrize("method", list(OptimizerMethod))
    def test_MatchesStandard(self, problem, method):
        spec, model, task = problem

        isolated = Optimize(spec, model, task, method, OptimizerMode.isolated)
        standard = Optimize(spec, model, task, method, OptimizerMode.standard)

        assert isolated.mode == OptimizerMode.isolated
        assert np.allclose(
            isolated.solution.ToVector(),
            standard.solution.ToVector(),
            rtol=1e-8,
            atol=1e-10,
        )
        assert isolated.objective_after == pytest.approx(standard.objective_after, rel=1e-8, abs=1e-12)
        assert isolated.objective_after <= isolated.objective_before + 1e-12

    # ----------------------------------------------------------------------
    def test_ModeMismatch(self):
        spec = TestHelpers.TwoNodeLinkSpec()
        model = Assemble(spec)
        task = TestHelpers.IdentityTask(np.random.default_rng(0), model.n)

        for method in OptimizerMethod:
            with pytest.raises(ModeMismatchError):
                Optimize(spec, model, task, method, OptimizerMode.isolated)

        with pytest.raises(ModeMismatchError):
            KApply(ObjectiveData.Create(model, task), "a", "b", model.R, OptimizerMode.isolated)
