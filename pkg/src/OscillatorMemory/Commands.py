# ----------------------------------------------------------------------
# |
# |  Commands.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-06 14:31:09
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""Implements the functionality invoked by the command line."""

import datetime
import json

from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator, Optional

from dbrownell_Common.InflectEx import inflect  # type: ignore[import-untyped]
from dbrownell_Common.Streams.Capabilities import Capabilities  # type: ignore[import-untyped]
from dbrownell_Common.Streams.DoneManager import DoneManager  # type: ignore[import-untyped]
from rich.table import Table

from OscillatorMemory import CouplingOptimizer, Isolation, MemoryMetrics, NetworkModel
from OscillatorMemory.Errors import (
    DegenerateAsymptoticsError,
    IsolatedRegimeError,
    OscillatorMemoryError,
    ValidationError,
)
from OscillatorMemory.Impl import Common
from OscillatorMemory.MemoryMetrics import MemoryTask
from OscillatorMemory.NetworkModel import AugmentedModel
from OscillatorMemory.RunConfig import DocumentWithNetwork, LoadConfig, Overrides, RunConfig


# ----------------------------------------------------------------------
# |
# |  Public Types
# |
# ----------------------------------------------------------------------
MODEL_FILENAME = "model.json"
CURVE_FILENAME = "curve.csv"
CURVE_INFO_FILENAME = "curve.json"
DECOHERENCE_FILENAME = "decoherence.json"
OPTIMIZE_FILENAME = "optimize.json"
NETWORK_FILENAME = "network.json"
ISOLATE_FILENAME = "isolate.json"
VALIDATE_FILENAME = "validate.json"

REGIME_LINEAR = "linear"
REGIME_SQRT = "sqrt"


# ----------------------------------------------------------------------
# |
# |  Public Functions
# |
# ----------------------------------------------------------------------
def Validate(
    dm: DoneManager,
    config_filename: Path,
    overrides: Optional[Overrides] = None,
) -> None:
    """Writes the violations and notes for the network and task"""

    # ----------------------------------------------------------------------
    def Impl(
        config: RunConfig,
    ) -> None:
        with dm.Nested(
            "Validating the network...",
            lambda: inflect.no("violation", len(report.violations)),
        ):
            report = NetworkModel.ValidateSpec(config.network)

        task_violations: list[str] = []

        if report.is_valid:
            with dm.Nested(
                "Validating the memory task...",
                lambda: inflect.no("violation", len(task_violations)),
            ):
                model = NetworkModel.Assemble(config.network)
                task_violations += MemoryMetrics.ValidateTask(config.task, model.Theta)

        for note in report.notes:
            dm.WriteInfo(f"{note}\n")

        for violation in report.violations:
            dm.WriteError(f"{violation}\n")

        for violation in task_violations:
            dm.WriteError(f"task: {violation}\n")

        _WriteJson(
            dm,
            config,
            VALIDATE_FILENAME,
            {
                "valid": report.is_valid and not task_violations,
                "violations": [
                    {
                        "location": violation.location,
                        "rule": violation.rule,
                        "message": violation.message,
                    }
                    for violation in report.violations
                ],
                "task_violations": task_violations,
                "notes": report.notes,
            },
        )

        if report.violations or task_violations:
            dm.result = ValidationError.exit_code

    # ----------------------------------------------------------------------

    _Execute(dm, config_filename, overrides, Impl)


# ----------------------------------------------------------------------
def Assemble(
    dm: DoneManager,
    config_filename: Path,
    overrides: Optional[Overrides] = None,
) -> None:
    """Writes the augmented model matrices"""

    # ----------------------------------------------------------------------
    def Impl(
        config: RunConfig,
    ) -> None:
        model = _AssembleModel(dm, config)

        pr_residual = NetworkModel.PrResidual(model)
        pr_acceptable = NetworkModel.IsPrResidualAcceptable(model)

        dm.WriteInfo(f"Physical realizability residual: {pr_residual:.3e}\n")

        if not pr_acceptable:
            dm.WriteWarning("The physical realizability residual exceeds the tolerance.\n")

        _WriteJson(
            dm,
            config,
            MODEL_FILENAME,
            {
                "n": model.n,
                "m": model.m,
                "node_ids": list(model.node_ids),
                "state_ranges": {k: Common.RangeToJson(v) for k, v in model.state_ranges.items()},
                "field_ranges": {k: Common.RangeToJson(v) for k, v in model.field_ranges.items()},
                "Theta": Common.MatToJson(model.Theta),
                "J": Common.MatToJson(model.Jmat),
                "M": Common.MatToJson(model.M),
                "R": Common.MatToJson(model.R),
                "A": Common.MatToJson(model.A),
                "B": Common.MatToJson(model.B),
                "pr_residual": pr_residual,
                "pr_acceptable": pr_acceptable,
            },
        )

    # ----------------------------------------------------------------------

    _Execute(dm, config_filename, overrides, Impl)


# ----------------------------------------------------------------------
def Simulate(
    dm: DoneManager,
    config_filename: Path,
    overrides: Optional[Overrides] = None,
) -> None:
    """Writes Delta(t) on a uniform grid along with the threshold eps * Delta_* for each eps"""

    # ----------------------------------------------------------------------
    def Impl(
        config: RunConfig,
    ) -> None:
        model = _AssembleModel(dm, config)
        MemoryMetrics.EnsureValidTask(config.task, model.Theta)

        with dm.Nested(
            "Calculating the deviation curve...",
            lambda: inflect.no("point", config.solver.grid_points),
        ):
            curve = MemoryMetrics.CalculateDeviationCurve(
                model,
                config.task,
                t_end=config.solver.t_end,
                points=config.solver.grid_points,
                method=config.solver.gramian,
            )

        delta_star = MemoryMetrics.DeltaStar(config.task)
        thresholds = [eps * delta_star for eps in config.task.epsilons]

        lines: list[str] = []

        if config.output.timestamp:
            lines.append(f"# generated {_Now()}")

        lines.append(",".join(["t", "delta"] + [f"threshold_{eps!r}" for eps in config.task.epsilons]))

        for t, value in zip(curve.grid, curve.values):
            lines.append(
                ",".join(Common.FormatCsvFloat(item) for item in [t, value] + thresholds),
            )

        _WriteText(dm, config, CURVE_FILENAME, "\n".join(lines) + "\n")

        _WriteJson(
            dm,
            config,
            CURVE_INFO_FILENAME,
            {
                "points": int(curve.grid.size),
                "t_end": float(curve.grid[-1]),
                "gramian": config.solver.gramian.value,
                "delta_star": delta_star,
                "delta_dot_0": curve.deriv0,
                "delta_ddot_0": curve.deriv2_0,
                "epsilons": list(config.task.epsilons),
            },
        )

    # ----------------------------------------------------------------------

    _Execute(dm, config_filename, overrides, Impl)


# ----------------------------------------------------------------------
def Decoherence(
    dm: DoneManager,
    config_filename: Path,
    overrides: Optional[Overrides] = None,
) -> None:
    """Writes tau(eps) and its high-fidelity approximation for each eps"""

    # ----------------------------------------------------------------------
    def Impl(
        config: RunConfig,
    ) -> None:
        model = _AssembleModel(dm, config)
        MemoryMetrics.EnsureValidTask(config.task, model.Theta)

        regime, taylor = _Regime(model, config.task)

        dm.WriteVerbose(f"Regime: {regime}\n")

        rows = _DecoherenceRows(dm, config, model, config.task, regime)

        _DisplayTable(dm, "Decoherence times", rows)

        _WriteJson(
            dm,
            config,
            DECOHERENCE_FILENAME,
            {
                "regime": regime,
                "delta_star": MemoryMetrics.DeltaStar(config.task),
                "tau_prime_0": None if taylor is None else Common.FloatToJson(taylor.tau1),
                "tau_double_prime_0": None if taylor is None else Common.FloatToJson(taylor.tau2),
                "rows": rows,
            },
        )

    # ----------------------------------------------------------------------

    _Execute(dm, config_filename, overrides, Impl)


# ----------------------------------------------------------------------
def Optimize(
    dm: DoneManager,
    config_filename: Path,
    overrides: Optional[Overrides] = None,
) -> None:
    """Optimizes the direct energy coupling blocks and writes the report and the updated network"""

    # ----------------------------------------------------------------------
    def Impl(
        config: RunConfig,
    ) -> None:
        model = _AssembleModel(dm, config)
        MemoryMetrics.EnsureValidTask(config.task, model.Theta)

        with dm.Nested(
            "Optimizing {}...".format(inflect.no("energy edge", len(config.network.energy_edges))),
            suffix="\n" if dm.is_verbose else "",
        ) as optimize_dm:
            report = CouplingOptimizer.Optimize(
                config.network,
                model,
                config.task,
                config.solver.optimizer,
                config.solver.mode,
                sweeps=config.solver.max_sweeps,
                tol=config.solver.fixed_point_tol,
            )

            optimize_dm.WriteVerbose(f"rcond: {report.global_system_rcond:.3e}\n")

            if report.method == CouplingOptimizer.OptimizerMethod.fixed_point:
                optimize_dm.WriteVerbose("{}\n".format(inflect.no("sweep", report.iterations)))

            if report.non_unique:
                optimize_dm.WriteWarning(
                    "The optimality system is singular; the minimum-norm solution was used.\n",
                )

        dm.WriteInfo(
            "Objective: {:.6e} -> {:.6e}\n".format(report.objective_before, report.objective_after),
        )

        optimized_model = NetworkModel.Assemble(report.optimized_spec)

        tau_hat_rows: list[dict[str, Any]] = []
        tau_rows: list[dict[str, Any]] = []

        with dm.Nested(
            "Calculating decoherence times...",
            lambda: inflect.no("fidelity level", len(tau_rows)),
        ):
            for eps in config.task.epsilons:
                tau_hat_rows.append(
                    {
                        "eps": eps,
                        "before": _TauHat(model, config.task, eps),
                        "after": _TauHat(optimized_model, config.task, eps),
                    },
                )

                tau_rows.append(
                    {
                        "eps": eps,
                        "before": _Tau(config, model, eps),
                        "after": _Tau(config, optimized_model, eps),
                    },
                )

        _WriteJson(
            dm,
            config,
            OPTIMIZE_FILENAME,
            {
                "mode": report.mode.value,
                "method": report.method.value,
                "objective_before": report.objective_before,
                "objective_after": report.objective_after,
                "global_system_rcond": report.global_system_rcond,
                "non_unique": report.non_unique,
                "iterations": report.iterations,
                "residual_history": report.residual_history,
                "edges": [
                    {
                        "j": j,
                        "k": k,
                        "R0": Common.MatToJson(block),
                        "residual_norm": residual_norm,
                    }
                    for (j, k), block, residual_norm in zip(
                        report.solution.edges,
                        report.solution.blocks,
                        report.per_edge_residual_norms,
                    )
                ],
                "tau_hat": tau_hat_rows,
                "tau": tau_rows,
            },
        )

        _WriteJson(
            dm,
            config,
            NETWORK_FILENAME,
            DocumentWithNetwork(config, report.optimized_spec),
        )

    # ----------------------------------------------------------------------

    _Execute(dm, config_filename, overrides, Impl)


# ----------------------------------------------------------------------
def Isolate(
    dm: DoneManager,
    config_filename: Path,
    overrides: Optional[Overrides] = None,
) -> None:
    """Decomposes the network around an isolating F and writes the square-root regime decoherence times"""

    # ----------------------------------------------------------------------
    def Impl(
        config: RunConfig,
    ) -> None:
        model = _AssembleModel(dm, config)

        d = Isolation.IsolationDim(model)
        dm.WriteInfo(f"Isolation dimension: {d}\n")

        if Common.IsIsolating(config.task.F, model.B):
            F = config.task.F
            dm.WriteVerbose("The configured F isolates the subnetwork.\n")
        else:
            F = Isolation.IsolatingF(model, config.solver.isolation_rows)

        with dm.Nested("Decomposing the network..."):
            result = Isolation.Decompose(model, F)

        task = MemoryTask(result.F, config.task.P, config.task.epsilons)
        MemoryMetrics.EnsureValidTask(task, model.Theta)

        if not MemoryMetrics.NoncommutativityCheck(task, model.Theta):
            dm.WriteVerbose("F Theta F^T = 0 for the isolating F.\n")

        rows = _DecoherenceRows(dm, config, model, task, REGIME_SQRT)

        _DisplayTable(dm, "Isolated decoherence times", rows)

        _WriteJson(
            dm,
            config,
            ISOLATE_FILENAME,
            {
                "d": result.d,
                "s": result.s,
                "F": Common.MatToJson(result.F),
                "T": Common.MatToJson(result.T),
                "a11": Common.MatToJson(result.a11),
                "a12": Common.MatToJson(result.a12),
                "a21": Common.MatToJson(result.a21),
                "a22": Common.MatToJson(result.a22),
                "b": Common.MatToJson(result.b),
                "G": Common.MatToJson(result.G),
                "fb_norm": result.fb_norm,
                "phidot_residual": result.phidot_residual,
                "per_node_fb01": result.per_node_fb01,
                "delta_star": MemoryMetrics.DeltaStar(task),
                "delta_ddot_0": Isolation.IsolatedDeltaSecond(model, task),
                "rows": rows,
            },
        )

    # ----------------------------------------------------------------------

    _Execute(dm, config_filename, overrides, Impl)


# ----------------------------------------------------------------------
# |
# |  Private Functions
# |
# ----------------------------------------------------------------------
def _Execute(
    dm: DoneManager,
    config_filename: Path,
    overrides: Optional[Overrides],
    func: Callable[[RunConfig], None],
) -> None:
    with _HandleErrors(dm, config_filename):
        with dm.Nested(f"Loading '{config_filename}'..."):
            config = LoadConfig(config_filename).ApplyOverrides(overrides)

        func(config)


# ----------------------------------------------------------------------
@contextmanager
def _HandleErrors(
    dm: DoneManager,
    config_filename: Path,
) -> Iterator[None]:
    try:
        yield

    except OscillatorMemoryError as ex:
        dm.WriteError(f"{config_filename}: {ex}\n")
        dm.result = ex.exit_code


# ----------------------------------------------------------------------
def _AssembleModel(
    dm: DoneManager,
    config: RunConfig,
) -> AugmentedModel:
    with dm.Nested(
        "Assembling {}...".format(inflect.no("node", len(config.network.nodes))),
    ) as assemble_dm:
        model = NetworkModel.Assemble(config.network)

        for note in NetworkModel.ValidateSpec(config.network).notes:
            assemble_dm.WriteVerbose(f"{note}\n")

        return model


# ----------------------------------------------------------------------
def _Regime(
    model: AugmentedModel,
    task: MemoryTask,
) -> tuple[str, Optional[MemoryMetrics.TaylorCoefficients]]:
    try:
        return REGIME_LINEAR, MemoryMetrics.TauTaylor(model, task)
    except IsolatedRegimeError:
        return REGIME_SQRT, None


# ----------------------------------------------------------------------
def _TauHat(
    model: AugmentedModel,
    task: MemoryTask,
    eps: float,
    regime: Optional[str] = None,
) -> Optional[float]:
    if regime != REGIME_SQRT:
        regime, taylor = _Regime(model, task)

        if regime == REGIME_LINEAR:
            assert taylor is not None
            return Common.FloatToJson(taylor.Evaluate(eps))

    try:
        return Isolation.TauSqrtFromModel(model, task, eps)
    except DegenerateAsymptoticsError:
        return None


# ----------------------------------------------------------------------
def _Tau(
    config: RunConfig,
    model: AugmentedModel,
    eps: float,
) -> Optional[float]:
    """Decoherence time, or None when the threshold is not reached before the horizon"""

    hitting_time = MemoryMetrics.DecoherenceTime(
        model,
        config.task,
        eps,
        t_max=config.solver.t_max,
        method=config.solver.gramian,
    )

    return Common.FloatToJson(hitting_time.tau)


# ----------------------------------------------------------------------
def _DecoherenceRows(
    dm: DoneManager,
    config: RunConfig,
    model: AugmentedModel,
    task: MemoryTask,
    regime: str,
) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []

    with dm.Nested(
        "Calculating decoherence times...",
        lambda: inflect.no("fidelity level", len(rows)),
    ) as hitting_dm:
        for eps in task.epsilons:
            hitting_time = MemoryMetrics.DecoherenceTime(
                model,
                task,
                eps,
                t_max=config.solver.t_max,
                method=config.solver.gramian,
            )

            if not hitting_time.reached:
                hitting_dm.WriteWarning(
                    f"The threshold for eps={eps!r} was not reached before t={hitting_time.horizon:.6g}.\n",
                )
            elif hitting_time.tangent:
                hitting_dm.WriteWarning(
                    f"Delta(t) is nearly tangent to the threshold for eps={eps!r}; tau may not be unique.\n",
                )

            rows.append(
                {
                    "eps": eps,
                    "tau": Common.FloatToJson(hitting_time.tau),
                    "tau_hat": _TauHat(model, task, eps, regime),
                    "regime": regime,
                    "reached": hitting_time.reached,
                    "tangent": hitting_time.tangent,
                    "horizon": hitting_time.horizon,
                },
            )

    return rows


# ----------------------------------------------------------------------
def _DisplayTable(
    dm: DoneManager,
    title: str,
    rows: list[dict[str, Any]],
) -> None:
    table = Table(title=title)

    table.add_column("eps", justify="right")
    table.add_column("tau", justify="right")
    table.add_column("tau_hat", justify="right")
    table.add_column("regime")

    # ----------------------------------------------------------------------
    def Format(
        value: Optional[float],
    ) -> str:
        return "-" if value is None else f"{value:.6e}"

    # ----------------------------------------------------------------------

    for row in rows:
        table.add_row(
            f"{row['eps']:g}",
            Format(row["tau"]),
            Format(row["tau_hat"]),
            row["regime"],
        )

    with dm.YieldStdout() as stdout_context:
        Capabilities.Get(stdout_context.stream).CreateRichConsole(stdout_context.stream).print(table)


# ----------------------------------------------------------------------
def _WriteJson(
    dm: DoneManager,
    config: RunConfig,
    filename: str,
    content: dict[str, Any],
) -> None:
    if config.output.timestamp:
        content = {"generated": _Now(), **content}

    _WriteText(dm, config, filename, json.dumps(content, indent=2, allow_nan=False) + "\n")


# ----------------------------------------------------------------------
def _WriteText(
    dm: DoneManager,
    config: RunConfig,
    filename: str,
    content: str,
) -> None:
    output_filename = config.output.dir / filename

    with dm.Nested(f"Writing '{output_filename}'..."):
        output_filename.parent.mkdir(parents=True, exist_ok=True)

        with output_filename.open("w", encoding="utf-8", newline="\n") as f:
            f.write(content)


# ----------------------------------------------------------------------
def _Now() -> str:
    return datetime.datetime.now().isoformat(timespec="seconds")
