# ----------------------------------------------------------------------
# |
# |  RunConfig.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-06 10:12:37
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""\
Reads and writes the JSON documents that describe a run: one network, one memory task, and the
solver and output options.

    {
      "schema": 1,
      "network": {"nodes": [...], "energy_edges": [...], "field_links": [...]},
      "task": {"F": "identity", "P": "vacuum", "epsilons": [0.01]},
      "solver": {"gramian": "vanloan", ...},
      "output": {"dir": "."}
    }
"""

import copy
import json

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from OscillatorMemory.CouplingOptimizer import (
    DEFAULT_FIXED_POINT_TOL,
    DEFAULT_MAX_SWEEPS,
    OptimizerMethod,
    OptimizerMode,
)
from OscillatorMemory.Errors import ConfigError, ConfigParseError, DimensionError, DomainError
from OscillatorMemory.Impl import Common
from OscillatorMemory.MatKernel import GramianMethod, Mat, ToMat
from OscillatorMemory.MemoryMetrics import DEFAULT_CURVE_POINTS, DEFAULT_EPSILON, MemoryTask
from OscillatorMemory.NetworkModel import (
    EnergyEdge,
    FieldLink,
    NetworkSpec,
    NodeSpec,
    ValidateSpec,
)


# ----------------------------------------------------------------------
# |
# |  Public Types
# |
# ----------------------------------------------------------------------
SCHEMA_VERSION = 1

# Violations of these rules mean that a matrix in the document does not agree with the declared
# node dimensions; they are reported while loading rather than by the validate command.
DIMENSION_RULES = frozenset(
    [
        "node-dimensions",
        "R-shape",
        "M-shape",
        "edge-shape",
        "link-channels",
        "link-shape",
    ],
)


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SolverOptions:
    gramian: GramianMethod = GramianMethod.vanloan
    t_max: Optional[float] = None
    t_end: Optional[float] = None
    grid_points: int = DEFAULT_CURVE_POINTS
    optimizer: OptimizerMethod = OptimizerMethod.global_
    mode: OptimizerMode = OptimizerMode.standard
    fixed_point_tol: float = DEFAULT_FIXED_POINT_TOL
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    isolation_rows: Optional[int] = None


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class OutputOptions:
    dir: Path
    timestamp: bool = True


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Overrides:
    """Values provided on the command line that take precedence over the document"""

    out_dir: Optional[Path] = None
    epsilons: Optional[list[float]] = None
    gramian: Optional[GramianMethod] = None
    optimizer: Optional[OptimizerMethod] = None
    mode: Optional[OptimizerMode] = None
    timestamp: bool = True


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class RunConfig:
    network: NetworkSpec
    task: MemoryTask
    solver: SolverOptions
    output: OutputOptions

    document: dict[str, Any] = field(default_factory=dict)
    source: Optional[Path] = None

    # ----------------------------------------------------------------------
    def ApplyOverrides(
        self,
        overrides: Optional[Overrides],
    ) -> "RunConfig":
        if overrides is None:
            return self

        task = self.task
        solver = self.solver
        output = self.output

        if overrides.epsilons is not None:
            if not overrides.epsilons:
                raise ConfigError("At least one fidelity level must be provided.")

            for eps in overrides.epsilons:
                if eps <= 0.0:
                    raise ConfigError(f"Fidelity levels must be positive ({eps}).")

            task = MemoryTask(task.F, task.P, tuple(float(eps) for eps in overrides.epsilons))

        if overrides.gramian is not None:
            solver = replace(solver, gramian=overrides.gramian)
        if overrides.optimizer is not None:
            solver = replace(solver, optimizer=overrides.optimizer)
        if overrides.mode is not None:
            solver = replace(solver, mode=overrides.mode)

        if overrides.out_dir is not None:
            output = replace(output, dir=overrides.out_dir)

        output = replace(output, timestamp=output.timestamp and overrides.timestamp)

        return replace(self, task=task, solver=solver, output=output)


# ----------------------------------------------------------------------
# |
# |  Public Functions
# |
# ----------------------------------------------------------------------
def LoadConfig(
    path: Path,
) -> RunConfig:
    try:
        content = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as ex:
        raise ConfigParseError(f"'{path}' could not be read ({ex})") from ex

    try:
        document = json.loads(content)
    except json.JSONDecodeError as ex:
        raise ConfigParseError(f"'{path}' is not valid JSON: {ex.msg}", ex.lineno, ex.colno) from ex

    return ParseConfig(document, path.parent, source=path)


# ----------------------------------------------------------------------
def ParseConfig(
    document: Any,
    base_dir: Path,
    *,
    source: Optional[Path] = None,
) -> RunConfig:
    """Creates a RunConfig from an already decoded document; relative output dirs are based on `base_dir`"""

    root = _Object(document, "document")
    _EnsureKeys(root, "document", ["schema", "network", "task", "solver", "output", "generated"])

    schema = root.get("schema")
    if schema != SCHEMA_VERSION or isinstance(schema, bool):
        raise ConfigError(f"'schema' must be {SCHEMA_VERSION} ({schema!r}).")

    if "network" not in root:
        raise ConfigError("'network' is required.")

    network = ParseNetwork(root["network"], "network")
    task = _ParseTask(root.get("task", {}), "task", network)
    solver = _ParseSolver(root.get("solver", {}), "solver")

    output_value = _Object(root.get("output", {}), "output")
    _EnsureKeys(output_value, "output", ["dir", "timestamp"])

    output_dir = Path(_String(output_value.get("dir", "."), "output.dir"))
    if not output_dir.is_absolute():
        output_dir = base_dir / output_dir

    timestamp = output_value.get("timestamp", True)
    if not isinstance(timestamp, bool):
        raise ConfigError("'output.timestamp' must be a boolean.")

    return RunConfig(
        network=network,
        task=task,
        solver=solver,
        output=OutputOptions(output_dir, timestamp),
        document=document,
        source=source,
    )


# ----------------------------------------------------------------------
def ParseNetwork(
    value: Any,
    path: str = "network",
) -> NetworkSpec:
    value = _Object(value, path)
    _EnsureKeys(value, path, ["nodes", "energy_edges", "field_links"])

    if "nodes" not in value:
        raise ConfigError(f"'{path}.nodes' is required.")

    nodes: list[NodeSpec] = []

    for index, item in enumerate(_List(value["nodes"], f"{path}.nodes")):
        item_path = f"{path}.nodes[{index}]"

        item = _Object(item, item_path)
        _EnsureKeys(item, item_path, ["id", "n", "m", "R", "M"])

        node_id = _String(_Required(item, "id", item_path), f"{item_path}.id")
        n = _Integer(_Required(item, "n", item_path), f"{item_path}.n")
        m = _Integer(item.get("m", 0), f"{item_path}.m")

        R = _Matrix(item["R"], f"{item_path}.R") if "R" in item else None
        M = _Matrix(item["M"], f"{item_path}.M", empty_cols=n) if "M" in item else None

        if n < 2 or m < 0:
            raise ConfigError(f"'{item_path}' must have n >= 2 and m >= 0 (n={n}, m={m}).")

        nodes.append(NodeSpec.Create(node_id, n, m, R, M))

    if not nodes:
        raise ConfigError(f"'{path}.nodes' must contain at least one node.")

    node_ids = {node.id for node in nodes}

    energy_edges: list[EnergyEdge] = []

    for index, item in enumerate(_List(value.get("energy_edges", []), f"{path}.energy_edges")):
        item_path = f"{path}.energy_edges[{index}]"

        item = _Object(item, item_path)
        _EnsureKeys(item, item_path, ["j", "k", "R0"])

        j = _NodeId(_Required(item, "j", item_path), f"{item_path}.j", node_ids)
        k = _NodeId(_Required(item, "k", item_path), f"{item_path}.k", node_ids)

        energy_edges.append(EnergyEdge(j, k, _Matrix(_Required(item, "R0", item_path), f"{item_path}.R0")))

    field_links: list[FieldLink] = []

    for index, item in enumerate(_List(value.get("field_links", []), f"{path}.field_links")):
        item_path = f"{path}.field_links[{index}]"

        item = _Object(item, item_path)
        _EnsureKeys(item, item_path, ["from", "to", "r", "D", "N"])

        source = _NodeId(_Required(item, "from", item_path), f"{item_path}.from", node_ids)
        target = _NodeId(_Required(item, "to", item_path), f"{item_path}.to", node_ids)

        D = _Matrix(_Required(item, "D", item_path), f"{item_path}.D")
        N = _Matrix(_Required(item, "N", item_path), f"{item_path}.N")

        r = _Integer(item["r"], f"{item_path}.r") if "r" in item else None

        field_links.append(FieldLink(source, target, D.shape[0] if r is None else r, D, N))

    spec = NetworkSpec.Create(nodes, energy_edges, field_links)

    dimension_violations = [
        violation for violation in ValidateSpec(spec).violations if violation.rule in DIMENSION_RULES
    ]

    if dimension_violations:
        raise ConfigError(
            "'{}' has matrices that do not agree with the node dimensions:\n{}".format(
                path,
                "\n".join(f"    - {violation}" for violation in dimension_violations),
            ),
        )

    return spec


# ----------------------------------------------------------------------
def NetworkToJson(
    spec: NetworkSpec,
) -> dict[str, Any]:
    """Inverse of ParseNetwork"""

    return {
        "nodes": [
            {
                "id": node.id,
                "n": node.n,
                "m": node.m,
                "R": Common.MatToJson(node.R_node),
                "M": Common.MatToJson(node.M_node) if node.m else [],
            }
            for node in spec.nodes
        ],
        "energy_edges": [
            {
                "j": edge.j,
                "k": edge.k,
                "R0": Common.MatToJson(edge.R0_jk),
            }
            for edge in spec.energy_edges
        ],
        "field_links": [
            {
                "from": link.source,
                "to": link.target,
                "r": link.r,
                "D": Common.MatToJson(link.D_block),
                "N": Common.MatToJson(link.N_block),
            }
            for link in spec.field_links
        ],
    }


# ----------------------------------------------------------------------
def DocumentWithNetwork(
    config: RunConfig,
    spec: NetworkSpec,
) -> dict[str, Any]:
    """The original document with its network replaced by `spec`"""

    document = copy.deepcopy(config.document)
    document.pop("generated", None)

    document["network"] = NetworkToJson(spec)

    return document


# ----------------------------------------------------------------------
# |
# |  Private Functions
# |
# ----------------------------------------------------------------------
def _ParseTask(
    value: Any,
    path: str,
    spec: NetworkSpec,
) -> MemoryTask:
    value = _Object(value, path)
    _EnsureKeys(value, path, ["F", "P", "epsilons"])

    n = sum(node.n for node in spec.nodes)

    # F
    F_value = value.get("F", "identity")

    if F_value == "identity":
        F = np.eye(n)
    elif isinstance(F_value, dict):
        F = _ParseSelection(F_value, f"{path}.F", spec)
    elif isinstance(F_value, list):
        F = _Matrix(F_value, f"{path}.F")
    else:
        raise ConfigError(f"'{path}.F' must be \"identity\", a matrix, or a selection.")

    if F.shape[1] != n:
        raise ConfigError(f"'{path}.F' must have {n} columns ({F.shape[1]}).")

    # P
    P_value = value.get("P", "vacuum")

    if P_value == "vacuum":
        P = 0.5 * np.eye(n)
    elif isinstance(P_value, list):
        P = _Matrix(P_value, f"{path}.P")
    else:
        raise ConfigError(f"'{path}.P' must be \"vacuum\" or a matrix.")

    if P.shape != (n, n):
        raise ConfigError(f"'{path}.P' must be {n}x{n} ({P.shape[0]}x{P.shape[1]}).")

    # epsilons
    epsilons = [
        _Number(eps, f"{path}.epsilons[{index}]")
        for index, eps in enumerate(_List(value.get("epsilons", [DEFAULT_EPSILON]), f"{path}.epsilons"))
    ]

    if not epsilons:
        raise ConfigError(f"'{path}.epsilons' must contain at least one value.")

    for index, eps in enumerate(epsilons):
        if eps <= 0.0:
            raise ConfigError(f"'{path}.epsilons[{index}]' must be positive ({eps}).")

    return MemoryTask(F, P, tuple(epsilons))


# ----------------------------------------------------------------------
def _ParseSelection(
    value: dict[str, Any],
    path: str,
    spec: NetworkSpec,
) -> Mat:
    _EnsureKeys(value, path, ["select"])

    offsets: dict[str, tuple[int, int]] = {}
    offset = 0

    for node in spec.nodes:
        offsets[node.id] = (offset, node.n)
        offset += node.n

    rows: list[int] = []

    for index, item in enumerate(_List(_Required(value, "select", path), f"{path}.select")):
        item_path = f"{path}.select[{index}]"

        item = _Object(item, item_path)
        _EnsureKeys(item, item_path, ["node", "indices"])

        node_id = _NodeId(_Required(item, "node", item_path), f"{item_path}.node", set(offsets))
        node_offset, node_n = offsets[node_id]

        if "indices" in item:
            indices = [
                _Integer(variable, f"{item_path}.indices[{variable_index}]")
                for variable_index, variable in enumerate(_List(item["indices"], f"{item_path}.indices"))
            ]
        else:
            indices = list(range(node_n))

        for variable in indices:
            if variable < 0 or variable >= node_n:
                raise ConfigError(
                    f"'{item_path}.indices' refers to variable {variable}, but node '{node_id}' has {node_n}.",
                )

            rows.append(node_offset + variable)

    if not rows:
        raise ConfigError(f"'{path}.select' must select at least one variable.")

    if len(set(rows)) != len(rows):
        raise ConfigError(f"'{path}.select' selects a variable more than once.")

    return np.eye(offset)[rows]


# ----------------------------------------------------------------------
def _ParseSolver(
    value: Any,
    path: str,
) -> SolverOptions:
    value = _Object(value, path)
    _EnsureKeys(
        value,
        path,
        [
            "gramian",
            "t_max",
            "t_end",
            "grid_points",
            "optimizer",
            "mode",
            "fixed_point_tol",
            "max_sweeps",
            "isolation_rows",
        ],
    )

    defaults = SolverOptions()

    # ----------------------------------------------------------------------
    def OptionalPositive(
        key: str,
    ) -> Optional[float]:
        item = value.get(key)
        if item is None:
            return None

        result = _Number(item, f"{path}.{key}")
        if result <= 0.0:
            raise ConfigError(f"'{path}.{key}' must be positive ({result}).")

        return result

    # ----------------------------------------------------------------------

    grid_points = _Integer(value.get("grid_points", defaults.grid_points), f"{path}.grid_points")
    if grid_points < 2:
        raise ConfigError(f"'{path}.grid_points' must be at least 2 ({grid_points}).")

    max_sweeps = _Integer(value.get("max_sweeps", defaults.max_sweeps), f"{path}.max_sweeps")
    if max_sweeps < 1:
        raise ConfigError(f"'{path}.max_sweeps' must be at least 1 ({max_sweeps}).")

    isolation_rows = value.get("isolation_rows")
    if isolation_rows is not None:
        isolation_rows = _Integer(isolation_rows, f"{path}.isolation_rows")
        if isolation_rows < 1:
            raise ConfigError(f"'{path}.isolation_rows' must be at least 1 ({isolation_rows}).")

    return SolverOptions(
        gramian=_Enum(GramianMethod, value.get("gramian", defaults.gramian.value), f"{path}.gramian"),
        t_max=OptionalPositive("t_max"),
        t_end=OptionalPositive("t_end"),
        grid_points=grid_points,
        optimizer=_Enum(
            OptimizerMethod,
            value.get("optimizer", defaults.optimizer.value),
            f"{path}.optimizer",
        ),
        mode=_Enum(OptimizerMode, value.get("mode", defaults.mode.value), f"{path}.mode"),
        fixed_point_tol=OptionalPositive("fixed_point_tol") or defaults.fixed_point_tol,
        max_sweeps=max_sweeps,
        isolation_rows=isolation_rows,
    )


# ----------------------------------------------------------------------
def _EnsureKeys(
    value: dict[str, Any],
    path: str,
    allowed: list[str],
) -> None:
    for key in value:
        if key not in allowed:
            raise ConfigError(f"'{path}.{key}' is not a recognized field.")


# ----------------------------------------------------------------------
def _Required(
    value: dict[str, Any],
    key: str,
    path: str,
) -> Any:
    if key not in value:
        raise ConfigError(f"'{path}.{key}' is required.")

    return value[key]


# ----------------------------------------------------------------------
def _Object(
    value: Any,
    path: str,
) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(f"'{path}' must be an object.")

    return value


# ----------------------------------------------------------------------
def _List(
    value: Any,
    path: str,
) -> list[Any]:
    if not isinstance(value, list):
        raise ConfigError(f"'{path}' must be a list.")

    return value


# ----------------------------------------------------------------------
def _String(
    value: Any,
    path: str,
) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"'{path}' must be a non-empty string.")

    return value


# ----------------------------------------------------------------------
def _Integer(
    value: Any,
    path: str,
) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{path}' must be an integer.")

    return value


# ----------------------------------------------------------------------
def _Number(
    value: Any,
    path: str,
) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number.")

    return float(value)


# ----------------------------------------------------------------------
def _NodeId(
    value: Any,
    path: str,
    node_ids: set[str],
) -> str:
    value = _String(value, path)

    if value not in node_ids:
        raise ConfigError(f"'{path}' refers to the unknown node id '{value}'.")

    return value


# ----------------------------------------------------------------------
def _Enum(
    enum_type: Any,
    value: Any,
    path: str,
) -> Any:
    try:
        return enum_type(value)
    except ValueError as ex:
        raise ConfigError(
            "'{}' must be one of {} ({!r}).".format(
                path,
                ", ".join(f'"{item.value}"' for item in enum_type),
                value,
            ),
        ) from ex


# ----------------------------------------------------------------------
def _Matrix(
    value: Any,
    path: str,
    *,
    empty_cols: Optional[int] = None,
) -> Mat:
    """Row-major nested lists of numbers"""

    if value == [] and empty_cols is not None:
        return np.zeros((0, empty_cols))

    rows = _List(value, path)

    for row_index, row in enumerate(rows):
        for col_index, item in enumerate(_List(row, f"{path}[{row_index}]")):
            _Number(item, f"{path}[{row_index}][{col_index}]")

    try:
        return ToMat(rows, f"matrix '{path}'")
    except (DimensionError, DomainError) as ex:
        raise ConfigError(str(ex)) from ex
