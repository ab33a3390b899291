# ----------------------------------------------------------------------
# |
# |  NetworkModel.py
# |
# |  David Brownell <db@DavidBrownell.com>
# |      2024-09-03 11:15:20
# |
# ----------------------------------------------------------------------
# |
# |  Copyright David Brownell 2024
# |  Distributed under the MIT License.
# |
# ----------------------------------------------------------------------
"""\
Specification of a network of open quantum harmonic oscillators and the assembly of its augmented
linear dynamics.

Nodes interact through direct energy coupling (undirected edges carrying a block R0_jk) and through
field-mediated coupling (directed links where selected output channels of node j drive node k).
"""

import itertools

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from OscillatorMemory.Errors import DimensionError, UnknownNodeError, ValidationError
from OscillatorMemory.Impl import Common
from OscillatorMemory.MatKernel import Mat, Sym, ToMat


# ----------------------------------------------------------------------
# |
# |  Public Types
# |
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class NodeSpec:
    """An oscillator with n internal variables coupled to an m-channel input field"""

    id: str
    n: int
    m: int
    R_node: Mat  # n x n, symmetric
    M_node: Mat  # m x n

    # ----------------------------------------------------------------------
    @classmethod
    def Create(
        cls,
        id: str,  # pylint: disable=redefined-builtin
        n: int,
        m: int,
        R_node: Optional[Iterable] = None,
        M_node: Optional[Iterable] = None,
    ) -> "NodeSpec":
        return cls(
            id,
            n,
            m,
            ToMat(np.zeros((n, n)) if R_node is None else R_node, f"R matrix of node '{id}'"),
            ToMat(
                np.zeros((m, n)) if M_node is None else M_node,
                f"M matrix of node '{id}'",
                allow_empty=True,
            ),
        )

    # ----------------------------------------------------------------------
    @property
    def Theta(self) -> Mat:
        return 0.5 * np.kron(np.eye(self.n // 2), Common.BJ)

    @property
    def J(self) -> Mat:
        return np.kron(np.eye(self.m // 2), Common.BJ)


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class EnergyEdge:
    """Direct energy coupling X_j^T R0_jk X_k between two nodes"""

    j: str
    k: str
    R0_jk: Mat  # n_j x n_k

    # ----------------------------------------------------------------------
    @classmethod
    def Create(
        cls,
        j: str,
        k: str,
        R0_jk: Iterable,
    ) -> "EnergyEdge":
        return cls(j, k, ToMat(R0_jk, f"R0 block of energy edge '{j}'-'{k}'"))


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class FieldLink:
    """r output channels of `source`, selected by D_block, drive `target` through N_block"""

    source: str
    target: str
    r: int
    D_block: Mat  # r x m_source
    N_block: Mat  # r x n_target

    # ----------------------------------------------------------------------
    @classmethod
    def Create(
        cls,
        source: str,
        target: str,
        D_block: Iterable,
        N_block: Iterable,
        r: Optional[int] = None,
    ) -> "FieldLink":
        D = ToMat(D_block, f"D block of field link '{source}'->'{target}'")
        N = ToMat(N_block, f"N block of field link '{source}'->'{target}'")

        return cls(source, target, D.shape[0] if r is None else r, D, N)

    # ----------------------------------------------------------------------
    @property
    def location(self) -> str:
        return f"field link '{self.source}'->'{self.target}'"

    # ----------------------------------------------------------------------
    def CouplingBlock(self) -> Mat:
        """M_{source,target} = D^T N"""

        return self.D_block.T @ self.N_block


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """Nodes (whose order fixes the block layout), energy edges, and field links"""

    nodes: tuple[NodeSpec, ...]
    energy_edges: tuple[EnergyEdge, ...] = field(default_factory=tuple)
    field_links: tuple[FieldLink, ...] = field(default_factory=tuple)

    # ----------------------------------------------------------------------
    @classmethod
    def Create(
        cls,
        nodes: Iterable[NodeSpec],
        energy_edges: Iterable[EnergyEdge] = (),
        field_links: Iterable[FieldLink] = (),
    ) -> "NetworkSpec":
        """Creates a spec, storing every energy edge with its endpoints in node order"""

        nodes = tuple(nodes)
        order = {node.id: index for index, node in enumerate(nodes)}

        normalized_edges: list[EnergyEdge] = []

        for edge in energy_edges:
            if edge.j in order and edge.k in order and order[edge.j] > order[edge.k]:
                edge = EnergyEdge(edge.k, edge.j, edge.R0_jk.T.copy())

            normalized_edges.append(edge)

        return cls(nodes, tuple(normalized_edges), tuple(field_links))

    # ----------------------------------------------------------------------
    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(node.id for node in self.nodes)

    # ----------------------------------------------------------------------
    def GetNode(
        self,
        node_id: str,
    ) -> NodeSpec:
        for node in self.nodes:
            if node.id == node_id:
                return node

        raise UnknownNodeError(node_id)

    # ----------------------------------------------------------------------
    def EnergyNeighbours(
        self,
        node_id: str,
    ) -> list[tuple[str, Mat]]:
        """(k, R0_jk) for every k in N_j^0, with R0_jk oriented as n_j x n_k"""

        results: list[tuple[str, Mat]] = []

        for edge in self.energy_edges:
            if edge.j == node_id:
                results.append((edge.k, edge.R0_jk))
            elif edge.k == node_id:
                results.append((edge.j, edge.R0_jk.T))

        return results

    # ----------------------------------------------------------------------
    def OutLinks(
        self,
        node_id: str,
    ) -> list[FieldLink]:
        return [link for link in self.field_links if link.source == node_id]

    # ----------------------------------------------------------------------
    def InLinks(
        self,
        node_id: str,
    ) -> list[FieldLink]:
        return [link for link in self.field_links if link.target == node_id]


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Violation:
    """A single failed validation rule"""

    location: str
    rule: str
    message: str

    # ----------------------------------------------------------------------
    def __str__(self) -> str:
        return f"{self.location}: {self.message} [{self.rule}]"


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ValidationReport:
    """Violations (empty when the spec is valid) and informational notes"""

    violations: list[Violation]
    notes: list[str]

    # ----------------------------------------------------------------------
    @property
    def is_valid(self) -> bool:
        return not self.violations


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class AugmentedModel:
    """Augmented matrices of the whole network"""

    n: int
    m: int
    Theta: Mat
    Jmat: Mat
    M: Mat
    R: Mat
    A: Mat
    B: Mat

    node_ids: tuple[str, ...]
    state_ranges: dict[str, tuple[int, int]]
    field_ranges: dict[str, tuple[int, int]]

    # ----------------------------------------------------------------------
    def StateSlice(
        self,
        node_id: str,
    ) -> slice:
        if node_id not in self.state_ranges:
            raise UnknownNodeError(node_id)

        return slice(*self.state_ranges[node_id])

    # ----------------------------------------------------------------------
    def FieldSlice(
        self,
        node_id: str,
    ) -> slice:
        if node_id not in self.field_ranges:
            raise UnknownNodeError(node_id)

        return slice(*self.field_ranges[node_id])

    # ----------------------------------------------------------------------
    def Omega(self) -> tuple[Mat, Mat]:
        """Real and imaginary parts of the Ito matrix I_m + iJ"""

        return np.eye(self.m), self.Jmat


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ComponentCoefficients:
    """Coefficients of the QSDE governing a single node"""

    node_id: str
    A_j: Mat
    A_jk: dict[str, Mat]  # k in N_j^0
    B_j: Mat
    C_jk: dict[str, Mat]  # k in N_j^+
    D_jk: dict[str, Mat]  # k in N_j^+
    E_jk: dict[str, Mat]  # k in N_j^-


# ----------------------------------------------------------------------
# |
# |  Public Functions
# |
# ----------------------------------------------------------------------
def ValidateSpec(
    spec: NetworkSpec,
) -> ValidationReport:
    violations: list[Violation] = []
    notes: list[str] = []

    nodes: dict[str, NodeSpec] = {}
    malformed: set[str] = set()

    # Nodes
    for node in spec.nodes:
        location = f"node '{node.id}'"

        if node.id in nodes:
            violations.append(Violation(location, "unique-id", "the node id is not unique"))
            continue

        nodes[node.id] = node

        if not isinstance(node.n, int) or node.n < 2 or node.n % 2:
            violations.append(
                Violation(location, "node-dimensions", f"n must be an even integer >= 2 ({node.n})"),
            )
            malformed.add(node.id)
            continue

        if not isinstance(node.m, int) or node.m < 0 or node.m % 2:
            violations.append(
                Violation(location, "node-dimensions", f"m must be an even integer >= 0 ({node.m})"),
            )
            malformed.add(node.id)
            continue

        if node.R_node.shape != (node.n, node.n):
            violations.append(
                Violation(location, "R-shape", f"R must be {node.n}x{node.n} ({node.R_node.shape})"),
            )
        elif Common.FrobeniusNorm(node.R_node - node.R_node.T) > Common.SYMMETRY_TOL * Common.FrobeniusNorm(
            node.R_node
        ):
            violations.append(Violation(location, "R-symmetric", "R must be symmetric"))

        if node.M_node.shape != (node.m, node.n):
            violations.append(
                Violation(location, "M-shape", f"M must be {node.m}x{node.n} ({node.M_node.shape})"),
            )

    # Energy edges
    edge_pairs: set[frozenset[str]] = set()

    for edge in spec.energy_edges:
        location = f"energy edge '{edge.j}'-'{edge.k}'"

        missing = [node_id for node_id in (edge.j, edge.k) if node_id not in nodes]
        if missing:
            violations.append(
                Violation(location, "edge-endpoints", f"unknown node id '{missing[0]}'"),
            )
            continue

        if edge.j in malformed or edge.k in malformed:
            continue

        if edge.j == edge.k:
            violations.append(Violation(location, "edge-self", "an edge must join distinct nodes"))
            continue

        pair = frozenset((edge.j, edge.k))
        if pair in edge_pairs:
            violations.append(
                Violation(location, "edge-duplicate", "the node pair already has an energy edge"),
            )
            continue

        edge_pairs.add(pair)

        expected = (nodes[edge.j].n, nodes[edge.k].n)
        if edge.R0_jk.shape != expected:
            violations.append(
                Violation(
                    location,
                    "edge-shape",
                    f"R0 must be {expected[0]}x{expected[1]} ({edge.R0_jk.shape})",
                ),
            )

    # Field links
    link_pairs: set[tuple[str, str]] = set()
    well_formed_links: dict[str, list[FieldLink]] = {}

    for link in spec.field_links:
        location = link.location

        missing = [node_id for node_id in (link.source, link.target) if node_id not in nodes]
        if missing:
            violations.append(
                Violation(location, "link-endpoints", f"unknown node id '{missing[0]}'"),
            )
            continue

        if link.source in malformed or link.target in malformed:
            continue

        if link.source == link.target:
            violations.append(Violation(location, "link-self", "a link must join distinct nodes"))
            continue

        if (link.source, link.target) in link_pairs:
            violations.append(Violation(location, "link-duplicate", "the link is not unique"))
            continue

        link_pairs.add((link.source, link.target))

        if not isinstance(link.r, int) or link.r < 2 or link.r % 2:
            violations.append(
                Violation(location, "link-channels", f"r must be an even integer >= 2 ({link.r})"),
            )
            continue

        source = nodes[link.source]
        target = nodes[link.target]

        shapes_valid = True

        if link.D_block.shape != (link.r, source.m):
            violations.append(
                Violation(
                    location,
                    "link-shape",
                    f"D must be {link.r}x{source.m} ({link.D_block.shape})",
                ),
            )
            shapes_valid = False

        if link.N_block.shape != (link.r, target.n):
            violations.append(
                Violation(
                    location,
                    "link-shape",
                    f"N must be {link.r}x{target.n} ({link.N_block.shape})",
                ),
            )
            shapes_valid = False

        if not shapes_valid:
            continue

        well_formed_links.setdefault(link.source, []).append(link)

        if not _IsPermutationSelection(link.D_block):
            notes.append(
                f"{location}: the channel selection is not drawn from the rows of a permutation matrix.",
            )

    # Channel selections per source node
    for source_id, links in well_formed_links.items():
        source = nodes[source_id]
        location = f"node '{source_id}'"

        r_total = sum(link.r for link in links)
        if r_total > source.m:
            violations.append(
                Violation(
                    location,
                    "channel-budget",
                    f"outgoing links use {r_total} channels but only {source.m} are available",
                ),
            )

        D = np.vstack([link.D_block for link in links])
        tol = Common.STRUCTURAL_TOL * max(1.0, float(r_total))

        if Common.FrobeniusNorm(D @ D.T - np.eye(r_total)) > tol:
            violations.append(
                Violation(
                    location,
                    "orthonormal-selection",
                    "the stacked channel selection D_j does not satisfy D_j D_j^T = I",
                ),
            )

        if Common.FrobeniusNorm(D @ source.J @ D.T - np.kron(np.eye(r_total // 2), Common.BJ)) > tol:
            violations.append(
                Violation(
                    location,
                    "symplectic-selection",
                    "the stacked channel selection D_j does not satisfy D_j J_j D_j^T = I (x) J",
                ),
            )

        for link_a, link_b in itertools.combinations(links, 2):
            if Common.FrobeniusNorm(link_a.D_block @ source.J @ link_b.D_block.T) > tol:
                violations.append(
                    Violation(
                        f"{link_a.location} and {link_b.location}",
                        "cross-link-selection",
                        "channel selections for distinct receivers must satisfy D_jk J_j D_jl^T = 0",
                    ),
                )

    return ValidationReport(violations, notes)


# ----------------------------------------------------------------------
def Assemble(
    spec: NetworkSpec,
) -> AugmentedModel:
    _EnsureValid(spec)

    state_ranges, field_ranges = _CreateRanges(spec)

    n = sum(node.n for node in spec.nodes)
    m = sum(node.m for node in spec.nodes)

    M = np.zeros((m, n))

    for node in spec.nodes:
        M[slice(*field_ranges[node.id]), slice(*state_ranges[node.id])] = node.M_node

    for link in spec.field_links:
        M[slice(*field_ranges[link.source]), slice(*state_ranges[link.target])] = link.CouplingBlock()

    R = np.zeros((n, n))

    for node in spec.nodes:
        block = slice(*state_ranges[node.id])
        R[block, block] = Sym(node.R_node)

    # Upper triangle, then mirror
    for (j_index, j_node), (k_index, k_node) in itertools.combinations(enumerate(spec.nodes), 2):
        assert j_index < k_index

        R_jk = _OffDiagonalEnergyBlock(spec, j_node, k_node)
        if R_jk is None:
            continue

        j_slice = slice(*state_ranges[j_node.id])
        k_slice = slice(*state_ranges[k_node.id])

        R[j_slice, k_slice] = R_jk
        R[k_slice, j_slice] = R_jk.T

    Theta = 0.5 * np.kron(np.eye(n // 2), Common.BJ)
    Jmat = np.kron(np.eye(m // 2), Common.BJ)

    A = 2.0 * Theta @ (R + M.T @ Jmat @ M)
    B = 2.0 * Theta @ M.T

    return AugmentedModel(
        n=n,
        m=m,
        Theta=Theta,
        Jmat=Jmat,
        M=M,
        R=R,
        A=A,
        B=B,
        node_ids=spec.node_ids,
        state_ranges=state_ranges,
        field_ranges=field_ranges,
    )


# ----------------------------------------------------------------------
def ComponentQsde(
    spec: NetworkSpec,
    node_id: str,
) -> ComponentCoefficients:
    node = spec.GetNode(node_id)
    _EnsureValid(spec)

    Theta_j = node.Theta
    J_j = node.J

    energy = Sym(node.R_node) + node.M_node.T @ J_j @ node.M_node

    E_jk: dict[str, Mat] = {}

    for link in spec.InLinks(node_id):
        source = spec.GetNode(link.source)

        J_tilde = link.D_block @ source.J @ link.D_block.T
        energy = energy + link.N_block.T @ J_tilde @ link.N_block

        E_jk[link.source] = 2.0 * Theta_j @ link.N_block.T

    C_jk: dict[str, Mat] = {}
    D_jk: dict[str, Mat] = {}

    for link in spec.OutLinks(node_id):
        C_jk[link.target] = 2.0 * link.D_block @ J_j @ node.M_node
        D_jk[link.target] = link.D_block

    return ComponentCoefficients(
        node_id=node_id,
        A_j=2.0 * Theta_j @ energy,
        A_jk={k: 2.0 * Theta_j @ R0_jk for k, R0_jk in spec.EnergyNeighbours(node_id)},
        B_j=2.0 * Theta_j @ node.M_node.T,
        C_jk=C_jk,
        D_jk=D_jk,
        E_jk=E_jk,
    )


# ----------------------------------------------------------------------
def ComposeFromComponents(
    spec: NetworkSpec,
) -> tuple[Mat, Mat]:
    """Builds (A, B) from the component QSDEs, where the output of node k drives node j through E_jk"""

    _EnsureValid(spec)

    state_ranges, field_ranges = _CreateRanges(spec)

    n = sum(node.n for node in spec.nodes)
    m = sum(node.m for node in spec.nodes)

    components = {node.id: ComponentQsde(spec, node.id) for node in spec.nodes}

    A = np.zeros((n, n))
    B = np.zeros((n, m))

    for node in spec.nodes:
        component = components[node.id]
        rows = slice(*state_ranges[node.id])

        A[rows, rows] = component.A_j
        B[rows, slice(*field_ranges[node.id])] = component.B_j

        for k, A_jk in component.A_jk.items():
            A[rows, slice(*state_ranges[k])] += A_jk

        for k, E_jk in component.E_jk.items():
            upstream = components[k]

            A[rows, slice(*state_ranges[k])] += E_jk @ upstream.C_jk[node.id]
            B[rows, slice(*field_ranges[k])] = E_jk @ upstream.D_jk[node.id]

    return A, B


# ----------------------------------------------------------------------
def GammaMatrix(
    spec: NetworkSpec,
) -> Mat:
    _EnsureValid(spec)

    state_ranges, _ = _CreateRanges(spec)
    n = sum(node.n for node in spec.nodes)

    Gamma = np.zeros((n, n))

    for node in spec.nodes:
        rows = slice(*state_ranges[node.id])

        Gamma[rows, rows] = node.M_node.T @ node.J @ node.M_node

        for link in spec.InLinks(node.id):
            source = spec.GetNode(link.source)

            M_lj = link.CouplingBlock()

            Gamma[rows, rows] += M_lj.T @ source.J @ M_lj
            Gamma[rows, slice(*state_ranges[source.id])] = 2.0 * M_lj.T @ source.J @ source.M_node

    return Gamma


# ----------------------------------------------------------------------
def EnergyMatrix0(
    spec: NetworkSpec,
) -> Mat:
    """Energy matrix made of the node blocks R_j and the direct coupling blocks R0_jk only"""

    _EnsureValid(spec)

    state_ranges, _ = _CreateRanges(spec)
    n = sum(node.n for node in spec.nodes)

    R0 = np.zeros((n, n))

    for node in spec.nodes:
        block = slice(*state_ranges[node.id])
        R0[block, block] = Sym(node.R_node)

    for edge in spec.energy_edges:
        j_slice = slice(*state_ranges[edge.j])
        k_slice = slice(*state_ranges[edge.k])

        R0[j_slice, k_slice] = edge.R0_jk
        R0[k_slice, j_slice] = edge.R0_jk.T

    return R0


# ----------------------------------------------------------------------
def ReplaceEnergyEdges(
    spec: NetworkSpec,
    blocks: Iterable[Mat],
) -> NetworkSpec:
    blocks = list(blocks)

    if len(blocks) != len(spec.energy_edges):
        raise DimensionError(
            f"{len(blocks)} blocks were provided for {len(spec.energy_edges)} energy edges.",
        )

    new_edges: list[EnergyEdge] = []

    for edge, block in zip(spec.energy_edges, blocks):
        if block.shape != edge.R0_jk.shape:
            raise DimensionError(
                f"The block for energy edge '{edge.j}'-'{edge.k}' must be {edge.R0_jk.shape} ({block.shape}).",
            )

        new_edges.append(EnergyEdge(edge.j, edge.k, np.array(block, dtype=np.float64)))

    return NetworkSpec(spec.nodes, tuple(new_edges), spec.field_links)


# ----------------------------------------------------------------------
def PrResidual(
    model: AugmentedModel,
) -> float:
    """Frobenius norm of A Theta + Theta A^T + B J B^T, which vanishes for physically realizable models"""

    return Common.FrobeniusNorm(
        model.A @ model.Theta + model.Theta @ model.A.T + model.B @ model.Jmat @ model.B.T
    )


# ----------------------------------------------------------------------
def IsPrResidualAcceptable(
    model: AugmentedModel,
) -> bool:
    return PrResidual(model) <= Common.STRUCTURAL_TOL * (1.0 + Common.FrobeniusNorm(model.A)) * (
        1.0 + Common.FrobeniusNorm(model.Theta)
    )


# ----------------------------------------------------------------------
def FieldEnergyMatrix(
    model: AugmentedModel,
) -> Mat:
    """M^T J M, which equals the antisymmetric part of the Gamma matrix"""

    return model.M.T @ model.Jmat @ model.M


# ----------------------------------------------------------------------
# |
# |  Private Functions
# |
# ----------------------------------------------------------------------
def _EnsureValid(
    spec: NetworkSpec,
) -> None:
    report = ValidateSpec(spec)

    if not report.is_valid:
        raise ValidationError(report.violations)


# ----------------------------------------------------------------------
def _CreateRanges(
    spec: NetworkSpec,
) -> tuple[dict[str, tuple[int, int]], dict[str, tuple[int, int]]]:
    state_ranges: dict[str, tuple[int, int]] = {}
    field_ranges: dict[str, tuple[int, int]] = {}

    state_offset = 0
    field_offset = 0

    for node in spec.nodes:
        state_ranges[node.id] = (state_offset, state_offset + node.n)
        field_ranges[node.id] = (field_offset, field_offset + node.m)

        state_offset += node.n
        field_offset += node.m

    return state_ranges, field_ranges


# ----------------------------------------------------------------------
def _OffDiagonalEnergyBlock(
    spec: NetworkSpec,
    j_node: NodeSpec,
    k_node: NodeSpec,
) -> Optional[Mat]:
    """R_jk = [k in N_j^0] R0_jk + [k in N_j^-] M_kj^T J_k M_k - [k in N_j^+] M_j^T J_j M_jk"""

    result: Optional[Mat] = None

    for edge in spec.energy_edges:
        if edge.j == j_node.id and edge.k == k_node.id:
            result = edge.R0_jk.copy()
        elif edge.j == k_node.id and edge.k == j_node.id:
            result = edge.R0_jk.T.copy()

    if result is None:
        result = np.zeros((j_node.n, k_node.n))
        has_content = False
    else:
        has_content = True

    for link in spec.field_links:
        if link.source == k_node.id and link.target == j_node.id:
            result += link.CouplingBlock().T @ k_node.J @ k_node.M_node
            has_content = True
        elif link.source == j_node.id and link.target == k_node.id:
            result -= j_node.M_node.T @ j_node.J @ link.CouplingBlock()
            has_content = True

    return result if has_content else None


# ----------------------------------------------------------------------
def _IsPermutationSelection(
    D: Mat,
) -> bool:
    return bool(
        np.all((D == 0.0) | (D == 1.0))
        and np.all(D.sum(axis=1) == 1.0)
        and np.all(D.sum(axis=0) <= 1.0)
    )
