"""Mass-coordinate grids on truncated domains and the expanding-domain sequence."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class GridError(ValueError):
    """Invalid grid construction parameters."""


class Stretching(str, Enum):
    UNIFORM = "Uniform"
    SINH = "Sinh"


@dataclass(frozen=True)
class Grid:
    """Collocated node grid on [alpha, beta]; immutable after construction."""

    nodes: np.ndarray
    stretching: Stretching
    sinh_scale: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        if self.nodes.ndim != 1 or self.nodes.size < 2:
            raise GridError("grid needs at least two nodes")
        if np.any(np.diff(self.nodes) <= 0):
            raise GridError("grid nodes must be strictly increasing")
        self.nodes.setflags(write=False)

    @property
    def alpha(self) -> float:
        return float(self.nodes[0])

    @property
    def beta(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_cells(self) -> int:
        return self.nodes.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def min_width(self) -> float:
        return float(np.min(self.widths))

    def node_weights(self) -> np.ndarray:
        """Trapezoid quadrature weights at nodes."""
        h = self.widths
        w = np.zeros(self.nodes.size)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        return w


def build_grid(alpha: float, beta: float, n_cells: int,
               stretching: Stretching | str = Stretching.UNIFORM,
               sinh_scale: float = 3.0) -> Grid:
    """Partition [alpha, beta] into n_cells intervals.

    Sinh stretching maps a uniform computational coordinate through
    y = mid + half_width * sinh(c*xi) / sinh(c), concentrating nodes near the
    domain midpoint and coarsening geometrically toward the far field.
    """
    alpha, beta = float(alpha), float(beta)
    if beta - alpha < 1.0:
        raise GridError("domain width must be at least 1")
    if n_cells < 2:
        raise GridError("need at least 2 cells")
    stretching = Stretching(stretching)
    xi = np.linspace(-1.0, 1.0, n_cells + 1)
    mid = 0.5 * (alpha + beta)
    half = 0.5 * (beta - alpha)
    if stretching is Stretching.UNIFORM:
        nodes = mid + half * xi
    else:
        if sinh_scale <= 0:
            raise GridError("sinh scale must be positive")
        nodes = mid + half * np.sinh(sinh_scale * xi) / np.sinh(sinh_scale)
    # pin the endpoints against round-off
    nodes[0], nodes[-1] = alpha, beta
    return Grid(nodes=nodes, stretching=stretching, sinh_scale=float(sinh_scale))


@dataclass(frozen=True)
class DomainSequence:
    """Expanding symmetric domains (-L0*g^n, L0*g^n), n = 0..n_levels-1."""

    base_half_width: float
    growth: float
    n_levels: int

    def __post_init__(self):
        if self.base_half_width <= 0.5:
            raise GridError("base half width must exceed 0.5 (domain width >= 1)")
        if self.growth <= 1.0:
            raise GridError("growth factor must exceed 1")
        if self.n_levels < 1:
            raise GridError("need at least one level")


def domain_sequence(seq: DomainSequence, n: int) -> tuple[float, float]:
    """Endpoints (alpha_n, beta_n) of level n."""
    if not (0 <= n < seq.n_levels):
        raise GridError(f"level {n} out of range [0, {seq.n_levels})")
    half = seq.base_half_width * seq.growth ** n
    return (-half, half)
