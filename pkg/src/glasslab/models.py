"""Model families: SK, mixed p-spin, Edwards-Anderson on a graph, REM.

Conventions, fixed once here and relied on everywhere else:

* Sherrington-Kirkpatrick (SK).  The raw field is
  ``X(sigma) = sum_{1<=i,j<=N} g_ij sigma_i sigma_j`` over *all ordered
  pairs including the diagonal* (no symmetrization), and the Hamiltonian is
  ``H = -X / sqrt(2N)``.  The constants downstream (per-state field
  variance N^2, Gibbs-field variance N/2) depend on this convention.
* Edwards-Anderson (E-A) on an undirected graph ``G=(V,E)``:
  ``H = -sum_{(i,j) in E} g_ij sigma_i sigma_j``; the field is ``-H``.
* Random Energy Model (REM): one coupling per state, field
  ``X(sigma) = sqrt(N) g_sigma`` so that per-state variance is N; capped
  at N <= 24 because the coupling array has 2^N entries.
* Mixed p-spin with kernel ``xi(x) = sum_p c_p x^p`` (c_p >= 0): realized
  as independent tensor fields
  ``H = -sum_p sqrt(c_p) N^((1-p)/2) sum_{i_1..i_p} g_{i_1..i_p}
  sigma_{i_1} ... sigma_{i_p}``
  over ordered tuples, which gives Cov(H(s), H(s')) = N xi(R) exactly.
  SK is the special case xi(x) = x^2 / 2.

Two covariance scales appear in the analysis.  ``covariance_kernel`` is
the normalized per-state kernel used for orthogonality certificates
(diagonal N for SK/p-spin/REM, |E| for E-A).  ``gibbs_field_covariance``
is the covariance of the field ``-H`` in the Gibbs exponent, the scale on
which the free-energy variance identity holds; the two differ only for SK
(N R^2 versus N R^2 / 2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ResourceLimitError, ShapeMismatchError

#: Exact enumeration works on 2^N states; above this we refuse.
MAX_EXACT_SITES = 24


# ---------------------------------------------------------------------------
# spin configurations


@dataclass(frozen=True, order=True)
class SpinConfiguration:
    """An N-site state sigma in {-1,+1}^N packed into an integer.

    Bit i set means sigma_i = +1.  Bits at positions >= n_sites must be 0.
    """

    bits: int
    n_sites: int

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if self.bits < 0 or self.bits >> self.n_sites:
            raise ValueError("bits outside the configured number of sites")

    @classmethod
    def from_spins(cls, spins) -> "SpinConfiguration":
        spins = np.asarray(spins)
        bits = 0
        for i, s in enumerate(spins):
            if s not in (-1, 1):
                raise ValueError("spins must be +-1")
            if s == 1:
                bits |= 1 << i
        return cls(bits, len(spins))

    @classmethod
    def from_string(cls, text: str) -> "SpinConfiguration":
        return cls.from_spins([1 if c == "+" else -1 for c in text])

    def spins(self) -> np.ndarray:
        """The +-1 vector (sigma_0, ..., sigma_{N-1})."""
        idx = (self.bits >> np.arange(self.n_sites)) & 1
        return (2 * idx - 1).astype(np.int8)

    def flip(self, site: int) -> "SpinConfiguration":
        if not 0 <= site < self.n_sites:
            raise ValueError("site index out of range")
        return SpinConfiguration(self.bits ^ (1 << site), self.n_sites)

    def __str__(self) -> str:
        return "".join("+" if (self.bits >> i) & 1 else "-" for i in range(self.n_sites))


def all_states(n_sites: int) -> np.ndarray:
    """State indices 0 .. 2^N - 1."""
    if n_sites > MAX_EXACT_SITES:
        raise ResourceLimitError(f"2^{n_sites} states exceed the exact cap of 2^{MAX_EXACT_SITES}")
    return np.arange(1 << n_sites, dtype=np.int64)


def spin_matrix(n_sites: int, states: np.ndarray | None = None) -> np.ndarray:
    """Matrix of +-1 spins, one row per state (int8)."""
    if states is None:
        states = all_states(n_sites)
    cols = (states[:, None] >> np.arange(n_sites)[None, :]) & 1
    return (2 * cols - 1).astype(np.int8)


def site_overlap(a: SpinConfiguration, b: SpinConfiguration) -> float:
    """Normalized dot product R = (sigma^1 . sigma^2) / N, in [-1, 1]."""
    if a.n_sites != b.n_sites:
        raise ShapeMismatchError("overlap requires equal site counts")
    disagreements = int(a.bits ^ b.bits).bit_count()
    return (a.n_sites - 2 * disagreements) / a.n_sites


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph given by vertex count and edge list."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    max_degree: int = field(init=False)

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        canon = []
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ValueError(f"edge ({i},{j}) outside vertex range")
            canon.append((min(i, j), max(i, j)))
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise ValueError(f"duplicate edge {a}")
        object.__setattr__(self, "edges", tuple(canon))
        degree = np.zeros(self.n_vertices, dtype=np.int64)
        for i, j in canon:
            degree[i] += 1
            degree[j] += 1
        object.__setattr__(self, "max_degree", int(degree.max(initial=0)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        return np.asarray(self.edges, dtype=np.int64).reshape(self.n_edges, 2)

    def to_json(self) -> dict:
        return {"n_vertices": self.n_vertices, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, obj: dict) -> "Graph":
        return cls(int(obj["n_vertices"]), tuple(tuple(e) for e in obj["edges"]))

    def to_edge_list(self) -> str:
        """Text form: vertex count on the first line, then one edge per line."""
        lines = [str(self.n_vertices)]
        lines += [f"{i} {j}" for i, j in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str) -> "Graph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty edge list")
        n = int(lines[0])
        edges = []
        for ln in lines[1:]:
            i, j = ln.split()
            edges.append((int(i), int(j)))
        return cls(n, tuple(edges))


def single_edge() -> Graph:
    return Graph(2, ((0, 1),))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def torus_grid(rows: int, cols: int) -> Graph:
    """2-D periodic grid; each dimension must be >= 3 to avoid doubled bonds."""
    if rows < 3 or cols < 3:
        raise ValueError("torus dimensions must be >= 3")
    def vid(r, c):
        return (r % rows) * cols + (c % cols)
    edges = []
    for r in range(rows):
        for c in range(cols):
            edges.append((vid(r, c), vid(r, c + 1)))
            edges.append((vid(r, c), vid(r + 1, c)))
    return Graph(rows * cols, tuple(edges))


def load_graph(path) -> Graph:
    """Read a graph from a ``.json`` or plain edge-list file."""
    text = open(path).read()
    if str(path).endswith(".json"):
        return Graph.from_json(json.loads(text))
    return Graph.from_edge_list(text)


# ---------------------------------------------------------------------------
# model specs


@dataclass(frozen=True)
class SKModel:
    n_sites: int

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")


@dataclass(frozen=True)
class MixedPSpinModel:
    """Mixed p-spin kernel xi(x) = sum_p c_p x^p with c_p >= 0.

    The kernel must be nonnegative on [-1, 1]; this holds automatically
    when only even p carry weight and is checked numerically otherwise.
    """

    n_sites: int
    coefficients: tuple[tuple[int, float], ...]  # sorted (p, c_p) pairs

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        pairs = []
        for p, c in dict(self.coefficients).items():
            if p < 1:
                raise ValueError(f"tensor order p={p} must be >= 1")
            if c < 0:
                raise ValueError(f"coefficient c_{p}={c} must be >= 0")
            if c > 0:
                pairs.append((int(p), float(c)))
        pairs.sort()
        if not pairs:
            raise ValueError("at least one positive coefficient required")
        object.__setattr__(self, "coefficients", tuple(pairs))
        grid = np.linspace(-1.0, 1.0, 2001)
        if np.min(self.xi(grid)) < -1e-12:
            raise ValueError("kernel xi must be nonnegative on [-1, 1]")

    def xi(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for p, c in self.coefficients:
            out += c * x**p
        return out

    def xi_total(self) -> float:
        """xi(1) = sum of coefficients."""
        return sum(c for _, c in self.coefficients)


@dataclass(frozen=True)
class EdwardsAndersonModel:
    graph: Graph

    @property
    def n_sites(self) -> int:
        return self.graph.n_vertices


@dataclass(frozen=True)
class REMModel:
    n_sites: int

    def __post_init__(self):
        if not 1 <= self.n_sites <= MAX_EXACT_SITES:
            raise ResourceLimitError(
                f"REM stores 2^N couplings; N={self.n_sites} exceeds cap {MAX_EXACT_SITES}"
            )


ModelSpec = Union[SKModel, MixedPSpinModel, EdwardsAndersonModel, REMModel]


def coupling_count(model: ModelSpec) -> int:
    """Length of the disorder vector the model consumes."""
    if isinstance(model, SKModel):
        return model.n_sites**2
    if isinstance(model, MixedPSpinModel):
        return sum(model.n_sites**p for p, _ in model.coefficients)
    if isinstance(model, EdwardsAndersonModel):
        return model.graph.n_edges
    if isinstance(model, REMModel):
        return 1 << model.n_sites
    raise TypeError(f"unknown model {model!r}")


def check_disorder(model: ModelSpec, g) -> np.ndarray:
    values = g.values if hasattr(g, "values") else np.asarray(g, dtype=np.float64)
    want = coupling_count(model)
    if values.shape != (want,):
        raise ShapeMismatchError(
            f"{type(model).__name__} needs {want} couplings, got shape {values.shape}"
        )
    return values


def _pspin_blocks(model: MixedPSpinModel, values: np.ndarray):
    """Split the flat coupling array into one tensor per interaction order."""
    offset = 0
    for p, c in model.coefficients:
        size = model.n_sites**p
        yield p, c, values[offset : offset + size].reshape((model.n_sites,) * p)
        offset += size


def _pspin_field_one(model: MixedPSpinModel, values: np.ndarray, spins: np.ndarray) -> float:
    n = model.n_sites
    total = 0.0
    for p, c, tensor in _pspin_blocks(model, values):
        contracted = tensor
        for _ in range(p):
            contracted = contracted @ spins.astype(np.float64)
        total += math.sqrt(c) * n ** ((1 - p) / 2) * float(contracted)
    return total


def field_value(model: ModelSpec, g, config: SpinConfiguration) -> float:
    """The model's Gaussian field at one configuration.

    SK returns the raw double sum X(sigma); E-A, REM, and p-spin return
    ``-H(sigma)``.
    """
    values = check_disorder(model, g)
    if config.n_sites != model.n_sites:
        raise ShapeMismatchError("configuration size does not match model")
    s = config.spins().astype(np.float64)
    if isinstance(model, SKModel):
        return float(s @ values.reshape(model.n_sites, model.n_sites) @ s)
    if isinstance(model, EdwardsAndersonModel):
        e = model.graph.edge_array()
        return float(np.sum(values * s[e[:, 0]] * s[e[:, 1]]))
    if isinstance(model, REMModel):
        return math.sqrt(model.n_sites) * float(values[config.bits])
    if isinstance(model, MixedPSpinModel):
        return _pspin_field_one(model, values, s)
    raise TypeError(f"unknown model {model!r}")


def field_normalization(model: ModelSpec) -> float:
    """Constant c with H = -field / c."""
    if isinstance(model, SKModel):
        return math.sqrt(2 * model.n_sites)
    return 1.0


def hamiltonian(model: ModelSpec, g, config: SpinConfiguration) -> float:
    """Energy H(sigma); Gibbs weight is proportional to exp(-beta H)."""
    return -field_value(model, g, config) / field_normalization(model)


def bond_overlap(graph: Graph, a: SpinConfiguration, b: SpinConfiguration) -> float:
    """Q = (1/|E|) sum over edges of sigma^1_i sigma^1_j sigma^2_i sigma^2_j."""
    if a.n_sites != graph.n_vertices or b.n_sites != graph.n_vertices:
        raise ShapeMismatchError("configurations do not match graph size")
    sa, sb = a.spins().astype(np.int64), b.spins().astype(np.int64)
    e = graph.edge_array()
    prods = sa[e[:, 0]] * sa[e[:, 1]] * sb[e[:, 0]] * sb[e[:, 1]]
    return float(prods.sum()) / graph.n_edges


def covariance_kernel(model: ModelSpec, a: SpinConfiguration, b: SpinConfiguration) -> float:
    """Normalized per-state covariance kernel rho(sigma^1, sigma^2).

    SK: N R^2; E-A: |E| Q; REM: N 1{sigma^1 = sigma^2}; p-spin: N xi(R).
    The diagonal value is the certificate scale sigma^2 (N, |E|, N, N xi(1)).
    Note the SK value is quoted on the sqrt(N)-normalized field scale; the
    Gibbs-exponent kernel is :func:`gibbs_field_covariance`.
    """
    if isinstance(model, EdwardsAndersonModel):
        return model.graph.n_edges * bond_overlap(model.graph, a, b)
    if isinstance(model, REMModel):
        if a.n_sites != b.n_sites:
            raise ShapeMismatchError("overlap requires equal site counts")
        return float(model.n_sites) if a.bits == b.bits else 0.0
    r = site_overlap(a, b)
    if isinstance(model, SKModel):
        return model.n_sites * r * r
    if isinstance(model, MixedPSpinModel):
        return model.n_sites * float(model.xi(r))
    raise TypeError(f"unknown model {model!r}")


def kernel_scale(model: ModelSpec) -> float:
    """sigma^2 = diagonal of covariance_kernel (max per-state variance)."""
    if isinstance(model, EdwardsAndersonModel):
        return float(model.graph.n_edges)
    if isinstance(model, MixedPSpinModel):
        return model.n_sites * model.xi_total()
    return float(model.n_sites)


def gibbs_field_covariance(model: ModelSpec, a: SpinConfiguration, b: SpinConfiguration) -> float:
    """Covariance of the Gibbs-exponent field -H between two states.

    Equals covariance_kernel except for SK, where Cov(-H, -H') = N R^2 / 2
    (kernel xi(x) = x^2/2).
    """
    value = covariance_kernel(model, a, b)
    if isinstance(model, SKModel):
        return value / 2.0
    return value


def gibbs_xi(model: ModelSpec):
    """xi with Cov(-H, -H') = N xi(R), for the overlap-kernel models."""
    if isinstance(model, SKModel):
        return lambda x: np.asarray(x, dtype=np.float64) ** 2 / 2.0
    if isinstance(model, MixedPSpinModel):
        return model.xi
    raise TypeError(f"{type(model).__name__} kernel is not a function of site overlap")
