"""Exact computations over the full 2^N state space.

Everything is log-domain and max-shifted: inverse temperatures as large as
``exp(sqrt(log N))`` appear in valley searches and would overflow naive
exponentials.  ``beta = math.inf`` is a distinct, explicitly handled case
meaning the uniform distribution on the ground states.

Two sweep strategies fill energy tables:

* ``gray``: Gray-code enumeration with incremental single-flip updates,
  O(N) per state for SK and O(deg) per state for graph models;
* ``direct``: block matrix evaluation of all states at once.

They agree to rounding error; the cross-check is part of the test suite.

Two-replica (product-measure) averages of site-overlap functions use the
exact overlap distribution between two Gibbs tables, obtained by an XOR
convolution of the weight vectors via the fast Walsh-Hadamard transform in
O(2^N N) - the same trick makes every moment E<R^2k> available at once.
A generic O(4^N) double sum is kept for arbitrary observables at small N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .disorder import DisorderVector, fresh_disorder, ou_mix
from .errors import NumericError, ResourceLimitError, ShapeMismatchError
from .models import (
    MAX_EXACT_SITES,
    EdwardsAndersonModel,
    Graph,
    MixedPSpinModel,
    ModelSpec,
    REMModel,
    SKModel,
    SpinConfiguration,
    all_states,
    check_disorder,
    coupling_count,
    field_normalization,
    kernel_scale,
    spin_matrix,
)
from .rng import SeedRecord, as_seed

_CHUNK_BITS = 18  # direct sweeps evaluate at most 2^18 states per block


# ---------------------------------------------------------------------------
# Walsh-Hadamard machinery for exact overlap distributions


def fwht(vec: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform (length a power of two)."""
    a = np.array(vec, dtype=np.float64)
    n = a.size
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        u = a[:, 0, :].copy()
        v = a[:, 1, :].copy()
        a[:, 0, :] = u + v
        a[:, 1, :] = u - v
        a = a.reshape(n)
        h *= 2
    return a


def xor_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """c[z] = sum_x a[x] b[x XOR z]."""
    return fwht(fwht(a) * fwht(b)) / a.size


@lru_cache(maxsize=8)
def _popcounts(n_sites: int) -> np.ndarray:
    return np.bitwise_count(all_states(n_sites).astype(np.uint64)).astype(np.int64)


# ---------------------------------------------------------------------------
# energy tables


def _sk_coupling_sum(model: SKModel, values: np.ndarray) -> np.ndarray:
    g = values.reshape(model.n_sites, model.n_sites)
    return g + g.T


def _graph_csr(graph: Graph, values: np.ndarray):
    n = graph.n_vertices
    counts = np.zeros(n, dtype=np.int64)
    for i, j in graph.edges:
        counts[i] += 1
        counts[j] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    neighbors = np.zeros(indptr[-1], dtype=np.int64)
    weights = np.zeros(indptr[-1], dtype=np.float64)
    cursor = indptr[:-1].copy()
    for (i, j), w in zip(graph.edges, values):
        neighbors[cursor[i]] = j
        weights[cursor[i]] = w
        cursor[i] += 1
        neighbors[cursor[j]] = i
        weights[cursor[j]] = w
        cursor[j] += 1
    return indptr, neighbors, weights


def _sk_field_direct(model: SKModel, values: np.ndarray) -> np.ndarray:
    n = model.n_sites
    g = values.reshape(n, n)
    out = np.empty(1 << n, dtype=np.float64)
    states = all_states(n)
    step = 1 << _CHUNK_BITS
    for start in range(0, states.size, step):
        s = spin_matrix(n, states[start : start + step]).astype(np.float64)
        out[start : start + s.shape[0]] = np.einsum("si,ij,sj->s", s, g, s, optimize=True)
    return out


def bond_spin_matrix(graph: Graph, states: np.ndarray | None = None) -> np.ndarray:
    """Per-state edge products sigma_i sigma_j, one column per edge (int8)."""
    s = spin_matrix(graph.n_vertices, states)
    e = graph.edge_array()
    return s[:, e[:, 0]] * s[:, e[:, 1]]


def _ea_energy_direct(model: EdwardsAndersonModel, values: np.ndarray) -> np.ndarray:
    n = model.n_sites
    out = np.empty(1 << n, dtype=np.float64)
    states = all_states(n)
    step = 1 << _CHUNK_BITS
    for start in range(0, states.size, step):
        b = bond_spin_matrix(model.graph, states[start : start + step]).astype(np.float64)
        out[start : start + b.shape[0]] = -(b @ values)
    return out


def _pspin_field_direct(model: MixedPSpinModel, values: np.ndarray) -> np.ndarray:
    from .models import _pspin_blocks

    n = model.n_sites
    out = np.zeros(1 << n, dtype=np.float64)
    states = all_states(n)
    step = 1 << _CHUNK_BITS
    for start in range(0, states.size, step):
        s = spin_matrix(n, states[start : start + step]).astype(np.float64)
        acc = np.zeros(s.shape[0])
        for p, c, tensor in _pspin_blocks(model, values):
            cur = s @ tensor.reshape(n, -1)
            for _ in range(p - 1):
                cur = (s[:, :, None] * cur.reshape(s.shape[0], n, -1)).sum(axis=1)
            acc += math.sqrt(c) * n ** ((1 - p) / 2) * cur.ravel()
        out[start : start + s.shape[0]] = acc
    return out


def energy_table(model: ModelSpec, g, method: str = "auto") -> np.ndarray:
    """H(sigma) for all 2^N states, indexed by the state's bit pattern."""
    values = check_disorder(model, g)
    if model.n_sites > MAX_EXACT_SITES:
        raise ResourceLimitError(f"N={model.n_sites} exceeds exact cap {MAX_EXACT_SITES}")
    if method not in ("auto", "gray", "direct"):
        raise ValueError(f"unknown sweep method {method!r}")
    if isinstance(model, SKModel):
        if method in ("auto", "gray"):
            from ._kernels import sk_field_table_gray

            field = sk_field_table_gray(_sk_coupling_sum(model, values))
        else:
            field = _sk_field_direct(model, values)
        table = -field / field_normalization(model)
    elif isinstance(model, EdwardsAndersonModel):
        if method in ("auto", "gray"):
            from ._kernels import graph_energy_table_gray

            indptr, neighbors, weights = _graph_csr(model.graph, values)
            table = graph_energy_table_gray(model.n_sites, indptr, neighbors, weights)
        else:
            table = _ea_energy_direct(model, values)
    elif isinstance(model, REMModel):
        table = -math.sqrt(model.n_sites) * values
    elif isinstance(model, MixedPSpinModel):
        table = -_pspin_field_direct(model, values)
    else:
        raise TypeError(f"unknown model {model!r}")
    if not np.all(np.isfinite(table)):
        raise NumericError("energy table contains non-finite values")
    return table


def field_table(model: ModelSpec, g, method: str = "auto") -> np.ndarray:
    """The model's field (SK: raw X; others: -H) for all states."""
    return -field_normalization(model) * energy_table(model, g, method)


# ---------------------------------------------------------------------------
# Gibbs tables


@dataclass(frozen=True)
class GibbsTable:
    """Exact energies and normalized log-weights at inverse temperature beta."""

    model: ModelSpec
    energies: np.ndarray
    beta: float
    log_weights: np.ndarray
    log_z: float
    ground_energy: float

    @property
    def n_sites(self) -> int:
        return self.model.n_sites

    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)


def table_from_energies(model: ModelSpec, energies: np.ndarray, beta: float) -> GibbsTable:
    energies = np.asarray(energies, dtype=np.float64)
    if not np.all(np.isfinite(energies)):
        raise NumericError("non-finite energies")
    ground = float(energies.min())
    if math.isinf(beta):
        if beta < 0:
            raise ValueError("beta must be >= 0 or +infinity")
        mask = energies == ground
        count = int(mask.sum())
        log_w = np.where(mask, -math.log(count), -math.inf)
        return GibbsTable(model, energies, math.inf, log_w, math.inf, ground)
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    scaled = -beta * energies
    log_z = float(logsumexp(scaled))
    return GibbsTable(model, energies, float(beta), scaled - log_z, log_z, ground)


def build_gibbs_table(model: ModelSpec, g, beta: float, method: str = "auto") -> GibbsTable:
    """Enumerate all states and normalize the Gibbs measure exactly."""
    return table_from_energies(model, energy_table(model, g, method), beta)


def mix_energy_tables(base: np.ndarray, fresh: np.ndarray, t: float) -> np.ndarray:
    """Energy table of OU-perturbed disorder, exp(-t) E + sqrt(1-e^{-2t}) E'.

    Valid because every model's Hamiltonian is linear in its couplings.
    """
    return ou_mix(base, fresh, t)


def free_energy(table: GibbsTable) -> float:
    """F = log(Z)/beta; at beta = infinity, minus the ground-state energy."""
    if math.isinf(table.beta):
        return -table.ground_energy
    if table.beta == 0.0:
        return math.inf
    return table.log_z / table.beta


def gibbs_expect(table: GibbsTable, observable) -> float:
    """Exact <observable> under the table's measure.

    ``observable`` is either a per-state array of length 2^N or a callable
    ``observable(states, n_sites) -> array``.
    """
    if callable(observable):
        values = np.asarray(observable(all_states(table.n_sites), table.n_sites), dtype=np.float64)
    else:
        values = np.asarray(observable, dtype=np.float64)
    if values.shape != table.energies.shape:
        raise ShapeMismatchError("observable must supply one value per state")
    return float(np.exp(table.log_weights) @ values)


def gibbs_site_product(table: GibbsTable, sites) -> float:
    """<sigma_{i1} ... sigma_{ik}> as an exact weighted sum."""
    s = spin_matrix(table.n_sites)
    prod = np.ones(s.shape[0], dtype=np.float64)
    for i in sites:
        prod *= s[:, i]
    return float(np.exp(table.log_weights) @ prod)


def two_replica_expect(
    table_a: GibbsTable,
    table_b: GibbsTable,
    observable,
    site_cap: int = 12,
) -> float:
    """Product-measure average E_(a x b)[obs(sigma^1, sigma^2)], O(4^N).

    ``observable(bits1, bits2)`` must broadcast over integer state arrays.
    Use :func:`overlap_moment` / :func:`bond_overlap_moments` for the
    structured observables; this generic path is capped at ``site_cap``
    sites.
    """
    if table_a.n_sites != table_b.n_sites:
        raise ShapeMismatchError("tables have different site counts")
    n = table_a.n_sites
    if n > site_cap:
        raise ResourceLimitError(f"generic two-replica sum is O(4^N); N={n} > cap {site_cap}")
    states = all_states(n)
    wa = np.exp(table_a.log_weights)
    wb = np.exp(table_b.log_weights)
    total = 0.0
    step = max(1, (1 << (2 * site_cap)) // states.size)
    for start in range(0, states.size, step):
        block = states[start : start + step]
        vals = np.asarray(observable(block[:, None], states[None, :]), dtype=np.float64)
        total += wa[start : start + block.size] @ vals @ wb
    return float(total)


def overlap_distribution(table_a: GibbsTable, table_b: GibbsTable):
    """Exact joint distribution of the site-overlap dot sigma^1 . sigma^2.

    Returns (dots, probs): the N+1 possible values N - 2m and their
    product-measure probabilities, via XOR convolution of the two weight
    vectors (O(2^N N)).
    """
    if table_a.n_sites != table_b.n_sites:
        raise ShapeMismatchError("tables have different site counts")
    n = table_a.n_sites
    conv = xor_convolve(np.exp(table_a.log_weights), np.exp(table_b.log_weights))
    probs = np.bincount(_popcounts(n), weights=conv, minlength=n + 1)
    dots = n - 2 * np.arange(n + 1, dtype=np.int64)
    return dots, probs


def overlap_moment(table_a: GibbsTable, table_b: GibbsTable, k: int = 1) -> float:
    """E<R^{2k}> under the product of the two Gibbs measures, exact."""
    if k < 0:
        raise ValueError("moment order must be >= 0")
    dots, probs = overlap_distribution(table_a, table_b)
    r = dots.astype(np.float64) / table_a.n_sites
    return float(probs @ r ** (2 * k))


def collision_probability(table_a: GibbsTable, table_b: GibbsTable) -> float:
    """E<1{sigma^1 = sigma^2}> = sum_sigma w_a(sigma) w_b(sigma)."""
    if table_a.n_sites != table_b.n_sites:
        raise ShapeMismatchError("tables have different site counts")
    return float(np.exp(logsumexp(table_a.log_weights + table_b.log_weights)))


def edge_correlations(table: GibbsTable, graph: Graph) -> np.ndarray:
    """<sigma_i sigma_j> for every edge."""
    bonds = bond_spin_matrix(graph).astype(np.float64)
    return np.exp(table.log_weights) @ bonds


def edge_pair_correlations(table: GibbsTable, graph: Graph) -> np.ndarray:
    """Matrix <(sigma_i sigma_j)(sigma_k sigma_l)> over edge pairs."""
    bonds = bond_spin_matrix(graph).astype(np.float64)
    return bonds.T @ (np.exp(table.log_weights)[:, None] * bonds)


def bond_overlap_moments(table_a: GibbsTable, table_b: GibbsTable, graph: Graph):
    """(E<Q>, E<Q^2>) between two Gibbs tables on the same graph, exact."""
    m = graph.n_edges
    ca = edge_correlations(table_a, graph)
    cb = edge_correlations(table_b, graph)
    q1 = float(ca @ cb) / m
    q2 = float(np.sum(edge_pair_correlations(table_a, graph) * edge_pair_correlations(table_b, graph))) / m**2
    return q1, q2


# ---------------------------------------------------------------------------
# maxima and ground states


@dataclass(frozen=True)
class FieldSummary:
    """Exact maximum of the field with certificate-scale metadata."""

    max_value: float
    argmax: tuple[SpinConfiguration, ...]
    sigma2: float
    m_est: float | None = None

    def with_mean_max(self, m_est: float) -> "FieldSummary":
        return replace(self, m_est=m_est)


def field_summary(model: ModelSpec, g, method: str = "auto") -> FieldSummary:
    table = field_table(model, g, method)
    best = float(table.max())
    argmax = tuple(
        SpinConfiguration(int(idx), model.n_sites) for idx in np.flatnonzero(table == best)
    )
    return FieldSummary(best, argmax, kernel_scale(model))


def mean_max(model: ModelSpec, n_disorder: int, seed: SeedRecord | int):
    """Monte Carlo estimate of E[max field] with its standard error."""
    root = as_seed(seed)
    maxima = np.empty(n_disorder)
    n = coupling_count(model)
    for i in range(n_disorder):
        g = fresh_disorder(n, root.child(i))
        maxima[i] = field_table(model, g).max()
    return float(maxima.mean()), float(maxima.std(ddof=1) / math.sqrt(n_disorder))


def ground_states(model: ModelSpec, g, method: str = "auto") -> list[SpinConfiguration]:
    """Exact argmin set of H; exact ties are all returned."""
    table = energy_table(model, g, method)
    ground = table.min()
    return [SpinConfiguration(int(i), model.n_sites) for i in np.flatnonzero(table == ground)]


def sample_configuration(table: GibbsTable, rng: np.random.Generator) -> SpinConfiguration:
    """One exact draw from the table by inverse CDF over the 2^N weights."""
    cdf = np.cumsum(np.exp(table.log_weights))
    idx = int(np.searchsorted(cdf, rng.uniform() * cdf[-1], side="right"))
    return SpinConfiguration(min(idx, cdf.size - 1), table.n_sites)
