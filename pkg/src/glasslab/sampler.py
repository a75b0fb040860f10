"""MCMC sampling from Gibbs measures, for systems beyond enumeration reach.

Single-site chains: Glauber heat-bath by default (each visited site is
redrawn from its conditional, acceptance = logistic of twice the scaled
local field), Metropolis optionally.  A sweep visits all sites once in
fixed order.  SK uses dense local fields (O(N) per site), graph models use
adjacency lists (O(deg) per site).  REM and mixed p-spin have no local
structure, so their chains walk a precomputed exact table and only reach
enumeration-scale sizes.

beta = infinity is not supported here; use ``exact.ground_states``.

The burn-in default of 100 N sweeps is a heuristic, not a guarantee;
acceptance testing always compares chain averages against exact
enumeration at small N rather than trusting mixing at large N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels
from .exact import energy_table
from .errors import ShapeMismatchError
from .models import (
    EdwardsAndersonModel,
    ModelSpec,
    SKModel,
    SpinConfiguration,
    check_disorder,
)
from .rng import SeedRecord, as_seed
from .stats import chain_mean_stderr


@dataclass(frozen=True)
class ChainConfig:
    sweeps: int
    burn_in: int | None = None  # defaults to min(100 N, sweeps // 2)
    thinning: int = 1
    kernel: str = "glauber"
    seed: SeedRecord | int = 0

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if self.kernel not in ("glauber", "metropolis"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.burn_in is not None and not 0 <= self.burn_in < self.sweeps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < sweeps")

    def resolved_burn_in(self, n_sites: int) -> int:
        if self.burn_in is not None:
            return self.burn_in
        return min(100 * n_sites, self.sweeps // 2)


@dataclass(frozen=True)
class ReplicaSample:
    """A paired draw: sigma1 from measure(g_a), sigma2 from measure(g_b)."""

    sigma1: SpinConfiguration
    sigma2: SpinConfiguration
    provenance: dict = field(default_factory=dict)


def _spins_to_bits(spins: np.ndarray) -> np.ndarray:
    pos = (spins > 0).astype(np.int64)
    return pos @ (1 << np.arange(spins.shape[1], dtype=np.int64))


def chain_states(model: ModelSpec, g, beta: float, cfg: ChainConfig) -> np.ndarray:
    """Kept states (bit patterns) after burn-in and thinning."""
    if math.isinf(beta):
        raise ValueError("beta = infinity is not sampled; use exact.ground_states")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    values = check_disorder(model, g)
    n = model.n_sites
    rng = as_seed(cfg.seed).generator()
    spins0 = rng.choice(np.array([-1.0, 1.0]), size=n)
    uniforms = rng.random((cfg.sweeps, n))
    heat_bath = cfg.kernel == "glauber"
    if isinstance(model, SKModel):
        coupling_sum = values.reshape(n, n)
        coupling_sum = coupling_sum + coupling_sum.T
        beta_eff = beta / math.sqrt(2 * n)
        raw = _kernels.dense_chain_sweeps(coupling_sum, beta_eff, spins0, uniforms, heat_bath)
        bits = _spins_to_bits(raw)
    elif isinstance(model, EdwardsAndersonModel):
        from .exact import _graph_csr

        indptr, neighbors, weights = _graph_csr(model.graph, values)
        raw = _kernels.graph_chain_sweeps(
            n, indptr, neighbors, weights, beta, spins0, uniforms, heat_bath
        )
        bits = _spins_to_bits(raw)
    else:
        neg_beta_energies = -beta * energy_table(model, values)
        state0 = int(_spins_to_bits(spins0[None, :])[0])
        bits = _kernels.table_chain_sweeps(neg_beta_energies, n, state0, uniforms, heat_bath)
    burn = cfg.resolved_burn_in(n)
    return bits[burn :: cfg.thinning]


def run_chain(model: ModelSpec, g, beta: float, cfg: ChainConfig) -> Iterator[SpinConfiguration]:
    """Stream of configurations from the single-site chain."""
    for b in chain_states(model, g, beta, cfg):
        yield SpinConfiguration(int(b), model.n_sites)


def sample_replica_pair(
    model: ModelSpec, g_a, g_b, beta: float, cfg: ChainConfig
) -> Iterator[ReplicaSample]:
    """Paired states from two independent chains, one per disorder.

    The chains use disjoint substreams of ``cfg.seed`` and are
    conditionally independent given the disorders.
    """
    bits_a, bits_b = replica_pair_states(model, g_a, g_b, beta, cfg)
    prov = {"beta": beta, "kernel": cfg.kernel}
    for a, b in zip(bits_a, bits_b):
        yield ReplicaSample(
            SpinConfiguration(int(a), model.n_sites),
            SpinConfiguration(int(b), model.n_sites),
            prov,
        )


def replica_pair_states(model: ModelSpec, g_a, g_b, beta: float, cfg: ChainConfig):
    root = as_seed(cfg.seed)
    cfg_a = ChainConfig(cfg.sweeps, cfg.burn_in, cfg.thinning, cfg.kernel, root.child(0))
    cfg_b = ChainConfig(cfg.sweeps, cfg.burn_in, cfg.thinning, cfg.kernel, root.child(1))
    bits_a = chain_states(model, g_a, beta, cfg_a)
    bits_b = chain_states(model, g_b, beta, cfg_b)
    if bits_a.size != bits_b.size:
        raise ShapeMismatchError("replica chains produced different sample counts")
    return bits_a, bits_b


def chain_average(model: ModelSpec, g, beta: float, cfg: ChainConfig, observable):
    """Time average of ``observable(bits, n_sites)`` with IAT-based stderr."""
    bits = chain_states(model, g, beta, cfg)
    values = np.asarray(observable(bits, model.n_sites), dtype=np.float64)
    return chain_mean_stderr(values)
