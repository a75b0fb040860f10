"""Compiled inner loops: Gray-code state sweeps and single-site chains.

The Gray-code sweeps visit all 2^N states in an order where consecutive
states differ by one spin flip, updating the energy incrementally: O(N)
work per state for SK (dense couplings), O(deg) for a graph model.  The
tables they fill are indexed by the state's bit pattern, not by visit
order.

Everything here is deterministic given its inputs; chain kernels consume
pre-drawn uniforms so that all randomness stays with the caller's
generator.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def sk_field_table_gray(coupling_sum: np.ndarray) -> np.ndarray:
    """Raw SK field X(sigma) for all 2^N states.

    ``coupling_sum`` is G + G^T (diagonal included); X = 0.5 sigma' B sigma.
    """
    n = coupling_sum.shape[0]
    size = 1 << n
    out = np.empty(size, dtype=np.float64)
    sigma = np.full(n, -1.0)
    h = coupling_sum @ sigma
    x = 0.5 * float(np.dot(sigma, h))
    out[0] = x
    gray = 0
    for s in range(1, size):
        lsb = s & (-s)
        i = 0
        while (lsb >> i) & 1 == 0:
            i += 1
        si = sigma[i]
        x += -2.0 * si * h[i] + 2.0 * coupling_sum[i, i]
        for j in range(n):
            h[j] -= 2.0 * si * coupling_sum[j, i]
        sigma[i] = -si
        gray ^= lsb
        out[gray] = x
    return out


@njit(cache=True)
def graph_energy_table_gray(
    n: int,
    indptr: np.ndarray,
    neighbors: np.ndarray,
    weights: np.ndarray,
) -> np.ndarray:
    """Graph Hamiltonian H(sigma) = -sum_edges g_ij s_i s_j for all states.

    Adjacency in CSR form; each undirected edge appears from both ends with
    the same weight.
    """
    size = 1 << n
    out = np.empty(size, dtype=np.float64)
    sigma = np.full(n, -1.0)
    energy = 0.0
    for i in range(n):
        for idx in range(indptr[i], indptr[i + 1]):
            j = neighbors[idx]
            if j > i:
                energy -= weights[idx] * sigma[i] * sigma[j]
    out[0] = energy
    gray = 0
    for s in range(1, size):
        lsb = s & (-s)
        i = 0
        while (lsb >> i) & 1 == 0:
            i += 1
        local = 0.0
        for idx in range(indptr[i], indptr[i + 1]):
            local += weights[idx] * sigma[neighbors[idx]]
        # flipping s_i changes H by 2 s_i * local
        energy += 2.0 * sigma[i] * local
        sigma[i] = -sigma[i]
        gray ^= lsb
        out[gray] = energy
    return out


@njit(cache=True)
def dense_chain_sweeps(
    coupling_sum: np.ndarray,
    beta_eff: float,
    spins: np.ndarray,
    uniforms: np.ndarray,
    heat_bath: bool,
) -> np.ndarray:
    """Single-site chain on exponent 0.5 * beta_eff * sigma' B sigma.

    Runs ``uniforms.shape[0]`` sweeps of sequential site updates in place
    and returns the spin vector after each sweep (int8 matrix).  With
    ``heat_bath`` the update draws the site's conditional (Glauber,
    acceptance = logistic of twice the local field); otherwise Metropolis.
    """
    n = coupling_sum.shape[0]
    n_sweeps = uniforms.shape[0]
    out = np.empty((n_sweeps, n), dtype=np.int8)
    h = coupling_sum @ spins
    for sweep in range(n_sweeps):
        for i in range(n):
            a = h[i] - coupling_sum[i, i] * spins[i]
            old = spins[i]
            if heat_bath:
                p_plus = 1.0 / (1.0 + np.exp(-2.0 * beta_eff * a))
                new = 1.0 if uniforms[sweep, i] < p_plus else -1.0
            else:
                delta = -2.0 * old * a
                accept = delta >= 0.0 or uniforms[sweep, i] < np.exp(beta_eff * delta)
                new = -old if accept else old
            if new != old:
                diff = new - old
                for j in range(n):
                    h[j] += coupling_sum[j, i] * diff
                spins[i] = new
        for i in range(n):
            out[sweep, i] = np.int8(spins[i])
    return out


@njit(cache=True)
def graph_chain_sweeps(
    n: int,
    indptr: np.ndarray,
    neighbors: np.ndarray,
    weights: np.ndarray,
    beta: float,
    spins: np.ndarray,
    uniforms: np.ndarray,
    heat_bath: bool,
) -> np.ndarray:
    """Single-site chain for the graph model, O(deg) per site update."""
    n_sweeps = uniforms.shape[0]
    out = np.empty((n_sweeps, n), dtype=np.int8)
    for sweep in range(n_sweeps):
        for i in range(n):
            a = 0.0
            for idx in range(indptr[i], indptr[i + 1]):
                a += weights[idx] * spins[neighbors[idx]]
            old = spins[i]
            if heat_bath:
                p_plus = 1.0 / (1.0 + np.exp(-2.0 * beta * a))
                spins[i] = 1.0 if uniforms[sweep, i] < p_plus else -1.0
            else:
                delta = -2.0 * old * a
                if delta >= 0.0 or uniforms[sweep, i] < np.exp(beta * delta):
                    spins[i] = -old
        for i in range(n):
            out[sweep, i] = np.int8(spins[i])
    return out


@njit(cache=True)
def table_chain_sweeps(
    neg_beta_energies: np.ndarray,
    n: int,
    state: int,
    uniforms: np.ndarray,
    heat_bath: bool,
) -> np.ndarray:
    """Single-site chain driven by a full log-weight table (2^N entries).

    Fallback for models without local structure (REM, p-spin); requires
    the exact table, so it only reaches enumeration-scale systems.
    """
    n_sweeps = uniforms.shape[0]
    out = np.empty(n_sweeps, dtype=np.int64)
    for sweep in range(n_sweeps):
        for i in range(n):
            other = state ^ (1 << i)
            cur = neg_beta_energies[state]
            alt = neg_beta_energies[other]
            if heat_bath:
                p_move = 1.0 / (1.0 + np.exp(cur - alt))
                if uniforms[sweep, i] < p_move:
                    state = other
            else:
                if alt >= cur or uniforms[sweep, i] < np.exp(alt - cur):
                    state = other
        out[sweep] = state
    return out
