"""Gaussian disorder: generation, Ornstein-Uhlenbeck coupling, resampling.

A disorder vector is a flat array of i.i.d. standard Gaussian couplings.
Two perturbation mechanisms are provided:

* the continuous flow ``g -> exp(-t) g + sqrt(1 - exp(-2t)) g'``, which is
  the time-``t`` Ornstein-Uhlenbeck evolution of every coupling and keeps
  the standard-Gaussian marginal; the two-sided variant reuses the same
  base ``g`` with two independent fresh vectors, giving a pair whose
  components have correlation ``exp(-2t)``;
* resampling: replace the couplings indexed by a subset ``A`` with
  independent fresh copies and keep the rest.

Times ``t >= T_INFINITE`` are treated as infinite (``exp(-50) < 2e-22``),
which lets experiment grids include an "infinity" point without
special-casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError
from .rng import SeedRecord, as_seed

#: OU times at or beyond this value are treated as t = infinity.
T_INFINITE = 50.0


@dataclass(frozen=True)
class DisorderVector:
    """Flat array of couplings, i.i.d. N(0,1) at creation.

    ``seed`` is the record that reproduces the array; vectors derived by
    mixing or resampling carry ``seed=None`` and are reproduced from the
    root seed of the experiment that made them.
    """

    values: np.ndarray
    seed: SeedRecord | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise ShapeMismatchError("disorder values must be a flat array")
        if not np.all(np.isfinite(values)):
            raise ValueError("disorder contains non-finite entries")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_json(self) -> dict:
        out = {"n": self.n, "values": self.values.tolist()}
        if self.seed is not None:
            out["seed"] = self.seed.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DisorderVector":
        seed = SeedRecord.from_json(obj["seed"]) if "seed" in obj else None
        return cls(np.asarray(obj["values"], dtype=np.float64), seed)


@dataclass(frozen=True)
class CoupledDisorder:
    """Base couplings plus two independent fresh copies, at OU time t.

    ``plus()`` and ``minus()`` are conditionally i.i.d. given the base and
    have marginal correlation ``exp(-2t)`` with each other.
    """

    base: DisorderVector
    fresh_plus: DisorderVector
    fresh_minus: DisorderVector
    t: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"OU time must be nonnegative, got {self.t}")
        if not (self.base.n == self.fresh_plus.n == self.fresh_minus.n):
            raise ShapeMismatchError("coupled disorder vectors differ in length")

    def plus(self) -> DisorderVector:
        return ou_perturb(self, "+")

    def minus(self) -> DisorderVector:
        return ou_perturb(self, "-")


@dataclass(frozen=True)
class ResampleMask:
    """Set of coupling indices to replace with fresh copies."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        idx = np.unique(idx)
        object.__setattr__(self, "indices", idx)
        if idx.size and (idx[0] < 0 or idx[-1] >= self.n):
            raise ValueError("mask indices out of range")

    @property
    def k(self) -> int:
        return self.indices.shape[0]


def fresh_disorder(n: int, seed: SeedRecord | int) -> DisorderVector:
    """n i.i.d. standard Gaussian couplings, reproducible from ``seed``."""
    if n < 1:
        raise ValueError(f"coupling count must be >= 1, got {n}")
    record = as_seed(seed)
    values = record.generator().standard_normal(n)
    return DisorderVector(values, record)


def couple_disorder(n: int, t: float, seed: SeedRecord | int) -> CoupledDisorder:
    """Draw (g, g', g'') from three independent substreams of ``seed``."""
    record = as_seed(seed)
    return CoupledDisorder(
        base=fresh_disorder(n, record.child(0)),
        fresh_plus=fresh_disorder(n, record.child(1)),
        fresh_minus=fresh_disorder(n, record.child(2)),
        t=float(t),
    )


def ou_coefficients(t: float) -> tuple[float, float]:
    """Mixing weights (a, b) with a^2 + b^2 = 1 for OU time ``t``."""
    if t < 0:
        raise ValueError(f"OU time must be nonnegative, got {t}")
    a = 0.0 if t >= T_INFINITE else math.exp(-t)
    return a, math.sqrt(max(0.0, 1.0 - a * a))


def ou_mix(base: np.ndarray, fresh: np.ndarray, t: float) -> np.ndarray:
    a, b = ou_coefficients(t)
    if a == 1.0:
        return np.array(base, copy=True)
    if a == 0.0:
        return np.array(fresh, copy=True)
    return a * base + b * fresh


def ou_perturb(coupled: CoupledDisorder, sign: str = "+") -> DisorderVector:
    """The perturbed vector ``exp(-t) g + sqrt(1-exp(-2t)) g^fresh``.

    ``sign`` selects which fresh copy is mixed in ("+" or "-"); the two
    choices give the two-sided pair.
    """
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    fresh = coupled.fresh_plus if sign == "+" else coupled.fresh_minus
    return DisorderVector(ou_mix(coupled.base.values, fresh.values, coupled.t))


def resample_subset(
    g: DisorderVector, g_fresh: DisorderVector, mask: ResampleMask
) -> DisorderVector:
    """Replace exactly the masked components of ``g`` with ``g_fresh``."""
    if g.n != g_fresh.n:
        raise ShapeMismatchError(f"length mismatch: {g.n} vs {g_fresh.n}")
    if mask.n != g.n:
        raise ShapeMismatchError(f"mask built for n={mask.n}, disorder has n={g.n}")
    values = np.array(g.values, copy=True)
    values[mask.indices] = g_fresh.values[mask.indices]
    return DisorderVector(values)


def random_mask(n: int, k: int, seed: SeedRecord | int) -> ResampleMask:
    """Uniformly random subset of size k out of n coupling indices."""
    if not 0 <= k <= n:
        raise ValueError(f"subset size k={k} must satisfy 0 <= k <= n={n}")
    rng = as_seed(seed).generator()
    indices = rng.choice(n, size=k, replace=False)
    return ResampleMask(np.sort(indices), n)
