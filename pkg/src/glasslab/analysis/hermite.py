"""Variance of polynomial functions of i.i.d. standard Gaussians.

Two independent routes are kept side by side on purpose:

* ``hermite_variance``: the derivative expansion
  ``var(f) = sum_{k>=1} (1/k!) sum_{i_1..i_k} (E d^k f / dg_{i_1}..dg_{i_k})^2``,
  which for a polynomial terminates at k = deg f and involves only exact
  Gaussian moments.  Grouping the ordered index tuples by multi-index
  alpha turns the inner sum into ``(E d^alpha f)^2 / alpha!``.
* ``gaussian_variance_oracle``: plain ``E f^2 - (E f)^2`` by expanding the
  product polynomial, used as the oracle the expansion is tested against.

The derivative route also yields the lower bound
``var(f) >= (1/2) sum_i (E g_i d_i f)^2 >= (1/2n) (E g . grad f)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

Exponents = tuple[int, ...]


def _double_factorial(m: int) -> int:
    # (m)!! for odd m; gaussian moment E g^{2j} = (2j-1)!!
    return math.prod(range(1, m + 1, 2))


def gaussian_moment(exponent: int) -> float:
    """E[g^e] for standard Gaussian g: 0 for odd e, (e-1)!! for even e."""
    if exponent % 2:
        return 0.0
    return float(_double_factorial(exponent - 1))


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial in n variables; no zero coefficients stored."""

    n: int
    terms: Mapping[Exponents, float]

    def __post_init__(self):
        clean = {}
        for exps, coef in self.terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n:
                raise ValueError(f"exponent tuple {exps} does not have {self.n} entries")
            if any(e < 0 for e in exps):
                raise ValueError("exponents must be nonnegative")
            if coef != 0.0:
                clean[exps] = clean.get(exps, 0.0) + float(coef)
        object.__setattr__(self, "terms", {e: c for e, c in clean.items() if c != 0.0})

    @classmethod
    def variable(cls, n: int, i: int) -> "Polynomial":
        exps = tuple(1 if j == i else 0 for j in range(n))
        return cls(n, {exps: 1.0})

    @classmethod
    def constant(cls, n: int, value: float) -> "Polynomial":
        return cls(n, {(0,) * n: value})

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.n != other.n:
            raise ValueError("mixed variable counts")
        merged = dict(self.terms)
        for e, c in other.terms.items():
            merged[e] = merged.get(e, 0.0) + c
        return Polynomial(self.n, merged)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self.n, {e: c * other for e, c in self.terms.items()})
        if self.n != other.n:
            raise ValueError("mixed variable counts")
        out: dict[Exponents, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, 0.0) + c1 * c2
        return Polynomial(self.n, out)

    __rmul__ = __mul__

    def partial(self, i: int) -> "Polynomial":
        out: dict[Exponents, float] = {}
        for exps, coef in self.terms.items():
            if exps[i] == 0:
                continue
            key = exps[:i] + (exps[i] - 1,) + exps[i + 1 :]
            out[key] = out.get(key, 0.0) + coef * exps[i]
        return Polynomial(self.n, out)

    def gaussian_expectation(self) -> float:
        """E f(g) for g a standard Gaussian vector, exact."""
        total = 0.0
        for exps, coef in self.terms.items():
            m = 1.0
            for e in exps:
                m *= gaussian_moment(e)
                if m == 0.0:
                    break
            total += coef * m
        return total

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at points; ``x`` has shape (..., n)."""
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape[:-1])
        for exps, coef in self.terms.items():
            term = np.full(x.shape[:-1], coef)
            for i, e in enumerate(exps):
                if e:
                    term = term * x[..., i] ** e
            out = out + term
        return out


def _multi_indices(n: int, max_total: int):
    """All exponent tuples with 1 <= sum <= max_total."""
    def rec(prefix, remaining, slots):
        if slots == 0:
            yield prefix
            return
        for e in range(remaining + 1):
            yield from rec(prefix + (e,), remaining - e, slots - 1)

    for alpha in rec((), max_total, n):
        if 0 < sum(alpha) <= max_total:
            yield alpha


@dataclass(frozen=True)
class DerivativeVariance:
    total: float
    terms: dict[Exponents, float]  # multi-index -> (E d^alpha f)^2 / alpha!


def hermite_variance(f: Polynomial) -> DerivativeVariance:
    """Exact variance via the derivative expansion (terminates at deg f)."""
    degree = f.degree()
    cache: dict[Exponents, Polynomial] = {(0,) * f.n: f}

    def derivative(alpha: Exponents) -> Polynomial:
        if alpha in cache:
            return cache[alpha]
        i = next(j for j, e in enumerate(alpha) if e > 0)
        parent = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
        cache[alpha] = derivative(parent).partial(i)
        return cache[alpha]

    terms: dict[Exponents, float] = {}
    total = 0.0
    for alpha in _multi_indices(f.n, degree):
        mean = derivative(alpha).gaussian_expectation()
        if mean == 0.0:
            continue
        weight = math.prod(math.factorial(e) for e in alpha)
        contribution = mean * mean / weight
        terms[alpha] = contribution
        total += contribution
    return DerivativeVariance(total, terms)


def gaussian_variance_oracle(f: Polynomial) -> float:
    """var(f) = E f^2 - (E f)^2 via exact moment evaluation of f^2."""
    mean = f.gaussian_expectation()
    return (f * f).gaussian_expectation() - mean * mean


@dataclass(frozen=True)
class GradientLowerBound:
    per_coordinate: float  # (1/2) sum_i (E g_i d_i f)^2
    aggregate: float  # (1/2n) (E g . grad f)^2


def variance_lower_bound_general(f: Polynomial) -> GradientLowerBound:
    """Both forms of the first-derivative variance lower bound, exact."""
    per_coord = 0.0
    dot = 0.0
    for i in range(f.n):
        term = (Polynomial.variable(f.n, i) * f.partial(i)).gaussian_expectation()
        per_coord += term * term
        dot += term
    return GradientLowerBound(0.5 * per_coord, dot * dot / (2 * f.n))


def random_polynomial(
    rng: np.random.Generator, n: int, max_degree: int, n_terms: int = 6
) -> Polynomial:
    """Random sparse test polynomial with small integer-ish coefficients."""
    terms: dict[Exponents, float] = {}
    for _ in range(n_terms):
        total = int(rng.integers(0, max_degree + 1))
        cuts = np.sort(rng.integers(0, total + 1, size=n - 1)) if n > 1 else np.array([], dtype=int)
        parts = np.diff(np.concatenate([[0], cuts, [total]]))
        coef = float(rng.integers(-3, 4))
        if coef == 0.0:
            coef = 1.0
        key = tuple(int(p) for p in parts)
        terms[key] = terms.get(key, 0.0) + coef
    return Polynomial(n, terms)
