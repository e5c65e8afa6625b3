"""Generating-function tail bounds and Azuma-style closed forms.

With ``p = (1 - eps)/2`` the per-slot adversarial probability and
``q = 1 - p``, the descent and ascent stopping-time generating functions
of the induced biased walk satisfy

    D(Z) = qZ + pZ D(Z)^2            (probability gf, D(1) = 1)
    A(Z) = pZ + qZ A(Z)^2            (defective: A(1) = p/q)

An epoch of the (rho, mu) walk is dominated by

    Mhat(Z) = pZ D(Z) + qZ D(Z) A(Z D(Z)),      Mhat(1) = 1 - eps,

and the last time the margin walk sits at zero is dominated by
``Lhat(Z) = eps / (1 - Mhat(Z))``, a probability generating function.
The probability that a k-bit string is forkable is then at most the tail
sum of ``Lhat`` past k.  For the relative margin after an arbitrarily long
prefix, the prefix reach enters through its stationary law, giving

    Bhat(Z) = Lhat(Z) * (1 - beta) / (1 - beta D(Z)),  beta = (1-eps)/(1+eps),

again a probability generating function whose tail past k bounds
Pr[mu_x(y) >= 0 for some |y| = k].

All series here have nonnegative coefficients, so the recurrences below
involve no cancellation and retain full relative precision even when the
coefficients decay to 1e-300.  Tail sums are computed directly (never as
1 minus a partial sum) for the same reason.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import BadParams, ComposeConstantTerm

__all__ = [
    "PowerSeries",
    "descent_series",
    "ascent_series",
    "mhat_series",
    "lhat_series",
    "bhat_series",
    "forkable_tail_bound",
    "relative_tail_bound",
    "convergence_radius",
    "azuma_forkable_bound",
    "azuma_relative_bound",
]


class PowerSeries:
    """A truncated power series; ``coeffs[t]`` is the coefficient of Z^t."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, t: int) -> float:
        return float(self.coeffs[t]) if t <= self.order else 0.0

    def truncate(self, n: int) -> "PowerSeries":
        out = np.zeros(n + 1)
        m = min(n, self.order)
        out[: m + 1] = self.coeffs[: m + 1]
        return PowerSeries(out)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = max(self.order, other.order)
        out = np.zeros(n + 1)
        out[: self.order + 1] += self.coeffs
        out[: other.order + 1] += other.coeffs
        return PowerSeries(out)

    def scale(self, c: float) -> "PowerSeries":
        return PowerSeries(c * self.coeffs)

    def shift(self, by: int = 1) -> "PowerSeries":
        """Multiply by Z^by, keeping the truncation order."""
        out = np.zeros(self.order + 1)
        if by <= self.order:
            out[by:] = self.coeffs[: self.order + 1 - by]
        return PowerSeries(out)

    def mul(self, other: "PowerSeries", n: Optional[int] = None) -> "PowerSeries":
        if n is None:
            n = max(self.order, other.order)
        return PowerSeries(np.convolve(self.coeffs, other.coeffs)[: n + 1])

    def reciprocal(self, n: Optional[int] = None) -> "PowerSeries":
        """1 / self, requiring a nonzero constant term."""
        if n is None:
            n = self.order
        a = self.truncate(n).coeffs
        if a[0] == 0.0:
            raise BadParams("reciprocal requires a nonzero constant term")
        c = np.zeros(n + 1)
        c[0] = 1.0 / a[0]
        for t in range(1, n + 1):
            c[t] = -c[0] * np.dot(a[1 : t + 1], c[t - 1 :: -1][:t])
        return PowerSeries(c)

    def compose(self, inner: "PowerSeries", n: Optional[int] = None) -> "PowerSeries":
        """self(inner(Z)) by Horner evaluation; inner must vanish at 0.

        O(order^3): fine for the small orders used in tests; the heavy
        composition inside Mhat goes through the dedicated quadratic
        recurrence instead.
        """
        if inner.coeffs[0] != 0.0:
            raise ComposeConstantTerm("inner series must have zero constant term")
        if n is None:
            n = max(self.order, inner.order)
        acc = PowerSeries(np.zeros(n + 1))
        for c in self.coeffs[::-1]:
            acc = acc.mul(inner, n)
            acc.coeffs[0] += c
        return acc

    def eval(self, z: float) -> float:
        return float(np.polynomial.polynomial.polyval(z, self.coeffs))

    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.coeffs)


def _check_eps(eps: float) -> tuple[float, float]:
    if not (0.0 < eps < 1.0):
        raise BadParams(f"eps must lie in (0, 1), got {eps}")
    p = (1.0 - eps) / 2.0
    return p, 1.0 - p


def _quadratic_stopping_series(n: int, lin: float, quad: float) -> np.ndarray:
    """Coefficients of F with F = lin*Z + quad*Z*F^2, built incrementally.

    ``sq`` tracks F^2 and is patched each time a new coefficient lands, so
    the whole construction is O(n^2) with nonnegative arithmetic only.
    """
    f = np.zeros(n + 1)
    sq = np.zeros(n + 1)
    if n >= 1:
        f[1] = lin
        if n >= 2:
            sq[2] = lin * lin
    for t in range(2, n + 1):
        f[t] = quad * sq[t - 1]
        if f[t] == 0.0:
            continue
        jmax = min(t - 1, n - t)
        if jmax >= 1:
            sq[t + 1 : t + jmax + 1] += 2.0 * f[t] * f[1 : jmax + 1]
        if 2 * t <= n:
            sq[2 * t] += f[t] * f[t]
    return f


def descent_series(eps: float, n: int) -> PowerSeries:
    """D(Z) truncated at order n; odd coefficients d_{2j+1} = Cat_j p^j q^{j+1}."""
    p, q = _check_eps(eps)
    return PowerSeries(_quadratic_stopping_series(n, q, p))


def ascent_series(eps: float, n: int) -> PowerSeries:
    p, q = _check_eps(eps)
    return PowerSeries(_quadratic_stopping_series(n, p, q))


def _ascent_of(inner: np.ndarray, eps: float, n: int) -> np.ndarray:
    """A(U(Z)) for a given inner series U with U(0) = 0.

    Uses the defining equation G = p*U + q*U*G^2 coefficient by
    coefficient rather than composing the explicit series, keeping the
    cost at O(n^2).
    """
    p, q = _check_eps(eps)
    if inner[0] != 0.0:
        raise ComposeConstantTerm("inner series must have zero constant term")
    u = np.zeros(n + 1)
    m = min(n, len(inner) - 1)
    u[: m + 1] = inner[: m + 1]
    g = np.zeros(n + 1)
    sq = np.zeros(n + 1)  # G^2, patched as coefficients of G land
    for t in range(1, n + 1):
        conv = np.dot(u[1:t], sq[t - 1 : 0 : -1]) if t >= 2 else 0.0
        g[t] = p * u[t] + q * conv
        if g[t] == 0.0:
            continue
        jmax = min(t - 1, n - t)
        if jmax >= 1:
            sq[t + 1 : t + jmax + 1] += 2.0 * g[t] * g[1 : jmax + 1]
        if 2 * t <= n:
            sq[2 * t] += g[t] * g[t]
    return g


def mhat_series(eps: float, n: int) -> PowerSeries:
    p, q = _check_eps(eps)
    d = descent_series(eps, n)
    zd = d.shift(1)
    a_of_zd = PowerSeries(_ascent_of(zd.coeffs, eps, n))
    return zd.scale(p) + zd.mul(a_of_zd, n).scale(q)


_series_cache: dict[tuple, np.ndarray] = {}


def lhat_series(eps: float, n: int) -> PowerSeries:
    """eps / (1 - Mhat); a probability gf (coefficients sum to 1)."""
    key = ("lhat", round(eps, 14), n)
    hit = _series_cache.get(key)
    if hit is None:
        m = mhat_series(eps, n).coeffs
        c = np.zeros(n + 1)
        c[0] = 1.0
        for t in range(1, n + 1):
            # (1 - Mhat) * c = 1 with m[0] == 0, all terms nonnegative.
            c[t] = np.dot(m[1 : t + 1], c[t - 1 :: -1][:t])
        hit = eps * c
        _series_cache[key] = hit
    return PowerSeries(hit.copy())


def bhat_series(eps: float, n: int) -> PowerSeries:
    """Lhat * (1 - beta)/(1 - beta*D); also a probability gf."""
    key = ("bhat", round(eps, 14), n)
    hit = _series_cache.get(key)
    if hit is None:
        beta = (1.0 - eps) / (1.0 + eps)
        d = descent_series(eps, n)
        one_minus = PowerSeries(-beta * d.coeffs)
        one_minus.coeffs[0] += 1.0
        geom = one_minus.reciprocal(n).scale(1.0 - beta)
        hit = lhat_series(eps, n).mul(geom, n).coeffs
        _series_cache[key] = hit
    return PowerSeries(hit.copy())


def _tail_sum(coeffs: np.ndarray, k: int, pair_ratio: float) -> float:
    """Sum of coefficients from index k on, plus a geometric tail estimate.

    The estimate pairs adjacent coefficients to wash out parity (Lhat is
    supported on even orders only) and extrapolates the pair sums with the
    analytic ratio ``radius(eps)^-2``.  The true coefficients decay like
    ``t^(-3/2) radius^-t`` (square-root singularity), so their successive
    pair ratios stay below the analytic one and the extrapolation is an
    upper bound on the truncated mass.
    """
    n = len(coeffs) - 1
    if k > n:
        raise BadParams(f"truncation order {n} is below k = {k}")
    total = math.fsum(coeffs[k:].tolist())
    if n - k >= 2 and 0.0 < pair_ratio < 1.0:
        last = coeffs[n - 1] + coeffs[n]
        if last > 0.0:
            total += last * pair_ratio / (1.0 - pair_ratio)
    return total


def _default_order(k: int) -> int:
    return max(4 * k, 256)


def forkable_tail_bound(k: int, eps: float, n: Optional[int] = None) -> float:
    """Upper bound on Pr[w_1..w_k is forkable] under Bernoulli((1-eps)/2)."""
    if k < 0:
        raise BadParams(f"k must be nonnegative, got {k}")
    if n is None:
        n = _default_order(k)
    ratio = convergence_radius(eps) ** -2
    return min(1.0, _tail_sum(lhat_series(eps, n).coeffs, k, ratio))


def relative_tail_bound(k: int, eps: float, n: Optional[int] = None) -> float:
    """Upper bound on Pr[mu_x(y) >= 0], |y| = k, uniform over the prefix x."""
    if k < 0:
        raise BadParams(f"k must be nonnegative, got {k}")
    if n is None:
        n = _default_order(k)
    ratio = convergence_radius(eps) ** -2
    return min(1.0, _tail_sum(bhat_series(eps, n).coeffs, k, ratio))


def convergence_radius(eps: float) -> float:
    """Radius of convergence of Lhat; the tail decays like radius^-k."""
    _check_eps(eps)
    return math.sqrt(
        (1.0 / (1.0 + eps)) * (2.0 / math.sqrt(1.0 - eps * eps) - 1.0 / (1.0 + eps))
    )


def azuma_forkable_bound(k: int, eps: float) -> float:
    """Closed-form martingale bound exp(-2 eps^4 k / (1 + 35 eps)), clamped."""
    if k < 0:
        raise BadParams(f"k must be nonnegative, got {k}")
    _check_eps(eps)
    return min(1.0, math.exp(-2.0 * eps**4 * k / (1.0 + 35.0 * eps)))


def azuma_relative_bound(k: int, eps: float) -> float:
    """Closed-form bound 3 exp(-k eps^4 / (64 + 35 eps)) for the relative margin."""
    if k < 0:
        raise BadParams(f"k must be nonnegative, got {k}")
    _check_eps(eps)
    return min(1.0, 3.0 * math.exp(-k * eps**4 / (64.0 + 35.0 * eps)))
