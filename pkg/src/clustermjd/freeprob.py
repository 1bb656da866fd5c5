"""Numerical free-probability engine.

The limiting eigenvalue law of each scheme's Gram matrix (1/n) H^H H is
described through its R-transform, assembled as a sum of rational/algebraic
terms (free additive convolution adds R-transforms). Each term corresponds to
one independent row block of the channel matrix, possibly padded with zero
columns:

  plain block       R(z) = q / (1 - beta q z)
  zero-padded block R(z) solves  z (q beta z - k) R^2
                                 - k (1 - z q (beta+1)) R + k^2 q = 0,
                    the branch finite at z = 0 (value k q).

Here k is the nonzero-column fraction, beta the column/row aspect ratio of
the nonzero block, and q its squared Frobenius norm normalized by the block
dimensions. The spectral density is recovered by inverting

  x + jy = R(-s) - 1/s

for s with Im(s) > 0 and reading f(x) = Im(s) / pi at small y. The inversion
clears the equation to a polynomial in s (exact rational arithmetic, cached
per term set), solves it by companion-matrix eigenvalues, and keeps the root
that is *physically consistent*: plugging it back, every term must reproduce
the same Stieltjes value through its own upper-half-plane branch. That test
separates the true root from spurious algebraic branches by several orders of
magnitude and is evaluated independently per grid point, so densities do not
depend on sweep direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy as sp
from scipy.integrate import simpson

__all__ = [
    "PoleEncountered",
    "NoPhysicalRoot",
    "RTransformTerm",
    "RTransformSum",
    "SpectralDensity",
    "DensityGrid",
    "mp_shannon_transform",
    "mp_density",
    "eval_r_transform",
    "stieltjes_from_r",
    "density_from_sum",
    "shannon_integral",
]

#: Height above the real axis at which the Stieltjes transform is read off.
STIELTJES_Y = 1e-6

#: Acceptance threshold for the root-consistency score. Physical roots score
#: below ~1e-3 even in badly conditioned sweeps; spurious branches score ~0.1+.
SCORE_THRESHOLD = 1e-2

#: Minimum imaginary part for a root to count as lying in the upper half plane.
IM_FLOOR = 1e-14

#: At height y, an abscissa counts as inside the support only when the root's
#: imaginary part clears this multiple of y. Outside the support the exact
#: transform still has Im(s) = O(y / gap^2), which this cutoff discards.
IN_SUPPORT_IM_FACTOR = 50.0


class PoleEncountered(ArithmeticError):
    """R-transform evaluated at (or too close to) a pole."""


class NoPhysicalRoot(ArithmeticError):
    """No upper-half-plane root is consistent with the term structure;
    the abscissa lies outside the continuous support."""


# ---------------------------------------------------------------------------
# Marchenko-Pastur closed forms
# ---------------------------------------------------------------------------

def mp_shannon_transform(g: float, beta: float) -> float:
    """E[log(1 + g X)] in nats for X following the Marchenko-Pastur-type law
    of a unit-profile Gram matrix with aspect ratio beta.

    Closed form:
        V(g, b) = log(1 + g - phi/4) + log(1 + g b - phi/4) / b - phi/(4 b g)
        phi     = (sqrt(g (1+sqrt b)^2 + 1) - sqrt(g (1-sqrt b)^2 + 1))^2
    The g = 0 limit is exactly 0.
    """
    if g < 0:
        raise ValueError("SNR argument must be non-negative")
    if beta <= 0:
        raise ValueError("aspect ratio must be positive")
    if g == 0.0:
        return 0.0
    rb = math.sqrt(beta)
    p = (math.sqrt(g * (1 + rb) ** 2 + 1) - math.sqrt(g * (1 - rb) ** 2 + 1)) ** 2
    return (math.log(1 + g - p / 4)
            + math.log(1 + g * beta - p / 4) / beta
            - p / (4 * beta * g))


def mp_density(x: np.ndarray, beta: float, q: float = 1.0) -> np.ndarray:
    """Continuous part of the law of a plain block's Gram matrix.

    Support [q (1-sqrt(beta))^2, q (1+sqrt(beta))^2]; for beta > 1 the law
    additionally carries a point mass 1 - 1/beta at zero (not returned here).
    """
    x = np.asarray(x, dtype=float)
    lo = q * (1 - math.sqrt(beta)) ** 2
    hi = q * (1 + math.sqrt(beta)) ** 2
    out = np.zeros_like(x)
    inside = (x > max(lo, 0.0)) & (x < hi)
    xi = x[inside]
    out[inside] = np.sqrt((hi - xi) * (xi - lo)) / (2 * np.pi * beta * q * xi)
    return out


# ---------------------------------------------------------------------------
# R-transform terms
# ---------------------------------------------------------------------------

def _as_fraction(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class RTransformTerm:
    """One free-convolution summand, stored with exact rational parameters."""

    k: Fraction
    beta: Fraction
    q: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", _as_fraction(self.k))
        object.__setattr__(self, "beta", _as_fraction(self.beta))
        object.__setattr__(self, "q", _as_fraction(self.q))
        if not 0 < self.k <= 1:
            raise ValueError(f"nonzero-column fraction k must be in (0, 1], got {self.k}")
        if self.beta <= 0:
            raise ValueError("aspect ratio beta must be positive")
        if self.q < 0:
            raise ValueError("normalized block norm q must be non-negative")

    @classmethod
    def plain(cls, q, beta) -> "RTransformTerm":
        return cls(k=Fraction(1), beta=_as_fraction(beta), q=_as_fraction(q))

    @classmethod
    def zero_padded(cls, k, beta, q) -> "RTransformTerm":
        return cls(k=_as_fraction(k), beta=_as_fraction(beta), q=_as_fraction(q))

    @property
    def kind(self) -> str:
        return "plain" if self.k == 1 else "zero_padded"

    @property
    def first_moment(self) -> Fraction:
        """Value of the R-transform at z = 0 (mean of the block's law)."""
        return self.k * self.q

    @property
    def rank_fraction(self) -> Fraction:
        """Fraction of nonzero eigenvalues: block rows over total columns."""
        return min(Fraction(1), self.k / self.beta)

    @property
    def support_edge(self) -> float:
        """Upper edge of the block law's continuous support."""
        return float(self.q) * (1 + math.sqrt(float(self.beta))) ** 2


@dataclass(frozen=True)
class RTransformSum:
    """Free additive convolution of terms; evaluates as the sum of terms."""

    terms: tuple[RTransformTerm, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("sum needs at least one term")

    @property
    def first_moment(self) -> Fraction:
        return sum((t.first_moment for t in self.terms), Fraction(0))

    @property
    def rank_fraction(self) -> Fraction:
        """Nonzero-eigenvalue fraction of the summed law: total block rows
        over total columns, capped at one."""
        return min(Fraction(1), sum((t.k / t.beta for t in self.terms), Fraction(0)))

    @property
    def support_bound(self) -> float:
        """Upper bound on the support edge (operator norms are subadditive)."""
        return sum(t.support_edge for t in self.terms)

    def _key(self) -> tuple:
        return tuple((t.k, t.beta, t.q) for t in self.terms)


# ---------------------------------------------------------------------------
# Direct R-transform evaluation (branch tracked from z = 0)
# ---------------------------------------------------------------------------

def _eval_plain(term: RTransformTerm, z: complex) -> complex:
    q, b = float(term.q), float(term.beta)
    den = 1.0 - b * q * z
    if abs(den) < 1e-14:
        raise PoleEncountered(f"plain term pole at z = {z}")
    return q / den

def _quad_coeffs(term: RTransformTerm, z: complex) -> tuple[complex, complex, complex]:
    k, b, q = float(term.k), float(term.beta), float(term.q)
    return (z * (q * b * z - k),
            -k * (1.0 - z * q * (b + 1.0)),
            k * k * q)

def _eval_padded(term: RTransformTerm, z: complex, steps: int = 256) -> complex:
    """Track the branch that is finite at z = 0 along the segment 0 -> z."""
    value = complex(term.first_moment)
    if z == 0:
        return value
    for t in np.linspace(1.0 / steps, 1.0, steps):
        zt = t * z
        a, bb, c = _quad_coeffs(term, zt)
        if abs(a) < 1e-300:
            value = -c / bb
            continue
        disc = np.sqrt(bb * bb - 4 * a * c + 0j)
        roots = ((-bb + disc) / (2 * a), (-bb - disc) / (2 * a))
        value = min(roots, key=lambda r: abs(r - value))
        if abs(value) > 1e12:
            raise PoleEncountered(f"zero-padded term pole near z = {zt}")
    return value


def eval_r_transform(obj, z: complex) -> complex:
    """Evaluate a term's or a sum's R-transform at z.

    Zero-padded terms are solved from their quadratic with the branch chosen
    by analytic continuation from z = 0, where the value is the block law's
    first moment k*q. Raises PoleEncountered within 1e-14 of a denominator
    zero (plain terms) or when the tracked branch diverges.
    """
    if isinstance(obj, RTransformSum):
        return sum(eval_r_transform(t, z) for t in obj.terms)
    term: RTransformTerm = obj
    if term.k == 1:
        return _eval_plain(term, z)
    return _eval_padded(term, z)


# ---------------------------------------------------------------------------
# Polynomial clearing of x + jy = R(-s) - 1/s  (exact, cached)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _eliminated_factors(key: tuple):
    """Clear the inversion equation to polynomials in s.

    Plain terms substitute rationally; each zero-padded term contributes its
    quadratic, eliminated by sequential resultants. The result is factored
    and every factor with positive degree in s is returned as a list of
    coefficient callables (functions of the spectral abscissa z0), highest
    degree first.
    """
    s, z0 = sp.symbols("s z0")
    w = -s
    rs = sp.symbols(f"r0:{len(key)}")
    lin_subs = {}
    quads = []
    for r, (k, b, q) in zip(rs, key):
        k, b, q = sp.Rational(k), sp.Rational(b), sp.Rational(q)
        if k == 1:
            lin_subs[r] = q / (1 - b * q * w)
        else:
            quads.append((r, sp.expand(
                w * (q * b * w - k) * r**2 - k * (1 - w * q * (b + 1)) * r + k**2 * q)))
    constraint = sp.together((s * sum(rs) - s * z0 - 1).subs(lin_subs))
    expr = sp.expand(sp.fraction(constraint)[0])
    for r, quad in quads:
        expr = sp.expand(sp.resultant(sp.Poly(expr, r), sp.Poly(quad, r), r))
    factors = []
    for fac, _mult in sp.factor_list(sp.Poly(expr, s, z0))[1]:
        if sp.degree(fac, s) < 1:
            continue
        coeffs = sp.Poly(fac, s).all_coeffs()
        factors.append([sp.lambdify(z0, c, "numpy") for c in coeffs])
    if not factors:
        raise RuntimeError("elimination produced no s-dependent factor")
    return factors


def _factor_roots(funcs, zz: np.ndarray) -> np.ndarray:
    """Roots of one factor at every point of zz via stacked companion
    matrices; shape (len(zz), degree)."""
    npts = len(zz)
    coeffs = np.empty((npts, len(funcs)), dtype=complex)
    for j, f in enumerate(funcs):
        coeffs[:, j] = np.broadcast_to(np.asarray(f(zz), dtype=complex), (npts,))
    d = coeffs.shape[1] - 1
    roots = np.full((npts, d), np.nan + 0j)
    lead = coeffs[:, 0]
    scale = np.max(np.abs(coeffs), axis=1)
    ok = np.abs(lead) > 1e-12 * np.maximum(scale, 1e-300)
    if np.any(ok):
        comp = np.zeros((int(ok.sum()), d, d), dtype=complex)
        comp[:, 1:, :-1] = np.eye(d - 1)
        comp[:, 0, :] = -coeffs[ok, 1:] / lead[ok, None]
        roots[ok] = np.linalg.eigvals(comp)
    for i in np.nonzero(~ok)[0]:
        c = np.trim_zeros(coeffs[i], "f")
        if len(c) > 1:
            r = np.roots(c)
            roots[i, : len(r)] = r
    return roots


def _term_stieltjes_upper(k: float, b: float, q: float, z: np.ndarray) -> np.ndarray:
    """Stieltjes transform of one term's block law on the upper half plane.

    The plain law's transform solves q b z S^2 + (z - q + q b) S + 1 = 0 with
    the Im > 0 branch (unambiguous for Im z > 0); padding mixes in the atom:
    S_padded = k S - (1 - k)/z.
    """
    a = q * b * z
    bb = z - q + q * b
    disc = np.sqrt(bb * bb - 4.0 * a + 0j)
    r1 = (-bb + disc) / (2 * a)
    r2 = (-bb - disc) / (2 * a)
    sb = np.where(r1.imag > r2.imag, r1, r2)
    return k * sb - (1.0 - k) / z


def _root_scores(terms: tuple, z0: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Consistency score of candidate Stieltjes values (vectorized).

    For the true root, every term's R value r_i = R_i(-s) satisfies
    S_i(r_i - 1/s) = s on the term's own upper-half-plane branch, and the
    r_i sum back to z0 + 1/s. The score is the worst relative residual over
    those conditions; non-physical roots fail by orders of magnitude.
    """
    with np.errstate(all="ignore"):
        w = -s
        total = np.zeros_like(s)
        score = np.zeros(s.shape, dtype=float)
        for term in terms:
            k, b, q = float(term.k), float(term.beta), float(term.q)
            if k == 1.0:
                r = q / (1.0 - b * q * w)
                resid = np.abs(_term_stieltjes_upper(k, b, q, r - 1.0 / s) - s)
                resid = resid / (1.0 + np.abs(s))
            else:
                a = w * (q * b * w - k)
                bb = -k * (1.0 - w * q * (b + 1.0))
                c = k * k * q
                disc = np.sqrt(bb * bb - 4.0 * a * c + 0j)
                r1 = (-bb + disc) / (2 * a)
                r2 = (-bb - disc) / (2 * a)
                d1 = np.abs(_term_stieltjes_upper(k, b, q, r1 - 1.0 / s) - s)
                d2 = np.abs(_term_stieltjes_upper(k, b, q, r2 - 1.0 / s) - s)
                take1 = d1 <= d2
                r = np.where(take1, r1, r2)
                resid = np.where(take1, d1, d2) / (1.0 + np.abs(s))
            score = np.maximum(score, resid)
            total = total + r
        score = np.maximum(score, np.abs(total - 1.0 / s - z0) / (1.0 + np.abs(z0)))
        score = np.where(s.imag > IM_FLOOR, score, np.inf)
        return np.nan_to_num(score, nan=np.inf, posinf=np.inf)


def _stieltjes_batch(rsum: RTransformSum, zz: np.ndarray) -> np.ndarray:
    """Physical Stieltjes values at every complex point of zz (NaN where the
    point lies outside the support)."""
    factors = _eliminated_factors(rsum._key())
    best = np.full(len(zz), np.nan + 0j)
    best_score = np.full(len(zz), np.inf)
    for funcs in factors:
        roots = _factor_roots(funcs, zz)
        scores = _root_scores(rsum.terms, np.repeat(zz, roots.shape[1]),
                              roots.ravel()).reshape(roots.shape)
        idx = np.argmin(scores, axis=1)
        rows = np.arange(len(zz))
        sc = scores[rows, idx]
        better = sc < best_score
        best_score[better] = sc[better]
        best[better] = roots[rows, idx][better]
    cutoff = IN_SUPPORT_IM_FACTOR * np.abs(zz.imag)
    outside = (best_score >= SCORE_THRESHOLD) | (best.imag <= cutoff)
    best[outside] = np.nan + 0j
    return best


def stieltjes_from_r(rsum: RTransformSum, x: float, y: float = STIELTJES_Y,
                     seed_root: complex | None = None) -> complex:
    """Solve x + jy = R(-s) - 1/s for the physical root with Im(s) > 0.

    The equation is cleared to a polynomial and solved globally; among
    upper-half-plane roots, physical consistency (see _root_scores) selects
    the Stieltjes value. When several candidates validate, the one closest to
    seed_root wins if a seed is given, else the one with the largest
    imaginary part. Raises NoPhysicalRoot when no consistent root exists,
    which signals that x lies outside the continuous support.
    """
    if y <= 0:
        raise ValueError("evaluation height y must be positive")
    zz = np.array([x + 1j * y])
    factors = _eliminated_factors(rsum._key())
    cutoff = max(IM_FLOOR, IN_SUPPORT_IM_FACTOR * y)
    candidates = []
    for funcs in factors:
        roots = _factor_roots(funcs, zz)[0]
        scores = _root_scores(rsum.terms, np.full(roots.shape, zz[0]), roots)
        for r, sc in zip(roots, scores):
            if sc < SCORE_THRESHOLD and r.imag > cutoff:
                candidates.append((sc, r))
    if not candidates:
        raise NoPhysicalRoot(f"no consistent upper-half-plane root at x = {x}")
    if seed_root is not None:
        return min(candidates, key=lambda t: abs(t[1] - seed_root))[1]
    return max(candidates, key=lambda t: t[1].imag)[1]


# ---------------------------------------------------------------------------
# Spectral density and Shannon integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityGrid:
    """Uniform grid [0, x_max] with the given number of points (Simpson wants
    an even interval count, so points should be odd)."""

    x_max: float
    points: int = 4001

    def abscissae(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.points)


#: Safety factor applied to the analytic support bound when no grid is given.
SUPPORT_MARGIN = 1.3


@dataclass(frozen=True)
class SpectralDensity:
    """Sampled continuous part of a spectral law plus its point mass at 0."""

    grid: np.ndarray
    values: np.ndarray
    zero_mass: float
    continuous_mass: float

    def __post_init__(self) -> None:
        if np.any(self.values < -1e-9):
            raise ValueError("density values must be non-negative")

    def cdf(self) -> np.ndarray:
        """Cumulative distribution on the grid, including the atom at 0."""
        steps = np.diff(self.grid) * (self.values[1:] + self.values[:-1]) / 2.0
        return self.zero_mass + np.concatenate([[0.0], np.cumsum(steps)])


def default_grid(rsum: RTransformSum, points: int = 4001) -> DensityGrid:
    return DensityGrid(x_max=SUPPORT_MARGIN * rsum.support_bound, points=points)


def density_from_sum(rsum: RTransformSum, grid: DensityGrid | None = None,
                     y: float = STIELTJES_Y) -> SpectralDensity:
    """Recover the spectral density f(x) = Im S(x + jy) / pi on the grid.

    Points outside the support (no physical root) contribute zero; x = 0 is
    excluded from the continuous part because the atom there is tracked
    separately in zero_mass, computed exactly from the rank deficit of the
    summed blocks.
    """
    if grid is None:
        grid = default_grid(rsum)
    xs = grid.abscissae()
    vals = np.zeros_like(xs)
    positive = xs > 0
    svals = _stieltjes_batch(rsum, xs[positive] + 1j * y)
    f = svals.imag / np.pi
    f[np.isnan(f)] = 0.0
    vals[positive] = np.clip(f, 0.0, None)
    zero_mass = float(max(Fraction(0), 1 - rsum.rank_fraction))
    cont = float(simpson(vals, x=xs))
    return SpectralDensity(grid=xs, values=vals, zero_mass=zero_mass,
                           continuous_mass=cont)


def shannon_integral(density: SpectralDensity, g: float) -> float:
    """Integral of log(1 + g x) against the density, in nats (composite
    Simpson); the atom at zero contributes exactly nothing."""
    if g < 0:
        raise ValueError("SNR argument must be non-negative")
    if g == 0.0:
        return 0.0
    return float(simpson(np.log1p(g * density.grid) * density.values,
                         x=density.grid))
