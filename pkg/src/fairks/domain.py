"""Problem parameters, regime classification and radial densities.

Everything here is an immutable value object. The diffusion exponent is
always derived from the dimension and the homogeneity so that the
fair-competition balance ``N (m - 1) + k = 0`` can never be violated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn


class InvalidArgument(ValueError):
    """Raised when an operation receives arguments outside its domain."""


class Frame(str, enum.Enum):
    ORIGINAL = "Original"
    RESCALED = "Rescaled"


class Regime(str, enum.Enum):
    POROUS_MEDIUM = "PorousMedium"
    LOGARITHMIC = "Logarithmic"
    FAST_DIFFUSION = "FastDiffusion"


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2.0) / float(gamma_fn(N / 2.0))


@dataclass(frozen=True)
class Params:
    """Problem instance.

    ``chi = 0`` is accepted so that pure diffusion (Barenblatt) runs can
    share the same code path.
    """

    N: int
    k: float
    chi: float
    frame: Frame = Frame.RESCALED

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidArgument(f"N must be a positive integer, got {self.N}")
        if not (-self.N < self.k < self.N):
            raise InvalidArgument(f"k must lie in (-N, N), got k={self.k}, N={self.N}")
        if not (self.chi >= 0.0) or not math.isfinite(self.chi):
            raise InvalidArgument(f"chi must be nonnegative, got {self.chi}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "chi", float(self.chi))
        object.__setattr__(self, "frame", Frame(self.frame))

    @property
    def m(self) -> float:
        if self.k == 0.0:
            return 1.0
        return 1.0 - self.k / self.N

    @property
    def rescaled(self) -> bool:
        return self.frame is Frame.RESCALED

    def with_chi(self, chi: float) -> "Params":
        return Params(self.N, self.k, chi, self.frame)

    def with_frame(self, frame: Frame) -> "Params":
        return Params(self.N, self.k, self.chi, frame)


def k_star(N: int) -> float:
    return -N / 2.0 + math.sqrt(N * N / 4.0 + 2.0 * N)


def k_energy(N: int) -> float:
    return 2.0 * N / (2.0 + N)


K_CRIT = 2.0


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    m: float
    k_c: float
    k_star: float
    k_energy: float
    stationary_integrable: bool
    kth_moment_finite: bool
    finite_rescaled_energy: bool


def classify(params: Params) -> RegimeReport:
    k, N = params.k, params.N
    if k < 0:
        regime = Regime.POROUS_MEDIUM
    elif k == 0:
        regime = Regime.LOGARITHMIC
    else:
        regime = Regime.FAST_DIFFUSION
    ks, ke = k_star(N), k_energy(N)
    return RegimeReport(
        regime=regime,
        m=params.m,
        k_c=K_CRIT,
        k_star=ks,
        k_energy=ke,
        stationary_integrable=k < K_CRIT,
        kth_moment_finite=k < ks,
        finite_rescaled_energy=k < ke,
    )


def rescaling_maps(params: Params, t: float) -> tuple[float, float]:
    """Return ``(alpha, beta)`` of the self-similar change of variables."""
    if t < 0:
        raise InvalidArgument("t must be nonnegative")
    alpha = math.exp(t)
    k = params.k
    if k == 2.0:
        return alpha, float(t)
    return alpha, math.expm1((2.0 - k) * t) / (2.0 - k)


def beta_inv(params: Params, tau: float) -> float:
    """Inverse of ``beta``: the rescaled time reached at original time ``tau``."""
    if tau < 0:
        raise InvalidArgument("tau must be nonnegative")
    k = params.k
    if k == 2.0:
        return float(tau)
    return math.log1p((2.0 - k) * tau) / (2.0 - k)


def bootstrap_exponent(p: float, n: int, params: Params) -> float:
    """n-th iterate of the integrability exponent map g(p) = (p + N + k)/(m - 1)."""
    if params.k >= 0:
        raise InvalidArgument("bootstrap exponent needs the porous-medium regime (k < 0)")
    if p <= -params.N:
        raise InvalidArgument("p must exceed -N")
    if n < 0 or int(n) != n:
        raise InvalidArgument("n must be a nonnegative integer")
    if n == 0:
        return float(p)
    N = params.N
    return -N + (p + N) / (params.m - 1.0) ** int(n)


def bootstrap_step(p: float, params: Params) -> float:
    return (p + params.N + params.k) / (params.m - 1.0)


# --------------------------------------------------------------------------
# radial densities


def hat_weights(nodes: np.ndarray, N: int) -> np.ndarray:
    """Integrals of the piecewise-linear hat functions against sigma_N r^(N-1)."""
    r = np.asarray(nodes, dtype=float)
    a, h = r[:-1], np.diff(r)
    # r = a + h t on each cell; binomial expansion keeps every term positive
    left = np.zeros_like(a)
    right = np.zeros_like(a)
    for j in range(N):
        c = math.comb(N - 1, j) * a ** (N - 1 - j) * h ** (j + 1)
        left += c / ((j + 1) * (j + 2))
        right += c / (j + 2)
    w = np.zeros_like(r)
    w[:-1] += left
    w[1:] += right
    return sphere_area(N) * w


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Radial profile sampled at nodes, read as a piecewise-linear function.

    The function is zero beyond the last node. ``weights`` integrate nodal
    values against ``sigma_N r^(N-1) dr``; for N = 1 that is the integral
    over the whole real line of an even function.
    """

    nodes: np.ndarray
    values: np.ndarray
    N: int
    weights: np.ndarray = field(default=None)
    monotone: bool = False

    def __post_init__(self):
        r = np.array(self.nodes, dtype=float)
        v = np.array(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:
            raise InvalidArgument("nodes and values must be 1D arrays of equal length >= 2")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise InvalidArgument("nodes must be nonnegative and strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidArgument("values must be finite and nonnegative")
        if self.monotone and np.any(np.diff(v) > 0):
            raise InvalidArgument("monotone flag set but values increase")
        w = hat_weights(r, self.N) if self.weights is None else np.array(self.weights, dtype=float)
        r.setflags(write=False)
        v.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", r)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @property
    def sigma_N(self) -> float:
        return sphere_area(self.N)

    def mass(self) -> float:
        return float(self.weights @ self.values)

    def integrate(self, f_values: np.ndarray) -> float:
        return float(self.weights @ np.asarray(f_values, dtype=float))

    def moment(self, p: float) -> float:
        """Integral of |x|^p rho."""
        return self.integrate(self.nodes**p * self.values)

    def second_moment(self) -> float:
        return self.moment(2.0)

    def max(self) -> float:
        return float(self.values.max())

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.interp(r, self.nodes, self.values, right=0.0)

    def with_values(self, values, monotone: bool = False) -> "RadialDensity":
        return RadialDensity(self.nodes, values, self.N, self.weights, monotone)

    def normalized(self, target: float = 1.0) -> "RadialDensity":
        mass = self.mass()
        if not mass > 0:
            raise InvalidArgument("cannot normalize a density of zero mass")
        return self.with_values(self.values * (target / mass), self.monotone)

    def support_radius(self, rel_threshold: float = 1e-8) -> float:
        idx = np.nonzero(self.values > rel_threshold * self.values.max())[0]
        return float(self.nodes[idx[-1]]) if idx.size else 0.0


def dilate(rho: RadialDensity, lam: float) -> RadialDensity:
    """Mass-preserving dilation x -> lam^N rho(lam x)."""
    if not lam > 0:
        raise InvalidArgument("dilation factor must be positive")
    if lam == 1.0:
        return rho
    scale = float(lam) ** rho.N
    return RadialDensity(rho.nodes / lam, rho.values * scale, rho.N, rho.weights / scale, rho.monotone)


# --------------------------------------------------------------------------
# grids and initial data


def geometric_grid(r_max: float, h0: float = 1e-3, ratio: float = 1.05, r_uniform: float = 0.0) -> np.ndarray:
    """Nodes from 0 to ``r_max``: uniform spacing ``h0`` up to ``r_uniform``,
    then spacings growing by ``ratio``."""
    if r_max <= 0 or h0 <= 0 or ratio < 1:
        raise InvalidArgument("bad grid parameters")
    pts = [0.0]
    r, h = 0.0, h0
    while r + h < r_uniform:
        r += h
        pts.append(r)
    while r < r_max:
        r = min(r + h, r_max)
        if r_max - r < 0.25 * h:
            r = r_max
        pts.append(r)
        h *= ratio
    return np.array(pts)


def uniform_grid(r_max: float, n: int) -> np.ndarray:
    return np.linspace(0.0, r_max, n)


def characteristic(N: int, radius: float, nodes: np.ndarray | None = None) -> RadialDensity:
    """Normalized indicator of the ball of given radius (an interval for N = 1)."""
    if nodes is None:
        nodes = uniform_grid(radius, 201)
    v = (np.asarray(nodes) <= radius * (1 + 1e-12)).astype(float)
    return RadialDensity(nodes, v, N, monotone=True).normalized()


def gaussian(N: int, sigma: float, nodes: np.ndarray | None = None) -> RadialDensity:
    if nodes is None:
        nodes = geometric_grid(10 * sigma, h0=sigma / 200)
    v = np.exp(-0.5 * (np.asarray(nodes) / sigma) ** 2)
    return RadialDensity(nodes, v, N, monotone=True).normalized()


def barenblatt(N: int, m: float, nodes: np.ndarray | None = None) -> RadialDensity:
    """Unit-mass stationary profile of the confined porous-medium equation,
    (N(m-1)/m (D - r^2/2))_+^(1/(m-1)), with D fixed by the mass."""
    if not m > 1:
        raise InvalidArgument("Barenblatt profile needs m > 1")
    from scipy import optimize

    c, p = N * (m - 1.0) / m, 1.0 / (m - 1.0)

    def mass(D):
        R = math.sqrt(2.0 * D)
        r = np.linspace(0.0, R, 4001)
        return RadialDensity(r, np.maximum(c * (D - 0.5 * r * r), 0.0) ** p, N).mass() - 1.0

    D = optimize.brentq(mass, 1e-8, 1e4, xtol=1e-14)
    R = math.sqrt(2.0 * D)
    if nodes is None:
        nodes = np.linspace(0.0, R, 2001)
    v = np.maximum(c * (D - 0.5 * np.asarray(nodes) ** 2), 0.0) ** p
    return RadialDensity(nodes, v, N, monotone=True).normalized()
