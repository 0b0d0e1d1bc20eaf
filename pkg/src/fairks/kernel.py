"""Riesz interaction kernels in radial form.

``psi`` is the sphere average of the radial derivative of the kernel,
normalized so that

    d/dr (W_k * rho)(r) = sigma_N r^(k-1) int_0^inf psi(eta/r) rho(eta) eta^(N-1) d eta.

For N >= 2 it is evaluated either by direct angular quadrature or through
Gauss hypergeometric functions; near s = 1 the hypergeometric route is
rewritten in the variable delta = |1 - s|/(1 + s) so the singular part is
carried analytically. For N = 1 everything is closed form.

Radial convolutions use product integration: densities are piecewise
linear between nodes and the kernel is integrated against each hat
function with Gauss-Legendre panels, graded towards the kernel singularity.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .domain import InvalidArgument, Params, RadialDensity, sphere_area
from .hypergeom import gauss_hypergeometric

GL_X, GL_W = np.polynomial.legendre.leggauss(8)
# distance to an integer below which the parameter e is treated as integer
E_INTEGER_TOL = 1e-3
K_SHIFT = 2e-5


class SingularityError(ValueError):
    """psi evaluated exactly at its singular point s = 1."""


class NumericalError(RuntimeError):
    pass


class Backend(str, enum.Enum):
    QUADRATURE = "Quadrature"
    HYPERGEOMETRIC = "Hypergeometric"
    NEAR_ONE = "AsymptoticNearOne"
    FAR_FIELD = "AsymptoticFarField"
    NEWTONIAN = "NewtonianExact"


class Side(str, enum.Enum):
    BELOW = "Below"
    ABOVE = "Above"


@dataclass(frozen=True)
class PsiEvaluator:
    N: int
    k: float
    backend: Backend = Backend.HYPERGEOMETRIC
    series_tol: float = 1e-14
    eps1: float = 0.05
    s_inf: float = 100.0

    def __post_init__(self):
        if self.N < 2:
            raise InvalidArgument("psi machinery is for N >= 2; N = 1 uses closed forms")
        if not (-self.N < self.k < self.N):
            raise InvalidArgument("k must lie in (-N, N)")
        object.__setattr__(self, "backend", Backend(self.backend))
        if self.backend is Backend.NEWTONIAN and not math.isclose(self.k, 2 - self.N, abs_tol=1e-14):
            raise InvalidArgument("Newtonian backend needs k = 2 - N")


@dataclass(frozen=True)
class HypergeometricParams:
    N: int
    k: float

    @property
    def a(self) -> float:
        return 1.0 - self.k / 2.0

    @property
    def b1(self) -> float:
        return (self.N - 1) / 2.0

    @property
    def c1(self) -> float:
        return float(self.N - 1)

    @property
    def b2(self) -> float:
        return (self.N + 1) / 2.0

    @property
    def c2(self) -> float:
        return float(self.N)

    @staticmethod
    def z(s):
        s = np.asarray(s, dtype=float)
        return 4.0 * s / (1.0 + s) ** 2


def _area_ratio(N: int) -> float:
    return sphere_area(N - 1) / sphere_area(N)


def _e_param(N: int, k: float) -> float:
    return (3.0 - N - k) / 2.0


def _near_integer(x: float) -> bool:
    return abs(x - round(x)) < E_INTEGER_TOL


def _k_shift(e: float) -> float:
    """Symmetric k-shift keeping both shifted e values clear of the integer."""
    d = abs(e - round(e))
    h = K_SHIFT
    # shifting k by h moves e by h/2
    while min(abs(d - h / 2), abs(d - h)) < 0.25 * K_SHIFT:
        h *= 3.0
    return h


# --------------------------------------------------------------------------
# psi backends


def psi_one_dim(s, k: float):
    """Closed form for N = 1: half of sgn(1-s)|1-s|^(k-1) + (1+s)^(k-1)."""
    s = np.asarray(s, dtype=float)
    d = 1.0 - s
    with np.errstate(divide="ignore"):
        return 0.5 * (np.sign(d) * np.abs(d) ** (k - 1.0) + (1.0 + s) ** (k - 1.0))


def psi_quadrature(s: float, N: int, k: float, tol: float = 1e-13) -> float:
    """Angular integral of (1 - s cos t) sin^(N-2) t A^(k-2), A^2 = 1 + s^2 - 2 s cos t."""
    s = float(s)
    if s == 0.0:
        return 1.0
    ex = (k - 2.0) / 2.0

    def f(t):
        a2 = (1.0 - s) ** 2 + 4.0 * s * math.sin(0.5 * t) ** 2
        return (1.0 - s * math.cos(t)) * math.sin(t) ** (N - 2) * a2**ex

    # the integrand varies on the scale |1 - s| near t = 0
    scale = abs(1.0 - s) / math.sqrt(s)
    pts = []
    t = scale
    while t < 1.0:
        pts.append(t)
        t *= 2.0
    edges = [0.0] + pts + [math.pi]
    total = 0.0
    with warnings.catch_warnings():
        # roundoff warnings appear once the requested tolerance is at machine level
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=tol, limit=200)
            total += val
    return _area_ratio(N) * total


def _psi_direct(s, N: int, k: float):
    hp = HypergeometricParams(N, k)
    z = hp.z(s)
    pre = _area_ratio(N) * 2.0 ** (N - 2) * (1.0 + s) ** (k - 2.0)
    H1 = gamma_fn(hp.b1) * gamma_fn(hp.c1 - hp.b1) / gamma_fn(hp.c1) * gauss_hypergeometric(hp.a, hp.b1, hp.c1, z)
    H2 = gamma_fn(hp.b2) * gamma_fn(hp.c2 - hp.b2) / gamma_fn(hp.c2) * gauss_hypergeometric(hp.a, hp.b2, hp.c2, z)
    return pre * ((1.0 + s) * H1 - 2.0 * s * H2)


def _series_diff_a(alpha1: float, q: float, e: float, y):
    """F(alpha1, q; 1-e; y) - F(alpha1+1, q; 1-e; y), summed termwise."""
    y = np.asarray(y, dtype=float)
    # n-th term: -(alpha1+1)_(n-1) (q)_n / ((1-e)_n (n-1)!) y^n
    term = -q / (1.0 - e) * y
    total = term.copy()
    for n in range(1, 4000):
        term = term * ((alpha1 + n) * (q + n) / ((1.0 - e + n) * n)) * y
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            return total
    raise NumericalError("difference series did not converge")


def _psi_delta_form(s, N: int, k: float, one_minus_s=None):
    """psi for s near 1 written through delta = |1-s|/(1+s); needs non-integer e."""
    s = np.asarray(s, dtype=float)
    oms = 1.0 - s if one_minus_s is None else np.asarray(one_minus_s, dtype=float)
    hp = HypergeometricParams(N, k)
    a, q = hp.a, (N - 1) / 2.0
    e = _e_param(N, k)
    delta = np.abs(oms) / (1.0 + s)
    y = delta**2
    gam = gamma_fn(q) * gamma_fn(e) / gamma_fn(a)
    S1 = gamma_fn(hp.b1) * gamma_fn(-e) / gamma_fn(hp.c1 - a)
    S2 = gamma_fn(hp.b2) * gamma_fn(-e) / gamma_fn(hp.c2 - a)
    Fa2 = gauss_hypergeometric(hp.c2 - a, q, 1.0 - e, y)
    dFa = _series_diff_a(hp.c1 - a, q, e, y)
    Fb1 = gauss_hypergeometric(a, hp.b1, 1.0 + e, y)
    Fb2 = gauss_hypergeometric(a, hp.b2, 1.0 + e, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        pw = delta ** (-2.0 * e)
        sing_even = np.where(delta > 0, gam * pw * dFa, 0.0)
        sing_odd = np.where(delta > 0, gam * oms * pw * Fa2, 0.0)
    bracket = (1.0 + s) * (sing_even + S1 * Fb1 - S2 * Fb2) + sing_odd + oms * S2 * Fb2
    pre = _area_ratio(N) * 2.0 ** (N - 2) * (1.0 + s) ** (k - 2.0)
    return pre * bracket


def psi_hypergeometric(s, N: int, k: float, one_minus_s=None):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    oms = 1.0 - s if one_minus_s is None else np.atleast_1d(np.asarray(one_minus_s, dtype=float))
    out = np.empty_like(s)
    z = HypergeometricParams.z(s)
    direct = z <= 0.9
    if np.any(direct):
        out[direct] = _psi_direct(s[direct], N, k)
    near = ~direct
    if np.any(near):
        sn, on = s[near], oms[near]
        e = _e_param(N, k)
        if _near_integer(e):
            # the connection pieces have poles at integer e; psi is smooth in k,
            # so symmetric averages at h and 2h are combined to cancel the h^2 term
            h = _k_shift(e)
            avg1 = 0.5 * (_psi_delta_form(sn, N, k + h, on) + _psi_delta_form(sn, N, k - h, on))
            avg2 = 0.5 * (_psi_delta_form(sn, N, k + 2 * h, on) + _psi_delta_form(sn, N, k - 2 * h, on))
            out[near] = (4.0 * avg1 - avg2) / 3.0
        else:
            out[near] = _psi_delta_form(sn, N, k, on)
    return out


def psi_around_one(eps, N: int, k: float):
    """(psi(1 - eps), psi(1 + eps)) computed without forming 1 - s."""
    eps = np.asarray(eps, dtype=float)
    if N == 1:
        lo = 0.5 * (eps ** (k - 1.0) + (2.0 - eps) ** (k - 1.0))
        hi = 0.5 * (-(eps ** (k - 1.0)) + (2.0 + eps) ** (k - 1.0))
        return lo, hi
    if math.isclose(k, 2 - N, abs_tol=1e-14):
        return np.ones_like(eps), np.zeros_like(eps)
    return psi_hypergeometric(1.0 - eps, N, k, eps), psi_hypergeometric(1.0 + eps, N, k, -eps)


def psi_far_field(s, evaluator: PsiEvaluator):
    N, k = evaluator.N, evaluator.k
    s = np.asarray(s, dtype=float)
    if np.any(s < evaluator.s_inf):
        raise InvalidArgument(f"far-field form needs s >= {evaluator.s_inf}")
    return (N + k - 2.0) / N * s ** (k - 2.0)


def psi(s, evaluator: PsiEvaluator):
    """psi_k(s) with the evaluator's backend; accepts scalars or arrays."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    N, k = evaluator.N, evaluator.k
    if np.any(s < 0):
        raise InvalidArgument("s must be nonnegative")
    if np.any(s == 1.0) and k <= 2 - N + 1e-14:
        raise SingularityError("psi is singular at s = 1 for k <= 2 - N")
    b = evaluator.backend
    if b is Backend.NEWTONIAN:
        out = (s < 1.0).astype(float)
    elif b is Backend.QUADRATURE:
        out = np.array([psi_quadrature(x, N, k) for x in s])
    elif b is Backend.HYPERGEOMETRIC:
        out = psi_hypergeometric(s, N, k)
    elif b is Backend.FAR_FIELD:
        out = psi_far_field(s, evaluator)
    else:
        c = asymptotic_constants(N, k)
        out = np.array(
            [psi_near_one(abs(1 - x), Side.BELOW if x < 1 else Side.ABOVE, 0.0, c) for x in s]
        )
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# behaviour near s = 1


@dataclass(frozen=True)
class AsymptoticConstants:
    """Coefficients of psi(1 -+ eps)(1 -+ eps)^alpha ~ +-K1 eps^p + K0 + K2/K3 eps^(p+1).

    ``K0`` is a constant that is negligible when k < 1 - N but of leading
    relevance for 1 - N < k < 2 - N. When e = (3-N-k)/2 is an integer the
    individual pieces have poles; ``shifted`` then holds the constants at
    k -+ h and the expansion is averaged.
    """

    N: int
    k: float
    gamma: float
    B1: float
    K0: float
    K1: float
    area_ratio: float
    shifted: tuple | None = None

    @property
    def p(self) -> float:
        return self.N + self.k - 2.0

    @property
    def B0(self) -> float:
        # leading even coefficient cancels identically in the closed form
        return 0.0

    def K2(self, alpha: float = 0.0) -> float:
        N = self.N
        return -self.area_ratio * (self.B1 + self.gamma * (1.0 - N + 2.0 * alpha)) / 4.0

    def K3(self, alpha: float = 0.0) -> float:
        N = self.N
        return -self.area_ratio * (self.B1 + self.gamma * (1.0 - N + 2.0 * alpha)) / 4.0


def _constants_regular(N: int, k: float) -> AsymptoticConstants:
    hp = HypergeometricParams(N, k)
    a, q, e = hp.a, (N - 1) / 2.0, _e_param(N, k)
    r = _area_ratio(N)
    gam = gamma_fn(q) * gamma_fn(e) / gamma_fn(a)
    B1 = gam * q / (1.0 - e)
    S1 = gamma_fn(hp.b1) * gamma_fn(-e) / gamma_fn(hp.c1 - a)
    S2 = gamma_fn(hp.b2) * gamma_fn(-e) / gamma_fn(hp.c2 - a)
    K0 = r * 2.0 ** (N - 2) * 2.0 ** (k - 1.0) * (S1 - S2)
    return AsymptoticConstants(N, k, float(gam), float(B1), float(K0), float(r * gam / 2.0), r)


@lru_cache(maxsize=256)
def asymptotic_constants(N: int, k: float) -> AsymptoticConstants:
    if N < 2:
        raise InvalidArgument("asymptotic constants are defined for N >= 2")
    if not (-N < k < 2 - N):
        raise InvalidArgument("near-one expansion needs -N < k < 2 - N")
    e = _e_param(N, k)
    if not _near_integer(e):
        return _constants_regular(N, k)
    h = _k_shift(e)
    lo, hi = _constants_regular(N, k - h), _constants_regular(N, k + h)
    avg = lambda f: 0.5 * (getattr(lo, f) + getattr(hi, f))  # noqa: E731
    return AsymptoticConstants(N, k, avg("gamma"), avg("B1"), avg("K0"), avg("K1"), lo.area_ratio, (lo, hi))


def _expansion(eps: float, side: Side, alpha: float, c: AsymptoticConstants) -> float:
    p = c.p
    if side is Side.BELOW:
        return c.K1 * eps**p + c.K0 + c.K2(alpha) * eps ** (p + 1.0)
    return -c.K1 * eps**p + c.K0 + c.K3(alpha) * eps ** (p + 1.0)


def psi_near_one(eps: float, side: Side, alpha: float, constants: AsymptoticConstants) -> float:
    """Expansion of psi(1 -+ eps)(1 -+ eps)^alpha; error O(eps^(p+2)) with p = N + k - 2."""
    side = Side(side)
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    if constants.shifted is not None:
        lo, hi = constants.shifted
        return 0.5 * (_expansion(eps, side, alpha, lo) + _expansion(eps, side, alpha, hi))
    return _expansion(eps, side, alpha, constants)


def psi_values(s, N: int, k: float):
    """psi on an array of s (any N >= 1), production backend."""
    if N == 1:
        return psi_one_dim(s, k)
    if math.isclose(k, 2 - N, abs_tol=1e-14):
        return (np.asarray(s) < 1.0).astype(float)
    return psi_hypergeometric(s, N, k)


def _near_one_coefficients(N: int, k: float) -> tuple[float, float]:
    """(K1, K0) for the small-distance tail of the paired force integral."""
    if N == 1:
        return 0.5, 2.0 ** (k - 2.0)
    if k < 2 - N:
        c = asymptotic_constants(N, k)
        return c.K1, c.K0
    return 0.0, float(psi_values(np.array([1.0 - 1e-12]), N, k)[0])


def write_psi_table(path, rows) -> None:
    """CSV with columns s, psi, backend."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "psi", "backend"])
        for s, v, b in rows:
            w.writerow([repr(float(s)), repr(float(v)), str(getattr(b, "value", b))])


# --------------------------------------------------------------------------
# angular average of the kernel itself


def _wbar_power(x, eta, N: int, k: float):
    """Sphere average of |x e1 - eta omega|^k / k, k != 0."""
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if N == 1:
        return 0.5 * (np.abs(x - eta) ** k + (x + eta) ** k) / k
    b, c = (N - 1) / 2.0, float(N - 1)
    tot = x + eta
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(tot > 0, 4.0 * x * eta / tot**2, 0.0)
        y = np.where(tot > 0, ((x - eta) / tot) ** 2, 1.0)
    z = np.clip(z, 0.0, 1.0)
    norm = _area_ratio(N) * 2.0 ** (N - 2) * gamma_fn(b) * gamma_fn(c - b) / gamma_fn(c)
    F = gauss_hypergeometric(-k / 2.0, b, c, z, one_minus_z=y)
    return norm * tot**k / k * F


def kernel_average(x, eta, N: int, k: float):
    """Sphere average of W_k(x e1 - eta omega); W_0 = log |.|."""
    if k != 0.0:
        return _wbar_power(x, eta, N, k)
    if N == 1:
        x = np.asarray(x, dtype=float)
        eta = np.asarray(eta, dtype=float)
        with np.errstate(divide="ignore"):
            return 0.5 * (np.log(np.abs(x - eta)) + np.log(x + eta))
    # log kernel as the symmetric limit of |.|^h/h; the 1/h parts cancel
    h = 1e-5
    return 0.5 * (_wbar_power(x, eta, N, h) + _wbar_power(x, eta, N, -h))


def kernel_at_origin(eta, k: float):
    eta = np.asarray(eta, dtype=float)
    if k == 0.0:
        with np.errstate(divide="ignore"):
            return np.log(eta)
    return eta**k / k


# --------------------------------------------------------------------------
# product integration against hat functions

GRADE_LEVELS = 30


def _panels_towards(a: float, b: float, x: float):
    """Split [a, b] into panels graded geometrically towards x in {a, b}."""
    h = b - a
    fr = 0.5 ** np.arange(GRADE_LEVELS + 1)
    if x == a:
        pts = a + h * fr[::-1]
        pts = np.concatenate([[a], pts])
    else:
        pts = b - h * fr
        pts = np.concatenate([pts, [b]])
    return np.unique(pts)


def _gl_on_panels(edges):
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = (mid[:, None] + half[:, None] * GL_X[None, :]).ravel()
    wts = (half[:, None] * GL_W[None, :]).ravel()
    return pts, wts


def _row(x: float, nodes: np.ndarray, N: int, k: float, kernel) -> np.ndarray:
    """Weights c_j with int K(x, eta) rho(eta) sigma_N eta^(N-1) d eta = sum c_j rho_j."""
    a, b = nodes[:-1], nodes[1:]
    h = b - a
    row = np.zeros_like(nodes)
    dist = np.where(x < a, a - x, np.where(x > b, x - b, 0.0))
    far = dist >= 2.0 * h
    # far cells: one 8-point panel each
    idx = np.nonzero(far)[0]
    if idx.size:
        mid = 0.5 * (a[idx] + b[idx])
        half = 0.5 * h[idx]
        pts = mid[:, None] + half[:, None] * GL_X[None, :]
        wts = half[:, None] * GL_W[None, :]
        f = kernel(x, pts) * pts ** (N - 1) * wts
        t = (pts - a[idx, None]) / h[idx, None]
        np.add.at(row, idx, np.sum(f * (1.0 - t), axis=1))
        np.add.at(row, idx + 1, np.sum(f * t, axis=1))
    for j in np.nonzero(~far)[0]:
        aj, bj = a[j], b[j]
        if aj < x < bj:
            edges = np.concatenate([_panels_towards(aj, x, x)[:-1], _panels_towards(x, bj, x)])
        else:
            edges = _panels_towards(aj, bj, aj if x <= aj else bj)
        pts, wts = _gl_on_panels(edges)
        f = kernel(x, pts) * pts ** (N - 1) * wts
        t = (pts - aj) / h[j]
        row[j] += np.sum(f * (1.0 - t))
        row[j + 1] += np.sum(f * t)
    return sphere_area(N) * row


def moment_row(nodes: np.ndarray, N: int, k: float) -> np.ndarray:
    """Weights for I_k = int W_k(x) rho(x) dx; equals the potential row at x = 0."""
    nodes = np.asarray(nodes, dtype=float)
    return _row(0.0, nodes, N, k, lambda x, eta: kernel_at_origin(eta, k))


def potential_matrix(nodes, N: int, k: float, targets=None) -> np.ndarray:
    """Matrix P with (W_k * rho)(targets) = P @ rho.values for densities on ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    targets = nodes if targets is None else np.atleast_1d(np.asarray(targets, dtype=float))
    key = (nodes.tobytes(), N, float(k), targets.tobytes())
    hit = _PM_CACHE.get(key)
    if hit is not None:
        return hit
    out = np.empty((targets.size, nodes.size))
    kern = lambda x, eta: kernel_average(x, eta, N, k)  # noqa: E731
    for i, x in enumerate(targets):
        if x == 0.0:
            out[i] = moment_row(nodes, N, k)
        else:
            out[i] = _row(float(x), nodes, N, k, kern)
    out.setflags(write=False)
    if len(_PM_CACHE) > 32:
        _PM_CACHE.clear()
    _PM_CACHE[key] = out
    return out


_PM_CACHE: dict = {}


def radial_potential(rho: RadialDensity, r, params: Params):
    """(W_k * rho)(r) for radial rho; r may be an array."""
    if rho.N != params.N:
        raise InvalidArgument("density dimension does not match params")
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise InvalidArgument("r must be nonnegative")
    P = potential_matrix(rho.nodes, rho.N, params.k, r)
    out = P @ rho.values
    if not np.all(np.isfinite(out)):
        raise NumericalError("non-finite potential; kernel not integrable against this density")
    return float(out[0]) if scalar else out


def kth_moment(rho: RadialDensity, k: float) -> float:
    """I_k = int |x|^k/k rho (log |x| for k = 0), same quadrature as the potential."""
    return float(moment_row(rho.nodes, rho.N, k) @ rho.values)


# --------------------------------------------------------------------------
# radial force with principal-value pairing

PAIR_LEVELS = 60


def radial_force(rho: RadialDensity, r, params: Params, pair_cutoff: float = 0.05):
    """d/dr (W_k * rho)(r).

    Within |eta - r| < pair_cutoff * r the integrand is evaluated in pairs
    eta = r -+ t so that the odd singular parts cancel before summation.
    """
    if rho.N != params.N:
        raise InvalidArgument("density dimension does not match params")
    scalar = np.ndim(r) == 0
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.array([_force_at(rho, float(x), params.k, pair_cutoff) for x in rs])
    return float(out[0]) if scalar else out


def _force_at(rho: RadialDensity, r: float, k: float, cut: float) -> float:
    if r < 0:
        raise InvalidArgument("r must be nonnegative")
    if r == 0.0:
        return 0.0
    N = rho.N
    nodes = rho.nodes
    g = lambda eta: rho(eta) * eta ** (N - 1)  # noqa: E731
    a = cut * r
    # outer part: breakpoints at grid nodes and geometric distances from r
    far = a * 2.0 ** np.arange(0, 80)
    bps = np.concatenate([nodes, r - far, r + far])
    top = nodes[-1]
    left = np.unique(np.clip(bps[(bps >= 0) & (bps <= r - a)], 0, None))
    left = np.unique(np.concatenate([[0.0], left, [r - a]])) if r - a > 0 else np.array([])
    right = bps[(bps >= r + a) & (bps <= top)]
    right = np.unique(np.concatenate([[r + a], right, [max(top, r + a)]]))
    total = 0.0
    for edges in (left, right):
        if edges.size >= 2:
            pts, wts = _gl_on_panels(edges)
            keep = wts > 0
            pts, wts = pts[keep], wts[keep]
            if pts.size:
                total += np.sum(psi_values(pts / r, N, k) * g(pts) * wts)
    # paired part over t in (0, a)
    t_min = a * 0.5**PAIR_LEVELS
    dn = np.abs(nodes - r)
    edges = np.unique(np.concatenate([a * 0.5 ** np.arange(PAIR_LEVELS + 1), dn[(dn > t_min) & (dn < a)]]))
    pts, wts = _gl_on_panels(edges)
    lo, hi = r - pts, r + pts
    psi_lo, psi_hi = psi_around_one(pts / r, N, k)
    pair = psi_lo * g(lo) + psi_hi * g(hi)
    total += np.sum(pair * wts)
    # analytic estimate of the remaining sliver [0, t_min]
    p = N + k - 2.0
    K1, K0 = _near_one_coefficients(N, k)
    slope = (g(r + t_min) - g(r - t_min)) / (2.0 * t_min)
    sliver = 2.0 * K0 * g(r) * t_min
    if K1:
        sliver += -2.0 * K1 * slope * r ** (-p) * t_min ** (p + 2.0) / (p + 2.0)
    total += float(sliver)
    return float(sphere_area(N) * r ** (k - 1.0) * total)
