"""Stationary states of the rescaled fast-diffusion problem (0 < k < N).

A stationary profile solves rho = T rho with

    T rho = (A (|x|^k/k) * rho + B |x|^2 + C)^(-N/k),

where C is fixed by unit mass. The fixed point is sought by relaxed Picard
iteration on a radial grid; every iterate is checked against the pointwise
envelope m(x) <= T rho(x) <= M(x).
"""

from __future__ import annotations

import csv
import enum
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .domain import InvalidArgument, Params, RadialDensity, geometric_grid, k_star, sphere_area
from .energy import el_residual, fast_diffusion_constants
from .kernel import kth_moment, potential_matrix


class NonIntegrable(ValueError):
    """The normalisation integrals diverge (k >= 2)."""


class ConsistencyError(RuntimeError):
    """A bracket that should exist by construction was not found."""


class Diagnosis(str, enum.Enum):
    ORIGINAL_NONE = "OriginalVariablesNone"
    RESCALED_NONE = "RescaledNone"
    RESCALED_UNBOUNDED_K_MOMENT = "RescaledUnboundedKMoment"
    RESCALED_EXISTS = "RescaledExists"
    RESCALED_OPEN = "RescaledOpen"


MASS_TOL = 1e-12
TAIL_MASS = 1e-8


@dataclass(frozen=True)
class TOperatorConfig:
    N: int
    k: float
    chi: float
    A: float
    B: float
    truncation_radius: float
    grid: np.ndarray
    fp_tol: float = 1e-9
    max_iter: int = 5000
    relaxation: float = 0.5

    @property
    def params(self) -> Params:
        return Params(self.N, self.k, self.chi)


def make_config(
    params: Params,
    *,
    fp_tol: float = 1e-9,
    max_iter: int = 5000,
    relaxation: float = 0.5,
    h0: float | None = None,
    ratio: float = 1.01,
    r_uniform: float | None = None,
    truncation_radius: float | None = None,
) -> TOperatorConfig:
    """Config with A, B from the parameters and R_max from the M(x) tail."""
    N, k, chi = params.N, params.k, params.chi
    if not (0.0 < k < N):
        raise InvalidArgument("fast-diffusion solver needs 0 < k < N")
    if not chi > 0:
        raise InvalidArgument("chi must be positive")
    if not (0.0 < relaxation <= 1.0):
        raise InvalidArgument("relaxation must lie in (0, 1]")
    A, B = fast_diffusion_constants(params)
    if truncation_radius is None:
        truncation_radius = truncation_for_tail(N, k, B)
    if h0 is None or r_uniform is None:
        _, d_hi = _delta_bounds(N, k, A, B)
        # length scale of the core: where B r^2 reaches the central level
        core = math.sqrt(d_hi / B)
        # peaked profiles (k near 1) need a much finer patch than the core
        h0 = h0 if h0 is not None else core / 20000.0
        r_uniform = r_uniform if r_uniform is not None else 0.01 * core
    grid = geometric_grid(truncation_radius, h0, ratio, r_uniform)
    return TOperatorConfig(N, k, chi, A, B, float(truncation_radius), grid, fp_tol, max_iter, relaxation)


def truncation_for_tail(N: int, k: float, B: float, tail: float = TAIL_MASS) -> float:
    """R with int_{|x|>R} B^(-N/k) |x|^(-2N/k) dx = tail, which bounds the M(x) tail."""
    q = 2.0 * N / k - N
    if q <= 0:
        raise NonIntegrable("envelope tail not integrable for k >= 2")
    c = sphere_area(N) * B ** (-N / k) / q
    return max((c / tail) ** (1.0 / q), 1.0)


# --------------------------------------------------------------------------
# delta bounds


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _radial_integral(log_f, N: int, log_scales=()) -> float:
    """sigma_N int_0^inf f(r) r^(N-1) dr in the variable u = log r.

    ``log_f(u)`` (vectorised) is log f(e^u), so that integrands whose pieces
    over- or underflow separately stay finite. The integrand is smooth in u
    with features of unit width around ``log_scales``; fixed Gauss-Legendre
    panels of width 1/2 resolve it to double precision.
    """
    pts = [float(s) for s in log_scales] + [0.0]
    lo, hi = min(pts) - 60.0, max(pts) + 60.0
    edges = np.linspace(lo, hi, int(math.ceil(2.0 * (hi - lo))) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    wts = (half[:, None] * _GL_W[None, :]).ravel()
    vals = np.exp(log_f(u) + N * u)
    # tails beyond the window are below double precision for integrable f
    return sphere_area(N) * float(np.sum(vals * wts))


def w_lower(alpha: float, N: int, k: float, A: float, B: float) -> float:
    """int (alpha + A|x|^k/k + B|x|^2)^(-N/k) dx."""
    la, lak, lb = math.log(alpha), math.log(A / k), math.log(B)
    log_f = lambda u: -N / k * np.logaddexp(np.logaddexp(la, lak + k * u), lb + 2.0 * u)  # noqa: E731
    return _radial_integral(log_f, N, ((la - lak) / k, 0.5 * (la - lb)))


def w_upper(alpha: float, N: int, k: float, B: float) -> float:
    """int (alpha + B|x|^2)^(-N/k) dx."""
    la, lb = math.log(alpha), math.log(B)
    log_f = lambda u: -N / k * np.logaddexp(la, lb + 2.0 * u)  # noqa: E731
    return _radial_integral(log_f, N, (0.5 * (la - lb),))


def _invert_decreasing(f, target: float = 1.0, tol: float = 1e-10) -> float:
    """Root of a decreasing f on (0, inf): bracket expansion, then bisection in log alpha.

    Returns 0.0 when the root is below the smallest normal double.
    """
    lo, hi = 0.0, 0.0
    while f(math.exp(lo)) <= target:
        lo -= math.log(1e4)
        if lo < math.log(1e-300):
            return 0.0
    while f(math.exp(hi)) >= target:
        hi += math.log(2.0)
        if hi > math.log(1e300):
            raise ConsistencyError("no upper bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(math.exp(mid)) > target:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def _delta_bounds(N: int, k: float, A: float, B: float) -> tuple[float, float]:
    if k >= 2.0:
        raise NonIntegrable(f"normalisation integrals diverge for k = {k} >= 2")
    lo = _invert_decreasing(lambda a: w_lower(a, N, k, A, B))
    if lo == 0.0:
        # zero is still a valid (weaker) lower end of the sandwich
        warnings.warn("lower delta bound underflows; using 0", RuntimeWarning, stacklevel=3)
    hi = _invert_decreasing(lambda a: w_upper(a, N, k, B))
    return lo, hi


def delta_bounds(config: TOperatorConfig) -> tuple[float, float]:
    """(w^-1(1), W^-1(1)) by bisection with bracket expansion."""
    return _delta_bounds(config.N, config.k, config.A, config.B)


def envelope(r, config: TOperatorConfig, bounds: tuple[float, float] | None = None):
    """(m(r), M(r)) pointwise bounds on T rho."""
    d_lo, d_hi = bounds or delta_bounds(config)
    r = np.asarray(r, dtype=float)
    N, k, A, B = config.N, config.k, config.A, config.B
    m = (d_hi + A * r**k / k + B * r * r) ** (-N / k)
    M = (d_lo + B * r * r) ** (-N / k)
    return m, M


# --------------------------------------------------------------------------
# the operator


def _profile(base: np.ndarray, C: float, N: int, k: float) -> np.ndarray:
    return (base + C) ** (-N / k)


def apply_T(rho: RadialDensity, config: TOperatorConfig, bounds: tuple[float, float] | None = None):
    """Return (T rho, C) with T rho normalised to unit mass on the grid of rho."""
    N, k, A, B = config.N, config.k, config.A, config.B
    if rho.N != N:
        raise InvalidArgument("dimension mismatch")
    d_lo, d_hi = bounds or delta_bounds(config)
    P = potential_matrix(rho.nodes, N, k)
    phi = P @ rho.values
    Ik = float(phi[0]) if rho.nodes[0] == 0.0 else kth_moment(rho, k)
    base = A * phi + B * rho.nodes**2

    def gap(C):
        return rho.integrate(_profile(base, C, N, k)) - 1.0

    lo, hi = d_lo - A * Ik, d_hi - A * Ik
    floor = -base.min()
    # discrete quadrature can move the root slightly outside the sandwich
    span = max(hi - lo, 1e-12)
    for _ in range(60):
        if lo > floor and gap(lo) >= 0:
            break
        lo = max(lo - span, floor + 0.5 * (lo - floor)) if lo > floor else floor + 1e-300
        span *= 2
    for _ in range(60):
        if gap(hi) <= 0:
            break
        hi += span
        span *= 2
    g_lo, g_hi = gap(lo), gap(hi)
    if not (g_lo >= 0 >= g_hi):
        raise ConsistencyError(f"mass bracket failed: gap({lo})={g_lo}, gap({hi})={g_hi}, I_k={Ik}")
    C = optimize.brentq(gap, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=400)
    vals = _profile(base, C, N, k)
    mass = rho.integrate(vals)
    return rho.with_values(vals / mass), float(C)


@dataclass
class FixedPointReport:
    density: RadialDensity
    C_const: float
    delta_lower: float
    delta_upper: float
    iterations: int
    final_residual: float
    envelope_ok: bool
    I_k: float
    converged: bool = False
    relaxation: float = 1.0
    residual_history: list = field(default_factory=list)
    sandwich_history: list = field(default_factory=list)
    envelope_history: list = field(default_factory=list)
    mass_history: list = field(default_factory=list)
    el_residual: float = float("nan")
    k: float = 0.0
    chi: float = 0.0

    @property
    def sandwich_value(self) -> float:
        """A I_k + C, which must lie in [delta_lower, delta_upper]."""
        A = fast_diffusion_constants(Params(self.density.N, self.k, self.chi))[0]
        return A * self.I_k + self.C_const

    def to_json(self) -> dict:
        rho = self.density
        return {
            "N": rho.N,
            "k": self.k,
            "chi": self.chi,
            "converged": self.converged,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "relaxation": self.relaxation,
            "C_const": self.C_const,
            "I_k": self.I_k,
            "delta_lower": self.delta_lower,
            "delta_upper": self.delta_upper,
            "sandwich_value": self.sandwich_value,
            "envelope_ok": self.envelope_ok,
            "el_residual": self.el_residual,
            "max_density": rho.max(),
            "mass": rho.mass(),
            "grid_nodes": int(rho.nodes.size),
            "truncation_radius": float(rho.nodes[-1]),
        }


def envelope_holds(rho: RadialDensity, config: TOperatorConfig, bounds, rel_slack: float = 1e-9) -> bool:
    m, M = envelope(rho.nodes, config, bounds)
    v = rho.values
    return bool(np.all(v >= m * (1 - rel_slack)) and np.all(v <= M * (1 + rel_slack)))


def _iterate(rho, config, bounds, theta, max_iter):
    A = config.A
    hist, sand, env, masses = [], [], [], []
    C = float("nan")
    for it in range(1, max_iter + 1):
        Trho, C = apply_T(rho, config, bounds)
        Ik = kth_moment(rho, config.k)
        sand.append(A * Ik + C)
        env.append(envelope_holds(Trho, config, bounds))
        masses.append(Trho.mass())
        res = float(np.max(np.abs(Trho.values - rho.values)) / rho.values.max())
        hist.append(res)
        if res <= config.fp_tol:
            return Trho, C, it, hist, sand, env, masses, True
        if not np.isfinite(res) or (it > 200 and res > 10 * min(hist)):
            return rho, C, it, hist, sand, env, masses, False
        rho = rho.with_values((1.0 - theta) * rho.values + theta * Trho.values)
    return rho, C, max_iter, hist, sand, env, masses, False


def _oscillating(hist: list) -> bool:
    if len(hist) < 40:
        return False
    tail = np.array(hist[-40:])
    return bool(np.sum(np.diff(tail) > 0) > 10)


def solve_stationary(initial: RadialDensity, config: TOperatorConfig) -> FixedPointReport:
    """Relaxed Picard iteration rho <- (1 - theta) rho + theta T rho.

    Plain iteration (theta = 1) is tried first for a short burst; if its
    residual is not monotone the configured relaxation is used.
    """
    if config.k > 1.0:
        warnings.warn("k > 1: outside the range covered by the existence theory", RuntimeWarning, stacklevel=2)
    if initial.N != config.N:
        raise InvalidArgument("dimension mismatch")
    bounds = delta_bounds(config)
    nodes = config.grid
    rho = RadialDensity(nodes, initial(nodes), config.N).normalized()
    theta = 1.0
    probe = _iterate(rho, config, bounds, 1.0, min(60, config.max_iter))
    out = probe
    if not probe[-1]:
        hist = probe[3]
        if _oscillating(hist) or not np.isfinite(hist[-1]) or hist[-1] > hist[0]:
            theta = config.relaxation
            out = _iterate(rho, config, bounds, theta, config.max_iter)
        else:
            rest = _iterate(probe[0], config, bounds, 1.0, config.max_iter - probe[2])
            out = (rest[0], rest[1], probe[2] + rest[2], probe[3] + rest[3], probe[4] + rest[4],
                   probe[5] + rest[5], probe[6] + rest[6], rest[7])
            if not rest[-1] and _oscillating(rest[3]):
                theta = config.relaxation
                out = _iterate(rho, config, bounds, theta, config.max_iter)
    dens, C, iters, hist, sand, env, masses, ok = out
    dens = RadialDensity(dens.nodes, dens.values, dens.N, dens.weights, monotone=bool(np.all(np.diff(dens.values) <= 0)))
    params = config.params
    report = FixedPointReport(
        density=dens,
        C_const=C,
        delta_lower=bounds[0],
        delta_upper=bounds[1],
        iterations=iters,
        final_residual=hist[-1],
        envelope_ok=envelope_holds(dens, config, bounds),
        I_k=kth_moment(dens, config.k),
        converged=ok,
        relaxation=theta,
        residual_history=hist,
        sandwich_history=sand,
        envelope_history=env,
        mass_history=masses,
        k=config.k,
        chi=config.chi,
    )
    report.el_residual = el_residual(dens, params)[0]
    return report


def moment_sandwich(rho: RadialDensity, k: float):
    """(I_k, W_k * rho at the nodes, eta (|x|^k/k + I_k)) for 0 < k < N."""
    if not (0.0 < k < rho.N):
        raise InvalidArgument("moment sandwich needs 0 < k < N")
    Ik = kth_moment(rho, k)
    phi = potential_matrix(rho.nodes, rho.N, k) @ rho.values
    eta = max(1.0, 2.0 ** (k - 1.0))
    return Ik, phi, eta * (rho.nodes**k / k + Ik)


# --------------------------------------------------------------------------
# nonexistence


def check_nonexistence(params: Params) -> Diagnosis:
    N, k = params.N, params.k
    if not k > 0:
        raise InvalidArgument("nonexistence diagnosis applies to the fast-diffusion regime")
    if not params.rescaled:
        return Diagnosis.ORIGINAL_NONE
    if k >= 2.0:
        return Diagnosis.RESCALED_NONE
    if k >= k_star(N):
        return Diagnosis.RESCALED_UNBOUNDED_K_MOMENT
    if k <= 1.0:
        return Diagnosis.RESCALED_EXISTS
    return Diagnosis.RESCALED_OPEN


# --------------------------------------------------------------------------
# output


def write_envelope_csv(path, report: FixedPointReport, config: TOperatorConfig) -> None:
    rho = report.density
    m, M = envelope(rho.nodes, config, (report.delta_lower, report.delta_upper))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "rho", "m_envelope", "M_envelope"])
        for row in zip(rho.nodes, rho.values, m, M):
            w.writerow([repr(float(x)) for x in row])


def write_report_json(path, report: FixedPointReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
