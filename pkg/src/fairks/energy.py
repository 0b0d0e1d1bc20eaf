"""Free energy, first variation, Euler-Lagrange residuals and the HLS ratio."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .domain import Frame, InvalidArgument, Params, RadialDensity, dilate, gaussian, geometric_grid, uniform_grid
from .kernel import kth_moment, potential_matrix, radial_potential


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyBreakdown:
    entropy: float
    interaction: float
    confinement: float
    total: float
    kth_moment: float
    chi: float
    k: float
    N: int
    frame: str

    @property
    def F_k(self) -> float:
        """Energy without the confinement term."""
        return self.entropy + self.chi * self.interaction

    def to_json(self) -> dict:
        return asdict(self)


def entropy(rho: RadialDensity, params: Params) -> float:
    v = rho.values
    N, m = params.N, params.m
    if m == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)), 0.0)
        return rho.integrate(f) / N
    return rho.integrate(v**m) / (N * (m - 1.0))


def lm_norm(rho: RadialDensity, m: float) -> float:
    """||rho||_m^m."""
    return rho.integrate(rho.values**m)


def potential(rho: RadialDensity, params: Params) -> np.ndarray:
    """W_k * rho at every node."""
    return potential_matrix(rho.nodes, rho.N, params.k) @ rho.values


def interaction(rho: RadialDensity, params: Params) -> float:
    return rho.integrate(rho.values * potential(rho, params))


def free_energy(rho: RadialDensity, params: Params) -> EnergyBreakdown:
    if rho.N != params.N:
        raise InvalidArgument("density dimension does not match params")
    U = entropy(rho, params)
    W = interaction(rho, params)
    if not (math.isfinite(U) and math.isfinite(W)):
        raise DomainError("divergent energy quadrature")
    conf = 0.5 * rho.second_moment() if params.rescaled else 0.0
    return EnergyBreakdown(
        entropy=U,
        interaction=W,
        confinement=conf,
        total=U + params.chi * W + conf,
        kth_moment=kth_moment(rho, params.k),
        chi=params.chi,
        k=params.k,
        N=params.N,
        frame=params.frame.value,
    )


def _entropy_derivative(values: np.ndarray, params: Params) -> np.ndarray:
    N, m = params.N, params.m
    if m == 1.0:
        if np.any(values <= 0):
            raise DomainError("log entropy derivative undefined where rho = 0")
        return (np.log(values) + 1.0) / N
    if m < 1.0 and np.any(values <= 0):
        raise DomainError("rho^(m-1) diverges where rho = 0 for m < 1")
    with np.errstate(divide="ignore"):
        return m / (N * (m - 1.0)) * values ** (m - 1.0)


def first_variation(rho: RadialDensity, r, params: Params):
    """m/(N(m-1)) rho^(m-1) + 2 chi W_k * rho (+ r^2/2 when rescaled)."""
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    vals = rho(r)
    out = _entropy_derivative(vals, params) + 2.0 * params.chi * radial_potential(rho, r, params)
    if params.rescaled:
        out = out + 0.5 * r**2
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# Euler-Lagrange residuals


@dataclass(frozen=True)
class ElDiagnostics:
    sup_residual: float
    support_radius: float
    constant_fit: float
    constant_closed_form: float
    support_nodes: int


def fast_diffusion_constants(params: Params) -> tuple[float, float]:
    """(A, B) of the rescaled fast-diffusion stationary equation."""
    N, k, chi = params.N, params.k, params.chi
    return 2.0 * chi * N * k / (N - k), N * k / (2.0 * (N - k))


def el_diagnostics(rho: RadialDensity, params: Params, support_threshold: float = 1e-8) -> ElDiagnostics:
    v = rho.values
    r = rho.nodes
    phi = potential(rho, params)
    supp = v > support_threshold * v.max()
    idx = np.nonzero(supp)[0]
    R = float(r[idx[-1]]) if idx.size else 0.0
    if params.k > 0:
        # fast-diffusion profiles are positive everywhere: report the full extent
        pos = np.nonzero(v > 0)[0]
        R = float(r[pos[-1]]) if pos.size else 0.0
    conf = 0.5 * r**2 if params.rescaled else 0.0
    N, m, k, chi = params.N, params.m, params.k, params.chi
    if k > 0:
        A, B = fast_diffusion_constants(params)
        base = A * phi + B * r**2

        def mass_gap(C):
            return rho.integrate(np.maximum(base + C, 1e-300) ** (-N / k)) - rho.mass()

        lo = -base.min() + 1e-14 * max(1.0, abs(base.min()))
        hi = abs(lo) + 1.0
        while mass_gap(hi) > 0:
            hi = 2.0 * hi + 1.0
        C = optimize.brentq(mass_gap, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=500)
        model = (base + C) ** (-N / k)
        res = np.max(np.abs(v - model)) / v.max()
        T = _entropy_derivative(v[supp], params) + 2 * chi * phi[supp] + (conf[supp] if params.rescaled else 0.0)
        return ElDiagnostics(float(res), R, float(C), float(np.sum(T)) / idx.size, int(idx.size))
    T = _entropy_derivative(v[supp], params) + 2.0 * chi * phi[supp]
    if params.rescaled:
        T = T + conf[supp]
    D = float(np.mean(T))
    # mass-weighted mean of T: the constant implied by the energy identities
    Tall = np.zeros_like(v)
    Tall[supp] = T
    D_closed = rho.integrate(v * Tall) / rho.mass()
    pot = 2.0 * chi * phi + (conf if params.rescaled else 0.0)
    if m == 1.0:
        res = np.max(np.abs(np.log(v[supp]) - N * (D - pot[supp])))
    else:
        model = (N * (m - 1.0) / m) * np.maximum(D - pot[supp], 0.0)
        lhs = v[supp] ** (m - 1.0)
        res = np.max(np.abs(lhs - model)) / lhs.max()
    return ElDiagnostics(float(res), R, D, float(D_closed), int(idx.size))


def el_residual(rho: RadialDensity, params: Params) -> tuple[float, float]:
    """(sup residual on the support, support radius); see ``el_diagnostics``."""
    d = el_diagnostics(rho, params)
    return d.sup_residual, d.support_radius


# --------------------------------------------------------------------------
# HLS-type ratio and critical interaction strength


def hls_ratio(rho: RadialDensity, params: Params) -> float:
    """|int int rho |x-y|^k rho| / (||rho||_1^((N+k)/N) ||rho||_m^m), k < 0."""
    if params.k >= 0:
        raise InvalidArgument("hls_ratio needs k < 0")
    mass = rho.mass()
    norm_m = lm_norm(rho, params.m)
    if not (mass > 0 and norm_m > 0):
        raise InvalidArgument("zero norm")
    J = abs(params.k * interaction(rho, params))
    return J / (mass ** ((params.N + params.k) / params.N) * norm_m)


@dataclass
class HlsEstimate:
    C_star_lower: float
    chi_c: float
    optimizer_trace: list = field(default_factory=list)
    budget_exhausted: bool = False
    profile: RadialDensity | None = None

    def to_json(self) -> dict:
        return {
            "C_star_lower": self.C_star_lower,
            "chi_c": self.chi_c,
            "budget_exhausted": self.budget_exhausted,
            "trace_length": len(self.optimizer_trace),
            "implementation_derived": True,
        }


@dataclass(frozen=True)
class DensityFamily:
    """Trial family: compactly supported powers (1 - r^2)_+^p and a Gaussian.

    The ratio is invariant under dilation and scaling of the mass, so only
    the exponent p is a free shape parameter.
    """

    r_max: float = 40.0
    h0: float = 2e-3
    ratio: float = 1.03
    r_uniform: float = 0.5
    p_bounds: tuple = (0.2, 6.0)

    def nodes(self) -> np.ndarray:
        return geometric_grid(self.r_max, self.h0, self.ratio, self.r_uniform)


def _power_profile(nodes: np.ndarray, p: float) -> np.ndarray:
    return np.maximum(1.0 - nodes**2, 0.0) ** p


def estimate_chi_c(params: Params, family: DensityFamily | None = None, budget: int = 200) -> HlsEstimate:
    """Lower bound on the sharp constant from trial densities; chi_c = 1/C.

    Shape search over the family, then projected gradient ascent on the grid
    values. The reported ratio is a running maximum.
    """
    family = family or DensityFamily()
    N, k = params.N, params.k
    if k == 0.0:
        return _log_case(params)
    if k >= 0:
        raise InvalidArgument("estimate_chi_c needs k <= 0")
    nodes = family.nodes()
    trace: list = []
    best = [0.0, None]

    def record(label, vals):
        d = RadialDensity(nodes, vals, N)
        ratio = hls_ratio(d, params)
        trace.append((label, ratio))
        if ratio > best[0]:
            best[0], best[1] = ratio, d
        return ratio

    res = optimize.minimize_scalar(
        lambda p: -record(("power", float(p)), _power_profile(nodes, p)),
        bounds=family.p_bounds,
        method="bounded",
        options={"xatol": 1e-4},
    )
    p_best = float(res.x)
    g = gaussian(N, 0.25, nodes)
    record(("gaussian", 0.25), g.values)

    # projected gradient ascent on log ratio with the L2 metric of the weights
    w = RadialDensity(nodes, np.ones_like(nodes), N).weights
    P = potential_matrix(nodes, N, k)
    Q = k * P  # |x - y|^k * rho
    m = params.m
    x = best[1].values.copy()
    x /= w @ x

    def logratio(v):
        J = w @ (v * (Q @ v))
        S = w @ v**m
        M = w @ v
        return math.log(J) - (N + k) / N * math.log(M) - math.log(S), J, S, M

    f, J, S, M = logratio(x)
    step = 0.05
    stalls = 0
    exhausted = True
    for it in range(budget):
        grad = (w * (Q @ x) + Q.T @ (w * x)) / J - (N + k) / N * w / M - m * w * x ** (m - 1.0) / S
        grad /= w
        # projected direction: no decrease where the value is already zero
        direction = np.where((x <= 0) & (grad < 0), 0.0, grad)
        direction *= x.max() / max(np.abs(direction).max(), 1e-300)
        accepted = False
        t = step
        for _ in range(30):
            trial = np.maximum(x + t * direction, 0.0)
            ft = logratio(trial)[0]
            if ft > f:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            stalls += 1
            if stalls >= 3:
                exhausted = False
                break
            step *= 0.25
            continue
        improvement = ft - f
        x = trial / (w @ trial)
        f, J, S, M = logratio(x)
        record(("ascent", it), x)
        step = min(2.0 * t, 0.5)
        if improvement < 1e-13:
            exhausted = False
            break
    C = best[0]
    trace.insert(0, (("power_best", p_best), -float(res.fun)))
    return HlsEstimate(C, 1.0 / C, trace, exhausted, best[1])


def _log_case(params: Params) -> HlsEstimate:
    """k = 0: F[rho_lambda] = F[rho] + (U-slope - chi W-slope) log lambda.

    The threshold where the dilation slope changes sign is the critical
    strength; it is measured on a trial density.
    """
    rho = gaussian(params.N, 0.5, uniform_grid(4.0, 801))
    p0 = params.with_chi(1.0).with_frame(Frame.ORIGINAL)
    lam = 2.0
    r2 = dilate(rho, lam)
    dU = entropy(r2, p0) - entropy(rho, p0)
    dW = interaction(r2, p0) - interaction(rho, p0)
    chi_c = dU / (-dW)
    return HlsEstimate(1.0 / chi_c, chi_c, [(("dilation_slope", lam), chi_c)], False, rho)
