"""One-dimensional gradient flow on the pseudo-inverse of the distribution function.

Positions ``X_i`` of the quantiles ``w_i = (i + 1/2)/M`` are advanced by
implicit Euler steps; each step is a nonlinear system solved by Newton's
method with an analytic Jacobian. Cells between consecutive quantiles carry
mass ``dw = 1/M`` each.

The discrete free energy is

    U = dw * sum_c f(dw / dX_c)
    W = dw^2 * sum_{i != j} W_k(X_i - X_j)  -  (2 zeta(-k)/k) dw^2 sum_c dX_c^k
    V = dw * sum_i X_i^2

The last term of W removes the leading error of the Riemann sum near the
diagonal (a lattice-sum constant); it is switched on by default for k != 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize, special

from .domain import Frame, InvalidArgument, Params, RadialDensity, beta_inv, dilate, rescaling_maps
from .energy import EnergyBreakdown, potential


class InvalidState(ValueError):
    pass


# --------------------------------------------------------------------------
# state


@dataclass
class Pseudoinverse:
    X: np.ndarray
    t: float = 0.0
    dt: float = 1e-3

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim != 1 or X.size < 2:
            raise InvalidState("need at least two quantiles")
        if not np.all(np.isfinite(X)) or np.any(np.diff(X) <= 0):
            raise InvalidState("positions must be finite and strictly increasing")
        self.X = X

    @property
    def M(self) -> int:
        return self.X.size

    @property
    def dw(self) -> float:
        return 1.0 / self.M

    @property
    def w(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) / self.M

    def widths(self) -> np.ndarray:
        return np.diff(self.X)

    def cell_density(self) -> np.ndarray:
        return self.dw / np.diff(self.X)

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.X[1:] + self.X[:-1])

    def com(self) -> float:
        return float(np.mean(self.X))

    @classmethod
    def from_density(cls, rho: RadialDensity, M: int, shift: float = 0.0, dt: float = 1e-3) -> "Pseudoinverse":
        """Quantiles of the even extension of a 1D radial profile."""
        if rho.N != 1:
            raise InvalidArgument("the pseudo-inverse solver is one-dimensional")
        return cls(quantiles(rho, M) + shift, 0.0, dt)


def quantiles(rho: RadialDensity, M: int) -> np.ndarray:
    """X(w_i) for the even extension of ``rho``, inverting the piecewise-quadratic CDF exactly."""
    if M < 2:
        raise InvalidArgument("M must be at least 2")
    r, v = rho.nodes, rho.values
    h = np.diff(r)
    cell_mass = 0.5 * h * (v[:-1] + v[1:])
    cum = np.concatenate([[0.0], np.cumsum(cell_mass)])
    total = cum[-1]
    if not total > 0:
        raise InvalidArgument("zero mass")
    w = (np.arange(M) + 0.5) / M
    # half-line mass coordinate of each quantile in [0, total)
    target = np.abs(w - 0.5) * 2.0 * total
    j = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, h.size - 1)
    # skip empty cells so that each target falls where the mass is
    rem = target - cum[j]
    a = v[j]
    s = (v[j + 1] - v[j]) / h[j]
    disc = np.maximum(a * a + 2.0 * s * rem, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(rem > 0, 2.0 * rem / (a + np.sqrt(disc)), 0.0)
    x = r[j] + np.minimum(u, h[j])
    X = np.where(w < 0.5, -x, x)
    if M % 2 == 1:
        X[M // 2] = 0.0
    return X


# --------------------------------------------------------------------------
# discrete energy and velocity


def _check_1d(params: Params):
    if params.N != 1:
        raise InvalidArgument("jko1d is one-dimensional")
    if not (-1.0 < params.k < 1.0):
        raise InvalidArgument("jko1d needs k in (-1, 1)")


def self_interaction_coefficient(k: float) -> float:
    """2 zeta(-k) / k, the lattice constant of the diagonal-excluded Riemann sum."""
    if k == 0.0:
        return 0.0
    return 2.0 * float(special.zeta(-k)) / k


def _kernel(d, k):
    if k == 0.0:
        return np.log(d)
    return d**k / k


@dataclass(frozen=True)
class DiscreteEnergy:
    U: float
    W: float
    V: float
    chi: float
    rescaled: bool

    @property
    def F_k(self) -> float:
        return self.U + self.chi * self.W

    @property
    def total(self) -> float:
        return self.F_k + (0.5 * self.V if self.rescaled else 0.0)


def discrete_energy(X: np.ndarray, params: Params, correction: bool = True) -> DiscreteEnergy:
    _check_1d(params)
    X = np.asarray(X, dtype=float)
    M = X.size
    dw = 1.0 / M
    dX = np.diff(X)
    rho = dw / dX
    k, m = params.k, params.m
    if m == 1.0:
        U = dw * float(np.sum(np.log(rho)))
    else:
        U = dw * float(np.sum(rho ** (m - 1.0))) / (m - 1.0)
    D = np.abs(X[:, None] - X[None, :])
    iu = np.triu_indices(M, 1)
    W = 2.0 * dw * dw * float(np.sum(_kernel(D[iu], k)))
    if correction and k != 0.0:
        W -= self_interaction_coefficient(k) * dw * dw * float(np.sum(dX**k))
    V = dw * float(np.sum(X * X))
    return DiscreteEnergy(U, W, V, params.chi, params.rescaled)


def energy_breakdown(X: np.ndarray, params: Params, correction: bool = True) -> EnergyBreakdown:
    e = discrete_energy(X, params, correction)
    X = np.asarray(X, dtype=float)
    c = X - X.mean()
    with np.errstate(divide="ignore"):
        Ik = float(np.mean(_kernel(np.abs(c[c != 0]), params.k))) if np.any(c != 0) else 0.0
    return EnergyBreakdown(
        entropy=e.U,
        interaction=e.W,
        confinement=0.5 * e.V if params.rescaled else 0.0,
        total=e.total,
        kth_moment=Ik,
        chi=params.chi,
        k=params.k,
        N=1,
        frame=params.frame.value,
    )


def _velocity_parts(X: np.ndarray, params: Params, correction: bool, jacobian: bool):
    M = X.size
    dw = 1.0 / M
    k, m, chi = params.k, params.m, params.chi
    dX = np.diff(X)
    if np.any(dX <= 0):
        raise InvalidState("positions lost monotonicity")
    p = (dw / dX) ** m  # pressure rho^m on each cell
    flux = np.zeros(M + 1)
    flux[1:-1] = p
    v = (flux[:-1] - flux[1:]) / dw
    if correction and k != 0.0 and chi != 0.0:
        beta = -2.0 * chi * float(special.zeta(-k)) * dw * dw
        q = beta * dX ** (k - 1.0)
        fq = np.zeros(M + 1)
        fq[1:-1] = q
        v = v - (fq[:-1] - fq[1:]) / dw
    else:
        q = None
    D = X[:, None] - X[None, :]
    A = np.abs(D)
    np.fill_diagonal(A, 1.0)
    if chi != 0.0:
        phi = np.sign(D) * A ** (k - 1.0)
        np.fill_diagonal(phi, 0.0)
        v = v - 2.0 * chi * dw * phi.sum(axis=1)
    if params.rescaled:
        v = v - X
    if not jacobian:
        return v, None
    J = np.zeros((M, M))
    a = -m * p / dX  # d p_c / d dX_c
    idx = np.arange(M - 1)
    # v_i gets (p_{i-1} - p_i)/dw; p_c depends on X_{c+1} - X_c
    J[idx + 1, idx] += -a / dw
    J[idx + 1, idx + 1] += a / dw
    J[idx, idx] += a / dw
    J[idx, idx + 1] += -a / dw
    if q is not None:
        b = (k - 1.0) * q / dX
        J[idx + 1, idx] -= -b / dw
        J[idx + 1, idx + 1] -= b / dw
        J[idx, idx] -= b / dw
        J[idx, idx + 1] -= -b / dw
    if chi != 0.0:
        dphi = (k - 1.0) * A ** (k - 2.0)
        np.fill_diagonal(dphi, 0.0)
        J += 2.0 * chi * dw * dphi
        J[np.diag_indices(M)] -= 2.0 * chi * dw * dphi.sum(axis=1)
    if params.rescaled:
        J[np.diag_indices(M)] -= 1.0
    return v, J


def velocity(X: Pseudoinverse | np.ndarray, params: Params, correction: bool = True) -> np.ndarray:
    """dX/dt = -(1/dw) dE/dX for the discrete free energy."""
    _check_1d(params)
    Xa = X.X if isinstance(X, Pseudoinverse) else np.asarray(X, dtype=float)
    return _velocity_parts(Xa, params, correction, False)[0]


# --------------------------------------------------------------------------
# implicit step


@dataclass(frozen=True)
class NewtonSettings:
    tol: float = 1e-11
    max_iter: int = 40
    correction: bool = True


@dataclass(frozen=True)
class StepResult:
    X: np.ndarray
    converged: bool
    iterations: int
    residual: float


def _newton(X0: np.ndarray, params: Params, dt: float, s: NewtonSettings) -> StepResult:
    Y = X0.copy()
    scale = max(1.0, float(np.max(np.abs(X0))))
    v, J = _velocity_parts(Y, params, s.correction, True)
    G = Y - X0 - dt * v
    res = float(np.max(np.abs(G)))
    for it in range(1, s.max_iter + 1):
        if res <= s.tol * scale:
            return StepResult(Y, True, it - 1, res)
        Jg = np.eye(Y.size) - dt * J
        try:
            delta = linalg.lu_solve(linalg.lu_factor(Jg, check_finite=False), -G, check_finite=False)
        except (linalg.LinAlgError, ValueError):
            return StepResult(Y, False, it, res)
        alpha = 1.0
        accepted = False
        for _ in range(40):
            trial = Y + alpha * delta
            if np.all(np.diff(trial) > 0):
                vt, Jt = _velocity_parts(trial, params, s.correction, True)
                Gt = trial - X0 - dt * vt
                rt = float(np.max(np.abs(Gt)))
                if np.isfinite(rt) and (rt < res or rt <= s.tol * scale):
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            return StepResult(Y, False, it, res)
        Y, v, J, G, res = trial, vt, Jt, Gt, rt
    return StepResult(Y, res <= s.tol * scale, s.max_iter, res)


def step_implicit(X: Pseudoinverse, params: Params, settings: NewtonSettings | None = None) -> Pseudoinverse:
    """One implicit Euler step of size ``X.dt``; raises if Newton fails."""
    _check_1d(params)
    settings = settings or NewtonSettings()
    r = _newton(X.X, params, X.dt, settings)
    if not r.converged:
        raise InvalidState(f"Newton failed (residual {r.residual:.3e})")
    Y = _pin_com(r.X, X.com(), X.dt, params)
    return Pseudoinverse(Y, X.t + X.dt, X.dt)


def _pin_com(Y: np.ndarray, com0: float, dt: float, params: Params) -> np.ndarray:
    """The centre of mass decouples: it is constant, or decays like e^{-t}
    when rescaled. Its mode is advanced exactly rather than by Euler."""
    target = com0 * math.exp(-dt) if params.rescaled else com0
    return Y + (target - float(np.mean(Y)))


# --------------------------------------------------------------------------
# runs


@dataclass
class JkoRunReport:
    params: Params
    times: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    com: list = field(default_factory=list)
    min_cell: list = field(default_factory=list)
    max_density: list = field(default_factory=list)
    velocity_sup: list = field(default_factory=list)
    newton_stats: list = field(default_factory=list)
    converged_to_steady: bool = False
    blow_up: bool = False
    stalled: bool = False
    rejected_steps: int = 0
    energy_rejections: int = 0
    final: Pseudoinverse | None = None
    steady_profile: RadialDensity | None = None

    @property
    def totals(self) -> np.ndarray:
        return np.array([e.total for e in self.energies])

    def to_json(self) -> dict:
        e = self.energies[-1] if self.energies else None
        return {
            "N": 1,
            "k": self.params.k,
            "chi": self.params.chi,
            "frame": self.params.frame.value,
            "M": self.final.M if self.final is not None else None,
            "t_final": self.times[-1] if self.times else 0.0,
            "steps": len(self.times) - 1,
            "converged_to_steady": self.converged_to_steady,
            "blow_up": self.blow_up,
            "stalled": self.stalled,
            "rejected_steps": self.rejected_steps,
            "energy_rejections": self.energy_rejections,
            "F_total": e.total if e else None,
            "F_k": e.F_k if e else None,
            "max_density": self.max_density[-1] if self.max_density else None,
            "com": self.com[-1] if self.com else None,
        }


def run(
    initial: RadialDensity | Pseudoinverse,
    params: Params,
    t_end: float,
    dt: float = 1e-3,
    *,
    M: int = 400,
    dt_max: float = 0.5,
    dt_min: float = 1e-12,
    steady_tol: float = 1e-7,
    stop_at_steady: bool = True,
    settings: NewtonSettings | None = None,
    energy_slack: float = 1e-10,
    collapse_ratio: float = 1e-12,
    stall_collapse_ratio: float = 1e-4,
    max_steps: int = 200000,
) -> JkoRunReport:
    """Adaptive implicit Euler from ``initial`` up to ``t_end``.

    Steps are halved on Newton failure or when the discrete energy would
    increase by more than ``energy_slack``; dt doubles after 20 accepted
    steps in a row. A run stops early on a steady state (sup velocity below
    ``steady_tol`` for 10 steps) or on collapse of the quantiles.
    """
    _check_1d(params)
    settings = settings or NewtonSettings()
    if isinstance(initial, Pseudoinverse):
        state = Pseudoinverse(initial.X, initial.t, dt)
    else:
        state = Pseudoinverse.from_density(initial, M, dt=dt)
    rep = JkoRunReport(params)
    w0 = float(np.min(state.widths()))

    def record(s: Pseudoinverse, vsup: float, iters: int):
        rep.times.append(s.t)
        rep.energies.append(energy_breakdown(s.X, params, settings.correction))
        rep.com.append(s.com())
        rep.min_cell.append(float(np.min(s.widths())))
        rep.max_density.append(float(np.max(s.cell_density())))
        rep.velocity_sup.append(vsup)
        rep.newton_stats.append(iters)

    v0 = velocity(state.X, params, settings.correction)
    record(state, float(np.max(np.abs(v0))), 0)
    E = rep.energies[-1].total
    h = dt
    streak = 0
    quiet = 0
    failures = 0
    t0 = state.t
    com0 = state.com()
    for _ in range(max_steps):
        if state.t >= t_end - 1e-14:
            break
        h = min(h, t_end - state.t)
        r = _newton(state.X, params, h, settings)
        ok = r.converged
        if ok:
            Y = _pin_com(r.X, state.com(), h, params)
            if params.rescaled:
                # re-anchor to the exact trajectory to avoid drift from rounding
                Y = Y + (com0 * math.exp(-(state.t + h - t0)) - float(np.mean(Y)))
            if not np.all(np.diff(Y) > 0):
                ok = False
            else:
                En = energy_breakdown(Y, params, settings.correction).total
                if En > E + energy_slack:
                    ok = False
                    rep.energy_rejections += 1
        if not ok:
            rep.rejected_steps += 1
            failures += 1
            streak = 0
            h *= 0.5
            wmin = float(np.min(np.diff(r.X))) if np.all(np.isfinite(r.X)) else 0.0
            if failures >= 5 and min(wmin, rep.min_cell[-1]) < collapse_ratio * w0:
                rep.blow_up = True
                break
            if h < dt_min:
                # step-size floor: a collapse if the cells have shrunk by orders
                # of magnitude (double precision cannot reach collapse_ratio)
                rep.stalled = True
                rep.blow_up = rep.min_cell[-1] < stall_collapse_ratio * w0
                break
            continue
        failures = 0
        vsup = float(np.max(np.abs(velocity(Y, params, settings.correction))))
        state = Pseudoinverse(Y, state.t + h, h)
        E = En
        record(state, vsup, r.iterations)
        quiet = quiet + 1 if vsup <= steady_tol else 0
        if quiet >= 10:
            rep.converged_to_steady = True
            if stop_at_steady:
                break
        streak += 1
        if streak >= 20:
            h = min(2.0 * h, dt_max)
            streak = 0
    rep.final = state
    rep.steady_profile = radial_profile(state)
    return rep


def radial_profile(state: Pseudoinverse) -> RadialDensity:
    """Cell densities as a radial profile about the centre of mass.

    The right half of the distribution is used; the density is zero beyond
    the last quantile.
    """
    c = state.com()
    mids = state.midpoints() - c
    dens = state.cell_density()
    right = mids > 0
    r = mids[right]
    v = dens[right]
    centre = float(np.interp(0.0, mids, dens))
    edge = float(state.X[-1] - c)
    nodes = np.concatenate([[0.0], r, [edge]])
    vals = np.concatenate([[centre], v, [0.0]])
    keep = np.concatenate([[True], np.diff(nodes) > 0])
    return RadialDensity(nodes[keep], vals[keep], 1)


def write_trajectory_csv(path, rep: JkoRunReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "F_total", "U", "W", "V", "com", "min_cell", "max_density"])
        for t, e, c, mc, md in zip(rep.times, rep.energies, rep.com, rep.min_cell, rep.max_density):
            V = 2.0 * e.confinement if rep.params.rescaled else float("nan")
            w.writerow([repr(float(x)) for x in (t, e.total, e.entropy, e.interaction, V, c, mc, md)])


def write_profile_csv(path, state: Pseudoinverse) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "rho"])
        for x, r in zip(state.midpoints(), state.cell_density()):
            w.writerow([repr(float(x)), repr(float(r))])


# --------------------------------------------------------------------------
# self-similar reconstruction


def self_similar_reconstruct(steady: RadialDensity, params: Params, tau: float) -> RadialDensity:
    """Original-frame profile at time tau from a rescaled stationary profile.

    With t = beta^{-1}(tau): rho(tau, x) = alpha(t)^{-N} u(x / alpha(t)).
    """
    t = beta_inv(params, tau)
    alpha, _ = rescaling_maps(params, t)
    return dilate(steady, 1.0 / alpha)


# --------------------------------------------------------------------------
# porous-medium steady profiles on a radial grid


@dataclass
class PolishReport:
    density: RadialDensity
    D: float
    iterations: int
    residual: float
    converged: bool


def polish_steady(profile: RadialDensity, params: Params, nodes: np.ndarray | None = None,
                  tol: float = 1e-10, max_iter: int = 2000, theta: float = 0.5) -> PolishReport:
    """Solve rho^(m-1) = (N(m-1)/m) (D - 2 chi W_k*rho - r^2/2)_+ for k < 0.

    Relaxed fixed-point iteration started from ``profile``; D is set by unit
    mass at each iterate.
    """
    if not params.k < 0 or not params.rescaled:
        raise InvalidArgument("polish_steady applies to rescaled porous-medium profiles")
    N, m, chi = params.N, params.m, params.chi
    if nodes is None:
        R = profile.support_radius()
        nodes = np.linspace(0.0, 1.6 * R, 1201)
    rho = RadialDensity(nodes, profile(nodes), N).normalized()
    c = N * (m - 1.0) / m
    expo = 1.0 / (m - 1.0)
    r2 = 0.5 * nodes**2
    D = 0.0
    res = float("inf")
    for it in range(1, max_iter + 1):
        pot = 2.0 * chi * potential(rho, params) + r2

        def mass(Dv):
            return rho.integrate(np.maximum(c * (Dv - pot), 0.0) ** expo) - 1.0

        lo = float(pot.min())
        hi = lo + 1.0
        while mass(hi) < 0:
            hi = lo + 2.0 * (hi - lo)
        D = optimize.brentq(mass, lo, hi, xtol=1e-15, rtol=1e-15)
        new = np.maximum(c * (D - pot), 0.0) ** expo
        new /= rho.integrate(new)
        res = float(np.max(np.abs(new - rho.values)) / new.max())
        if res <= tol:
            rho = rho.with_values(new)
            return PolishReport(rho, D, it, res, True)
        rho = rho.with_values((1.0 - theta) * rho.values + theta * new)
    return PolishReport(rho, D, max_iter, res, False)


# --------------------------------------------------------------------------
# sweep in chi for the porous-medium critical strength


@dataclass
class SweepPoint:
    chi: float
    converged: bool
    blow_up: bool
    F_k: float
    V: float
    t_final: float


@dataclass
class SweepResult:
    k: float
    points: list
    crossing: float | None
    bracket: tuple | None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "crossing": self.crossing,
            "bracket": list(self.bracket) if self.bracket else None,
            "note": self.note,
            "points": [p.__dict__ for p in self.points],
        }


def sweep_point(chi: float, k: float, M: int = 200, t_end: float = 400.0, **kw) -> SweepPoint:
    params = Params(1, k, chi, Frame.RESCALED)
    init = Pseudoinverse(quantiles(_unit_interval(), M))
    rep = run(init, params, t_end, kw.pop("dt", 1e-3), M=M, **kw)
    e = discrete_energy(rep.final.X, params, kw.get("settings", NewtonSettings()).correction)
    return SweepPoint(chi, rep.converged_to_steady, rep.blow_up, e.F_k, e.V, rep.times[-1])


def _unit_interval() -> RadialDensity:
    return RadialDensity(np.array([0.0, 0.5]), np.array([1.0, 1.0]), 1).normalized()


def chi_crossing(points: list, k: float) -> SweepResult:
    """Zero of the confinement-free energy of steady states, as a function of chi.

    At a rescaled steady state the dilation identity gives k F_k = -V, and
    near the threshold V^((2-k)/2) vanishes linearly in chi, so that
    transformed quantity is interpolated (or extrapolated) linearly.
    """
    good = sorted((p for p in points if p.converged), key=lambda p: p.chi)
    bad = sorted((p for p in points if not p.converged), key=lambda p: p.chi)
    bracket = None
    if good and bad and bad[0].chi > good[-1].chi:
        bracket = (good[-1].chi, bad[0].chi)
    if len(good) < 2:
        return SweepResult(k, points, None, bracket, "fewer than two converged members")
    g = [(p.chi, max(p.V, 0.0) ** ((2.0 - k) / 2.0)) for p in good]
    (x0, y0), (x1, y1) = g[-2], g[-1]
    if y1 == y0:
        return SweepResult(k, points, None, bracket, "flat")
    crossing = x1 - y1 * (x1 - x0) / (y1 - y0)
    signs = {np.sign(p.F_k) for p in good}
    note = "all converged members share the sign of F_k; crossing is extrapolated" if len(signs) == 1 else ""
    return SweepResult(k, points, float(crossing), bracket, note)
