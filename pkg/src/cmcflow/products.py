"""Warped-product scale-factor dynamics for doubled Einstein factors.

The spacetime ansatz is -dt^2 + a(t)^2 gM(s) + b(t)^2 gN(s) on a product of
two m-dimensional Einstein manifolds, both with Einstein constant +/-(n-1)
where n = 2m, and with the coupling s > 1/2 entering through the rescaled
factor metrics gM(s) = s*gM, gN(s) = s/(2s-1)*gN.  In log scale factors
x = log a, y = log b the vacuum equations with cosmological constant
n(n-1)/2 reduce to

    x'' = n -+ kx * e^(-2x) - (n/2)(x'^2 + x'y')
    y'' = n -+ ky * e^(-2y) - (n/2)(y'^2 + x'y')

with kx = (n-1)/s and ky = 2(n-1) - kx, the upper sign for positive
curvature (initial data x = y = x' = y' = 0) and the lower for negative
curvature (x = y = 0, x' = y' = sqrt 2).  Both families conserve the first
integral x'' + y'' + x'^2 + y'^2 = 2.

Geometric observables (mean curvature, tracefree second fundamental form,
spatial scalar curvature) are polynomial in the state:

    tau       = -m (x' + y')
    |Sigma|^2 = (m/2) (x' - y')^2
    R         = +/- m (kx e^(-2x) + ky e^(-2y))

These expressions follow from the warped-product second fundamental form;
they are not taken on trust but certified by the Hamiltonian constraint
R - |Sigma|^2 + tau^2 (n-1)/n = n(n-1), whose residual is reported with
every sample and must vanish along constrained trajectories.  The pointwise
identity  first_integral_residual == -(2/n) * ham_residual  ties the
observable formulas to the evolution equations for arbitrary states, not
just solutions.

All functions here are pure and operate on immutable inputs; they are safe
to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .background import CurvatureSign

# e^(-2y) overflows double precision long before y reaches this; beyond the
# floor the state is numerically past recollapse and integration must stop.
OVERFLOW_FLOOR = -300.0


class BlowUpOverflow(ArithmeticError):
    """Scale factor too small to exponentiate; treat as recollapse evidence."""

    def __init__(self, t: float):
        super().__init__(f"log scale factor below {OVERFLOW_FLOOR} at t={t}")
        self.t = t


@dataclass(frozen=True)
class FlowConfig:
    """One product-flow problem instance.

    ``m`` is the dimension of each factor (n = 2m), ``s`` the coupling of
    the factor metrics, and ``vol_m``/``vol_n`` the volumes of the unscaled
    unit-Einstein factor metrics (they only enter volume-weighted
    observables).
    """

    m: int
    sign: CurvatureSign
    s: float
    vol_m: float = 1.0
    vol_n: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"factor dimension must be >= 1, got m={self.m}")
        if not self.s > 0.5:
            raise ValueError(f"coupling must satisfy s > 1/2, got s={self.s}")
        if not (self.vol_m > 0.0 and self.vol_n > 0.0):
            raise ValueError("base volumes must be positive")

    @property
    def n(self) -> int:
        return 2 * self.m

    @property
    def kx(self) -> float:
        """Curvature source coefficient of the x equation, (n-1)/s."""
        return (self.n - 1) / self.s

    @property
    def ky(self) -> float:
        """Curvature source coefficient of the y equation, 2(n-1) - kx.

        Written as a difference so that at the boundary coupling
        s = (n-1)/(n-2) with s exactly representable (n = 4, 6) the
        coefficient evaluates to exactly n and y = 0 stays an invariant
        subspace in floating point.
        """
        return 2.0 * (self.n - 1) - self.kx


@dataclass(frozen=True)
class FlowState:
    """One trajectory point: proper time, log scale factors, velocities."""

    t: float
    x: float
    y: float
    xp: float
    yp: float


@dataclass(frozen=True)
class Observables:
    """Gauge and constraint quantities derived from a state.

    ``h_red`` is the reduced Hamiltonian on whichever branch the state
    occupies: (tau^2/n - n)^(n/2) * vol for tau^2 > n^2, and
    (n - tau^2/n)^(n/2) * vol for tau^2 < n^2.  Exactly on the gauge
    boundary tau^2 = n^2 neither branch applies and the value is None.
    """

    tau: float
    sigma_sq: float
    scalar_curv: float
    ham_residual: float
    first_integral_residual: float
    h_red: float | None


def initial_state(config: FlowConfig) -> FlowState:
    """Constraint-compatible initial data for the configured sign."""
    if config.sign is CurvatureSign.POSITIVE:
        return FlowState(t=0.0, x=0.0, y=0.0, xp=0.0, yp=0.0)
    v0 = math.sqrt(2.0)
    return FlowState(t=0.0, x=0.0, y=0.0, xp=v0, yp=v0)


def derivatives(config: FlowConfig):
    """Compiled right-hand side f(t, u) -> (x', y', x'', y'') for u = (x, y, x', y').

    Shared fast path for the integrators; raises :class:`BlowUpOverflow`
    once a log scale factor falls below the overflow floor.
    """
    n = float(config.n)
    half_n = 0.5 * n
    kx = config.kx
    ky = config.ky
    curv = -1.0 if config.sign is CurvatureSign.POSITIVE else 1.0
    exp = math.exp
    floor = OVERFLOW_FLOOR

    def f(t, u):
        x, y, xp, yp = u
        if x < floor or y < floor:
            raise BlowUpOverflow(t)
        cross = xp * yp
        xpp = n + curv * (kx * exp(-2.0 * x)) - half_n * (xp * xp + cross)
        ypp = n + curv * (ky * exp(-2.0 * y)) - half_n * (yp * yp + cross)
        return xp, yp, xpp, ypp

    return f


def rhs(config: FlowConfig, state: FlowState) -> tuple[float, float]:
    """Accelerations (x'', y'') of the product system at one state."""
    _, _, xpp, ypp = derivatives(config)(
        state.t, (state.x, state.y, state.xp, state.yp)
    )
    return xpp, ypp


def first_integral_residual(
    config: FlowConfig, state: FlowState, xpp: float, ypp: float
) -> float:
    """Defect of the conserved combination x'' + y'' + x'^2 + y'^2 - 2."""
    return xpp + ypp + state.xp * state.xp + state.yp * state.yp - 2.0


def _exp_or_inf(arg: float) -> float:
    # math.exp raises OverflowError slightly above 709; volumes past that
    # horizon are reported as inf rather than aborting observable output.
    if arg > 709.0:
        return math.inf
    return math.exp(arg)


def observables(config: FlowConfig, state: FlowState) -> Observables:
    """Evaluate the gauge/constraint observables at one state.

    The constraint residual certifies tau, |Sigma|^2 and R jointly; the
    first-integral residual is recomputed from the accelerations at this
    state (for interpolated samples it therefore also reflects
    interpolation error, not just step error).  Never raises: past the
    overflow floor the exponential terms saturate to inf and the residuals
    come back non-finite instead.
    """
    m = config.m
    n = float(config.n)
    x, y, xp, yp = state.x, state.y, state.xp, state.yp

    ex = _exp_or_inf(-2.0 * x)
    ey = _exp_or_inf(-2.0 * y)

    tau = -m * (xp + yp)
    diff = xp - yp
    sigma_sq = 0.5 * m * diff * diff
    curv = 1.0 if config.sign is CurvatureSign.POSITIVE else -1.0
    scalar_curv = curv * m * (config.kx * ex + config.ky * ey)
    ham_residual = (
        scalar_curv - sigma_sq + tau * tau * ((n - 1.0) / n) - n * (n - 1.0)
    )

    # same arithmetic as the integrator's right-hand side, minus its guard
    half_n = 0.5 * n
    cross = xp * yp
    xpp = n - curv * (config.kx * ex) - half_n * (xp * xp + cross)
    ypp = n - curv * (config.ky * ey) - half_n * (yp * yp + cross)
    fir = first_integral_residual(config, state, xpp, ypp)

    # tau^2/n - n, factored to keep relative accuracy near the gauge
    # boundary |tau| -> n where the direct difference cancels.
    ratio = tau / n
    gap = n * (ratio - 1.0) * (ratio + 1.0)
    if gap != 0.0:
        volume = (
            _exp_or_inf(m * (x + y))
            * (config.s * config.s / (2.0 * config.s - 1.0)) ** (0.5 * m)
            * config.vol_m
            * config.vol_n
        )
        h_red = abs(gap) ** (0.5 * n) * volume
    else:
        h_red = None

    return Observables(
        tau=tau,
        sigma_sq=sigma_sq,
        scalar_curv=scalar_curv,
        ham_residual=ham_residual,
        first_integral_residual=fir,
        h_red=h_red,
    )


def limit_volume_ratio(config: FlowConfig, x_minus_y_limit: float) -> float:
    """Late-time volume ratio of the two factors from the limit of x - y.

    vol(M, a^2 gM(s)) / vol(N, b^2 gN(s))
        = (a/b)^m * (2s-1)^(m/2) * vol_m / vol_n,

    so the gauge-free limit L = lim (x - y) maps to
    e^(mL) * (2s-1)^(m/2) * vol_m / vol_n.
    """
    if not math.isfinite(x_minus_y_limit):
        raise ValueError("x - y limit must be finite")
    m = config.m
    return (
        math.exp(m * x_minus_y_limit)
        * (2.0 * config.s - 1.0) ** (0.5 * m)
        * config.vol_m
        / config.vol_n
    )
