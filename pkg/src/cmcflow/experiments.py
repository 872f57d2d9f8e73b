"""Scientific drivers over the product-flow integrator.

These reproduce the qualitative dichotomy of the coupling family at desk
scale: recollapse versus completeness classification, bisection for the
critical coupling, extraction of the late-time limit of x - y, and
monotonicity audits of the reduced Hamiltonian.

"Complete" always means *complete within the integration horizon*: a
finite computation can witness a blow-up but can only fail to witness one,
so the verdict name keeps that epistemic status explicit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .background import CurvatureSign
from .integrate import (
    BLOW_UP_EVENT,
    REACHED_HORIZON,
    EventSpec,
    IntegratorSettings,
    Termination,
    Trajectory,
    integrate,
    integrate_oracle,
)
from .products import FlowConfig

VERDICT_COMPLETE = "CompleteWithinHorizon"
VERDICT_RECOLLAPSE = "Recollapse"

AUDIT_CONSTANT = "Constant"
AUDIT_NON_INCREASING = "MonotoneNonIncreasing"
AUDIT_NON_DECREASING = "MonotoneNonDecreasing"
AUDIT_NON_MONOTONE = "NonMonotone"

# Brackets closer to a threshold than this are flagged low-confidence:
# blow-up times grow without bound as the threshold is approached.
NEAR_THRESHOLD = 1e-3

# Constancy and monotonicity tolerances for the reduced-Hamiltonian audit,
# both relative to the magnitude of the audited values.  The slack equals
# the constancy resolution: excursions the constancy test could not see do
# not count as monotonicity reversals either (late-time samples carry
# rounding noise at a few 1e-8 relative from the gauge-asymptote
# cancellation in tau^2/n - n).
CONSTANT_REL_TOL = 1e-6
MONOTONE_REL_SLACK = 1e-6

# Below this the magnitude of x' - y' is rounding noise and its log is
# useless for rate fitting.
DECAY_FIT_FLOOR = 1e-13


class RegimeError(ValueError):
    """Limit extraction requested outside the convergent regime."""


class GaugeRangeError(ValueError):
    """A trajectory left the gauge range of the audited Hamiltonian branch."""

    def __init__(self, message: str, t_first: float):
        super().__init__(message)
        self.t_first = t_first


class BracketError(ValueError):
    """Bisection endpoints classify identically; no threshold inside."""


class PreconditionError(ValueError):
    """Operation invoked outside its stated preconditions."""


@dataclass(frozen=True)
class Classification:
    """Verdict of one run plus the diagnostics needed to trust it."""

    verdict: str
    t_blowup: float | None
    horizon: float
    max_constraint_residual: float
    max_first_integral_residual: float
    termination: Termination
    low_confidence: bool


@dataclass(frozen=True)
class BisectionResult:
    bracket: tuple[float, float]
    iterations: int
    horizon_used: float
    verdict_lo: str
    verdict_hi: str


@dataclass(frozen=True)
class LimitEstimate:
    """Late-time limit of x - y with its own quality measures.

    ``decay_rate`` is the fitted exponential rate of |x' - y'| (negative in
    the convergent regime); it is None when the difference mode sits at
    rounding level throughout, as happens for the symmetric coupling s = 1.
    """

    value: float
    tail_variation: float
    decay_rate: float | None
    cross_check_delta: float


@dataclass(frozen=True)
class HamiltonianAudit:
    """Reduced-Hamiltonian series along one run and its global verdict.

    ``delta_total`` records the measured end-to-start difference on the
    t > 0 portion, i.e. the empirical sign of the drift, independent of the
    verdict label.
    """

    series: list[tuple[float, float]]
    verdict: str
    branch: str
    delta_total: float


@dataclass(frozen=True)
class SweepRow:
    s: float
    classification: Classification | None
    limit: LimitEstimate | None
    error: str | None = None


def thresholds(n: int) -> tuple[float, float | None]:
    """Analytic coupling thresholds ((n-1)/n, (n-1)/(n-2)) for positive products.

    For n = 2 the upper expression degenerates and None is returned; the
    completeness range is then reported empirically only.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError(f"n must be an even integer >= 2, got {n}")
    lower = (n - 1) / n
    upper = (n - 1) / (n - 2) if n > 2 else None
    return lower, upper


def _near_threshold(config: FlowConfig) -> bool:
    if config.sign is not CurvatureSign.POSITIVE:
        return False
    lower, upper = thresholds(config.n)
    if abs(config.s - lower) < NEAR_THRESHOLD:
        return True
    return upper is not None and abs(config.s - upper) < NEAR_THRESHOLD


def _settings_for(horizon: float, settings: IntegratorSettings | None):
    base = settings if settings is not None else IntegratorSettings()
    return replace(base, t_max=horizon)


def classify(
    config: FlowConfig,
    horizon: float,
    settings: IntegratorSettings | None = None,
    events: EventSpec | None = None,
) -> Classification:
    """Recollapse iff the integration ends in a blow-up event before the horizon.

    A step-size collapse is read as recollapse evidence but flagged
    low-confidence, as is any verdict within NEAR_THRESHOLD of an analytic
    threshold.
    """
    traj = integrate(config, _settings_for(horizon, settings), events)
    term = traj.termination
    low_confidence = _near_threshold(config)
    if term.kind == REACHED_HORIZON:
        verdict, t_blowup = VERDICT_COMPLETE, None
    elif term.kind == BLOW_UP_EVENT:
        verdict, t_blowup = VERDICT_RECOLLAPSE, term.t_event
    else:
        verdict, t_blowup = VERDICT_RECOLLAPSE, term.t_last
        low_confidence = True
    return Classification(
        verdict=verdict,
        t_blowup=t_blowup,
        horizon=horizon,
        max_constraint_residual=traj.max_ham_residual,
        max_first_integral_residual=traj.max_first_integral_residual,
        termination=term,
        low_confidence=low_confidence,
    )


def bisect_critical(
    n: int,
    sign: CurvatureSign,
    s_lo: float,
    s_hi: float,
    tol: float,
    horizon: float,
    settings: IntegratorSettings | None = None,
    events: EventSpec | None = None,
) -> BisectionResult:
    """Bisection on the classification predicate for the critical coupling.

    The bracket converges to the horizon-dependent empirical threshold,
    which approaches the analytic value as the horizon grows.  Positive
    curvature only: the negative family is complete for every coupling, so
    there is no threshold to find.
    """
    if sign is not CurvatureSign.POSITIVE:
        raise PreconditionError(
            "the negative-curvature family has no completeness threshold"
        )
    if not s_lo < s_hi:
        raise ValueError(f"need s_lo < s_hi, got [{s_lo}, {s_hi}]")
    if not tol > 0.0:
        raise ValueError("tol must be positive")

    def verdict_at(s):
        config = FlowConfig(m=n // 2, sign=sign, s=s)
        return classify(config, horizon, settings, events).verdict

    verdict_lo = verdict_at(s_lo)
    verdict_hi = verdict_at(s_hi)
    if verdict_lo == verdict_hi:
        raise BracketError(
            f"both endpoints classify as {verdict_lo} at horizon {horizon}"
        )

    iterations = 0
    lo, hi = s_lo, s_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if verdict_at(mid) == verdict_lo:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return BisectionResult(
        bracket=(lo, hi),
        iterations=iterations,
        horizon_used=horizon,
        verdict_lo=verdict_lo,
        verdict_hi=verdict_hi,
    )


def _fit_slope(points: list[tuple[float, float]]) -> float:
    t_mean = math.fsum(t for t, _ in points) / len(points)
    z_mean = math.fsum(z for _, z in points) / len(points)
    num = math.fsum((t - t_mean) * (z - z_mean) for t, z in points)
    den = math.fsum((t - t_mean) ** 2 for t, _ in points)
    return num / den


def _decay_rate(traj: Trajectory) -> float | None:
    # Fit window: the final half of the samples whose difference mode is
    # still above rounding noise.
    usable = [
        (state.t, math.log(abs(state.xp - state.yp)))
        for state, _ in traj.samples
        if state.t > 0.0 and abs(state.xp - state.yp) > DECAY_FIT_FLOOR
    ]
    if len(usable) < 4:
        return None
    window = usable[len(usable) // 2 :]
    if len(window) < 2 or window[-1][0] == window[0][0]:
        return None
    return _fit_slope(window)


def limit_Cs(
    config: FlowConfig,
    horizon: float,
    oracle_dt: float = 1e-3,
    settings: IntegratorSettings | None = None,
    events: EventSpec | None = None,
) -> LimitEstimate:
    """Estimate lim (x - y) by reading off the trajectory at the horizon.

    Valid in the convergent regime only: negative products for any
    coupling, positive products strictly between the thresholds.  The value
    is cross-checked against an independent fixed-step integration.
    """
    if config.sign is CurvatureSign.POSITIVE:
        lower, upper = thresholds(config.n)
        inside = config.s > lower and (upper is None or config.s < upper)
        if not inside:
            raise RegimeError(
                f"coupling s={config.s} is outside the open convergent "
                f"interval ({lower}, {upper}) for n={config.n}"
            )
    traj = integrate(config, _settings_for(horizon, settings), events)
    if traj.termination.kind != REACHED_HORIZON:
        raise RegimeError(
            f"trajectory did not reach the horizon: {traj.termination}"
        )

    diffs = [(state.t, state.x - state.y) for state, _ in traj.samples]
    value = diffs[-1][1]
    tail = [d for _, d in diffs[-max(2, len(diffs) // 5) :]]
    tail_variation = max(tail) - min(tail)

    oracle = integrate_oracle(config, oracle_dt, horizon, events)
    if oracle.termination.kind != REACHED_HORIZON:
        raise RegimeError(
            f"oracle integration did not reach the horizon: "
            f"{oracle.termination}"
        )
    o_final = oracle.final_state()
    cross_check_delta = abs(value - (o_final.x - o_final.y))

    return LimitEstimate(
        value=value,
        tail_variation=tail_variation,
        decay_rate=_decay_rate(traj),
        cross_check_delta=cross_check_delta,
    )


def hamiltonian_audit(
    config: FlowConfig,
    horizon: float,
    settings: IntegratorSettings | None = None,
    events: EventSpec | None = None,
) -> HamiltonianAudit:
    """Reduced-Hamiltonian series along one run with a global verdict.

    The branch is fixed by the initial sample (tau^2 - n^2 > 0 selects the
    expanding-gauge branch, < 0 the reversed one) and every later sample
    must stay on it; the first offender aborts with GaugeRangeError.  The
    verdict is decided on the t > 0 portion: Constant when the relative
    variation stays below CONSTANT_REL_TOL, otherwise one-sided
    monotonicity up to MONOTONE_REL_SLACK of the value scale, otherwise
    NonMonotone.  ``delta_total`` keeps the measured sign of the change.
    """
    traj = integrate(config, _settings_for(horizon, settings), events)
    n = config.n

    series: list[tuple[float, float]] = []
    branch = None
    for state, obs in traj.samples:
        tau = obs.tau
        gap = (tau / n - 1.0) * (tau / n + 1.0)
        sample_branch = "H-" if gap > 0.0 else ("H+" if gap < 0.0 else None)
        if branch is None:
            branch = sample_branch
        if sample_branch != branch or obs.h_red is None:
            raise GaugeRangeError(
                f"sample at t={state.t} left the {branch} gauge range "
                f"(tau={tau}, n={n})",
                t_first=state.t,
            )
        series.append((state.t, obs.h_red))
    if branch is None or not series:
        raise GaugeRangeError("no usable samples", t_first=0.0)

    expanding = [(t, v) for t, v in series if t > 0.0]
    values = [v for _, v in expanding]
    scale = max(abs(v) for v in values)
    spread = max(values) - min(values)
    if scale == 0.0 or spread <= CONSTANT_REL_TOL * scale:
        verdict = AUDIT_CONSTANT
    else:
        slack = MONOTONE_REL_SLACK * scale
        diffs = [values[i + 1] - values[i] for i in range(len(values) - 1)]
        if all(d <= slack for d in diffs):
            verdict = AUDIT_NON_INCREASING
        elif all(d >= -slack for d in diffs):
            verdict = AUDIT_NON_DECREASING
        else:
            verdict = AUDIT_NON_MONOTONE

    return HamiltonianAudit(
        series=series,
        verdict=verdict,
        branch=branch,
        delta_total=values[-1] - values[0],
    )


def _sweep_row(
    n: int,
    sign: CurvatureSign,
    s: float,
    horizon: float,
    with_limits: bool,
    oracle_dt: float,
    settings: IntegratorSettings | None,
    events: EventSpec | None,
) -> SweepRow:
    try:
        config = FlowConfig(m=n // 2, sign=sign, s=s)
        cls = classify(config, horizon, settings, events)
    except Exception as exc:  # per-row diagnostics, never abort the sweep
        return SweepRow(s=s, classification=None, limit=None,
                        error=f"{type(exc).__name__}: {exc}")
    limit = None
    if with_limits and cls.verdict == VERDICT_COMPLETE:
        try:
            limit = limit_Cs(config, horizon, oracle_dt, settings, events)
        except RegimeError:
            limit = None
    return SweepRow(s=s, classification=cls, limit=limit)


def sweep(
    n: int,
    sign: CurvatureSign,
    s_grid: list[float],
    horizon: float,
    with_limits: bool = True,
    oracle_dt: float = 1e-3,
    threads: int = 1,
    settings: IntegratorSettings | None = None,
    events: EventSpec | None = None,
) -> list[SweepRow]:
    """Classify (and optionally extract limits) over a coupling grid.

    Rows are independent and may be computed in parallel; the returned
    order always follows the input grid regardless of completion order.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError(f"n must be an even integer >= 2, got {n}")
    args = [
        (n, sign, s, horizon, with_limits, oracle_dt, settings, events)
        for s in s_grid
    ]
    if threads > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda a: _sweep_row(*a), args))
    return [_sweep_row(*a) for a in args]
