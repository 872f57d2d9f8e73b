"""Adaptive and fixed-step time integration for the product systems.

The primary integrator is an embedded Dormand-Prince 5(4) pair with
proportional-integral step-size control, the standard quartic continuous
extension for dense output, and event location by bisection on the dense
output.  A classical fixed-step fourth-order Runge-Kutta scheme is kept as
a fully independent cross-check; it shares nothing with the adaptive path
beyond the right-hand side.

Termination is a three-way taxonomy:

* ``ReachedHorizon``     - integrated to t_max;
* ``BlowUpEvent``        - a blow-up trigger crossed (y below its floor,
  x' + y' below the velocity floor, or the right-hand side overflowed);
* ``StepSizeCollapse``   - the controller demanded a step below min_step.
  This is reported as its own outcome, never silently reclassified.

Integrations are single-threaded and deterministic: identical inputs
produce bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .products import (
    BlowUpOverflow,
    FlowConfig,
    FlowState,
    Observables,
    derivatives,
    initial_state,
    observables,
)
from .background import CurvatureSign

# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
)
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = (
    35.0 / 384.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
)
# Difference between the 5th- and 4th-order weights.
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
# Weights of the quartic continuous extension.
_D1 = -12715105075.0 / 11282082432.0
_D3 = 87487479700.0 / 32700410799.0
_D4 = -10690763975.0 / 1880347072.0
_D5 = 701980252875.0 / 199316789632.0
_D6 = -1453857185.0 / 822651844.0
_D7 = 69997945.0 / 29380423.0

# PI controller constants (safety factor, integral gain, growth bounds).
_SAFETY = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - 0.75 * _BETA
_MAX_GROW = 10.0
_MAX_SHRINK = 5.0

_INITIAL_STEP = 0.01
_EVENT_T_TOL = 1e-10

TRIGGER_Y_FLOOR = "y_floor"
TRIGGER_VELOCITY_FLOOR = "velocity_floor"
TRIGGER_OVERFLOW = "overflow"

REACHED_HORIZON = "ReachedHorizon"
BLOW_UP_EVENT = "BlowUpEvent"
STEP_SIZE_COLLAPSE = "StepSizeCollapse"


class TimeSymmetryError(ValueError):
    """Backward integration requested for data without time symmetry."""


@dataclass(frozen=True)
class IntegratorSettings:
    """Tolerances, step bounds, horizon and output sampling interval.

    The default max_step is deliberately small: on late-time trajectories
    all derivatives beyond the first decay exponentially, and an uncapped
    controller would grow the step until the local error sits at the
    tolerance floor, slowly bleeding the conserved quantities.  Capping the
    step keeps the local error proportional to the decaying mode instead,
    which is what holds the reduced-Hamiltonian drift below 1e-6 relative
    over audit-length horizons.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.03
    min_step: float = 1e-13
    t_max: float = 50.0
    output_dt: float = 0.1

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.min_step < self.max_step:
            raise ValueError("need 0 < min_step < max_step")
        if not self.t_max > 0.0:
            raise ValueError("t_max must be positive")
        if not self.output_dt > 0.0:
            raise ValueError("output_dt must be positive")


@dataclass(frozen=True)
class EventSpec:
    """Blow-up triggers: a floor on y and a floor on the total velocity.

    Recollapse drives x' + y' to -infinity in finite time while the
    collapsing log scale factor dives; either floor crossing is treated as
    blow-up evidence and the earlier one is reported.
    """

    y_floor: float = -20.0
    velocity_floor: float = -100.0

    def __post_init__(self):
        if not self.y_floor < 0.0:
            raise ValueError("y_floor must be negative")
        if not self.velocity_floor < 0.0:
            raise ValueError("velocity_floor must be negative")


@dataclass(frozen=True)
class Termination:
    """How an integration ended.

    ``t_event``/``trigger`` are set for blow-up terminations, ``t_last``
    for step-size collapse.
    """

    kind: str
    t_event: float | None = None
    trigger: str | None = None
    t_last: float | None = None


@dataclass
class Trajectory:
    """Sampled integration output plus conservation monitors.

    Samples are strictly monotone in t (increasing for forward runs,
    decreasing for backward runs) and immutable once returned.
    ``max_first_integral_residual`` is taken over every accepted step
    endpoint, not just output samples; ``max_ham_residual`` over the
    emitted samples.
    """

    config: FlowConfig
    samples: list[tuple[FlowState, Observables]]
    termination: Termination
    max_first_integral_residual: float
    max_ham_residual: float
    n_accepted: int
    n_rejected: int

    def states(self) -> list[FlowState]:
        return [state for state, _ in self.samples]

    def final_state(self) -> FlowState:
        return self.samples[-1][0]


def _event_functions(events: EventSpec, direction: float):
    # Each g is positive while safe and crosses <= 0 at the trigger.  Under
    # time reversal the velocities flip sign, so the backward velocity
    # trigger fires at x' + y' >= -velocity_floor.
    def g_y(u):
        return u[1] - events.y_floor

    if direction > 0:
        def g_v(u):
            return (u[2] + u[3]) - events.velocity_floor
    else:
        def g_v(u):
            return -(u[2] + u[3]) - events.velocity_floor

    return ((TRIGGER_Y_FLOOR, g_y), (TRIGGER_VELOCITY_FLOOR, g_v))


def _run_adaptive(
    config: FlowConfig,
    settings: IntegratorSettings,
    events: EventSpec,
    direction: float,
) -> Trajectory:
    f = derivatives(config)
    state0 = initial_state(config)
    u = (state0.x, state0.y, state0.xp, state0.yp)
    t = 0.0
    t_end = direction * settings.t_max
    event_fns = _event_functions(events, direction)

    samples: list[tuple[FlowState, Observables]] = []
    max_ham = 0.0
    last_emitted_t = None

    def emit(ts, us):
        nonlocal max_ham, last_emitted_t
        if last_emitted_t is not None and not direction * (ts - last_emitted_t) > 0.0:
            return
        state = FlowState(ts, us[0], us[1], us[2], us[3])
        obs = observables(config, state)
        if abs(obs.ham_residual) > max_ham:
            max_ham = abs(obs.ham_residual)
        samples.append((state, obs))
        last_emitted_t = ts

    def residual_at(us, k):
        return k[2] + k[3] + us[2] * us[2] + us[3] * us[3] - 2.0

    k1 = f(t, u)
    max_fir = abs(residual_at(u, k1))
    emit(t, u)

    def finish(termination):
        return Trajectory(
            config=config,
            samples=samples,
            termination=termination,
            max_first_integral_residual=max_fir,
            max_ham_residual=max_ham,
            n_accepted=n_accepted,
            n_rejected=n_rejected,
        )

    n_accepted = 0
    n_rejected = 0

    for name, g in event_fns:
        if g(u) <= 0.0:
            return finish(Termination(BLOW_UP_EVENT, t_event=t, trigger=name))

    next_k = 1
    h = direction * max(
        settings.min_step, min(_INITIAL_STEP, settings.max_step, settings.t_max)
    )
    facold = 1e-4

    while True:
        last_step = False
        if direction * (t + h - t_end) >= 0.0:
            h = t_end - t
            last_step = True

        try:
            u2 = tuple(u[i] + h * (_A21 * k1[i]) for i in range(4))
            k2 = f(t + _C2 * h, u2)
            u3 = tuple(u[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(4))
            k3 = f(t + _C3 * h, u3)
            u4 = tuple(
                u[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
                for i in range(4)
            )
            k4 = f(t + _C4 * h, u4)
            u5 = tuple(
                u[i]
                + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
                for i in range(4)
            )
            k5 = f(t + _C5 * h, u5)
            u6 = tuple(
                u[i]
                + h
                * (
                    _A61 * k1[i]
                    + _A62 * k2[i]
                    + _A63 * k3[i]
                    + _A64 * k4[i]
                    + _A65 * k5[i]
                )
                for i in range(4)
            )
            k6 = f(t + h, u6)
            unew = tuple(
                u[i]
                + h
                * (
                    _B1 * k1[i]
                    + _B3 * k3[i]
                    + _B4 * k4[i]
                    + _B5 * k5[i]
                    + _B6 * k6[i]
                )
                for i in range(4)
            )
            k7 = f(t + h, unew)
        except (BlowUpOverflow, OverflowError):
            # The state one step ahead is past the representable range; the
            # last accepted time is the last safe one.
            emit(t, u)
            return finish(
                Termination(BLOW_UP_EVENT, t_event=t, trigger=TRIGGER_OVERFLOW)
            )

        err_norm = 0.0
        for i in range(4):
            err_i = h * (
                _E1 * k1[i]
                + _E3 * k3[i]
                + _E4 * k4[i]
                + _E5 * k5[i]
                + _E6 * k6[i]
                + _E7 * k7[i]
            )
            scale = settings.abs_tol + settings.rel_tol * max(
                abs(u[i]), abs(unew[i])
            )
            ratio = err_i / scale
            err_norm += ratio * ratio
        err_norm = math.sqrt(err_norm / 4.0)

        if err_norm <= 1.0:
            t_new = t_end if last_step else t + h

            # Quartic continuous extension over [t, t+h].
            rcont1 = u
            rcont2 = tuple(unew[i] - u[i] for i in range(4))
            rcont3 = tuple(h * k1[i] - rcont2[i] for i in range(4))
            rcont4 = tuple(rcont2[i] - h * k7[i] - rcont3[i] for i in range(4))
            rcont5 = tuple(
                h
                * (
                    _D1 * k1[i]
                    + _D3 * k3[i]
                    + _D4 * k4[i]
                    + _D5 * k5[i]
                    + _D6 * k6[i]
                    + _D7 * k7[i]
                )
                for i in range(4)
            )

            def dense(theta):
                th1 = 1.0 - theta
                return tuple(
                    rcont1[i]
                    + theta
                    * (
                        rcont2[i]
                        + th1 * (rcont3[i] + theta * (rcont4[i] + th1 * rcont5[i]))
                    )
                    for i in range(4)
                )

            hit_theta = None
            hit_name = None
            for name, g in event_fns:
                if g(unew) <= 0.0:
                    lo, hi = 0.0, 1.0
                    while abs(h) * (hi - lo) > _EVENT_T_TOL:
                        mid = 0.5 * (lo + hi)
                        if g(dense(mid)) <= 0.0:
                            hi = mid
                        else:
                            lo = mid
                    if hit_theta is None or hi < hit_theta:
                        hit_theta = hi
                        hit_name = name

            t_stop = t + hit_theta * h if hit_theta is not None else t_new
            while True:
                tg = direction * (next_k * settings.output_dt)
                if direction * (tg - t_stop) > 0.0:
                    break
                emit(tg, dense((tg - t) / h))
                next_k += 1

            if hit_theta is not None:
                u_hit = dense(hit_theta)
                emit(t_stop, u_hit)
                try:
                    fir = abs(residual_at(u_hit, f(t_stop, u_hit)))
                except (BlowUpOverflow, OverflowError):
                    fir = max_fir  # floors set beyond the representable range
                if fir > max_fir:
                    max_fir = fir
                return finish(
                    Termination(BLOW_UP_EVENT, t_event=t_stop, trigger=hit_name)
                )

            fir = abs(residual_at(unew, k7))
            if fir > max_fir:
                max_fir = fir

            t = t_new
            u = unew
            k1 = k7
            n_accepted += 1

            if last_step:
                emit(t_end, u)
                return finish(Termination(REACHED_HORIZON))

            fac11 = err_norm**_EXPO1
            fac = fac11 / facold**_BETA
            fac = max(1.0 / _MAX_GROW, min(_MAX_SHRINK, fac / _SAFETY))
            h = h / fac
            facold = max(err_norm, 1e-4)
            if abs(h) > settings.max_step:
                h = direction * settings.max_step
        else:
            fac11 = err_norm**_EXPO1
            h = h / min(_MAX_SHRINK, fac11 / _SAFETY)
            n_rejected += 1

        if abs(h) < settings.min_step:
            emit(t, u)
            return finish(Termination(STEP_SIZE_COLLAPSE, t_last=t))


def integrate(
    config: FlowConfig,
    settings: IntegratorSettings | None = None,
    events: EventSpec | None = None,
) -> Trajectory:
    """Integrate the product system forward from its constrained initial data.

    Samples are placed on the output_dt grid by dense-output interpolation,
    with the initial state and the terminal state (horizon, event time, or
    collapse time) always included.  Blow-up triggers are located on the
    dense output to within 1e-10 in t.
    """
    return _run_adaptive(
        config, settings or IntegratorSettings(), events or EventSpec(), 1.0
    )


def backward_integrate(
    config: FlowConfig,
    settings: IntegratorSettings | None = None,
    events: EventSpec | None = None,
) -> Trajectory:
    """Integrate toward negative t; positive-curvature products only.

    The positive-curvature initial data is velocity-free, making the
    solution time-symmetric: x(-t) = x(t), y(-t) = y(t).  Negative-curvature
    initial data carries nonzero velocities and is rejected.  Samples run in
    stepping order, i.e. strictly decreasing t.
    """
    if config.sign is not CurvatureSign.POSITIVE:
        raise TimeSymmetryError(
            "backward integration needs time-symmetric initial data; the "
            "negative-curvature family starts with nonzero velocities"
        )
    return _run_adaptive(
        config, settings or IntegratorSettings(), events or EventSpec(), -1.0
    )


def integrate_oracle(
    config: FlowConfig,
    dt: float,
    t_max: float,
    events: EventSpec | None = None,
    output_dt: float = 0.1,
) -> Trajectory:
    """Fixed-step classical RK4 cross-check of :func:`integrate`.

    Intended for verification only.  Samples are emitted at the first step
    on or after each output_dt mark (no interpolation; sample times are the
    true step times).  Events are detected by a sign change across a step
    and then located by bisection over partial steps restarted from the
    step start, so the reported time does not inherit the full-step error.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if not t_max > 0.0:
        raise ValueError("t_max must be positive")
    if events is None:
        events = EventSpec()
    f = derivatives(config)
    event_fns = _event_functions(events, 1.0)

    state0 = initial_state(config)
    u = (state0.x, state0.y, state0.xp, state0.yp)
    t = 0.0

    samples: list[tuple[FlowState, Observables]] = []
    max_ham = 0.0
    last_emitted_t = None

    def emit(ts, us):
        nonlocal max_ham, last_emitted_t
        if last_emitted_t is not None and not ts > last_emitted_t:
            return
        state = FlowState(ts, us[0], us[1], us[2], us[3])
        obs = observables(config, state)
        if abs(obs.ham_residual) > max_ham:
            max_ham = abs(obs.ham_residual)
        samples.append((state, obs))
        last_emitted_t = ts

    def rk4_step(t0, u0, h):
        ka = f(t0, u0)
        ub = tuple(u0[i] + 0.5 * h * ka[i] for i in range(4))
        kb = f(t0 + 0.5 * h, ub)
        uc = tuple(u0[i] + 0.5 * h * kb[i] for i in range(4))
        kc = f(t0 + 0.5 * h, uc)
        ud = tuple(u0[i] + h * kc[i] for i in range(4))
        kd = f(t0 + h, ud)
        sixth = h / 6.0
        return tuple(
            u0[i] + sixth * (ka[i] + 2.0 * kb[i] + 2.0 * kc[i] + kd[i])
            for i in range(4)
        )

    n_steps = 0
    max_fir = 0.0
    k_emit = max(1, int(round(output_dt / dt)))

    def finish(termination):
        return Trajectory(
            config=config,
            samples=samples,
            termination=termination,
            max_first_integral_residual=max_fir,
            max_ham_residual=max_ham,
            n_accepted=n_steps,
            n_rejected=0,
        )

    for name, g in event_fns:
        if g(u) <= 0.0:
            emit(t, u)
            return finish(Termination(BLOW_UP_EVENT, t_event=t, trigger=name))

    i = 0
    while t < t_max:
        h = dt if t + dt <= t_max else t_max - t
        if h <= 0.0:
            break
        if i % k_emit == 0:
            emit(t, u)
        try:
            k1 = f(t, u)
            fir = abs(k1[2] + k1[3] + u[2] * u[2] + u[3] * u[3] - 2.0)
            if fir > max_fir:
                max_fir = fir
            unew = rk4_step(t, u, h)
        except (BlowUpOverflow, OverflowError):
            emit(t, u)
            return finish(
                Termination(BLOW_UP_EVENT, t_event=t, trigger=TRIGGER_OVERFLOW)
            )

        hit_h = None
        hit_name = None
        for name, g in event_fns:
            if g(unew) <= 0.0 and g(u) > 0.0:
                lo, hi = 0.0, h
                try:
                    while hi - lo > _EVENT_T_TOL:
                        mid = 0.5 * (lo + hi)
                        if g(rk4_step(t, u, mid)) <= 0.0:
                            hi = mid
                        else:
                            lo = mid
                except (BlowUpOverflow, OverflowError):
                    pass
                if hit_h is None or hi < hit_h:
                    hit_h = hi
                    hit_name = name
        if hit_h is not None:
            u_hit = rk4_step(t, u, hit_h)
            t_hit = t + hit_h
            emit(t_hit, u_hit)
            return finish(
                Termination(BLOW_UP_EVENT, t_event=t_hit, trigger=hit_name)
            )

        u = unew
        i += 1
        t = i * dt if i * dt <= t_max else t_max

    try:
        k_end = f(t, u)
        fir = abs(k_end[2] + k_end[3] + u[2] * u[2] + u[3] * u[3] - 2.0)
        if fir > max_fir:
            max_fir = fir
    except (BlowUpOverflow, OverflowError):
        pass
    emit(t, u)
    return finish(Termination(REACHED_HORIZON))
