"""Discrete-time frequency dynamics with governor, shedding, and ROCOF relays.

The engine advances two coupled recursions.  The governor integrates a
first-order lag toward its droop target::

    gov[n+1] = gov[n] + (dt/T) * (-df[n]/R - gov[n])

and the frequency deviation (per-unit of nominal) responds to the net power
imbalance seen by the equivalent machine::

    df[n+1] = (dt/4H) * ( gov[n]*(2 - dt/T) - 2*dp_a
                          - df[n]*(dt/(R*T) - 4H/dt)
                          - trip[n+1] -/+ shed[n+1] )

``dp_a`` is the injected setpoint change: it switches on at the attack step
and persists (operator setpoints do not revert on their own).  ``trip`` and
``shed`` are the cumulative relay totals.  By default shed load enters with
the frequency-raising sign and tripped generation with the frequency-lowering
sign, which is the physically correct convention; ``SimOptions.literal_signs``
applies both with the lowering sign instead, for comparison against the
as-published update form.

Per step ``n`` the evaluation order is fixed:

1. reconstruct ``f[n]`` in Hz from ``df[n]``;
2. evaluate load-shedding relays against ``f[n]``;
3. evaluate ROCOF relays against the windowed slope of the last M cycles
   (available once n >= M);
4. advance the governor and frequency recursions using the just-updated
   relay totals;
5. push ``df[n+1]`` into the history window.

Identical inputs produce bit-identical traces.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .config import GeneratorRelay, GridConfig, GridParams, LoadRelay
from .errors import HorizonTooShort

#: Fraction of the original inertia kept as a floor when inertia rescaling is
#: enabled and every generator has tripped.
_H_RESCALE_FLOOR = 0.01


class EventKind(enum.Enum):
    """What a relay did: tripped a generator or shed a load block."""

    ROCOF_TRIP = "rocof"
    LS_SHED = "ls"

    @property
    def json_name(self) -> str:
        return self.value


class RelayEvent(NamedTuple):
    step: int
    relay_id: str
    kind: EventKind


@dataclass(frozen=True)
class AttackSignal:
    """A single persistent setpoint change of ``dp_a`` per-unit at ``attack_step``."""

    dp_a: float
    attack_step: int = 0

    def __post_init__(self):
        if self.attack_step < 0:
            raise ValueError(f"attack_step must be >= 0, got {self.attack_step}")


#: The do-nothing injection.
NO_ATTACK = AttackSignal(0.0, 0)


@dataclass(frozen=True)
class SimOptions:
    """Behavioral switches for the relay/inertia modeling.

    literal_accumulation -- relays re-add their block every step their trigger
        condition holds, instead of operating once and latching.
    literal_signs -- apply the shed total with the frequency-lowering sign
        (the as-published update) instead of the physical raising sign.
    rescale_inertia -- scale H by the surviving-generation share after trips
        instead of holding it constant.
    """

    literal_accumulation: bool = False
    literal_signs: bool = False
    rescale_inertia: bool = False


DEFAULT_OPTIONS = SimOptions()


@dataclass(frozen=True)
class SystemState:
    """Dynamic state at the start of step ``n``.

    ``freq_history`` holds the last (at most M+1) per-unit frequency
    deviations including the current one.  ``dp_sh_cum`` / ``dp_tg_cum`` are
    the cumulative shed-load and tripped-generation totals; with latching
    enabled they equal the sum of blocks over latched relays.
    """

    n: int
    delta_f: float
    dp_gov: float
    dp_sh_cum: float
    dp_tg_cum: float
    freq_history: tuple[float, ...]
    gen_latches: tuple[bool, ...]
    load_latches: tuple[bool, ...]


def initial_state(config: GridConfig) -> SystemState:
    """Balanced pre-attack grid: zero deviation, idle governor, no latches."""
    return SystemState(
        n=0,
        delta_f=0.0,
        dp_gov=0.0,
        dp_sh_cum=0.0,
        dp_tg_cum=0.0,
        freq_history=(0.0,),
        gen_latches=(False,) * len(config.generators),
        load_latches=(False,) * len(config.loads),
    )


def governor_step(state: SystemState, params: GridParams) -> float:
    """Next governor output: first-order lag toward the droop target."""
    return state.dp_gov + (params.dt / params.governor_t) * (
        -state.delta_f / params.droop_r - state.dp_gov
    )


def frequency_step(
    state: SystemState,
    params: GridParams,
    dp_a_effective: float,
    dp_tg_next: float,
    dp_sh_next: float,
    *,
    literal_signs: bool = False,
    h_effective: Optional[float] = None,
) -> float:
    """Next per-unit frequency deviation.

    ``dp_a_effective`` must already be gated on the attack step (the injection
    magnitude if active at step n, else 0).  ``dp_tg_next`` and ``dp_sh_next``
    are the relay totals after this step's relay evaluation.
    """
    h = params.h_inertia if h_effective is None else h_effective
    dt = params.dt
    shed_term = -dp_sh_next if literal_signs else dp_sh_next
    return (dt / (4.0 * h)) * (
        state.dp_gov * (2.0 - dt / params.governor_t)
        - 2.0 * dp_a_effective
        - state.delta_f * (dt / (params.droop_r * params.governor_t) - 4.0 * h / dt)
        - dp_tg_next
        + shed_term
    )


def rocof(window: Sequence[float], params: GridParams) -> Optional[float]:
    """Windowed frequency slope in Hz/s, or None while history is short.

    *window* is a sequence of per-unit frequency deviations ending at the
    current step.  The M-cycle mean of per-step increments telescopes to
    ``(df[n] - df[n-M]) * f_nominal / (M * dt)``; at least M+1 samples are
    required.
    """
    m = params.rocof_window_m
    if len(window) < m + 1:
        return None
    return (window[-1] - window[-1 - m]) * params.f_nominal / (m * params.dt)


class RelayEvalResult(NamedTuple):
    increment: float
    latches: tuple[bool, ...]
    fired: tuple[int, ...]  # roster indices newly operating this step


def eval_ls_relays(
    f_hz: float,
    latches: tuple[bool, ...],
    loads: Sequence[LoadRelay],
    *,
    literal_accumulation: bool = False,
) -> RelayEvalResult:
    """Operate under-frequency relays against the reconstructed frequency.

    Every relay whose threshold is reached sheds its block once and latches;
    with ``literal_accumulation`` the block is re-added every qualifying step
    (the latch then only marks first operation).
    """
    increment = 0.0
    fired = []
    new_latches = list(latches)
    for i, relay in enumerate(loads):
        if f_hz <= relay.underfreq_threshold:
            if not latches[i]:
                fired.append(i)
                new_latches[i] = True
                increment += relay.p_sh
            elif literal_accumulation:
                increment += relay.p_sh
    return RelayEvalResult(increment, tuple(new_latches), tuple(fired))


def eval_rocof_relays(
    rocof_hz_per_s: Optional[float],
    latches: tuple[bool, ...],
    generators: Sequence[GeneratorRelay],
    *,
    literal_accumulation: bool = False,
) -> RelayEvalResult:
    """Operate ROCOF relays against the windowed slope.

    The comparison is on the slope magnitude: the published trigger is
    one-sided but the studied excursions are falling, so only the magnitude
    reading is consistent with the reported trip behavior.  A ``None`` slope
    (short history) operates nothing.
    """
    if rocof_hz_per_s is None:
        return RelayEvalResult(0.0, latches, ())
    magnitude = abs(rocof_hz_per_s)
    increment = 0.0
    fired = []
    new_latches = list(latches)
    for i, relay in enumerate(generators):
        if magnitude >= relay.rocof_threshold:
            if not latches[i]:
                fired.append(i)
                new_latches[i] = True
                increment += relay.p_tg
            elif literal_accumulation:
                increment += relay.p_tg
    return RelayEvalResult(increment, tuple(new_latches), tuple(fired))


class StepRecord(NamedTuple):
    """Observation of step n: the trace row, with post-event relay totals."""

    n: int
    t_s: float
    delta_f: float
    f_hz: float
    rocof_hz_per_s: Optional[float]
    dp_gov: float
    dp_sh_cum: float
    dp_tg_cum: float
    events: tuple[RelayEvent, ...]


def simulate_step(
    state: SystemState,
    config: GridConfig,
    attack: AttackSignal,
    options: SimOptions = DEFAULT_OPTIONS,
) -> tuple[SystemState, StepRecord]:
    """Advance one step; return the successor state and this step's record."""
    params = config.params
    f_hz = params.f_nominal * (1.0 + state.delta_f)

    ls = eval_ls_relays(
        f_hz, state.load_latches, config.loads,
        literal_accumulation=options.literal_accumulation,
    )
    dp_sh_next = state.dp_sh_cum + ls.increment

    slope = rocof(state.freq_history, params)
    rc = eval_rocof_relays(
        slope, state.gen_latches, config.generators,
        literal_accumulation=options.literal_accumulation,
    )
    dp_tg_next = state.dp_tg_cum + rc.increment

    events = tuple(
        [RelayEvent(state.n, config.loads[i].id, EventKind.LS_SHED) for i in ls.fired]
        + [RelayEvent(state.n, config.generators[i].id, EventKind.ROCOF_TRIP) for i in rc.fired]
    )

    h_effective = None
    if options.rescale_inertia:
        total = sum(g.p_tg for g in config.generators)
        share = (total - dp_tg_next) / total if total > 0 else 1.0
        h_effective = params.h_inertia * max(share, _H_RESCALE_FLOOR)

    dp_a_effective = attack.dp_a if state.n >= attack.attack_step else 0.0
    gov_next = governor_step(state, params)
    df_next = frequency_step(
        state, params, dp_a_effective, dp_tg_next, dp_sh_next,
        literal_signs=options.literal_signs, h_effective=h_effective,
    )

    history = state.freq_history + (df_next,)
    if len(history) > params.rocof_window_m + 1:
        history = history[-(params.rocof_window_m + 1):]

    record = StepRecord(
        n=state.n,
        t_s=state.n * params.dt,
        delta_f=state.delta_f,
        f_hz=f_hz,
        rocof_hz_per_s=slope,
        dp_gov=state.dp_gov,
        dp_sh_cum=dp_sh_next,
        dp_tg_cum=dp_tg_next,
        events=events,
    )
    next_state = SystemState(
        n=state.n + 1,
        delta_f=df_next,
        dp_gov=gov_next,
        dp_sh_cum=dp_sh_next,
        dp_tg_cum=dp_tg_next,
        freq_history=history,
        gen_latches=rc.latches,
        load_latches=ls.latches,
    )
    return next_state, record


TRACE_CSV_HEADER = "n,t_s,f_hz,rocof_hz_per_s,dp_gov_pu,dp_sh_cum_pu,dp_tg_cum_pu,events"


@dataclass(frozen=True)
class SimTrace:
    """Time series of one run plus the ordered relay-event log.

    Rows cover steps 0..horizon inclusive; ``rocof_hz_per_s`` is NaN while
    fewer than M+1 frequency samples exist.  Relay totals in a row include
    operations at that row's step.  ``delta_f`` carries the per-unit
    deviation exactly as stepped; ``f_hz`` is its Hz reconstruction.
    """

    n: np.ndarray
    t_s: np.ndarray
    delta_f: np.ndarray
    f_hz: np.ndarray
    rocof_hz_per_s: np.ndarray
    dp_gov: np.ndarray
    dp_sh_cum: np.ndarray
    dp_tg_cum: np.ndarray
    events: tuple[RelayEvent, ...]

    def __len__(self) -> int:
        return len(self.n)

    @property
    def first_event(self) -> Optional[RelayEvent]:
        return self.events[0] if self.events else None

    def first_event_step(self) -> Optional[int]:
        return self.events[0].step if self.events else None


def simulate(
    config: GridConfig,
    attack: AttackSignal,
    horizon: int,
    options: SimOptions = DEFAULT_OPTIONS,
) -> SimTrace:
    """Run from the balanced equilibrium for *horizon* steps.

    Returns a trace with horizon+1 rows (steps 0..horizon); relays are also
    evaluated on the terminal step so a trip exactly at the horizon is
    recorded.  Raises :class:`HorizonTooShort` when the horizon does not
    cover one full ROCOF window.
    """
    m = config.params.rocof_window_m
    if horizon < m:
        raise HorizonTooShort(
            f"horizon {horizon} is shorter than one ROCOF window (M={m})"
        )
    state = initial_state(config)
    records = []
    for _ in range(horizon + 1):
        state, record = simulate_step(state, config, attack, options)
        records.append(record)

    events = []
    for rec in records:
        events.extend(rec.events)
    return SimTrace(
        n=np.array([r.n for r in records], dtype=np.int64),
        t_s=np.array([r.t_s for r in records], dtype=float),
        delta_f=np.array([r.delta_f for r in records], dtype=float),
        f_hz=np.array([r.f_hz for r in records], dtype=float),
        rocof_hz_per_s=np.array(
            [math.nan if r.rocof_hz_per_s is None else r.rocof_hz_per_s for r in records],
            dtype=float,
        ),
        dp_gov=np.array([r.dp_gov for r in records], dtype=float),
        dp_sh_cum=np.array([r.dp_sh_cum for r in records], dtype=float),
        dp_tg_cum=np.array([r.dp_tg_cum for r in records], dtype=float),
        events=tuple(events),
    )


def _fmt(x: float) -> str:
    return format(x, ".12g")


def write_trace_csv(trace: SimTrace, path) -> None:
    """Write the trace in the stable CSV layout.

    The ROCOF column is empty while the measurement window is not yet full;
    the events column semicolon-joins ``KIND:relay_id`` entries for events at
    that step.
    """
    by_step: dict[int, list[RelayEvent]] = {}
    for ev in trace.events:
        by_step.setdefault(ev.step, []).append(ev)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(TRACE_CSV_HEADER + "\n")
        for i in range(len(trace)):
            step = int(trace.n[i])
            rocof_val = trace.rocof_hz_per_s[i]
            evs = ";".join(
                f"{ev.kind.name}:{ev.relay_id}" for ev in by_step.get(step, ())
            )
            fh.write(",".join([
                str(step),
                _fmt(trace.t_s[i]),
                _fmt(trace.f_hz[i]),
                "" if math.isnan(rocof_val) else _fmt(rocof_val),
                _fmt(trace.dp_gov[i]),
                _fmt(trace.dp_sh_cum[i]),
                _fmt(trace.dp_tg_cum[i]),
                evs,
            ]) + "\n")
