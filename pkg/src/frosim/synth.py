"""Attack synthesis: find setpoint injections that falsely operate a relay.

Feasibility of a candidate injection is decided by replaying it through the
deterministic simulator and checking the event log against the goal.  The
default synthesis backend searches over the single free variable, the
injection magnitude: a coarse probe establishes whether the feasible set is
an up-set in magnitude, and if so bisection pins the minimal feasible
magnitude; otherwise the caller is told to fall back to the exhaustive
scanning backend, which needs no structural assumption.

A thin constraint-problem wrapper (:class:`CspProblem`, :func:`solve`)
exposes the same search behind a backend-agnostic contract so an external
constraint solver can be plugged in; every answer a backend returns is
replayed through :func:`feasibility` before it is accepted.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Protocol

from .config import GridConfig, capability_bound
from .dynamics import (
    AttackSignal,
    EventKind,
    RelayEvent,
    SimOptions,
    DEFAULT_OPTIONS,
    SimTrace,
    initial_state,
    simulate,
    simulate_step,
)
from .errors import (
    CapabilityExceeded,
    CertificateMismatch,
    NonMonotoneFeasibility,
)


class TargetKind(enum.Enum):
    ANY = "any"
    ROCOF_ONLY = "rocof"
    LS_ONLY = "ls"
    SPECIFIC = "specific"


class Sign(enum.Enum):
    """Direction of the perceived generation change."""

    POSITIVE = "positive"
    NEGATIVE = "negative"
    EITHER = "either"


@dataclass(frozen=True)
class AttackGoal:
    """What counts as a successful attack and within how many steps."""

    horizon: int
    target_kind: TargetKind = TargetKind.ANY
    sign: Sign = Sign.POSITIVE
    specific_relay_id: Optional[str] = None
    attack_step: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.target_kind is TargetKind.SPECIFIC and not self.specific_relay_id:
            raise ValueError("SPECIFIC goal requires specific_relay_id")
        if self.attack_step < 0:
            raise ValueError(f"attack_step must be >= 0, got {self.attack_step}")

    def directions(self) -> tuple[int, ...]:
        if self.sign is Sign.POSITIVE:
            return (1,)
        if self.sign is Sign.NEGATIVE:
            return (-1,)
        return (1, -1)

    def matches(self, event: RelayEvent) -> bool:
        if self.target_kind is TargetKind.ANY:
            return True
        if self.target_kind is TargetKind.ROCOF_ONLY:
            return event.kind is EventKind.ROCOF_TRIP
        if self.target_kind is TargetKind.LS_ONLY:
            return event.kind is EventKind.LS_SHED
        return event.relay_id == self.specific_relay_id


class AttackOutcome(NamedTuple):
    relay_id: str
    kind: EventKind
    trip_step: int


@dataclass(frozen=True)
class AttackVector:
    """A synthesized injection together with its certified effect."""

    dp_a: float
    attack_step: int
    outcome: AttackOutcome
    trace: SimTrace


class FeasibilityStatus(enum.Enum):
    SUCCESS = "success"
    NO_ATTACK_EXISTS = "no_attack"


@dataclass(frozen=True)
class FeasibilityOutcome:
    status: FeasibilityStatus
    vector: Optional[AttackVector] = None

    def __post_init__(self):
        if (self.status is FeasibilityStatus.SUCCESS) != (self.vector is not None):
            raise ValueError("vector must be present exactly on SUCCESS")

    @property
    def success(self) -> bool:
        return self.status is FeasibilityStatus.SUCCESS


def _first_matching(trace: SimTrace, goal: AttackGoal) -> Optional[RelayEvent]:
    for ev in trace.events:
        if goal.matches(ev):
            return ev
    return None


def feasibility(
    config: GridConfig,
    dp_a: float,
    goal: AttackGoal,
    options: SimOptions = DEFAULT_OPTIONS,
) -> FeasibilityOutcome:
    """Decide whether injecting *dp_a* meets *goal* within its horizon.

    Raises :class:`CapabilityExceeded` when the magnitude is outside the
    attacker's bound; that is a caller bug, not an unsuccessful attack.
    """
    bound = capability_bound(config.capability)
    if abs(dp_a) > bound:
        raise CapabilityExceeded(
            f"|dp_a|={abs(dp_a)} exceeds capability bound {bound}"
        )
    trace = simulate(config, AttackSignal(dp_a, goal.attack_step), goal.horizon, options)
    event = _first_matching(trace, goal)
    if event is None:
        return FeasibilityOutcome(FeasibilityStatus.NO_ATTACK_EXISTS)
    vector = AttackVector(
        dp_a=dp_a,
        attack_step=goal.attack_step,
        outcome=AttackOutcome(event.relay_id, event.kind, event.step),
        trace=trace,
    )
    return FeasibilityOutcome(FeasibilityStatus.SUCCESS, vector)


def _is_feasible(
    config: GridConfig,
    dp_a: float,
    goal: AttackGoal,
    options: SimOptions = DEFAULT_OPTIONS,
) -> bool:
    # Same stepping kernel as simulate(), stopping at the first matching
    # event; used by the search loops where only the verdict is needed.
    state = initial_state(config)
    attack = AttackSignal(dp_a, goal.attack_step)
    for _ in range(goal.horizon + 1):
        state, record = simulate_step(state, config, attack, options)
        for ev in record.events:
            if goal.matches(ev):
                return True
    return False


@dataclass(frozen=True)
class DirectionProbe:
    """Feasibility samples along one injection direction."""

    direction: int
    magnitudes: tuple[float, ...]
    feasible: tuple[bool, ...]
    monotone: bool
    bracket: Optional[tuple[float, float]]  # (largest infeasible, smallest feasible)


@dataclass(frozen=True)
class MonotonicityReport:
    directions: dict[int, DirectionProbe]

    @property
    def monotone(self) -> bool:
        return all(p.monotone for p in self.directions.values())

    @property
    def any_feasible(self) -> bool:
        return any(p.bracket is not None for p in self.directions.values())


def _probe_direction(
    config: GridConfig,
    goal: AttackGoal,
    direction: int,
    samples: int,
    options: SimOptions,
) -> DirectionProbe:
    bound = capability_bound(config.capability)
    magnitudes = tuple(bound * i / (samples - 1) for i in range(samples))
    feasible = []
    cache: dict[float, bool] = {}
    for mag in magnitudes:
        if mag not in cache:
            cache[mag] = _is_feasible(config, direction * mag, goal, options)
        feasible.append(cache[mag])
    first = next((i for i, ok in enumerate(feasible) if ok), None)
    monotone = first is None or all(feasible[first:])
    bracket = None
    if first is not None:
        lo = magnitudes[first - 1] if first > 0 else 0.0
        bracket = (lo, magnitudes[first])
    return DirectionProbe(direction, magnitudes, tuple(feasible), monotone, bracket)


def probe_monotonicity(
    config: GridConfig,
    goal: AttackGoal,
    samples: int = 17,
    options: SimOptions = DEFAULT_OPTIONS,
) -> MonotonicityReport:
    """Sample feasibility on evenly spaced magnitudes in [0, capability bound].

    Reports, per direction in the goal, whether the observed success set is an
    up-set (everything above the smallest success also succeeds).  Bisection
    is sound only under that structure; relay interactions can in principle
    break it, which is why it is probed per instance rather than assumed.
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    return MonotonicityReport({
        d: _probe_direction(config, goal, d, samples, options)
        for d in goal.directions()
    })


def synthesize_min_attack(
    config: GridConfig,
    goal: AttackGoal,
    tolerance: float = 1e-4,
    probe_samples: int = 17,
    options: SimOptions = DEFAULT_OPTIONS,
) -> FeasibilityOutcome:
    """Find the smallest-magnitude injection meeting *goal*, to *tolerance*.

    Bisects between the largest known-infeasible and smallest known-feasible
    magnitudes, seeded by :func:`probe_monotonicity`; when the goal allows
    either direction both are searched and the smaller magnitude wins, ties
    broken toward the positive direction.  Raises
    :class:`NonMonotoneFeasibility` when the probe shows the success set is
    not an up-set; use :func:`exhaustive_min_attack` then.
    """
    if tolerance <= 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    report = probe_monotonicity(config, goal, probe_samples, options)
    candidates: list[tuple[float, int]] = []
    for direction, probe in sorted(report.directions.items(), reverse=True):
        if not probe.monotone:
            raise NonMonotoneFeasibility(
                f"feasibility is not an up-set along direction {direction:+d}; "
                "bisection declined"
            )
        if probe.bracket is None:
            continue
        lo, hi = probe.bracket
        while hi - lo > tolerance:
            mid = 0.5 * (lo + hi)
            if _is_feasible(config, direction * mid, goal, options):
                hi = mid
            else:
                lo = mid
        candidates.append((hi, direction))
    if not candidates:
        return FeasibilityOutcome(FeasibilityStatus.NO_ATTACK_EXISTS)
    # smallest magnitude wins; equal magnitudes resolve to the positive direction
    candidates.sort(key=lambda c: (c[0], -c[1]))
    magnitude, direction = candidates[0]
    return feasibility(config, direction * magnitude, goal, options)


def exhaustive_min_attack(
    config: GridConfig,
    goal: AttackGoal,
    resolution: float = 1e-4,
    options: SimOptions = DEFAULT_OPTIONS,
) -> FeasibilityOutcome:
    """Scan every magnitude on a *resolution* grid, smallest first.

    Needs no monotonicity assumption; the first feasible grid point per
    direction is its minimum.  The capability bound itself is always tested
    even when it is not a grid multiple.
    """
    if resolution <= 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    bound = capability_bound(config.capability)
    candidates: list[tuple[float, int]] = []
    for direction in goal.directions():
        k = 0
        found = None
        while True:
            mag = k * resolution
            if mag > bound:
                if bound > (k - 1) * resolution and _is_feasible(
                    config, direction * bound, goal, options
                ):
                    found = bound
                break
            if _is_feasible(config, direction * mag, goal, options):
                found = mag
                break
            k += 1
        if found is not None:
            candidates.append((found, direction))
    if not candidates:
        return FeasibilityOutcome(FeasibilityStatus.NO_ATTACK_EXISTS)
    candidates.sort(key=lambda c: (c[0], -c[1]))
    magnitude, direction = candidates[0]
    return feasibility(config, direction * magnitude, goal, options)


# ---------------------------------------------------------------------------
# Constraint-problem wrapper with pluggable backends


@dataclass(frozen=True)
class CspProblem:
    """A bounded-horizon relay-trigger satisfaction problem.

    The free variable is the injection ``dp_a`` constrained to the attacker's
    capability interval; the dynamics recursions tie every later quantity to
    it, and the goal (when present) requires some matching relay trigger
    within the horizon.  ``goal=None`` states no trigger requirement, which
    the zero injection satisfies trivially.
    """

    config: GridConfig
    goal: Optional[AttackGoal]
    tolerance: float = 1e-4

    @property
    def bound(self) -> float:
        return capability_bound(self.config.capability)

    def describe(self) -> dict:
        """Structural summary for backend implementors and logs."""
        return {
            "variable": "dp_a",
            "variable_bounds": [-self.bound, self.bound],
            "horizon": self.goal.horizon if self.goal else 0,
            "trigger": self.goal.target_kind.value if self.goal else None,
            "sign": self.goal.sign.value if self.goal else None,
            "generators": len(self.config.generators),
            "loads": len(self.config.loads),
        }


@dataclass(frozen=True)
class Assignment:
    dp_a: float
    attack_step: int = 0


class SolveStatus(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"


@dataclass(frozen=True)
class SolveResult:
    status: SolveStatus
    assignment: Optional[Assignment] = None
    vector: Optional[AttackVector] = None


class SolverAdapter(Protocol):
    """Backend contract: produce a satisfying assignment or report none.

    Implementations may raise :class:`BackendUnavailable` when their engine
    cannot run.  Whatever they return is replayed through the simulator by
    :func:`solve`; an assignment that fails replay raises
    :class:`CertificateMismatch`.
    """

    name: str

    def solve(self, problem: CspProblem) -> Optional[Assignment]: ...


class SearchAdapter:
    """Default backend: minimal-magnitude search over the simulator.

    Sound because once the attack step is fixed the injection magnitude is
    the only free variable.  Falls back to the exhaustive scan when the
    probe finds a non-monotone feasible set.
    """

    name = "search"

    def __init__(self, probe_samples: int = 17, options: SimOptions = DEFAULT_OPTIONS):
        self.probe_samples = probe_samples
        self.options = options

    def solve(self, problem: CspProblem) -> Optional[Assignment]:
        if problem.goal is None:
            return Assignment(0.0, 0)
        try:
            outcome = synthesize_min_attack(
                problem.config, problem.goal, problem.tolerance,
                self.probe_samples, self.options,
            )
        except NonMonotoneFeasibility:
            outcome = exhaustive_min_attack(
                problem.config, problem.goal, problem.tolerance, self.options,
            )
        if not outcome.success:
            return None
        return Assignment(outcome.vector.dp_a, outcome.vector.attack_step)


def solve(problem: CspProblem, adapter: Optional[SolverAdapter] = None) -> SolveResult:
    """Run a backend on *problem* and certify its answer.

    Returns SAT with the certified assignment, or UNSAT.  Backend answers are
    never trusted: a SAT assignment must replay through :func:`feasibility`
    and reproduce a matching trigger, otherwise :class:`CertificateMismatch`
    is raised (an encoding bug in the backend, not an attack verdict).
    """
    if adapter is None:
        adapter = SearchAdapter()
    if problem.goal is None:
        # No trigger requirement: the zero injection satisfies the dynamics.
        return SolveResult(SolveStatus.SAT, Assignment(0.0, 0))
    assignment = adapter.solve(problem)
    if assignment is None:
        return SolveResult(SolveStatus.UNSAT)
    goal = replace(problem.goal, attack_step=assignment.attack_step)
    try:
        outcome = feasibility(problem.config, assignment.dp_a, goal)
    except CapabilityExceeded as exc:
        raise CertificateMismatch(
            f"backend {adapter.name!r} returned dp_a outside the capability "
            f"bound: {exc}"
        ) from exc
    if not outcome.success:
        raise CertificateMismatch(
            f"backend {adapter.name!r} returned dp_a={assignment.dp_a} but the "
            "replay produces no matching relay operation"
        )
    return SolveResult(SolveStatus.SAT, assignment, outcome.vector)


def synthesis_result_dict(outcome: FeasibilityOutcome, trace_file: Optional[str]) -> dict:
    """JSON-ready summary of a synthesis outcome."""
    if not outcome.success:
        return {"status": FeasibilityStatus.NO_ATTACK_EXISTS.value}
    v = outcome.vector
    return {
        "status": FeasibilityStatus.SUCCESS.value,
        "dp_a_pu": v.dp_a,
        "attack_step": v.attack_step,
        "relay_id": v.outcome.relay_id,
        "relay_kind": v.outcome.kind.json_name,
        "trip_step": v.outcome.trip_step,
        "trace_file": trace_file,
    }
