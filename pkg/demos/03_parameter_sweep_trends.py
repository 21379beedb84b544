"""Map grid parameters to attack success across thousands of combinations.

Draws random (H, R, T, ToI, AD) combinations, synthesizes the minimal attack
for each, and prints how the success rate moves with every parameter.  Lower
inertia and wider attacker access should read as more successful attacks.
"""

import time

from frosim import (
    AttackerCapability,
    AttackGoal,
    GeneratorRelay,
    GridConfig,
    GridParams,
    LoadRelay,
    SweepMode,
    SweepSpec,
    run_sweep,
    trend_report,
    validate_config,
)

base = validate_config(GridConfig(
    params=GridParams(h_inertia=2.0, droop_r=0.2, governor_t=0.2),
    generators=[
        GeneratorRelay("g4", "bus4", 1.0, 0.5),
        GeneratorRelay("g5", "bus5", 1.0, 0.6),
        GeneratorRelay("g1", "bus1", 1.0, 1.2),
    ],
    loads=[LoadRelay(f"l{i}", f"bus{i}", 0.5, 59.5) for i in range(1, 5)],
    # kappa = 2 puts the mid-grid capability near the mid-grid minimal
    # injection, so the sweep straddles the feasibility boundary
    capability=AttackerCapability(toi=0.02, ad=0.2, der_total=1.5, kappa=2.0),
))

spec = SweepSpec(
    base=base,
    goal=AttackGoal(horizon=12),
    mode=SweepMode.RANDOM,
    count=2000,
    seed=1,
)

print(f"running {spec.count} random combinations (seed={spec.seed}) ...")
t0 = time.time()
records = run_sweep(spec)
print(f"done in {time.time() - t0:.1f}s; "
      f"{sum(1 for r in records if r.success)} successes")

report = trend_report(records)
print()
for name, trend in report.parameters.items():
    values = " ".join(f"{b.value:g}" for b in trend.buckets)
    rates = " ".join(f"{b.success_rate:5.3f}" for b in trend.buckets)
    bars = " ".join("#" * round(10 * b.success_rate) or "." for b in trend.buckets)
    print(f"{name:>8}  values: {values}")
    print(f"{'':>8}  rates:  {rates}   verdict: {trend.verdict} "
          f"(expected {trend.expected})")
    print(f"{'':>8}  trend:  {bars}")
    print()

print("note: R and T barely move the feasibility boundary at this short")
print("observation window, so their verdicts ride on sampling noise at a")
print("few thousand draws; the acceptance suite uses 20,000 combinations,")
print("which keeps the flat trends inside the slack band.")
print()
print("attack kind by inertia bucket:")
for s in report.h_type_split:
    print(f"  H={s.h:>4g} s: {s.rocof:>4} trips, {s.ls:>3} sheds, "
          f"{s.none:>4} infeasible")
