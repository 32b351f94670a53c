"""
A coverage session, as the service drives it
============================================

Walks one session through its state machine: plan a field, run, pause
mid-mission, replan a larger field without losing progress, and finish.
This uses the session core directly; `agrosim serve` exposes the same
lifecycle over HTTP and streams the same updates over a WebSocket.
"""

from agrosim.scenario import scenario_from_dict
from agrosim.service import SessionCore, SessionState

core = SessionCore("demo", scenario_from_dict({}), time_scale=0.0)
print(f"state: {core.state.value}")

# Submitting a polygon plans the route and budgets a duration for it.
plan = core.submit_polygon([[0, 0], [12, 0], [12, 6], [0, 6]], width=2.0)
print(f"state: {core.state.value}, {len(plan.swaths)} swaths, "
      f"route {plan.route_length:.0f} m")

core.start()
print(f"state: {core.state.value}")

# Each step block advances 0.1 simulated seconds; at time_scale 1 the
# service paces these against the wall clock, at 0 it free-runs.
while core.state is SessionState.RUNNING:
    update = core.step_block()
    if round(update["t"] * 10) % 100 == 0:  # print once per 10 sim-seconds
        print(f"  t={update['t']:6.1f}s pose=({update['pose'][0]:5.1f},"
              f"{update['pose'][1]:5.1f}) coverage={update['coverage']:.2f}")
    if update["coverage"] >= 0.45 and core.state is SessionState.RUNNING:
        break

core.pause()
paused = core.update_dict()
print(f"state: {core.state.value} at t={paused['t']:.1f}s, "
      f"coverage {paused['coverage']:.2f}")

# Replanning from Paused keeps the vehicle where it is and carries the
# already-swept ground into the new field's statistics.
plan = core.submit_polygon([[0, 0], [12, 0], [12, 10], [0, 10]], width=2.0)
after = core.update_dict()
print(f"replanned to a larger field: state {core.state.value}, "
      f"{len(plan.swaths)} swaths, pose kept at "
      f"({after['pose'][0]:.1f},{after['pose'][1]:.1f}), "
      f"coverage already {after['coverage']:.2f}")

core.start()
final = core.run_to_completion()
print(f"state: {core.state.value} at t={final['t']:.1f}s, "
      f"coverage {final['coverage']:.2f}, "
      f"route progress {final['route_progress']:.1f} m")
print("done.")
