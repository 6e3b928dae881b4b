"""
Where should the distillation blend sit?
========================================

Sweep gamma over 0.1..0.9. Each trial trains one teacher and reuses its
soft targets, student seed and test split across every gamma, so the
column below isolates the blend weight. Interior minima mean both terms
pull their weight: pure imitation and pure self-supervision both lose.

Full training schedule, two trials: about half a minute.
"""
from evolink.evaluation import sweep_gamma
from evolink.graphs import normalize_weights
from evolink.model import student_defaults, teacher_defaults
from evolink.simulate import SimConfig, simulate_event

event = normalize_weights(simulate_event(SimConfig(seed=3)))

rows = sweep_gamma(event, k=6, teacher_cfg=teacher_defaults(),
                   student_cfg=student_defaults(), trials=2, seed=0)

best = min(rows, key=lambda r: r.student_rmse_mean)
print(f"teacher rmse {rows[0].teacher_rmse_mean:.4f}\n")
print(f"{'gamma':>6}{'student rmse':>14}{'std':>9}")
for row in rows:
    marker = "  <-- best" if row.gamma == best.gamma else ""
    print(f"{row.gamma:>6.1f}{row.student_rmse_mean:>14.4f}"
          f"{row.student_rmse_std:>9.4f}{marker}")
