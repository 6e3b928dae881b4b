"""
Distilling a compact student
============================

The student copies the teacher's architecture shape but with one attention
head and a fraction of the width. Its loss blends two terms: gamma weighs
fitting the data directly, (1 - gamma) weighs matching the teacher's soft
pair scores. gamma = 1 is plain training; gamma = 0 ignores the data.
"""
from dataclasses import replace

from evolink.gcn import count_params
from evolink.graphs import build_window, normalize_weights
from evolink.model import student_defaults, teacher_defaults
from evolink.simulate import SimConfig, simulate_event
from evolink.training import DistillationBundle, distill_student, train_teacher

event = normalize_weights(simulate_event(SimConfig(offices=3, viewers=40,
                                                   snapshots=6, seed=7)))
window = build_window(event, k=4, length=2)

t_cfg = teacher_defaults(window=2, epochs=80, seed=0)
teacher, t_trace, t_emb = train_teacher(window, t_cfg, event.n_global,
                                        event.registry)
t_params = count_params(t_cfg, event.n_global)
print(f"teacher: {t_params} params, final loss {t_trace.losses[-1]:.4f}")

# One bundle per gamma; the teacher and its soft targets are shared.
s_cfg = student_defaults(window=2, epochs=240, seed=1)
s_params = count_params(s_cfg, event.n_global)
print(f"student: {s_params} params ({t_params / s_params:.1f}x smaller)\n")

for gamma in (0.0, 0.5, 1.0):
    bundle = DistillationBundle(teacher=teacher, teacher_embeddings=t_emb,
                                student_config=replace(s_cfg, gamma=gamma))
    student, trace = distill_student(bundle, window, event.n_global,
                                     event.registry)
    print(f"gamma {gamma:.1f}: blended loss {trace.losses[0]:.4f} -> "
          f"{trace.losses[-1]:.4f}")
