"""
Link-weight prediction protocol
===============================

At snapshot k the model trains on a window ending at k and predicts the
weights of snapshot k+1's unobserved links: pairs connected at k+1 that
appear in no window snapshot. 20% of those links are held out for
validation, the rest are the test set, and a constant predictor at the
mean window weight anchors the comparison.

Epochs are cut down here so the five trials finish in seconds; see the
acceptance suite for the full-schedule numbers.
"""
from evolink.evaluation import run_evaluation
from evolink.graphs import normalize_weights
from evolink.model import student_defaults, teacher_defaults
from evolink.simulate import SimConfig, simulate_event

event = normalize_weights(simulate_event(SimConfig(seed=3)))

report = run_evaluation(event, k=6,
                        teacher_cfg=teacher_defaults(epochs=60),
                        student_cfg=student_defaults(epochs=180),
                        trials=5, seed=0)

print(f"event {report.event}, k={report.k}, scorer {report.scorer}")
print(f"{report.n_links_scoreable}/{report.n_links_total} unobserved links "
      f"scoreable at the final window snapshot\n")
print(f"{'model':<10}{'rmse':>10}{'mae':>10}")
print(f"{'teacher':<10}{report.teacher_rmse_mean:>10.4f}"
      f"{report.teacher_mae_mean:>10.4f}")
print(f"{'student':<10}{report.student_rmse_mean:>10.4f}"
      f"{report.student_mae_mean:>10.4f}")
print(f"{'baseline':<10}{report.baseline_rmse_mean:>10.4f}{'':>10}")
print(f"\nstudent carries {report.param_count_student} of the teacher's "
      f"{report.param_count_teacher} params ({report.compression})")
for t in report.trials:
    print(f"  trial {t.index}: teacher {t.teacher_rmse:.4f}, "
          f"student {t.student_rmse:.4f} on {t.n_test} test links")
