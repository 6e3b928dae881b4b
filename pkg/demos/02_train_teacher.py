"""
Training a window model on one event
====================================

A window model chains one small graph convolution per snapshot; attention
transitions carry the first-layer weights from each snapshot to the next,
so the oldest snapshot's table is the only free first layer. Training
reconstructs the final snapshot's weighted adjacency from sigmoid pair
scores.
"""
from pathlib import Path

from evolink.checkpoint import read_checkpoint, write_checkpoint
from evolink.gcn import count_params
from evolink.graphs import build_window, normalize_weights
from evolink.model import teacher_defaults
from evolink.simulate import SimConfig, simulate_event
from evolink.training import train_teacher

event = normalize_weights(simulate_event(SimConfig(offices=3, viewers=40,
                                                   snapshots=6, seed=7)))

# Predict at snapshot 4 from a window of 3 snapshots (span 2 plus the
# current one). Heads/width below are the full-size teacher recipe with a
# shortened schedule so the demo stays quick.
cfg = teacher_defaults(window=2, epochs=80, seed=0)
window = build_window(event, k=4, length=cfg.window)
print(f"window snapshots {[g.index for g in window]}, "
      f"{count_params(cfg, event.n_global)} trainable scalars")

model, trace, embeddings = train_teacher(window, cfg, event.n_global,
                                         event.registry)
print(f"loss {trace.losses[0]:.4f} -> {trace.losses[-1]:.4f} "
      f"over {len(trace.losses)} epochs")
print(f"final embeddings: {embeddings.z.shape} for snapshot "
      f"{window[-1].index}")

# Checkpoints are a small self-describing binary; the round trip is
# bit-exact, digests included.
path = write_checkpoint(model, Path("demo_teacher.ckpt"))
again = read_checkpoint(path)
assert again.param_digest() == model.param_digest()
print(f"checkpoint {path} ({path.stat().st_size} bytes), "
      f"digest {model.param_digest()}")
