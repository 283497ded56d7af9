"""Sweep chunk window and overlap sizes and pick the best configuration.

Short windows react faster but see fewer flows per chunk; long windows
smooth things out but delay classification. The grid search evaluates
each valid (window, overlap) pair end to end and reports the accuracy
maximizer (ties go to the smaller window, then the smaller overlap).
"""

import tempfile
from pathlib import Path

from interflow.config import RunConfig
from interflow.evaluate import grid_search
from interflow.synth import CANNED_PROFILES, generate_capture

out_dir = Path(tempfile.mkdtemp(prefix="interflow-demo-"))

entries = []
seed = 100
for name, profile in CANNED_PROFILES.items():
    for i in range(5):
        path = out_dir / f"{name}_{i}.pcap"
        generate_capture(profile, seed, out_path=path)
        seed += 1
        entries.append((str(path), name))

windows = [30.0, 10.0, 5.0]
overlaps = [10.0, 2.0, 1.0]
cfg = RunConfig(n_trees=20)

result = grid_search(entries, windows, overlaps, cfg)

print(f"{'window':>8s} {'overlap':>8s} {'chunks':>7s} {'accuracy':>9s}")
for cell in result.cells:
    acc = f"{cell.metrics.accuracy:.3f}" if cell.metrics else f"({cell.error})"
    print(f"{cell.window:8g} {cell.overlap:8g} {cell.n_chunks:7d} {acc:>9s}")
for window, overlap in result.skipped:
    print(f"{window:8g} {overlap:8g}    skipped: overlap >= window")

best = result.best
print(f"\nbest: window={best.window:g}s overlap={best.overlap:g}s "
      f"accuracy={best.metrics.accuracy:.3f}")
