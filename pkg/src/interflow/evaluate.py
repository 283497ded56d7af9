"""Dataset splitting, classification metrics, and the window/overlap
grid search."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .forest import ForestConfig, train, predict
from .pipeline import packets_to_rows, prepare_packets

log = logging.getLogger(__name__)

BY_CAPTURE = "by_capture"
BY_CHUNK = "by_chunk"


@dataclass
class Metrics:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: np.ndarray  # confusion[i][j]: true label i, predicted j
    support: np.ndarray
    label_table: list


def compute_metrics(y_true, y_pred, label_table) -> Metrics:
    """Confusion matrix plus accuracy and macro-averaged precision /
    recall / F1. Macro averages run over labels present in y_true; an
    empty predicted column yields precision 0, and F1 is 0 when
    precision + recall is 0."""
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} true vs "
                         f"{len(y_pred)} predicted")
    if not y_true:
        raise ValueError("empty label sequences")
    index = {lbl: i for i, lbl in enumerate(label_table)}
    n = len(label_table)
    confusion = np.zeros((n, n), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        confusion[index[t]][index[p]] += 1
    support = confusion.sum(axis=1)
    col_sums = confusion.sum(axis=0)
    diag = np.diag(confusion)
    precision = np.divide(diag, col_sums, out=np.zeros(n), where=col_sums > 0)
    recall = np.divide(diag, support, out=np.zeros(n), where=support > 0)
    pr_sum = precision + recall
    f1 = np.divide(2 * precision * recall, pr_sum, out=np.zeros(n),
                   where=pr_sum > 0)
    present = support > 0
    return Metrics(
        accuracy=float(diag.sum() / confusion.sum()),
        macro_precision=float(precision[present].mean()),
        macro_recall=float(recall[present].mean()),
        macro_f1=float(f1[present].mean()),
        confusion=confusion,
        support=support,
        label_table=list(label_table))


def split_dataset(rows, ratio, seed, mode=BY_CAPTURE):
    """Split feature rows into (train, test).

    BY_CAPTURE assigns whole captures, stratified by label, so chunks of
    one capture (which overlap in time) never straddle the split; a label
    with a single capture goes to train with a warning. BY_CHUNK shuffles
    rows uniformly. Both are deterministic under seed.
    """
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    if mode == BY_CHUNK:
        order = rng.permutation(len(rows))
        cut = round(len(rows) * ratio)
        return ([rows[i] for i in order[:cut]],
                [rows[i] for i in order[cut:]])
    if mode != BY_CAPTURE:
        raise ValueError(f"unknown split mode {mode!r}")
    by_label = {}
    for r in rows:
        by_label.setdefault(r.label, {}).setdefault(r.capture, []).append(r)
    if len({cap for caps in by_label.values() for cap in caps}) < 2:
        raise ValueError("BY_CAPTURE split needs at least 2 captures")
    train_rows, test_rows = [], []
    for label in sorted(by_label, key=str):
        captures = sorted(by_label[label])
        if len(captures) == 1:
            log.warning("label %r has a single capture; keeping it in train",
                        label)
            train_rows.extend(by_label[label][captures[0]])
            continue
        order = rng.permutation(len(captures))
        n_test = min(len(captures) - 1, max(0, round(len(captures) * (1 - ratio))))
        test_caps = {captures[i] for i in order[:n_test]}
        for cap in captures:
            (test_rows if cap in test_caps else train_rows).extend(
                by_label[label][cap])
    return train_rows, test_rows


def forest_config(cfg: RunConfig, seed) -> ForestConfig:
    return ForestConfig(n_trees=cfg.n_trees, max_depth=cfg.max_depth,
                        min_samples_split=cfg.min_samples_split,
                        features_per_split=cfg.features_per_split, seed=seed)


def train_and_evaluate(rows, cfg: RunConfig, seed=None):
    """Split, train, and score held-out rows.

    Returns (model, metrics, n_train, n_test).
    """
    seed = cfg.seed if seed is None else seed
    train_rows, test_rows = split_dataset(rows, cfg.ratio, seed, cfg.split_mode)
    if not test_rows:
        raise ValueError("empty test split; add captures or adjust ratio")
    model = train([r.row for r in train_rows], [r.label for r in train_rows],
                  forest_config(cfg, seed),
                  meta={"n_bins": cfg.n_bins, "delta": cfg.delta})
    y_pred = predict(model, [r.row for r in test_rows])
    y_true = [r.label for r in test_rows]
    metrics = compute_metrics(y_true, y_pred, model.label_table)
    return model, metrics, len(train_rows), len(test_rows)


@dataclass
class GridCell:
    window: float
    overlap: float
    metrics: Metrics | None
    n_chunks: int = 0
    n_train: int = 0
    n_test: int = 0
    error: str | None = None


@dataclass
class GridResult:
    cells: list
    skipped: list  # invalid (window, overlap) pairs
    best: GridCell | None


def _derive_seed(seed, index) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(
        1, np.uint64)[0])


def grid_search(entries, windows, overlaps, cfg: RunConfig) -> GridResult:
    """Run extract -> split -> train -> evaluate for every valid
    (window, overlap) pair over the manifest entries.

    Pairs with overlap >= window are skipped with a notice. The best cell
    maximizes accuracy; ties go to the smaller window, then the smaller
    overlap. Each cell uses a seed derived from (cfg.seed, cell index) so
    cells are self-contained.
    """
    prepared = []
    for path, label in entries:
        packets = prepare_packets(path, cfg)
        if packets:
            prepared.append((str(path), label, packets))
        else:
            log.warning("%s: no packets after filtering; capture skipped", path)
    cells = []
    skipped = []
    index = 0
    for window in windows:
        for overlap in overlaps:
            cell_index = index
            index += 1
            if not 0 <= overlap < window:
                log.info("skipping invalid pair window=%s overlap=%s",
                         window, overlap)
                skipped.append((window, overlap))
                continue
            rows = []
            for cap_id, label, packets in prepared:
                rows.extend(packets_to_rows(packets, cap_id, label, cfg,
                                            window=window, overlap=overlap))
            cell = GridCell(window=window, overlap=overlap, metrics=None,
                            n_chunks=len(rows))
            try:
                _, metrics, n_train, n_test = train_and_evaluate(
                    rows, cfg, seed=_derive_seed(cfg.seed, cell_index))
                cell.metrics = metrics
                cell.n_train, cell.n_test = n_train, n_test
            except ValueError as exc:
                cell.error = str(exc)
            cells.append(cell)
    if not cells:
        raise ValueError("no valid (window, overlap) pair in the grid")
    best = None
    for cell in sorted(cells, key=lambda c: (c.window, c.overlap)):
        if cell.metrics is None:
            continue
        if best is None or cell.metrics.accuracy > best.metrics.accuracy:
            best = cell
    return GridResult(cells=cells, skipped=skipped, best=best)


def format_report(cfg: RunConfig, metrics: Metrics, extra=None, version="") -> str:
    """Human-readable evaluation report with full config echo."""
    lines = [f"interflow evaluation report (version {version})",
             f"config: {cfg.to_json()}"]
    for key, val in (extra or {}).items():
        lines.append(f"{key}: {val}")
    lines.append(f"accuracy: {metrics.accuracy:.6f}")
    lines.append(f"macro_precision: {metrics.macro_precision:.6f}")
    lines.append(f"macro_recall: {metrics.macro_recall:.6f}")
    lines.append(f"macro_f1: {metrics.macro_f1:.6f}")
    lines.append("confusion (rows true, cols predicted):")
    lines.append("label," + ",".join(str(l) for l in metrics.label_table))
    for i, label in enumerate(metrics.label_table):
        lines.append(f"{label}," + ",".join(str(c) for c in metrics.confusion[i]))
    return "\n".join(lines) + "\n"


def write_grid_csv(path, result: GridResult, cfg: RunConfig, version=""):
    """One CSV row per evaluated grid cell."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# interflow {version} config={cfg.to_json()}\n")
        fh.write("window,overlap,n_chunks,n_train,n_test,accuracy,"
                 "macro_precision,macro_recall,macro_f1,error\n")
        for cell in result.cells:
            if cell.metrics is None:
                fh.write(f"{cell.window:.9g},{cell.overlap:.9g},"
                         f"{cell.n_chunks},,,,,,,{cell.error}\n")
            else:
                m = cell.metrics
                fh.write(f"{cell.window:.9g},{cell.overlap:.9g},"
                         f"{cell.n_chunks},{cell.n_train},{cell.n_test},"
                         f"{m.accuracy:.9g},{m.macro_precision:.9g},"
                         f"{m.macro_recall:.9g},{m.macro_f1:.9g},\n")
