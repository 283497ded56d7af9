"""Capture-to-feature-row pipeline shared by the CLI and the grid search."""

from __future__ import annotations

import logging

from .chunking import make_chunks
from .config import RunConfig
from .features import assemble_features
from .ingest import IngestConfig, filter_background, infer_direction, parse_capture

log = logging.getLogger(__name__)


def ingest_config(cfg: RunConfig) -> IngestConfig:
    return IngestConfig(filtered_ports=frozenset(cfg.filtered_ports),
                        local_endpoint=cfg.local_endpoint)


def prepare_packets(path, cfg: RunConfig):
    """Parse, background-filter, and direction-label one capture.

    Returns the ready packet list, possibly empty when nothing survives.
    """
    icfg = ingest_config(cfg)
    packets = filter_background(parse_capture(path), icfg)
    if not packets:
        return []
    return infer_direction(packets, icfg)


def packets_to_rows(packets, capture_id, label, cfg: RunConfig,
                    window=None, overlap=None):
    """Chunk prepared packets and compute one feature row per chunk."""
    chunks = make_chunks(packets,
                         window if window is not None else cfg.window,
                         overlap if overlap is not None else cfg.overlap,
                         source_capture=capture_id, label=label,
                         min_packets=cfg.min_packets)
    rows = []
    for chunk in chunks:
        rows.append(assemble_features(chunk, cfg.delta, cfg.n_bins))
    return rows


def extract_manifest(entries, cfg: RunConfig):
    """Run the full pipeline over `(path, label)` manifest entries.

    Returns (rows, errors) where errors is a list of (path, message) for
    captures that failed or yielded nothing; successful captures keep
    deterministic (manifest, chunk-start) order.
    """
    rows = []
    errors = []
    for path, label in entries:
        try:
            packets = prepare_packets(path, cfg)
        except (OSError, ValueError) as exc:
            errors.append((path, str(exc)))
            continue
        if not packets:
            errors.append((path, "no packets after filtering"))
            continue
        rows.extend(packets_to_rows(packets, str(path), label, cfg))
    return rows, errors
