"""Encrypted-traffic chunk classification from inter-flow signals and
statistical features."""

__version__ = "0.1.0"

from .chunking import Chunk, Flow, group_flows, make_chunks
from .config import RunConfig, load_config
from .evaluate import (GridResult, Metrics, compute_metrics, grid_search,
                       split_dataset, train_and_evaluate)
from .features import (FeatureVector, assemble_features, feature_dim,
                       flow_stats, packet_stats, read_features_csv,
                       write_features_csv)
from .forest import (ForestConfig, TrainedModel, load_model, predict,
                     predict_votes, save_model, train)
from .ingest import (DEFAULT_FILTERED_PORTS, Direction, FlowKey, IngestConfig,
                     PacketRecord, canonical_flow_key, filter_background,
                     infer_direction, parse_capture, read_manifest)
from .signals import (RawSignal, SignalVector, build_raw_signal,
                      build_signal_vector, flow_amplitude,
                      interarrival_summary, normalize_minmax,
                      resample_to_fixed)
from .synth import CANNED_PROFILES, TrafficProfile, generate_capture, load_profile
