import pytest

from interflow.chunking import group_flows
from interflow.ingest import parse_capture
from interflow.synth import (CANNED_PROFILES, TrafficProfile, generate_capture,
                             load_profile, profile_to_toml)

from conftest import mk_chunk


def profile(mode, flows=(3, 3), **overrides):
    kwargs = dict(label="t", flow_count_range=flows,
                  packets_per_flow_range=(10, 20), size_mean=500,
                  size_std=100, size_min=60, size_max=1514,
                  gap_mean=0.05, gap_std=0.02, mode=mode, duration=30.0)
    kwargs.update(overrides)
    return TrafficProfile(**kwargs)


def flow_spans(records):
    flows = group_flows(mk_chunk(records))
    return [(f.packets[0].timestamp, f.packets[-1].timestamp) for f in flows]


class TestGenerateCapture:
    def test_single_mode_one_flow(self):
        records = generate_capture(profile("single", flows=(5, 8)), 1)
        assert len(group_flows(mk_chunk(records))) == 1

    def test_sequential_mode_disjoint_spans(self):
        records = generate_capture(profile("sequential"), 2)
        spans = sorted(flow_spans(records))
        assert len(spans) == 3
        for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
            assert a1 < b0

    def test_concurrent_mode_overlapping_spans(self):
        records = generate_capture(profile("concurrent", flows=(4, 4)), 3)
        spans = flow_spans(records)
        assert len(spans) == 4
        overlapping = [(a, b) for i, a in enumerate(spans)
                       for b in spans[i + 1:]
                       if a[0] <= b[1] and b[0] <= a[1]]
        assert overlapping

    def test_deterministic_under_seed(self, tmp_path):
        p1, p2 = tmp_path / "a.pcap", tmp_path / "b.pcap"
        r1 = generate_capture(profile("concurrent"), 7, out_path=p1)
        r2 = generate_capture(profile("concurrent"), 7, out_path=p2)
        assert r1 == r2
        assert p1.read_bytes() == p2.read_bytes()

    def test_distinct_seeds_distinct_captures(self):
        r1 = generate_capture(profile("concurrent"), 1)
        r2 = generate_capture(profile("concurrent"), 2)
        assert r1 != r2

    def test_write_then_parse_round_trip(self, tmp_path):
        path = tmp_path / "t.pcap"
        records = generate_capture(profile("sequential"), 4, out_path=path)
        assert parse_capture(path) == records

    def test_sizes_within_bounds(self):
        records = generate_capture(profile("concurrent"), 5)
        assert all(60 <= r.length <= 1514 for r in records)

    def test_timestamps_start_at_zero_and_sorted(self):
        records = generate_capture(profile("concurrent"), 6)
        times = [r.timestamp for r in records]
        assert times[0] == 0.0
        assert times == sorted(times)


class TestProfileValidation:
    def test_min_above_max_rejected(self):
        with pytest.raises(ValueError, match="size_min"):
            profile("single", size_min=1500, size_max=100, size_mean=1000)

    def test_mean_outside_bounds_rejected(self):
        with pytest.raises(ValueError, match="size_mean"):
            profile("single", size_mean=5000)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError, match="mode"):
            profile("sideways")

    def test_nonpositive_duration_rejected(self):
        with pytest.raises(ValueError, match="duration"):
            profile("single", duration=0)


class TestProfileFiles:
    def test_toml_round_trip(self, tmp_path):
        original = CANNED_PROFILES["bulk-download"]
        path = tmp_path / "p.toml"
        path.write_text(profile_to_toml(original))
        assert load_profile(path) == original

    def test_missing_key(self, tmp_path):
        path = tmp_path / "p.toml"
        path.write_text('label = "x"\n')
        with pytest.raises(ValueError, match="missing profile key"):
            load_profile(path)

    def test_canned_profiles_generate(self):
        for name, prof in CANNED_PROFILES.items():
            records = generate_capture(prof, 1)
            assert records, name
