"""Walk through the inter-flow signal construction on a tiny example.

Two flows share one chunk: flow 1 sends 100 B at t=0 and 200 B at t=1;
flow 2 sends 50 B at t=0.5. Flow amplitudes weight each packet's bytes,
so the dominant flow dominates the signal.
"""

from interflow.chunking import Flow
from interflow.ingest import PacketRecord, canonical_flow_key
from interflow.signals import (build_raw_signal, flow_amplitude,
                               normalize_minmax, resample_to_fixed)


def packet(t, length, dst_ip):
    return PacketRecord(timestamp=t, length=length, src_ip="10.0.0.2",
                        dst_ip=dst_ip, src_port=50000, dst_port=443,
                        proto="TCP")


def flow(pairs, dst_ip):
    packets = [packet(t, l, dst_ip) for t, l in pairs]
    return Flow(key=canonical_flow_key(packets[0]), packets=packets)


f1 = flow([(0.0, 100), (1.0, 200)], "1.2.3.4")
f2 = flow([(0.5, 50)], "1.2.3.5")

print("amplitudes:", flow_amplitude(f1), flow_amplitude(f2))

raw = build_raw_signal([f1, f2], delta=1.0)
print("raw bins:  ", raw.bins.tolist())
# bin 0 holds 300*100 + 50*50 = 32500, bin 1 holds 300*200 = 60000

print("normalized:", normalize_minmax(raw.bins).tolist())

# the classifier consumes fixed-length rows, so short signals are padded
fixed = resample_to_fixed(raw, 8)
print("resampled: ", fixed.tolist())

# conservation check: total signal mass equals the sum of squared amplitudes
assert raw.bins.sum() == flow_amplitude(f1) ** 2 + flow_amplitude(f2) ** 2
print("mass check: sum(bins) == A1^2 + A2^2 ==", int(raw.bins.sum()))
