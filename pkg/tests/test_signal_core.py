import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gyrotype import RejectedInput
from gyrotype.signal_core import (
    ImuSample,
    SegmentationConfig,
    Segmenter,
    gyro_energy,
    load_trace,
    save_trace,
    segment_trace,
)

from conftest import rect_pulse_trace

CFG = SegmentationConfig(
    peak_threshold=30.0,
    left_buffer_ms=200.0,
    right_buffer_ms=200.0,
    tolerance_ms=300.0,
    sample_rate_hz=100.0,
)


def test_energy_pythagorean_triple():
    assert gyro_energy(ImuSample(0, 3.0, 4.0, 0.0)) == 5.0


def test_energy_zero():
    assert gyro_energy(ImuSample(0, 0.0, 0.0, 0.0)) == 0.0


def test_energy_single_axis_at_threshold():
    assert gyro_energy(ImuSample(0, 30.0, 0.0, 0.0)) == 30.0


def test_energy_rejects_non_finite():
    with pytest.raises(RejectedInput):
        gyro_energy(ImuSample(0, math.nan, 0.0, 0.0))
    with pytest.raises(RejectedInput):
        gyro_energy(ImuSample(0, 0.0, math.inf, 0.0))


finite_axis = st.floats(
    min_value=-500, max_value=500, allow_nan=False, allow_infinity=False
)


@given(finite_axis, finite_axis, finite_axis)
def test_energy_sign_and_permutation_invariant(gx, gy, gz):
    e = gyro_energy(ImuSample(0, gx, gy, gz))
    assert e >= 0
    assert gyro_energy(ImuSample(0, -gx, gy, -gz)) == pytest.approx(e)
    assert gyro_energy(ImuSample(0, gz, gx, gy)) == pytest.approx(e)
    if e == 0:
        assert gx == gy == gz == 0


# -- hand-traced segmentation scenarios --------------------------------------


def test_constant_zero_stream_emits_nothing():
    samples = rect_pulse_trace([], total_ms=5000)
    assert segment_trace(samples, CFG) == []


def test_single_pulse_boundaries():
    # 500 ms pulse at 60 deg/s inside >=2 s of zeros
    samples = rect_pulse_trace([(2000, 2500)], total_ms=6000)
    units = segment_trace(samples, CFG)
    assert len(units) == 1
    u = units[0]
    # 200 ms pre-buffer + 500 ms pulse + 200 ms tail (boundaries +-1 sample)
    assert abs(u.start_ms - 1800) <= 10
    assert abs(u.end_ms - 2690) <= 10
    assert u.peak_energy == 60.0
    assert u.duration_ms > 0


def test_sub_tolerance_dip_stays_one_unit():
    samples = rect_pulse_trace([(1000, 1300), (1500, 1800)], total_ms=5000)
    units = segment_trace(samples, CFG)  # 200 ms dip < 300 ms tolerance
    assert len(units) == 1


def test_super_tolerance_gap_splits():
    samples = rect_pulse_trace([(1000, 1300), (2300, 2600)], total_ms=6000)
    units = segment_trace(samples, CFG)
    assert len(units) == 2
    assert units[0].end_ms < units[1].start_ms


def test_out_of_order_timestamp_rejected():
    seg = Segmenter(CFG)
    seg.feed(ImuSample(100, 0, 0, 0))
    with pytest.raises(RejectedInput):
        seg.feed(ImuSample(90, 0, 0, 0))


def test_overlong_unit_force_finalized_and_flagged():
    samples = rect_pulse_trace([(500, 9000)], total_ms=9500, amplitude=80.0)
    units = segment_trace(samples, CFG)
    assert any(u.truncated for u in units)


def test_eof_flush_mid_pulse():
    samples = rect_pulse_trace([(2000, 3000)], total_ms=2500)
    units = segment_trace(samples, CFG)
    assert len(units) == 1
    assert units[0].end_ms == samples[-1].t_ms


def test_empty_trace():
    assert segment_trace([], CFG) == []


def test_left_buffer_never_overlaps_previous_unit():
    # second pulse begins right after the first finalizes; its left buffer
    # must start after the first unit's end
    samples = rect_pulse_trace([(1000, 1400), (1800, 2200)], total_ms=5000)
    units = segment_trace(samples, CFG)
    for a, b in zip(units, units[1:]):
        assert b.start_ms > a.end_ms


# -- batch/stream equivalence and structural invariants -----------------------


@st.composite
def random_trace(draw):
    n = draw(st.integers(min_value=0, max_value=300))
    values = draw(
        st.lists(
            st.floats(min_value=0, max_value=100, allow_nan=False),
            min_size=n,
            max_size=n,
        )
    )
    return [ImuSample(t_ms=i * 10, gx=0.0, gy=0.0, gz=v) for i, v in enumerate(values)]


@given(random_trace())
@settings(max_examples=100, deadline=None)
def test_batch_stream_equivalence_and_invariants(samples):
    seg = Segmenter(CFG)
    streamed = []
    for s in samples:
        u = seg.feed(s)
        if u is not None:
            streamed.append(u)
    tail = seg.flush()
    if tail is not None:
        streamed.append(tail)

    batch = segment_trace(samples, CFG)
    assert [(u.start_ms, u.end_ms) for u in batch] == [
        (u.start_ms, u.end_ms) for u in streamed
    ]
    # determinism
    again = segment_trace(samples, CFG)
    assert [(u.start_ms, u.end_ms) for u in again] == [
        (u.start_ms, u.end_ms) for u in batch
    ]
    # units ordered and non-overlapping
    for a, b in zip(batch, batch[1:]):
        assert a.end_ms < b.start_ms
    # every above-threshold sample is covered by exactly one unit
    spans = [(u.start_ms, u.end_ms) for u in batch]
    for s in samples:
        if gyro_energy(s) >= CFG.peak_threshold:
            assert sum(a <= s.t_ms <= b for a, b in spans) == 1


def test_config_invariants():
    with pytest.raises(RejectedInput):
        SegmentationConfig(peak_threshold=0)
    with pytest.raises(RejectedInput):
        SegmentationConfig(right_buffer_ms=400, tolerance_ms=300)
    with pytest.raises(RejectedInput):
        SegmentationConfig(left_buffer_ms=-1)


def test_trace_csv_round_trip(tmp_path):
    samples = rect_pulse_trace([(100, 200)], total_ms=400)
    path = tmp_path / "trace.csv"
    save_trace(path, samples)
    assert load_trace(path) == samples
    assert path.read_text().startswith("t_ms,gx,gy,gz\n")


def test_trace_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,x,y,z\n0,1,2,3\n")
    with pytest.raises(RejectedInput):
        load_trace(path)
