import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afsmr.motion import (
    Affine,
    BlockMatchConfig,
    GlobalTranslation,
    estimate_block_matching,
    motion_compensate_forward,
    parse_flow_spec,
    synthesize_flow,
)
from afsmr.types import MotionField


def test_block_matching_recovers_shift(rng):
    prev = rng.uniform(0, 255, size=(48, 64))
    # shift right by 3, replicating the left border
    nxt = np.concatenate([np.repeat(prev[:, :1], 3, axis=1), prev[:, :-3]], axis=1)
    flow = estimate_block_matching(prev, nxt, BlockMatchConfig(block_size=8, search_range=4))
    interior = (slice(8, 40), slice(8, 56))
    assert np.all(flow.dm[interior] == 3)
    assert np.all(flow.dn[interior] == 0)


def test_block_matching_identity_is_zero(rng):
    prev = rng.uniform(0, 255, size=(32, 40))
    flow = estimate_block_matching(prev, prev)
    assert not flow.dm.any() and not flow.dn.any()


def test_block_matching_flat_frames_tie_to_zero():
    flat = np.full((24, 24), 77.0)
    flow = estimate_block_matching(flat, flat, BlockMatchConfig(block_size=8, search_range=3))
    assert not flow.dm.any() and not flow.dn.any()


def test_block_matching_shape_mismatch():
    with pytest.raises(ValueError):
        estimate_block_matching(np.zeros((8, 8)), np.zeros((8, 9)))


def test_block_match_config_validation():
    with pytest.raises(ValueError):
        BlockMatchConfig(block_size=0)
    with pytest.raises(ValueError):
        BlockMatchConfig(search_range=-1)


def test_synthetic_translation():
    flow = synthesize_flow(GlobalTranslation(2, -1), 5, 4)
    assert flow.shape == (4, 5)
    assert np.all(flow.dm == 2) and np.all(flow.dn == -1)


def test_synthetic_affine_identity_is_zero():
    flow = synthesize_flow(Affine(), 6, 3)
    assert not flow.dm.any() and not flow.dn.any()


def test_synthetic_affine_scaling():
    flow = synthesize_flow(Affine(a11=1.1), 12, 2)
    assert flow.dm[0, 10] == pytest.approx(1.0)
    assert not flow.dn.any()


def test_parse_flow_spec():
    assert parse_flow_spec("translate:1.5,-2") == GlobalTranslation(1.5, -2.0)
    assert parse_flow_spec("affine:1,0,0,1,3,4") == Affine(1, 0, 0, 1, 3, 4)
    with pytest.raises(ValueError):
        parse_flow_spec("rotate:5")


def test_forward_compensation_half_displacement():
    prev = np.arange(30 * 40, dtype=float).reshape(30, 40)
    dm = np.zeros((30, 40))
    dn = np.zeros((30, 40))
    dm[20, 10], dn[20, 10] = 4, -2
    dm[0, 0], dn[0, 0] = 1, 1
    mesh = motion_compensate_forward(prev, MotionField(dm, dn))
    i = 20 * 40 + 10
    assert (mesh.xs[i], mesh.ys[i], mesh.vals[i]) == (12.0, 19.0, prev[20, 10])
    assert (mesh.xs[0], mesh.ys[0]) == (0.5, 0.5)


def test_forward_compensation_zero_flow_is_grid(rng):
    prev = rng.uniform(0, 255, size=(5, 7))
    mesh = motion_compensate_forward(prev, MotionField.zeros(7, 5))
    ys, xs = np.mgrid[0:5, 0:7]
    np.testing.assert_array_equal(mesh.xs, xs.ravel())
    np.testing.assert_array_equal(mesh.ys, ys.ravel())
    np.testing.assert_array_equal(mesh.vals, prev.ravel())


def test_forward_compensation_keeps_points_outside_frame():
    prev = np.ones((4, 4))
    mesh = motion_compensate_forward(prev, synthesize_flow(GlobalTranslation(-10, 10), 4, 4))
    assert len(mesh) == 16
    assert mesh.xs.min() == -5 and mesh.ys.max() == 8


def test_forward_compensation_shape_mismatch():
    with pytest.raises(ValueError):
        motion_compensate_forward(np.zeros((4, 4)), MotionField.zeros(5, 4))


@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 9),
    st.integers(1, 9),
    st.floats(-20, 20, allow_nan=False),
    st.floats(-20, 20, allow_nan=False),
    st.integers(0, 2**31 - 1),
)
def test_forward_compensation_linear_in_flow(w, h, sx, sy, seed):
    rng = np.random.default_rng(seed)
    prev = rng.uniform(0, 255, size=(h, w))
    flow = MotionField(rng.normal(size=(h, w)) * sx, rng.normal(size=(h, w)) * sy)
    base = motion_compensate_forward(prev, MotionField.zeros(w, h))
    one = motion_compensate_forward(prev, flow)
    two = motion_compensate_forward(prev, flow.scaled(2.0))
    assert len(one) == w * h
    np.testing.assert_allclose(two.xs - base.xs, 2 * (one.xs - base.xs), atol=1e-12)
    np.testing.assert_allclose(two.ys - base.ys, 2 * (one.ys - base.ys), atol=1e-12)
