import numpy as np
import pytest
from sklearn.base import clone

from afsmr.baselines import grid_points, interpolate_cubic
from afsmr.estimators import (
    METHODS,
    AFSMRResampler,
    CubicResampler,
    FSMRResampler,
    NadarayaWatsonResampler,
    make_resampler,
)
from afsmr.resampler import ResamplerConfig, resample_frame
from afsmr.types import MeshPointSet


@pytest.fixture
def jittered_mesh(camera_416x240, rng):
    frame = camera_416x240[60:84, 100:132]
    mesh = MeshPointSet.from_frame(frame)
    return MeshPointSet(
        mesh.xs + rng.uniform(-0.5, 0.5, len(mesh)),
        mesh.ys + rng.uniform(-0.5, 0.5, len(mesh)),
        mesh.vals,
    )


def test_get_params_and_clone():
    est = FSMRResampler(max_iterations=12, key_points="block")
    params = est.get_params()
    assert params["max_iterations"] == 12 and params["key_points"] == "block"
    assert params["block_size"] == 4 and params["border"] == 6
    copy = clone(est)
    assert copy.get_params() == params
    assert NadarayaWatsonResampler(bandwidth=2.0).set_params(support=4.0).support == 4.0


def test_predict_grid_matches_function(jittered_mesh):
    est = AFSMRResampler(max_iterations=30).fit_mesh(jittered_mesh, 32, 24)
    ref = resample_frame(jittered_mesh, 32, 24, ResamplerConfig(max_iterations=30))
    np.testing.assert_array_equal(est.predict_grid(), ref)


@pytest.mark.parametrize("method", sorted(METHODS))
def test_predict_on_grid_matches_predict_grid(method, jittered_mesh):
    est = make_resampler(method, max_iterations=20).fit(jittered_mesh.coords, jittered_mesh.vals, width=32, height=24)
    grid = est.predict_grid()
    assert grid.shape == (24, 32)
    np.testing.assert_allclose(est.predict(grid_points(32, 24)).reshape(24, 32), grid, atol=1e-9)


def test_fsmr_estimator_uses_cubic_key_points(jittered_mesh):
    est = FSMRResampler(max_iterations=5).fit_mesh(jittered_mesh, 32, 24)
    cubic = interpolate_cubic(jittered_mesh, 32, 24)
    first = est.areas_[0]
    d = first.descriptor
    assert len(first.area) == first.area.n_mesh + d.width * d.height
    assert first.area.vals[first.area.n_mesh] == cubic[d.y0, d.x0]
    assert est.config_.variant == "FSMR"


def test_predict_between_grid_points_is_finite(jittered_mesh, rng):
    est = AFSMRResampler().fit_mesh(jittered_mesh, 32, 24)
    q = rng.uniform(-2, 34, size=(50, 2))
    out = est.predict(q)
    assert np.isfinite(out).all() and out.min() >= 0 and out.max() <= 255


def test_frame_size_inferred_from_mesh():
    mesh = MeshPointSet([0.0, 4.6, 2.0], [0.0, 1.0, 2.9], [1.0, 2.0, 3.0])
    est = CubicResampler().fit_mesh(mesh)
    assert (est.width_, est.height_) == (5, 3)


def test_input_validation():
    with pytest.raises(ValueError):
        AFSMRResampler().fit(np.zeros((3, 3)), np.zeros(3))
    with pytest.raises(ValueError):
        AFSMRResampler().fit(np.zeros((3, 2)), np.zeros(4))
    with pytest.raises(ValueError):
        AFSMRResampler(rho=1.5).fit(np.zeros((3, 2)), np.zeros(3), width=4, height=4)
    with pytest.raises(Exception):
        AFSMRResampler().predict(np.zeros((1, 2)))
    with pytest.raises(ValueError, match="unknown method"):
        make_resampler("SPLINE")


def test_make_resampler_filters_parameters():
    est = make_resampler("nwe", bandwidth=2.5, max_iterations=9)
    assert isinstance(est, NadarayaWatsonResampler) and est.bandwidth == 2.5
    assert make_resampler("AFSMR", max_iterations=9, bandwidth=2.5).max_iterations == 9


def test_score_is_r2(camera_416x240):
    frame = camera_416x240[:24, :24]
    mesh = MeshPointSet.from_frame(frame)
    est = CubicResampler().fit_mesh(mesh)
    assert est.score(mesh.coords, mesh.vals) == pytest.approx(1.0)
