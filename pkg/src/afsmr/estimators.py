"""scikit-learn style wrappers around the mesh-to-grid resamplers.

Every estimator is fitted on scattered samples, ``X`` of shape ``(n, 2)``
holding ``(x, y)`` positions and ``y`` the sample values, and predicts
values at arbitrary positions. ``predict_grid`` returns the full resampled
frame. Hyper-parameters are plain constructor arguments, so ``get_params``,
``set_params`` and ``sklearn.base.clone`` work as usual::

    est = AFSMRResampler(max_iterations=50).fit(mesh.coords, mesh.vals, width=416, height=240)
    frame = est.predict_grid()
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import baselines
from .resampler import ResamplerConfig, assemble, evaluate_model, fit_areas
from .types import MeshPointSet
from .validation import check_mesh, check_positions, infer_frame_size


class _MeshResampler(RegressorMixin, BaseEstimator):
    def fit(self, X, y, width=None, height=None):
        """Fit on mesh positions ``X`` and values ``y``.

        ``width`` / ``height`` give the output grid; when omitted, the
        smallest grid enclosing the mesh is used.
        """
        mesh = check_mesh(X, y)
        if len(mesh) == 0:
            raise ValueError("mesh is empty")
        self.width_, self.height_ = infer_frame_size(mesh, width, height)
        self.mesh_ = mesh
        self.n_features_in_ = 2
        self._fit(mesh)
        return self

    def fit_mesh(self, mesh: MeshPointSet, width=None, height=None):
        return self.fit(mesh.coords, mesh.vals, width=width, height=height)

    def predict(self, X):
        check_is_fitted(self, "mesh_")
        return self._predict(check_positions(X))

    def predict_grid(self) -> np.ndarray:
        """Resampled frame of shape ``(height_, width_)``."""
        check_is_fitted(self, "mesh_")
        return self._predict_grid()

    def _predict_grid(self):
        grid = baselines.grid_points(self.width_, self.height_)
        return self._predict(grid).reshape(self.height_, self.width_)


class LinearResampler(_MeshResampler):
    """Barycentric interpolation on the Delaunay triangulation."""

    def _fit(self, mesh):
        self.interpolator_ = baselines.scattered_interpolator(mesh, "linear")

    def _predict(self, X):
        return self.interpolator_(X)


class CubicResampler(_MeshResampler):
    """Clough-Tocher interpolation on the Delaunay triangulation."""

    def _fit(self, mesh):
        self.interpolator_ = baselines.scattered_interpolator(mesh, "cubic")

    def _predict(self, X):
        return self.interpolator_(X)


class NadarayaWatsonResampler(_MeshResampler):
    """Gaussian kernel regression with a truncated support."""

    def __init__(self, bandwidth=1.0, support=None):
        self.bandwidth = bandwidth
        self.support = support

    def _fit(self, mesh):
        self.config_ = baselines.NweConfig(self.bandwidth, self.support)

    def _predict(self, X):
        return baselines.interpolate_nwe_at(self.mesh_, X, self.config_)


class AFSMRResampler(_MeshResampler):
    """Frequency-selective resampling from the mesh points alone.

    ``fit`` builds one sparse DCT model per reconstruction area; ``predict``
    evaluates the model owning the block of the nearest grid pixel.
    """

    _variant = "AFSMR"

    def __init__(
        self,
        block_size=4,
        border=6,
        rho=0.8,
        sigma=0.5,
        max_iterations=500,
        residual_energy_stop=0.0,
        n_jobs=1,
    ):
        self.block_size = block_size
        self.border = border
        self.rho = rho
        self.sigma = sigma
        self.max_iterations = max_iterations
        self.residual_energy_stop = residual_energy_stop
        self.n_jobs = n_jobs

    def _config(self) -> ResamplerConfig:
        return ResamplerConfig(
            block_size=self.block_size,
            border=self.border,
            rho=self.rho,
            sigma=self.sigma,
            max_iterations=self.max_iterations,
            residual_energy_stop=self.residual_energy_stop,
            variant=self._variant,
        )

    def _fit(self, mesh):
        self.config_ = self._config()
        self.areas_ = fit_areas(mesh, self.width_, self.height_, self.config_, self.n_jobs)
        self.n_blocks_x_ = -(-self.width_ // self.config_.block_size)

    def _predict_grid(self):
        return assemble(self.areas_, self.width_, self.height_)

    def _predict(self, X):
        B = self.config_.block_size
        px = np.clip(np.floor(X[:, 0] + 0.5), 0, self.width_ - 1).astype(np.int64)
        py = np.clip(np.floor(X[:, 1] + 0.5), 0, self.height_ - 1).astype(np.int64)
        owner = (py // B) * self.n_blocks_x_ + px // B
        out = np.empty(len(X))
        fallback = np.zeros(len(X), dtype=bool)
        for a in np.unique(owner):
            sel = owner == a
            res = self.areas_[a]
            if res.state is None:
                fallback |= sel
                continue
            d = res.descriptor
            out[sel] = evaluate_model(res.state, res.area, X[sel, 0] - d.x0, X[sel, 1] - d.y0)
        if fallback.any():
            _, idx = cKDTree(self.mesh_.coords).query(X[fallback])
            out[fallback] = self.mesh_.vals[idx]
        return np.clip(out, 0.0, 255.0)


class FSMRResampler(AFSMRResampler):
    """Frequency-selective resampling guided by cubic-interpolated key points."""

    _variant = "FSMR"

    def __init__(
        self,
        block_size=4,
        border=6,
        rho=0.8,
        sigma=0.5,
        max_iterations=500,
        residual_energy_stop=0.0,
        key_points="area",
        n_jobs=1,
    ):
        super().__init__(
            block_size=block_size,
            border=border,
            rho=rho,
            sigma=sigma,
            max_iterations=max_iterations,
            residual_energy_stop=residual_energy_stop,
            n_jobs=n_jobs,
        )
        self.key_points = key_points

    def _config(self) -> ResamplerConfig:
        return replace(super()._config(), key_points=self.key_points)


METHODS = {
    "LIN": LinearResampler,
    "CUB": CubicResampler,
    "NWE": NadarayaWatsonResampler,
    "FSMR": FSMRResampler,
    "AFSMR": AFSMRResampler,
}


def make_resampler(method: str, **params) -> _MeshResampler:
    """Instantiate the estimator for ``method`` (``LIN``, ``CUB``, ``NWE``,
    ``FSMR`` or ``AFSMR``), ignoring parameters it does not take."""
    try:
        cls = METHODS[method.upper()]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
    accepted = cls().get_params()
    return cls(**{k: v for k, v in params.items() if k in accepted})
