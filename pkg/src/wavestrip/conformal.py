"""Conformal parametrization of a graph surface.

Given a periodic surface elevation ``y = eta(x)`` over a flat bottom at depth
``h``, find the boundary trace ``W`` of the conformal map from the reference
strip, so that the free surface is ``Z(alpha) = alpha + W(alpha)`` with
``Im W(alpha) = eta(alpha + Re W(alpha))``.  The real and imaginary parts of
the trace are linked by ``Im W = -T_h[Re W]`` up to the mean of ``Im W``,
which records the (second-order small) offset between the graph's mean level
in physical and conformal sampling.

The construction is a fixed-point iteration: starting from ``Y_0 = eta``,
alternate ``Re W = -T_h^{-1} Y`` (horizontal-translation gauge: mean
``Re W = 0``) with resampling ``Y <- eta(alpha + Re W(alpha))`` by
trigonometric interpolation.  It contracts for small surface slope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import SpectralGrid, deriv, inv_tilbert, to_spectrum
from .holo import HoloField, inner_h, sobolev_norm, sobolev_weight

__all__ = [
    "SurfaceGraph",
    "ConformalResult",
    "graph_to_holo",
    "trig_interp",
    "surface_curve",
    "holo_to_graph",
    "norm_comparability",
]


@dataclass(frozen=True)
class SurfaceGraph:
    """Periodic surface elevation sampled on the physical x-grid."""

    grid: SpectralGrid
    eta: np.ndarray

    def __post_init__(self):
        eta = np.ascontiguousarray(np.asarray(self.eta, dtype=float))
        if eta.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} samples, got {eta.shape}")
        if np.min(eta) <= -self.grid.h:
            raise ValueError("surface touches or crosses the bottom")
        object.__setattr__(self, "eta", eta)

    @property
    def max_slope(self) -> float:
        return float(np.max(np.abs(deriv(self.eta, self.grid))))


def trig_interp(values: np.ndarray, grid: SpectralGrid, x: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of grid samples at points x."""
    c = to_spectrum(values)
    # Nyquist mode of a real signal is split symmetrically so the
    # interpolant is real at arbitrary points.
    c = c.copy()
    nyq = grid.N // 2
    c[nyq] = 0.5 * c[nyq]
    phases = np.exp(1j * np.outer(x, grid.xi))
    out = phases @ c + np.conj(phases[:, nyq]) * c[nyq]
    if np.isrealobj(values):
        return out.real
    return out


@dataclass(frozen=True)
class ConformalResult:
    W: HoloField
    residual: float
    iterations: int
    monotone_contraction: bool


def graph_to_holo(surface: SurfaceGraph, tol: float = 1e-12,
                  maxiter: int = 200, damping: float = 1.0) -> ConformalResult:
    """Fixed-point construction of the conformal trace W from a graph.

    Raises ``RuntimeError`` if the residual does not reach ``tol`` within
    ``maxiter`` iterations (the usual cause is surface slope too large for
    the contraction).
    """
    grid = surface.grid
    if not tol > 0:
        raise ValueError("tol must be positive")
    slope = surface.max_slope
    if slope >= 1.0:
        raise ValueError(f"max slope {slope:.3f} >= 1: outside the small-slope regime")
    alpha = grid.nodes
    Y = surface.eta.copy()
    residuals = []
    X = alpha
    for it in range(1, maxiter + 1):
        reW = -inv_tilbert(Y - Y.mean(), grid)
        X = alpha + reW
        Y_new = trig_interp(surface.eta, grid, X)
        res = float(np.max(np.abs(Y_new - Y)))
        Y = (1.0 - damping) * Y + damping * Y_new
        residuals.append(res)
        if res <= tol:
            break
    else:
        raise RuntimeError(
            f"conformal iteration did not reach tol={tol:.1e} in {maxiter} "
            f"iterations (last residual {residuals[-1]:.3e}); slope too large?")
    W = HoloField(grid, (X - alpha) + 1j * Y)
    # final self-consistency: Im W vs the graph resampled at X
    final_res = float(np.max(np.abs(W.values.imag - trig_interp(surface.eta, grid, X))))
    monotone = all(b <= a * (1 + 1e-12) for a, b in zip(residuals[1:], residuals[2:]))
    return ConformalResult(W, max(final_res, 0.0), it, monotone)


@dataclass(frozen=True)
class SurfaceCurve:
    X: np.ndarray
    Y: np.ndarray
    min_dx: float

    @property
    def monotone(self) -> bool:
        return self.min_dx > 0


def surface_curve(W: HoloField) -> SurfaceCurve:
    """Sampled parametric curve Z(alpha) = alpha + W(alpha) with spacing report."""
    grid = W.grid
    X = grid.nodes + W.values.real
    Y = W.values.imag
    dX = np.diff(np.concatenate([X, [X[0] + grid.L]]))
    return SurfaceCurve(X, Y, float(np.min(dX)))


def holo_to_graph(W: HoloField, maxiter: int = 60, tol: float = 1e-14) -> np.ndarray:
    """Resample the surface described by W back onto the physical x-grid.

    Inverts ``X(alpha) = alpha + Re W(alpha)`` by Newton iteration with
    trigonometric interpolation, then evaluates ``Im W`` there.  Inverse of
    :func:`graph_to_holo` up to interpolation round-off.
    """
    grid = W.grid
    x = grid.nodes
    reW = W.values.real
    d_reW = deriv(reW, grid)
    alpha = x.copy()
    for _ in range(maxiter):
        F = alpha + trig_interp(reW, grid, alpha) - x
        if np.max(np.abs(F)) < tol:
            break
        alpha = alpha - F / (1.0 + trig_interp(d_reW, grid, alpha))
    return trig_interp(W.values.imag, grid, alpha)


@dataclass(frozen=True)
class ComparabilityRow:
    order: int
    graph_norm: float
    holo_norm: float

    @property
    def ratio(self) -> float:
        if self.graph_norm == 0.0 and self.holo_norm == 0.0:
            return 1.0
        return self.holo_norm / self.graph_norm


def norm_comparability(surface: SurfaceGraph, W: HoloField,
                       orders=(0, 1, 2)) -> list[ComparabilityRow]:
    """Compare graph-side and conformal-side Sobolev norms order by order.

    Row ``j`` holds ``h^{-j}||eta||_L2 + ||eta||_{H^j_h}`` against the same
    quantity for ``z - alpha = W`` measured in the trace norms.
    """
    grid = surface.grid
    h = grid.h
    rows = []
    dx_weight = np.sqrt(grid.L / grid.N)
    for j in orders:
        l2_eta = float(np.linalg.norm(surface.eta)) * dx_weight
        hj_eta = sobolev_norm(surface.eta, j, grid, base="l2")
        graph = h ** (-j) * l2_eta + hj_eta
        l2_w = float(np.linalg.norm(W.values)) * dx_weight
        c = to_spectrum(W.values) * sobolev_weight(grid.xi, h, j)
        wj = np.fft.ifft(c * grid.N)
        hj_w = float(np.sqrt(max(inner_h(wj, wj, grid), 0.0)))
        holo = h ** (-j) * l2_w + hj_w
        rows.append(ComparabilityRow(j, graph, holo))
    return rows
