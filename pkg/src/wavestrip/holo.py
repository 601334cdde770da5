"""Algebra of strip-holomorphic boundary traces.

A trace ``u`` of a function holomorphic in the strip ``(-h, 0)`` and real on
the bottom satisfies ``Im u = -T_h Re u``.  This module provides the
:class:`HoloField` container enforcing that constraint, the holomorphic /
antiholomorphic projections, the depth-adapted inner products and norms, and
residual checks for the two product identities used throughout the dynamics.

Zero-mode conventions: the underlying space does not see real constants, so
the mean of ``Re u`` is a tracked gauge scalar excluded from every norm.  The
mean of ``Im u`` is zero for an exactly holomorphic trace; constructors force
it to zero.  The conformal-map module may produce fields whose ``Im`` mean
encodes a small vertical offset of the surface; that offset is stored
explicitly (``im_mean``) and the holomorphy invariant is checked relative to
it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (
    SpectralGrid,
    dealias,
    lh_apply,
    tilbert,
    inv_tilbert,
    to_spectrum,
    product,
)

__all__ = [
    "HoloField",
    "holo_from_real",
    "holo_from_spectrum",
    "project",
    "inner_h",
    "weighted_inner",
    "norm_calH",
    "sobolev_weight",
    "sobolev_norm",
    "holomorphy_residual",
    "flip_residual",
    "IdentityReport",
    "check_identities",
]


@dataclass(frozen=True)
class HoloField:
    """Complex samples of a strip-holomorphic boundary trace."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.complex128))
        if v.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} samples, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def re_mean(self) -> float:
        """Gauge scalar: mean of the real part (invisible to all norms)."""
        return float(np.mean(self.values.real))

    @property
    def im_mean(self) -> float:
        """Mean of the imaginary part (zero for an exact holomorphic trace)."""
        return float(np.mean(self.values.imag))

    @property
    def spectrum(self) -> np.ndarray:
        return to_spectrum(self.values)

    def validate(self, tol: float = 1e-11) -> None:
        """Assert the holomorphy constraint Im u = -T_h Re u (mod gauge)."""
        res = holomorphy_residual(self.values, self.grid)
        scale = max(1.0, float(np.max(np.abs(self.values))))
        if res > tol * scale:
            raise ValueError(f"holomorphy residual {res:.3e} exceeds {tol:.1e}")

    def __add__(self, other):
        if isinstance(other, HoloField):
            self.grid.require_same(other.grid)
            return HoloField(self.grid, self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, HoloField):
            self.grid.require_same(other.grid)
            return HoloField(self.grid, self.values - other.values)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return HoloField(self.grid, self.values * scalar)
        return NotImplemented

    __rmul__ = __mul__


def holomorphy_residual(values: np.ndarray, grid: SpectralGrid) -> float:
    """Sup-norm defect of Im u = -T_h Re u, ignoring the Im zero mode."""
    im = values.imag
    defect = (im - np.mean(im)) + tilbert(values.real, grid)
    return float(np.max(np.abs(defect)))


def flip_residual(values: np.ndarray, grid: SpectralGrid, floor: float = 2e-5) -> float:
    """Max relative defect of the spectral flip relation.

    Holomorphic traces satisfy ``conj(u_hat(-xi)) = exp(2 h xi) u_hat(xi)``
    mode by mode.  The positive-frequency side decays like ``exp(-2 h xi)``,
    so once the smaller of the paired coefficients drops below ``floor``
    times the spectral scale, double-precision round-off (relative error
    ``eps * scale / |u_hat|``) swamps the comparison; those modes are
    skipped as unresolvable rather than counted as violations.
    """
    c = to_spectrum(values)
    k = grid.k
    idx_neg = (-k) % grid.N
    lhs = np.conj(c[idx_neg])
    with np.errstate(over="ignore"):
        rhs = np.exp(2.0 * grid.h * grid.xi) * c
    rhs = np.where(np.isfinite(rhs), rhs, 0.0)
    scale = float(np.max(np.abs(c))) or 1.0
    mask = (k != 0) & (np.abs(k) != grid.N // 2)
    mask &= np.minimum(np.abs(c), np.abs(c[idx_neg])) > floor * scale
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(lhs[mask] - rhs[mask]) /
                        np.maximum(np.abs(lhs[mask]), np.abs(rhs[mask]))))


def holo_from_real(re: np.ndarray, grid: SpectralGrid) -> HoloField:
    """Holomorphic trace with prescribed real part: u = re - i T_h re."""
    re = np.asarray(re, dtype=float)
    return HoloField(grid, re - 1j * tilbert(re, grid))


def holo_from_spectrum(coeffs_pos, grid: SpectralGrid) -> HoloField:
    """Holomorphic trace from prescribed Re-part coefficients c_1..c_m.

    ``coeffs_pos[k-1]`` is the complex coefficient of ``exp(i k alpha)`` in
    the real part (the conjugate mode is filled in automatically).
    """
    c = np.zeros(grid.N, dtype=np.complex128)
    for k, a in enumerate(np.atleast_1d(coeffs_pos), start=1):
        c[k] = a
        c[-k] = np.conj(a)
    re = np.fft.ifft(c * grid.N).real
    return holo_from_real(re, grid)


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, HoloField) else np.asarray(f)


def project(f, grid: SpectralGrid, which: str = "holo") -> np.ndarray:
    """Holomorphic / antiholomorphic projection of a complex field.

    Spectral form of P u = 1/2[(1 - iT)Re u + i(1 + iT^{-1})Im u]:

        (P u)_k = 1/4 [(2 - t_k - 1/t_k) u_k + (1/t_k - t_k) conj(u_{-k})],

    with t_k = tanh(h xi_k) for k != 0.  The zero mode (where T^{-1} is
    gauged to 0) maps to u_0 / 2, so P + Pbar = identity including the mean.
    """
    if which not in ("holo", "anti"):
        raise ValueError(f"which must be 'holo' or 'anti', got {which!r}")
    v = np.asarray(_values(f), dtype=np.complex128)
    c = to_spectrum(v)
    k = grid.k
    t = np.tanh(grid.h * grid.xi)
    nyq = grid.N // 2
    cc = np.conj(c[(-k) % grid.N])
    out = np.empty_like(c)
    interior = (k != 0) & (np.abs(k) != nyq)
    ti = t[interior]
    out[interior] = 0.25 * ((2.0 - ti - 1.0 / ti) * c[interior]
                            + (1.0 / ti - ti) * cc[interior])
    # gauge modes: T^{-1} undefined; split evenly so P + Pbar = identity
    out[k == 0] = 0.5 * c[k == 0]
    out[np.abs(k) == nyq] = 0.5 * c[np.abs(k) == nyq]
    if which == "anti":
        out = c - out
    return np.fft.ifft(out * grid.N)


def inner_h(u, v, grid: SpectralGrid) -> float:
    """Depth-adapted inner product on boundary traces.

    <u, v> = integral( T Re u . T Re v + Im u . Im v ) d alpha, by the grid's
    trapezoidal (here: exact periodic) quadrature.  Blind to real constants.
    """
    uv, vv = _values(u), _values(v)
    tu = tilbert(uv.real, grid)
    tv = tilbert(vv.real, grid)
    integrand = tu * tv + uv.imag * vv.imag
    return float(np.sum(integrand) * grid.L / grid.N)


def weighted_inner(u, v, omega, grid: SpectralGrid) -> float:
    """Weighted variant <u, v>_omega with a real weight inside the quadrature."""
    omega = np.asarray(omega)
    if np.iscomplexobj(omega):
        raise ValueError("weight must be real")
    uv, vv = _values(u), _values(v)
    tu = tilbert(uv.real, grid)
    tv = tilbert(vv.real, grid)
    integrand = (tu * tv + uv.imag * vv.imag) * omega
    return float(np.sum(integrand) * grid.L / grid.N)


def norm_calH(pair, g: float, grid: SpectralGrid) -> float:
    """Squared energy norm of a position/potential pair.

    ||(W, Q)||^2 = g <W, W> + <L_h Q, L_h Q>.
    """
    if not g > 0:
        raise ValueError("g must be positive")
    W, Q = pair
    Wv, Qv = _values(W), _values(Q)
    LQ = lh_apply(Qv, grid)
    return g * inner_h(Wv, Wv, grid) + inner_h(LQ, LQ, grid)


def sobolev_weight(xi: np.ndarray, h: float, s: float) -> np.ndarray:
    """Inhomogeneous Japanese-bracket weight (h^{-1} sqrt(1 + h^2 xi^2))^s."""
    return (np.sqrt(1.0 + (h * np.asarray(xi, dtype=float)) ** 2) / h) ** s


def sobolev_norm(f, s: float, grid: SpectralGrid, base: str = "l2") -> float:
    """Sobolev norm with the depth-uniform bracket weight.

    base='l2'   : || <D>^s f ||_{L^2}     (used for graph-side quantities)
    base='holo' : sqrt(<v, v>) with v = <D>^s f in the trace inner product
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    v = _values(f)
    w = sobolev_weight(grid.xi, grid.h, s)
    c = to_spectrum(v) * w
    if base == "l2":
        return float(np.sqrt(grid.L * np.sum(np.abs(c) ** 2)))
    if base == "holo":
        vf = np.fft.ifft(c * grid.N)
        return float(np.sqrt(max(inner_h(vf, vf, grid), 0.0)))
    raise ValueError(f"unknown base {base!r}")


@dataclass(frozen=True)
class IdentityReport:
    """Sup-norm residuals of the two Tilbert product identities."""

    product_formula: float
    projected_formula: float
    threshold: float = 1e-9

    @property
    def passed(self) -> bool:
        return (self.product_formula <= self.threshold
                and self.projected_formula <= self.threshold)


def check_identities(u: HoloField, v: HoloField) -> IdentityReport:
    """Evaluate both product identities on a pair of holomorphic traces.

    1. Summation formula (real fields f, g = Re u, Re v):
           f T[g] + T[f] g = T[f g - T[f] T[g]]
    2. Projected product identity (holomorphic u, v):
           P[ T[u v] - conj(u) T[v] - T[conj(u)] v ] = T[u] v
    """
    grid = u.grid
    grid.require_same(v.grid)
    f, gre = u.values.real, v.values.real
    lhs1 = product(f, tilbert(gre, grid), grid) + product(tilbert(f, grid), gre, grid)
    rhs1 = tilbert(product(f, gre, grid)
                   - product(tilbert(f, grid), tilbert(gre, grid), grid), grid)
    res1 = float(np.max(np.abs(lhs1 - rhs1)))

    uv, vv = u.values, v.values
    inner = (tilbert(product(uv, vv, grid), grid)
             - product(np.conj(uv), tilbert(vv, grid), grid)
             - product(tilbert(np.conj(uv), grid), vv, grid))
    lhs2 = project(dealias(inner, grid), grid, "holo")
    rhs2 = product(tilbert(uv, grid), vv, grid)
    # both sides are mean-free up to gauge; compare modulo the constant
    diff = lhs2 - rhs2
    diff = diff - np.mean(diff)
    res2 = float(np.max(np.abs(diff)))
    return IdentityReport(res1, res2)
