"""Spectral calculus on the flat torus [0,1)^d for d in {1, 2}.

Conventions
-----------
The torus carries unit measure.  Plane waves are exp(2*pi*i*xi.x) with
integer frequency vectors xi, so the Laplacian acts as multiplication by
-4*pi^2*|xi|^2.  Fields are sampled at the N^d cell centers
x_i = (i + 1/2)/N, which keeps dyadic step functions exactly resolvable.

Coefficients are stored in FFT layout (frequencies 0..N/2-1, -N/2..-1
per axis) but are *true* Fourier coefficients of the trigonometric
interpolant: the half-cell sampling offset is absorbed into a phase
factor during the transform.  For a real field every representable pair
(xi, -xi) is conjugate-symmetric; the unpaired Nyquist slot -N/2 holds a
purely imaginary coefficient encoding a sine-type mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError

FOUR_PI_SQ = 4.0 * math.pi ** 2


@lru_cache(maxsize=64)
def _fourier_data(d: int, n: int):
    """Frequency axes, |xi|^2, and half-cell phase factors for an n^d grid."""
    freqs = np.rint(np.fft.fftfreq(n) * n).astype(np.int64)
    axes = []
    for ax in range(d):
        shape = [1] * d
        shape[ax] = n
        axes.append(freqs.reshape(shape))
    xi_sq = sum(a.astype(np.float64) ** 2 for a in axes)
    phase_fwd = np.ones((n,) * d, dtype=np.complex128)
    for a in axes:
        phase_fwd = phase_fwd * np.exp(-1j * math.pi * a / n)
    return tuple(axes), xi_sq, phase_fwd, np.conj(phase_fwd)


class TorusGrid:
    """Uniform cell-centered grid with N = 2^J points per axis, J >= 3."""

    def __init__(self, d: int, N: int):
        if d not in (1, 2):
            raise ConfigError(f"d must be 1 or 2, got {d}")
        if N < 8 or (N & (N - 1)) != 0:
            raise ConfigError(f"N must be a power of two >= 8, got {N}")
        self.d = d
        self.N = N
        self.shape = (N,) * d
        self.size = N ** d
        axes, xi_sq, phase_fwd, phase_inv = _fourier_data(d, N)
        self.freq_axes = axes
        self.xi_sq = xi_sq
        self._phase_fwd = phase_fwd
        self._phase_inv = phase_inv

    def coords(self, axis: int = 0) -> np.ndarray:
        """Cell-center coordinates along one axis, broadcastable to shape."""
        x = (np.arange(self.N) + 0.5) / self.N
        shape = [1] * self.d
        shape[axis] = self.N
        return np.broadcast_to(x.reshape(shape), self.shape)

    def __eq__(self, other):
        return isinstance(other, TorusGrid) and (self.d, self.N) == (other.d, other.N)

    def __hash__(self):
        return hash((self.d, self.N))

    def __repr__(self):
        return f"TorusGrid(d={self.d}, N={self.N})"


@dataclass(frozen=True)
class Field:
    """Real scalar field sampled at the cell centers of a TorusGrid."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise ConfigError(
                f"field shape {vals.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        object.__setattr__(self, "values", vals)

    def _binary(self, other, op):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ConfigError("fields live on different grids")
            return Field(self.grid, op(self.values, other.values))
        return Field(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return Field(self.grid, other - self.values)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Field):
            return self._binary(other, np.divide)
        return Field(self.grid, self.values / other)

    def __neg__(self):
        return Field(self.grid, -self.values)


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a real field, FFT layout, phase-corrected."""

    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise ConfigError(
                f"coefficient shape {c.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "coeffs", c)

    def get(self, xi) -> complex:
        """Coefficient at integer frequency xi (scalar for d=1, pair for d=2)."""
        if self.grid.d == 1:
            idx = (int(xi),)
        else:
            try:
                idx = tuple(int(c) for c in xi)
            except TypeError:
                raise DomainError("d=2 frequencies are pairs") from None
            if len(idx) != 2:
                raise DomainError("d=2 frequencies are pairs")
        half = self.grid.N // 2
        for c in idx:
            if abs(c) > half:
                raise DomainError(f"frequency {idx} outside |xi| <= N/2")
        return complex(self.coeffs[tuple(c % self.grid.N for c in idx)])


def transform(field: Field) -> SpectralField:
    """Forward transform; coefficients satisfy Parseval with the grid mean."""
    g = field.grid
    raw = np.fft.fftn(field.values) / g.size
    return SpectralField(g, raw * g._phase_fwd)


def inverse(sf: SpectralField) -> Field:
    """Inverse transform back to cell-center samples."""
    g = sf.grid
    vals = np.fft.ifftn(sf.coeffs * g._phase_inv) * g.size
    scale = 1.0 + float(np.max(np.abs(vals.real))) if vals.size else 1.0
    if float(np.max(np.abs(vals.imag))) > 1e-9 * scale:
        raise DomainError("coefficients are not Hermitian-symmetric; inverse is not real")
    return Field(g, vals.real)


def laplacian(field: Field) -> Field:
    """Apply the Laplacian through its Fourier multiplier -4*pi^2*|xi|^2."""
    g = field.grid
    sf = transform(field)
    return inverse(SpectralField(g, sf.coeffs * (-FOUR_PI_SQ * g.xi_sq)))


def heat_propagate(field: Field, t: float, m: float = 1.0) -> Field:
    """Evolve by the heat semigroup exp(t*m*Laplacian).

    t must be nonnegative and m positive; the operation contracts every
    Lebesgue and Sobolev norm and preserves the mean exactly.
    """
    if t < 0:
        raise DomainError(f"heat time must be nonnegative, got {t}")
    if m <= 0:
        raise DomainError(f"diffusivity must be positive, got {m}")
    g = field.grid
    sf = transform(field)
    mult = np.exp(-m * FOUR_PI_SQ * g.xi_sq * t)
    return inverse(SpectralField(g, sf.coeffs * mult))


def mollify(field: Field, eta: float) -> Field:
    """Smooth by the heat kernel at time eta > 0.

    Positivity of nonnegative inputs is preserved up to roundoff once the
    kernel is resolved on the grid, i.e. eta * (pi*N)^2 is a few tens or
    larger; for much smaller eta the sharp spectral cutoff can introduce
    ringing at the kernel-tail scale exp(-pi^2*eta*N^2).
    """
    if eta <= 0:
        raise DomainError(f"mollification width must be positive, got {eta}")
    return heat_propagate(field, eta, 1.0)


@dataclass(frozen=True)
class Mollifier:
    """Heat-kernel mollifier of fixed width eta."""

    eta: float

    def __post_init__(self):
        if self.eta <= 0:
            raise DomainError(f"mollification width must be positive, got {self.eta}")

    def multiplier(self, grid: TorusGrid) -> np.ndarray:
        return np.exp(-self.eta * FOUR_PI_SQ * grid.xi_sq)

    def apply(self, field: Field) -> Field:
        return mollify(field, self.eta)


def _axis_plane(arr: np.ndarray, axis: int, index: int):
    sl = [slice(None)] * arr.ndim
    sl[axis] = index
    return tuple(sl)


def _pad_centered(c: np.ndarray, N: int, M: int) -> np.ndarray:
    """Embed centered-layout coefficients of an N-grid into an M-grid.

    The unpaired Nyquist plane at -N/2 is split between -N/2 and +N/2 with
    opposite signs, matching the sine-type mode it represents for real
    cell-centered fields.
    """
    d = c.ndim
    out = np.zeros((M,) * d, dtype=np.complex128)
    off = M // 2 - N // 2
    out[tuple(slice(off, off + N) for _ in range(d))] = c
    for ax in range(d):
        lo = _axis_plane(out, ax, off)
        hi = _axis_plane(out, ax, off + N)
        out[hi] = -0.5 * out[lo]
        out[lo] = 0.5 * out[lo]
    return out


def _truncate_centered(C: np.ndarray, M: int, N: int) -> np.ndarray:
    """Project centered-layout coefficients of an M-grid onto an N-grid.

    Adjoint of _pad_centered on its range: the +N/2 plane folds into the
    -N/2 slot with a sign flip, so truncate(pad(c)) == c.
    """
    d = C.ndim
    off = M // 2 - N // 2
    block = C[tuple(slice(off, off + N + 1) for _ in range(d))].copy()
    for ax in range(d):
        lo = _axis_plane(block, ax, 0)
        hi = _axis_plane(block, ax, N)
        block[lo] = block[lo] - block[hi]
        block = block[_axis_plane(block, ax, slice(0, N))]
    return block


def resample(field: Field, M: int) -> np.ndarray:
    """Values of the trigonometric interpolant at the cell centers of an
    M-point-per-axis grid, M >= N even.  Returns a bare array."""
    g = field.grid
    if M == g.N:
        return field.values.copy()
    if M < g.N or M % 2:
        raise ConfigError(f"resample target {M} must be an even integer >= N={g.N}")
    cc = np.fft.fftshift(transform(field).coeffs)
    fine = np.fft.ifftshift(_pad_centered(cc, g.N, M))
    _, _, _, phase_inv = _fourier_data(g.d, M)
    vals = np.fft.ifftn(fine * phase_inv) * M ** g.d
    return vals.real


def _project_values(vals: np.ndarray, grid: TorusGrid) -> Field:
    """L^2 projection of fine-grid samples onto the coarse spectral band."""
    M = vals.shape[0]
    if M == grid.N:
        return Field(grid, vals)
    _, _, phase_fwd, _ = _fourier_data(grid.d, M)
    fine = np.fft.fftn(vals) / vals.size * phase_fwd
    coarse = _truncate_centered(np.fft.fftshift(fine), M, grid.N)
    return inverse(SpectralField(grid, np.fft.ifftshift(coarse)))


def poly_field(p, u: Field, v: Field, pad=None) -> Field:
    """Dealiased evaluation of a bivariate polynomial p at fields (u, v).

    The fields are resampled onto a grid refined by `pad` (default
    ceil((D+1)/2) for total degree D), the polynomial is evaluated
    pointwise there, and the product is projected back.  Exact up to
    roundoff whenever the product bandwidth fits the padded grid.
    """
    if u.grid != v.grid:
        raise ConfigError("fields live on different grids")
    g = u.grid
    terms = getattr(p, "terms", None)
    if terms is not None and not terms:
        return Field(g, np.zeros(g.shape))
    D = p.total_degree()
    if pad is None:
        pad = (D + 2) // 2  # ceil((D+1)/2)
    if pad < 1:
        raise DomainError(f"padding factor must be >= 1, got {pad}")
    M = int(math.ceil(pad * g.N))
    M += M % 2
    uf = resample(u, M)
    vf = resample(v, M)
    return _project_values(p.eval_arrays(uf, vf), g)
