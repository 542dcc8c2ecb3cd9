"""
Unitary Fourier transforms between position and momentum samples.

Convention (plane-wave kernel of the event scalar product):
    <x|p> = exp(-i p.x) / (2 pi)^2  with the Minkowski dot p.x,
i.e. exp(-i(E t - p_vec . x_vec)).  The forward transform therefore
carries kernel exp(+iEt) on the time axis and exp(-i p x) on each
spatial axis, with a symmetric 1/sqrt(2 pi) per axis:

    F(p) = prod_axes [ delta/sqrt(2 pi) * sum_j exp(s_a i p x_j) f_j ]

with s_a = +1 on the time axis and -1 on space axes.  A sampled mode
exp(-i p0 . x) transforms to a spike at +p0.  Purely spatial (3D)
transforms use the s = -1 kernel on every axis (the usual QM choice
psi~(p) = int e^{-ipx} psi / (2 pi)^{3/2}).

Momentum samples are kept in FFT (unshifted) order.
"""

import numpy as np

SQRT_2PI = np.sqrt(2 * np.pi)


def _reshape_for(vals, field_ndim, fax):
    shape = [1] * field_ndim
    shape[fax] = len(vals)
    return vals.reshape(shape)


def axis_to_dual(field, axis_grid, fax, sign):
    """Forward transform along one field axis.

    sign=+1: kernel exp(+i p x) (time axis);  sign=-1: exp(-i p x).
    """
    field = np.asarray(field)
    p = axis_grid.dual_coords
    phase = np.exp(sign * 1j * p * axis_grid.origin)
    phase = _reshape_for(phase, field.ndim, fax)
    if sign == -1:
        out = np.fft.fft(field, axis=fax)
    else:
        out = axis_grid.n * np.fft.ifft(field, axis=fax)
    return (axis_grid.delta / SQRT_2PI) * phase * out


def axis_to_primal(field, axis_grid, fax, sign):
    """Inverse of axis_to_dual with the same sign convention."""
    field = np.asarray(field)
    p = axis_grid.dual_coords
    phase = np.exp(sign * 1j * p * axis_grid.origin)
    phase = _reshape_for(phase, field.ndim, fax)
    if sign == -1:
        out = axis_grid.n * np.fft.ifft(np.conj(phase) * field, axis=fax)
    else:
        out = np.fft.fft(np.conj(phase) * field, axis=fax)
    return (axis_grid.dual_delta / SQRT_2PI) * out


def _signs(grid):
    # time axis of a 4D grid is +1, all space axes -1
    if grid.ndim == 4:
        return (+1, -1, -1, -1)
    return (-1,) * grid.ndim


def to_momentum(field, grid):
    """Full forward transform over all grid axes (extra leading axes,
    e.g. a spinor index, are carried along)."""
    field = np.asarray(field, dtype=complex)
    off = field.ndim - grid.ndim
    for a, s in enumerate(_signs(grid)):
        field = axis_to_dual(field, grid.axes[a], off + a, s)
    return field


def to_position(field, grid):
    """Full inverse transform over all grid axes."""
    field = np.asarray(field, dtype=complex)
    off = field.ndim - grid.ndim
    for a, s in enumerate(_signs(grid)):
        field = axis_to_primal(field, grid.axes[a], off + a, s)
    return field


def fft4(field, grid):
    """Position -> momentum on a Grid4D (exp(+iEt), exp(-ipx) kernels)."""
    assert grid.ndim == 4
    return to_momentum(field, grid)


def ifft4(field, grid):
    assert grid.ndim == 4
    return to_position(field, grid)


def fft3(field, grid):
    """Position -> momentum on a Grid3D (exp(-ipx) kernel, all axes)."""
    assert grid.ndim == 3
    return to_momentum(field, grid)


def ifft3(field, grid):
    assert grid.ndim == 3
    return to_position(field, grid)
