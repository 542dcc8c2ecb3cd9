"""
Uniform periodic grids for event wavefunctions.

An axis has n samples x_j = origin + j*delta (j = 0..n-1, periodic with
period n*delta).  Its Fourier-dual axis holds the angular frequencies
2*pi*fftfreq(n, delta) in FFT (unshifted) order, so momentum-space
fields are stored in FFT order along every axis.
"""

import json

import numpy as np


class AxisGrid:
    """One periodic sample axis plus its FFT-dual frequencies."""

    def __init__(self, n, delta, origin=0.0):
        if n < 2:
            raise ValueError("need at least 2 samples per axis")
        if delta <= 0:
            raise ValueError("delta must be positive")
        self.n = int(n)
        self.delta = float(delta)
        self.origin = float(origin)

    @classmethod
    def centered(cls, n, delta):
        """Axis symmetric about 0 (origin = -n*delta/2, includes 0)."""
        return cls(n, delta, origin=-0.5 * n * delta)

    @property
    def coords(self):
        return self.origin + self.delta * np.arange(self.n)

    @property
    def length(self):
        return self.n * self.delta

    @property
    def dual_coords(self):
        """Angular frequencies in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.delta)

    @property
    def dual_delta(self):
        return 2 * np.pi / (self.n * self.delta)

    @property
    def nyquist(self):
        return np.pi / self.delta

    def __eq__(self, other):
        return (isinstance(other, AxisGrid) and self.n == other.n
                and self.delta == other.delta and self.origin == other.origin)

    def to_dict(self):
        return {"n": self.n, "delta": self.delta, "origin": self.origin}

    @classmethod
    def from_dict(cls, d):
        return cls(d["n"], d["delta"], d["origin"])


class _GridBase:
    """Cartesian product of AxisGrid objects."""

    ndim = None

    def __init__(self, axes):
        axes = tuple(axes)
        if len(axes) != self.ndim:
            raise ValueError(f"need {self.ndim} axes")
        self.axes = axes

    @classmethod
    def cubic(cls, n, delta):
        """All axes identical and centered about 0."""
        return cls([AxisGrid.centered(n, delta) for _ in range(cls.ndim)])

    @property
    def shape(self):
        return tuple(ax.n for ax in self.axes)

    @property
    def cell_volume(self):
        return float(np.prod([ax.delta for ax in self.axes]))

    @property
    def dual_cell_volume(self):
        return float(np.prod([ax.dual_delta for ax in self.axes]))

    def coord_mesh(self, axis):
        """Coordinate of `axis` broadcast over the grid shape."""
        c = self.axes[axis].coords
        shape = [1] * self.ndim
        shape[axis] = self.axes[axis].n
        return c.reshape(shape)

    def dual_mesh(self, axis):
        c = self.axes[axis].dual_coords
        shape = [1] * self.ndim
        shape[axis] = self.axes[axis].n
        return c.reshape(shape)

    def edge_clearance(self, density, margin_cells=2):
        """Fraction of total |field|^2 mass in the outer margin of any axis.

        Used to warn when a state is about to wrap around the periodic
        box (supports should clear every edge by several widths).
        """
        density = np.asarray(density)
        total = density.sum()
        if total == 0:
            return 0.0
        worst = 0.0
        for axis in range(self.ndim):
            sl_lo = [slice(None)] * self.ndim
            sl_hi = [slice(None)] * self.ndim
            sl_lo[axis] = slice(0, margin_cells)
            sl_hi[axis] = slice(-margin_cells, None)
            frac = (density[tuple(sl_lo)].sum()
                    + density[tuple(sl_hi)].sum()) / total
            worst = max(worst, float(frac))
        return worst

    def __eq__(self, other):
        return type(self) is type(other) and self.axes == other.axes

    def to_dict(self):
        return {"ndim": self.ndim, "axes": [ax.to_dict() for ax in self.axes]}

    @classmethod
    def from_dict(cls, d):
        return cls([AxisGrid.from_dict(a) for a in d["axes"]])

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


class Grid4D(_GridBase):
    """Spacetime grid; axis 0 is time, axes 1-3 are space."""

    ndim = 4

    @property
    def spatial(self):
        return Grid3D(self.axes[1:])


class Grid3D(_GridBase):
    """Purely spatial grid (single-time slices, on-shell amplitudes)."""

    ndim = 3


def grid_from_dict(d):
    return {4: Grid4D, 3: Grid3D}[d["ndim"]].from_dict(d)
