"""
Event wavefunctions on a spacetime grid.

An EventState is a square-integrable complex amplitude Phi(x) over the
whole 4D grid (time included on the same footing as space), normalised
to unit L2 norm:  sum |Phi|^2 dV = 1.  |Phi(x)|^2 is the probability
density for the *event* x — a detection at place AND time — not a
per-time-slice probability.  States with a spinor index carry a leading
component axis and the norm sums over components.

Momentum-space fields use the transforms of `spectral` (kernel
exp(+iEt) on the time axis) and are stored in FFT order.
"""

import json
import os

import numpy as np

from .grids import Grid4D, grid_from_dict
from .spectral import to_momentum, to_position

POSITION = "position"
MOMENTUM = "momentum"


class EventState:
    """Normalised complex field on a Grid4D (or Grid3D slice)."""

    def __init__(self, grid, field, rep=POSITION, normalize=True):
        field = np.asarray(field, dtype=complex)
        if field.shape[-grid.ndim:] != grid.shape:
            raise ValueError("field shape does not match grid")
        if field.ndim not in (grid.ndim, grid.ndim + 1):
            raise ValueError("field may have at most one spinor axis")
        if rep not in (POSITION, MOMENTUM):
            raise ValueError("rep must be 'position' or 'momentum'")
        self.grid = grid
        self.field = field
        self.rep = rep
        #: set by transforms whose output has nontrivial edge mass
        self.clearance_warning = False
        if normalize:
            self._normalize()

    # -- norm and normalisation -------------------------------------------

    @property
    def _dv(self):
        return (self.grid.cell_volume if self.rep == POSITION
                else self.grid.dual_cell_volume)

    @property
    def has_spinor(self):
        return self.field.ndim == self.grid.ndim + 1

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.field) ** 2) * self._dv))

    def _normalize(self):
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalise the zero field")
        self.field = self.field / n

    def normalize(self):
        self._normalize()
        return self

    def density(self):
        """|Phi|^2 over the grid (spinor index summed out)."""
        d = np.abs(self.field) ** 2
        if self.has_spinor:
            d = d.sum(axis=0)
        return d

    def edge_clearance(self, margin_cells=2):
        d = self.density()
        if self.rep == MOMENTUM:
            # FFT order puts the large-|p| edge in the array middle
            d = np.fft.fftshift(d)
        return self.grid.edge_clearance(d, margin_cells)

    def copy(self):
        return EventState(self.grid, self.field.copy(), self.rep,
                          normalize=False)

    # -- representations --------------------------------------------------

    def to_momentum_rep(self):
        if self.rep == MOMENTUM:
            return self.copy()
        return EventState(self.grid, to_momentum(self.field, self.grid),
                          MOMENTUM, normalize=False)

    def to_position_rep(self):
        if self.rep == POSITION:
            return self.copy()
        return EventState(self.grid, to_position(self.field, self.grid),
                          POSITION, normalize=False)

    # -- probabilities ----------------------------------------------------

    def born_probability(self, region):
        """Probability that the event lies in `region`.

        `region` is a boolean mask over the grid, a callable taking the
        coordinate meshes (x0, x1, ...) and returning one, or a dict
        {"axis": a, "lo": lo, "hi": hi} for a coordinate slab.  Slab
        regions weight boundary cells by their overlap fraction, which
        converges like delta^2 instead of delta.
        """
        if isinstance(region, dict):
            a = region["axis"]
            lo, hi = region["lo"], region["hi"]
            ax = self.grid.axes[a]
            c = ax.coords if self.rep == POSITION else ax.dual_coords
            d = ax.delta if self.rep == POSITION else ax.dual_delta
            # fraction of each cell [c - d/2, c + d/2] inside [lo, hi]
            frac = (np.minimum(c + d / 2, hi) - np.maximum(c - d / 2, lo)) / d
            frac = np.clip(frac, 0.0, 1.0)
            shape = [1] * self.grid.ndim
            shape[a] = ax.n
            region = frac.reshape(shape)
        elif callable(region):
            meshes = [self.grid.coord_mesh(a) if self.rep == POSITION
                      else self.grid.dual_mesh(a)
                      for a in range(self.grid.ndim)]
            region = region(*meshes)
        region = np.broadcast_to(region, self.grid.shape)
        return float(np.sum(self.density() * region) * self._dv)

    def spinor_probabilities(self):
        """P(sigma): probability of each spinor component."""
        if not self.has_spinor:
            raise ValueError("state has no spinor index")
        d = np.abs(self.field) ** 2
        axes = tuple(range(1, d.ndim))
        return d.sum(axis=axes) * self._dv

    def overlap(self, other):
        """Complex scalar product <self|other> (same grid and rep)."""
        if self.grid != other.grid:
            raise ValueError("states live on different grids")
        b = other if other.rep == self.rep else (
            other.to_momentum_rep() if self.rep == MOMENTUM
            else other.to_position_rep())
        return complex(np.sum(np.conj(self.field) * b.field) * self._dv)

    def overlap_probability(self, other):
        """Transition probability |<self|other>|^2."""
        return float(np.abs(self.overlap(other)) ** 2)

    # -- moments ----------------------------------------------------------

    def _moment_mesh(self, mu, which):
        """Coordinate mesh of X^mu or P^mu in the matching representation."""
        if which == "X":
            st = self.to_position_rep()
            mesh = st.grid.coord_mesh(mu)
        elif which == "P":
            st = self.to_momentum_rep()
            mesh = st.grid.dual_mesh(mu)
        else:
            raise ValueError("which must be 'X' or 'P'")
        return st, mesh

    def expectation(self, mu, which="X"):
        """<X^mu> or <P^mu>."""
        st, mesh = self._moment_mesh(mu, which)
        return float(np.sum(mesh * st.density()) * st._dv)

    def four_position_mean(self):
        return np.array([self.expectation(mu, "X") for mu in
                         range(self.grid.ndim)])

    def four_momentum_mean(self):
        return np.array([self.expectation(mu, "P") for mu in
                         range(self.grid.ndim)])

    def uncertainty(self, mu, which="X"):
        """Standard deviation of X^mu or P^mu."""
        st, mesh = self._moment_mesh(mu, which)
        d = st.density()
        m1 = np.sum(mesh * d) * st._dv
        m2 = np.sum(mesh ** 2 * d) * st._dv
        return float(np.sqrt(max(m2 - m1 ** 2, 0.0)))

    def uncertainty_product(self, mu):
        """(Delta X^mu, Delta P^mu, product), no sum over mu.  The
        product is >= 1/2 for any state; the time axis obeys the same
        bound as the space axes."""
        dx = self.uncertainty(mu, "X")
        dp = self.uncertainty(mu, "P")
        return dx, dp, dx * dp

    # -- constructors -----------------------------------------------------

    @classmethod
    def gaussian_packet(cls, grid, centers=None, widths=None, momentum=None,
                        spinor_weights=None):
        """Separable Gaussian with a plane-wave carrier.

        Amplitude prod_mu exp(-(x^mu - c^mu)^2 / (2 sigma_mu^2)), so the
        standard deviation of |Phi|^2 along axis mu is sigma_mu/sqrt(2)
        and Delta X * Delta P = 1/2 exactly, times the carrier
        exp(-i(p0^0 t - p_vec . x_vec)) which centres the momentum
        density at +p0 (time axis: +p0^0).
        """
        nd = grid.ndim
        centers = np.zeros(nd) if centers is None else np.asarray(centers, float)
        widths = np.ones(nd) if widths is None else np.asarray(widths, float)
        momentum = np.zeros(nd) if momentum is None else np.asarray(momentum, float)
        field = np.ones(grid.shape, dtype=complex)
        for mu in range(nd):
            x = grid.coord_mesh(mu)
            # time axis (4D grids) carries the Minkowski-dot sign
            s = -1.0 if (nd == 4 and mu == 0) else +1.0
            field = field * np.exp(-(x - centers[mu]) ** 2 /
                                   (2 * widths[mu] ** 2)
                                   + s * 1j * momentum[mu] * x)
        if spinor_weights is not None:
            w = np.asarray(spinor_weights, dtype=complex)
            w = w / np.linalg.norm(w)
            field = w.reshape((len(w),) + (1,) * nd) * field
        return cls(grid, field, POSITION)

    # -- serialisation ----------------------------------------------------

    def save(self, path):
        """Write raw little-endian (re, im) float64 pairs plus a JSON
        sidecar `path + '.json'` describing grid, representation, shape."""
        with open(path, "wb") as fh:
            fh.write(np.ascontiguousarray(self.field).astype("<c16").tobytes())
        sidecar = {
            "format": "interleaved-re-im-float64-little-endian",
            "shape": list(self.field.shape),
            "rep": self.rep,
            "spinor_dim": (self.field.shape[0] if self.has_spinor else 0),
            "grid": self.grid.to_dict(),
        }
        with open(path + ".json", "w") as fh:
            json.dump(sidecar, fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path + ".json") as fh:
            sidecar = json.load(fh)
        grid = grid_from_dict(sidecar["grid"])
        count = int(np.prod(sidecar["shape"]))
        data = np.fromfile(path, dtype="<c16", count=count)
        field = data.reshape(sidecar["shape"]).astype(complex)
        return cls(grid, field, sidecar["rep"], normalize=False)


def random_band_limited(grid, rng, bandwidth_frac=0.25, spread=2.0):
    """Random smooth state: Gaussian-enveloped random spectrum.

    Used by property-style tests; the spectrum is confined to the
    central `bandwidth_frac` of each dual axis so products and
    resamplings stay alias-free.
    """
    spec = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    for a in range(grid.ndim):
        p = grid.dual_mesh(a)
        cut = bandwidth_frac * grid.axes[a].nyquist
        spec = spec * np.exp(-(p / cut) ** 2)
    field = to_position(spec, grid)
    # localise in position too so edge mass is negligible
    for a in range(grid.ndim):
        x = grid.coord_mesh(a)
        c = 0.5 * (x.min() + x.max())
        w = spread * grid.axes[a].delta * grid.axes[a].n / 8.0
        field = field * np.exp(-((x - c) / w) ** 2)
    return EventState(grid, field, POSITION)
