"""
Poincare transformations as unitaries on event wavefunctions.

Position action (scalar states):  Phi'(x) = Phi(Lambda^-1 (x - a))
Momentum action:                  Phi~'(p) = e^{i p.a} Phi~(Lambda^-1 p)
with the Minkowski dot p.a = p^0 a^0 - p_vec . a_vec.  The two actions
are intertwined by the 4D Fourier transform.

Generators: X^mu (multiply by the coordinate), P^mu -> i d^mu in the
position representation (P^0 = +i d_t, P^j = -i d_j), and
M^{mu nu} = X^mu P^nu - X^nu P^mu.  They satisfy

    [X^mu, P^nu] = -i eta^{mu nu}
    [M^{mu nu}, P^rho] = -i (eta^{mu rho} P^nu - eta^{nu rho} P^mu)

Resampling at Lambda^-1(x - a) is exact band-limited (trigonometric)
interpolation: the linear part is factored into single-axis shear/scale
passes, each a small dense evaluation of the 1D trigonometric
interpolant, and the translation is a momentum-space phase.
"""

import json

import numpy as np
import scipy.linalg

from .minkowski import METRIC, LorentzTransform, boost_matrix, rotation_matrix
from .spectral import axis_to_dual, axis_to_primal, _signs, SQRT_2PI
from .states import EventState, POSITION, MOMENTUM
from .grids import AxisGrid, Grid4D

# ---------------------------------------------------------------------------
# generator application with per-axis representation tracking
# ---------------------------------------------------------------------------


class _OpField:
    """A field whose axes may individually sit in position or momentum
    space; lets X^mu / P^mu act with single-axis transforms only."""

    def __init__(self, state):
        st = state.to_position_rep()
        self.grid = st.grid
        self.field = st.field.astype(complex)
        self.axis_rep = ["x"] * self.grid.ndim
        self._signs = _signs(self.grid)

    @property
    def _off(self):
        return self.field.ndim - self.grid.ndim

    def _ensure(self, mu, want):
        if self.axis_rep[mu] == want:
            return
        fax = self._off + mu
        ax = self.grid.axes[mu]
        s = self._signs[mu]
        if want == "p":
            self.field = axis_to_dual(self.field, ax, fax, s)
        else:
            self.field = axis_to_primal(self.field, ax, fax, s)
        self.axis_rep[mu] = want

    def apply_X(self, mu):
        self._ensure(mu, "x")
        self.field = self.field * self.grid.coord_mesh(mu)
        return self

    def apply_P(self, mu):
        self._ensure(mu, "p")
        self.field = self.field * self.grid.dual_mesh(mu)
        return self

    def apply_M(self, mu, nu):
        """M^{mu nu} = X^mu P^nu - X^nu P^mu (mu != nu, so the factors
        act on different axes and commute)."""
        a = self.copy().apply_P(nu).apply_X(mu)
        b = self.copy().apply_P(mu).apply_X(nu)
        a.align_with(b)
        self.field = a.field - b.field
        self.axis_rep = list(a.axis_rep)
        return self

    def apply_label(self, label):
        kind = label[0]
        if kind == "X":
            return self.apply_X(label[1])
        if kind == "P":
            return self.apply_P(label[1])
        if kind == "M":
            return self.apply_M(label[1], label[2])
        raise ValueError(f"unknown operator label {label!r}")

    def copy(self):
        out = object.__new__(_OpField)
        out.grid = self.grid
        out.field = self.field.copy()
        out.axis_rep = list(self.axis_rep)
        out._signs = self._signs
        return out

    def align_with(self, other):
        for mu in range(self.grid.ndim):
            self._ensure(mu, other.axis_rep[mu])

    def position_field(self):
        for mu in range(self.grid.ndim):
            self._ensure(mu, "x")
        return self.field

    def scaled(self, z):
        out = self.copy()
        out.field = out.field * z
        return out

    def minus(self, other):
        o = other.copy()
        o.align_with(self)
        out = self.copy()
        out.field = out.field - o.field
        return out

    def l2(self):
        dv = 1.0
        for mu, r in enumerate(self.axis_rep):
            ax = self.grid.axes[mu]
            dv *= ax.delta if r == "x" else ax.dual_delta
        return float(np.sqrt(np.sum(np.abs(self.field) ** 2) * dv))


def apply_operator(state, label):
    """Apply X^mu / P^mu / M^{mu nu} to a state; returns an un-normalised
    EventState in the position representation."""
    op = _OpField(state)
    op.apply_label(label)
    return EventState(state.grid, op.position_field(), POSITION,
                      normalize=False)


def _algebra_rhs(a, b):
    """The operator-valued right-hand side of [a, b] as a list of
    (coefficient, label) terms; labels as in apply_operator."""
    eta = METRIC

    def key(lbl):
        return lbl[0]

    ka, kb = key(a), key(b)
    if {ka, kb} == {"X", "P"}:
        (xm,), (pn,) = ((a[1],), (b[1],)) if ka == "X" else ((b[1],), (a[1],))
        sign = 1.0 if ka == "X" else -1.0
        return [(sign * -1j * eta[xm, pn], ("I",))]
    if ka == kb and ka in ("X", "P"):
        return []
    if {ka, kb} == {"M", "P"}:
        flip = ka == "P"
        (mu, nu) = (b[1], b[2]) if flip else (a[1], a[2])
        rho = a[1] if flip else b[1]
        sign = -1.0 if flip else 1.0
        return [(sign * -1j * eta[mu, rho], ("P", nu)),
                (sign * +1j * eta[nu, rho], ("P", mu))]
    if ka == kb == "M":
        mu, nu = a[1], a[2]
        rho, sg = b[1], b[2]
        return [(1j * eta[nu, rho], ("M", mu, sg)),
                (-1j * eta[mu, rho], ("M", nu, sg)),
                (-1j * eta[mu, sg], ("M", rho, nu)),
                (1j * eta[nu, sg], ("M", rho, mu))]
    raise ValueError(f"no algebra relation coded for {a!r}, {b!r}")


def commutator_check(state, a, b):
    """Relative residual || ([a,b] - rhs) psi || / || psi ||.

    a, b are operator labels ("X", mu), ("P", mu) or ("M", mu, nu).
    """
    ab = _OpField(state).apply_label(b).apply_label(a)
    ba = _OpField(state).apply_label(a).apply_label(b)
    comm = ab.minus(ba)
    acc = comm.position_field()
    for coeff, lbl in _algebra_rhs(a, b):
        if lbl == ("I",):
            term = coeff * state.to_position_rep().field
        else:
            term = coeff * _OpField(state).apply_label(lbl).position_field()
        acc = acc - term
    dv = state.grid.cell_volume
    return float(np.sqrt(np.sum(np.abs(acc) ** 2) * dv))


def generator_exponential(state, mu, nu, theta, tol=1e-12, max_terms=400):
    """exp(-i theta M^{mu nu}) psi by an adaptive power series."""
    acc = _OpField(state)
    term = acc.copy()
    out = acc.position_field().copy()
    for k in range(1, max_terms):
        term.apply_M(mu, nu)
        term.field *= (-1j * theta) / k
        out = out + term.position_field()
        if term.l2() < tol:
            break
    else:
        raise RuntimeError("generator series did not converge")
    return EventState(state.grid, out, POSITION, normalize=False)


def finite_transform_of_generator(mu, nu, theta):
    """The Lorentz matrix implemented by exp(-i theta M^{mu nu}).

    The flow of the unitary on wavefunctions is x -> Lambda(theta) x
    with dLambda/dtheta = G Lambda, G[nu, mu] = -eta_nunu,
    G[mu, nu] = +eta_mumu (derived from P^mu -> i d^mu).
    """
    g = np.zeros((4, 4))
    g[nu, mu] = -METRIC[nu, nu]
    g[mu, nu] = METRIC[mu, mu]
    return scipy.linalg.expm(theta * g)


def generator_exponential_check(state, mu, nu, theta):
    """Residual between the power series for exp(-i theta M^{mu nu})
    and the resampled finite transformation."""
    series = generator_exponential(state, mu, nu, theta)
    lam = LorentzTransform(finite_transform_of_generator(mu, nu, theta))
    lam = lam._simplified()
    finite = PoincareElement(lam).apply_position(state)
    dv = state.grid.cell_volume
    return float(np.sqrt(np.sum(np.abs(series.field - finite.field) ** 2)
                         * dv))


# ---------------------------------------------------------------------------
# band-limited affine resampling
# ---------------------------------------------------------------------------


def _row_factorization(t):
    """Factor an invertible matrix t into elementary matrices G_0..G_{d-1}
    (identity except row i) with G_0 @ G_1 @ ... @ G_{d-1} = t."""
    d = t.shape[0]
    rows = [None] * d
    w = np.eye(d)
    for i in range(d - 1, -1, -1):
        gi = np.linalg.solve(w.T, t[i])
        if abs(gi[i]) < 1e-10:
            raise np.linalg.LinAlgError("zero pivot in row factorization")
        rows[i] = gi
        g = np.eye(d)
        g[i] = gi
        w = g @ w
    if not np.allclose(w, t, atol=1e-9 * max(1.0, np.abs(t).max())):
        raise np.linalg.LinAlgError("row factorization failed")
    return rows


def _factor_linear_map(m):
    """Decompose m into (axis_permutation, rows) so that m = P @ G0..G3.

    Tries the permutation-free factorization first and falls back to
    LU pivoting when a pivot vanishes (e.g. quarter-turn rotations).
    """
    d = m.shape[0]
    try:
        return None, _row_factorization(m)
    except np.linalg.LinAlgError:
        pass
    p, l, u = scipy.linalg.lu(m)
    perm = np.argmax(p, axis=0)  # (P x)_i = x_perm... see below
    rows = _row_factorization(l @ u)
    return p, rows


def _resample_axis_row(field, grid, axis, row, off):
    """Replace coordinate `axis` by row . x via 1D trig interpolation.

    Evaluates f(..., sum_j row_j x_j, ...) for every grid point.  The
    target separates into a part along the axis and a part over the
    others, so the evaluation is one small dense matrix per axis plus
    an elementwise phase.
    """
    nd = grid.ndim
    fax = off + axis
    ax = grid.axes[axis]
    s = _signs(grid)[axis]
    spec = axis_to_dual(field, ax, fax, s)
    p = ax.dual_coords
    # phase from the cross terms sum_{j != axis} row_j x_j
    cross = np.zeros((1,) * nd)
    for j in range(nd):
        if j != axis and row[j] != 0.0:
            cross = cross + row[j] * grid.coord_mesh(j)
    if np.any(cross):
        pm = p.reshape([ax.n if k == axis else 1 for k in range(nd)])
        spec = spec * np.exp(-s * 1j * pm * cross)
    # dense evaluation along the axis: targets row[axis] * x_j
    a = np.exp(-s * 1j * np.outer(row[axis] * ax.coords, p))  # (targets, modes)
    moved = np.moveaxis(spec, fax, -1)
    out = moved @ a.T
    out = np.moveaxis(out, -1, fax)
    return (ax.dual_delta / SQRT_2PI) * out


def _apply_axis_permutation(field, grid, p, off):
    """Return samples of F(P x) for a permutation matrix p; requires the
    permuted axes to carry identical grids."""
    d = grid.ndim
    # (P x)_i = x_{c(i)} with c(i) the column holding the 1 in row i
    c = [int(np.argmax(p[i])) for i in range(d)]
    for i in range(d):
        if c[i] != i and grid.axes[i] != grid.axes[c[i]]:
            raise ValueError("permutation mixes incompatible axes")
    order = list(range(off)) + [off + c[i] for i in range(d)]
    return np.transpose(field, axes=order)


def resample_linear(field, grid, m):
    """Samples of F(m x) on the same grid by exact band-limited
    interpolation (periodic wrap-around; callers check clearance)."""
    field = np.asarray(field, dtype=complex)
    off = field.ndim - grid.ndim
    p, rows = _factor_linear_map(np.asarray(m, dtype=float))
    if p is not None:
        field = _apply_axis_permutation(field, grid, p, off)
    for axis, row in enumerate(rows):
        field = _resample_axis_row(field, grid, axis, row, off)
    return field


def _three_shears(block, i, j, d):
    """Unit-determinant 2x2 block on axes (i, j) as three unit shears
    [[1,b1],[0,1]] [[1,0],[c2,1]] [[1,b3],[0,1]]; shears keep
    intermediate supports small (no axis scaling), which matters on a
    periodic box."""
    (a, b), (c, dd) = block
    if abs(c) < 1e-14:
        if abs(a - 1) < 1e-14 and abs(dd - 1) < 1e-14:
            if b == 0.0:
                return []
            row = np.zeros(d)
            row[i], row[j] = 1.0, b
            return [(i, row)]
        raise np.linalg.LinAlgError("degenerate block for shears")
    out = []
    for axis, coef in ((i, (a - 1) / c), (j, c), (i, (dd - 1) / c)):
        row = np.zeros(d)
        row[axis] = 1.0
        row[j if axis == i else i] = coef
        out.append((axis, row))
    return out


def _primitive_inverse_steps(kind, axis, par, d):
    """Shear steps realising F(g^-1 x) for one primitive factor g."""
    if kind == "boost":
        i, j = 0, axis
        inv = np.linalg.inv(boost_matrix(axis, par))
    else:
        i, j = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[axis]
        inv = np.linalg.inv(rotation_matrix(axis, par))
    block = np.array([[inv[i, i], inv[i, j]], [inv[j, i], inv[j, j]]])
    return _three_shears(block, i, j, d)


def resample_lorentz(field, grid, lorentz):
    """Samples of F(Lambda^-1 x).  Uses the primitive factor list
    (three unit shears per boost/rotation) when available; otherwise a
    generic row factorization of the matrix."""
    field = np.asarray(field, dtype=complex)
    if lorentz.factors is None:
        return resample_linear(field, grid, lorentz.inverse_matrix)
    off = field.ndim - grid.ndim
    try:
        steps = []
        for kind, axis, par in lorentz.factors:
            steps.extend(_primitive_inverse_steps(kind, axis, par, grid.ndim))
    except np.linalg.LinAlgError:
        return resample_linear(field, grid, lorentz.inverse_matrix)
    for axis, row in steps:
        field = _resample_axis_row(field, grid, axis, row, off)
    return field


def translate(field, grid, a, rep=POSITION):
    """Samples of F(x - a) (or the momentum-space phase for rep
    'momentum': multiply by e^{i p.a})."""
    field = np.asarray(field, dtype=complex)
    off = field.ndim - grid.ndim
    signs = _signs(grid)
    if rep == POSITION:
        for mu in range(grid.ndim):
            if a[mu] == 0.0:
                continue
            ax = grid.axes[mu]
            s = signs[mu]
            spec = axis_to_dual(field, ax, off + mu, s)
            pm = ax.dual_coords.reshape(
                [ax.n if k == mu else 1 for k in range(grid.ndim)])
            spec = spec * np.exp(s * 1j * pm * a[mu])
            field = axis_to_primal(spec, ax, off + mu, s)
    else:
        for mu in range(grid.ndim):
            if a[mu] == 0.0:
                continue
            pm = grid.dual_mesh(mu)
            field = field * np.exp(signs[mu] * 1j * pm * a[mu])
    return field


def _shifted_dual_grid(grid):
    """Monotonic version of the momentum sample lattice (for resampling
    momentum-space fields, which are stored in FFT order)."""
    axes = []
    for ax in grid.axes:
        axes.append(AxisGrid(ax.n, ax.dual_delta, origin=-ax.nyquist))
    return type(grid)(axes)


# ---------------------------------------------------------------------------
# Poincare elements
# ---------------------------------------------------------------------------


class ClearanceError(ValueError):
    """Raised when a transformed state has wrapped around the periodic
    box; carries the offending edge-mass fraction."""

    def __init__(self, edge_mass, threshold):
        self.edge_mass = edge_mass
        self.threshold = threshold
        super().__init__(
            f"transformed support left the box: fraction {edge_mass:.3e} "
            f"of the probability mass sits in the outer grid margin "
            f"(threshold {threshold:.1e}); enlarge the box or shrink "
            f"the packet")


#: edge-mass fraction above which a transform is rejected outright
REJECT_EDGE_MASS = 1e-4
#: edge-mass fraction above which the result is flagged
WARN_EDGE_MASS = 1e-10


def _check_clearance(out):
    frac = out.edge_clearance()
    if frac > REJECT_EDGE_MASS:
        raise ClearanceError(frac, REJECT_EDGE_MASS)
    out.clearance_warning = frac > WARN_EDGE_MASS
    return out


class PoincareElement:
    """(Lambda, a): x -> Lambda x + a with Lambda proper orthochronous."""

    def __init__(self, lorentz=None, translation=None):
        self.lorentz = lorentz if lorentz is not None \
            else LorentzTransform.identity()
        self.translation = (np.zeros(4) if translation is None
                            else np.asarray(translation, dtype=float))

    @classmethod
    def boost(cls, axis, v, translation=None):
        return cls(LorentzTransform.boost(axis, v), translation)

    @classmethod
    def rotation(cls, axis, theta, translation=None):
        return cls(LorentzTransform.rotation(axis, theta), translation)

    @classmethod
    def translation_only(cls, a):
        return cls(LorentzTransform.identity(), a)

    @property
    def kind(self):
        if np.any(self.translation):
            if self.lorentz.kind == "identity":
                return "translation"
            return "composite"
        return self.lorentz.kind

    def compose(self, other):
        """self o other: x -> L_s (L_o x + a_o) + a_s."""
        lam = self.lorentz.compose(other.lorentz)
        a = self.lorentz.matrix @ other.translation + self.translation
        return PoincareElement(lam, a)

    def inverse(self):
        inv = self.lorentz.inverse()
        return PoincareElement(inv, -(inv.matrix @ self.translation))

    # -- unitary actions ---------------------------------------------------

    def apply_position(self, state, spinor_boosts=False):
        """Phi'(x) = Phi(Lambda^-1 (x - a)), resampled in position space.

        Spinor states are rotated with the (unitary) spinor block; boost
        factors in the spinor representation are refused unless
        spinor_boosts=True, because the boost blocks are not unitary
        (the result is renormalised).
        """
        st = state.to_position_rep()
        field = resample_lorentz(st.field, st.grid, self.lorentz)
        field = translate(field, st.grid, self.translation, POSITION)
        field = self._spinor_mix(st, field, spinor_boosts)
        out = EventState(st.grid, field, POSITION, normalize=False)
        if state.has_spinor and spinor_boosts:
            out.normalize()
        return _check_clearance(out)

    def apply_momentum(self, state, spinor_boosts=False):
        """Phi~'(p) = e^{i p.a} Phi~(Lambda^-1 p), resampled in
        momentum space (stored FFT order is shifted to monotonic order
        for the interpolation and shifted back)."""
        st = state.to_momentum_rep()
        grid = st.grid
        off = st.field.ndim - grid.ndim
        axes = tuple(range(off, st.field.ndim))
        work = np.fft.fftshift(st.field, axes=axes)
        dual = _shifted_dual_grid(grid)
        work = resample_lorentz(work, dual, self.lorentz)
        field = np.fft.ifftshift(work, axes=axes)
        field = translate(field, grid, self.translation, MOMENTUM)
        field = self._spinor_mix(st, field, spinor_boosts)
        out = EventState(grid, field, MOMENTUM, normalize=False)
        if state.has_spinor and spinor_boosts:
            out.normalize()
        return _check_clearance(out)

    def _spinor_mix(self, st, field, spinor_boosts):
        if not st.has_spinor:
            return field
        if self.lorentz.kind == "identity" or (
                self.lorentz.factors is not None and not self.lorentz.factors):
            return field
        if not spinor_boosts:
            if self.lorentz.factors is None or any(
                    k == "boost" for k, _, _ in self.lorentz.factors):
                raise ValueError(
                    "boost of a spinor state needs spinor_boosts=True "
                    "(the spinor boost representation is not unitary)")
        s_inv = np.linalg.inv(self.lorentz.spinor_block())
        return np.einsum("st,t...->s...", s_inv, field)

    # -- serialisation -----------------------------------------------------

    def to_dict(self):
        return {"lorentz": self.lorentz.to_dict(),
                "translation": self.translation.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(LorentzTransform.from_dict(d["lorentz"]),
                   np.array(d["translation"]))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


def scalar_product_invariance(element, state_a, state_b, rep=POSITION):
    """(<a|b> before, <Ua|Ub> after) for the given Poincare element;
    unitarity means |after - before| stays below tolerance."""
    before = state_a.overlap(state_b)
    if rep == POSITION:
        ua = element.apply_position(state_a)
        ub = element.apply_position(state_b)
    else:
        ua = element.apply_momentum(state_a)
        ub = element.apply_momentum(state_b)
    return before, ua.overlap(ub)
