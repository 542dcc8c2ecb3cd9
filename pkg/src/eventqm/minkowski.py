"""
Minkowski four-vectors and Lorentz transformations.

Conventions (natural units, hbar = c = 1):
    metric      eta = diag(+1, -1, -1, -1), index order (t, x, y, z)
    dot product a.b = a^0 b^0 - a.b (spatial)
    boosts      proper orthochronous only: Lambda^T eta Lambda = eta,
                det Lambda = +1, Lambda^0_0 >= 1
"""

import json

import numpy as np
from scipy.linalg import expm

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

#: tolerance on Lambda^T eta Lambda - eta for a matrix to count as Lorentz
ORTHOGONALITY_TOL = 1e-12

# Dirac matrices, standard representation:
#   gamma^0 = diag(1, 1, -1, -1),  gamma^i = [[0, sigma_i], [-sigma_i, 0]]
PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

GAMMA = np.zeros((4, 4, 4), dtype=complex)
GAMMA[0] = np.diag([1, 1, -1, -1]).astype(complex)
for _i in range(3):
    GAMMA[_i + 1, :2, 2:] = PAULI[_i]
    GAMMA[_i + 1, 2:, :2] = -PAULI[_i]


def four_vector(t, x=0.0, y=0.0, z=0.0):
    """Build a contravariant four-vector (t, x, y, z) as a float array."""
    return np.array([t, x, y, z], dtype=float)


def lower(a):
    """Lower the index: a_mu = eta_{mu nu} a^nu."""
    return METRIC @ np.asarray(a)


def minkowski_dot(a, b):
    """Invariant product a^mu b_mu = a0*b0 - a1*b1 - a2*b2 - a3*b3.

    Works on stacked arrays whose last axis has length 4.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def is_lorentz(mat, tol=ORTHOGONALITY_TOL):
    """True if mat is proper orthochronous Lorentz within tol."""
    mat = np.asarray(mat)
    if mat.shape != (4, 4):
        return False
    ortho = np.max(np.abs(mat.T @ METRIC @ mat - METRIC)) <= tol
    return bool(ortho and np.linalg.det(mat) > 0 and mat[0, 0] >= 1 - tol)


def boost_matrix(axis, v):
    """Boost along spatial axis (1, 2 or 3) with velocity v, |v| < 1.

    Active transformation: a particle at rest acquires momentum
    p^axis = +gamma*m*v under Lambda.
    """
    if axis not in (1, 2, 3):
        raise ValueError("boost axis must be 1, 2 or 3")
    if not abs(v) < 1:
        raise ValueError("|v| must be < 1")
    gamma = 1.0 / np.sqrt(1.0 - v * v)
    mat = np.eye(4)
    mat[0, 0] = mat[axis, axis] = gamma
    mat[0, axis] = mat[axis, 0] = gamma * v
    return mat


def rotation_matrix(axis, theta):
    """Rotation by theta about spatial axis (1, 2 or 3), right-handed.

    axis=3, theta=pi/2 maps x-hat -> y-hat; axis=2, theta=pi/2 maps
    z-hat -> x-hat.
    """
    if axis not in (1, 2, 3):
        raise ValueError("rotation axis must be 1, 2 or 3")
    i, j = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[axis]
    c, s = np.cos(theta), np.sin(theta)
    mat = np.eye(4)
    mat[i, i] = mat[j, j] = c
    mat[j, i] = s
    mat[i, j] = -s
    return mat


def rotation_spinor_block(axis, theta):
    """Unitary 4x4 Dirac-spinor block for a spatial rotation:
    exp(-i theta/2 * diag(sigma_axis, sigma_axis))."""
    half = expm(-0.5j * theta * PAULI[axis - 1])
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = half
    out[2:, 2:] = half
    return out


def boost_spinor_block(axis, v):
    """Dirac-spinor block for a boost (NOT unitary):
    exp(zeta/2 * gamma^0 gamma^axis) with tanh(zeta) = v."""
    zeta = np.arctanh(v)
    return expm(0.5 * zeta * GAMMA[0] @ GAMMA[axis])


class LorentzTransform:
    """A proper orthochronous Lorentz matrix with an optional factor list.

    The factor list records how the transform was assembled from
    primitive boosts and rotations; position-space resampling uses it
    when available and falls back to a matrix decomposition otherwise.
    """

    def __init__(self, matrix, kind="composite", factors=None):
        matrix = np.array(matrix, dtype=float)
        if not is_lorentz(matrix):
            raise ValueError("matrix is not proper orthochronous Lorentz")
        self.matrix = matrix
        self.kind = kind
        # list of ("boost"|"rotation", axis, parameter)
        self.factors = list(factors) if factors is not None else None

    @classmethod
    def identity(cls):
        return cls(np.eye(4), kind="identity", factors=[])

    @classmethod
    def boost(cls, axis, v):
        return cls(boost_matrix(axis, v), kind="boost",
                   factors=[("boost", axis, v)])

    @classmethod
    def rotation(cls, axis, theta):
        return cls(rotation_matrix(axis, theta), kind="rotation",
                   factors=[("rotation", axis, theta)])

    @property
    def inverse_matrix(self):
        # Lambda^-1 = eta Lambda^T eta, exact for Lorentz matrices
        return METRIC @ self.matrix.T @ METRIC

    def inverse(self):
        inv_factors = None
        if self.factors is not None:
            inv_factors = [(k, ax, -p) for (k, ax, p) in reversed(self.factors)]
        return LorentzTransform(self.inverse_matrix, kind=self.kind,
                                factors=inv_factors)

    def compose(self, other):
        """Return self o other (apply `other` first)."""
        mat = self.matrix @ other.matrix
        factors = None
        if self.factors is not None and other.factors is not None:
            factors = list(other.factors) + list(self.factors)
        out = LorentzTransform(mat, kind="composite", factors=factors)
        return out._simplified()

    def _simplified(self):
        """Collapse the factor list when the product is again primitive
        (e.g. collinear boosts combine by velocity addition)."""
        m = self.matrix
        if np.allclose(m, np.eye(4), atol=1e-13):
            return LorentzTransform(np.eye(4), kind="identity", factors=[])
        for axis in (1, 2, 3):
            # pure boost along one axis?
            v = m[0, axis] / m[0, 0] if m[0, 0] > 0 else None
            if v is not None and abs(v) < 1:
                if np.allclose(m, boost_matrix(axis, v), atol=1e-12):
                    return LorentzTransform.boost(axis, v)
            # pure rotation about one axis?
            i, j = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[axis]
            theta = np.arctan2(m[j, i], m[i, i])
            if np.allclose(m, rotation_matrix(axis, theta), atol=1e-12):
                return LorentzTransform.rotation(axis, theta)
        return self

    def spinor_block(self):
        """Dirac-spinor representation S(Lambda) built from the factors.

        Unitary for pure rotations; boosts contribute non-unitary
        hyperbolic blocks. Requires a factor list.
        """
        if self.factors is None:
            raise ValueError("spinor block needs a factor decomposition")
        out = np.eye(4, dtype=complex)
        for kind, axis, par in self.factors:
            blk = (rotation_spinor_block(axis, par) if kind == "rotation"
                   else boost_spinor_block(axis, par))
            out = blk @ out
        return out

    def to_dict(self):
        return {
            "kind": self.kind,
            "matrix": self.matrix.tolist(),
            "factors": self.factors,
        }

    @classmethod
    def from_dict(cls, d):
        factors = d.get("factors")
        if factors is not None:
            factors = [(k, ax, p) for (k, ax, p) in factors]
        return cls(np.array(d["matrix"]), kind=d.get("kind", "composite"),
                   factors=factors)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))
