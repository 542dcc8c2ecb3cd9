"""
Multi-event tensor states, exchange symmetry, n-body constraints, and
the occupation-number form of the constraint on a finite mode basis.

An n-event amplitude is a rank-n tensor over a shared single-event mode
space (typically a coarse on-shell momentum grid).  Exchange symmetry
is imposed with the projectors

    Pi^(n,S/A) = (1/n!) sum_p (sign[p]) V_p

and the n-body constraint is the permutation-symmetric sum
K^[n] = sum_j K_j acting on the j-th tensor slot.  When every K_j >= 0
the kernel of the sum is the intersection of the single-event kernels;
an indefinite K_j breaks that (cancellation between slots), which the
kernel_intersection_check demonstrates explicitly.

The Fock form keeps a finite ordered ModeSet and realises a'/a as
occupation bookkeeping (fermionic sign: (-1)^(number of occupied modes
preceding the acted-on mode)); the constraint becomes
sum_k kappa_k n_k, whose kernel is spanned by occupations of kappa=0
modes together with the no-events vacuum — including superpositions of
different event numbers.
"""

import itertools
import json
import math

import numpy as np

from .grids import Grid3D, grid_from_dict
from .spectral import ifft3
from .constraints import (dispersion, boost_onshell_field, KG_PLUS,
                          KG_MINUS, DIRAC)


class AnnihilatedStateError(ValueError):
    """Raised when a projection leaves the zero state (e.g. the
    antisymmetrizer on a repeated factor — Pauli exclusion)."""


# ---------------------------------------------------------------------------
# mode spaces
# ---------------------------------------------------------------------------


class ModeSet:
    """Finite ordered list of single-event modes.

    Each mode carries a constraint weight kappa >= 0 (0 = on-shell,
    i.e. in the constraint kernel), a momentum label p3, and a branch
    tag.  The ordering is part of the definition (fermionic signs).
    """

    def __init__(self, kappas, p3=None, branches=None, ids=None,
                 energies=None, grid=None, allow_indefinite=False):
        kappas = np.asarray(kappas, dtype=float)
        if kappas.ndim != 1:
            raise ValueError("kappas must be a flat list")
        if len(kappas) > 16 and grid is None:
            raise ValueError("ModeSet capped at 16 explicit modes")
        if not allow_indefinite and np.any(kappas < 0):
            raise ValueError("constraint weights must be >= 0")
        self.kappas = kappas
        self.dim = len(kappas)
        self.p3 = (np.zeros((self.dim, 3)) if p3 is None
                   else np.asarray(p3, dtype=float))
        self.branches = (["positive"] * self.dim if branches is None
                         else list(branches))
        self.ids = list(range(self.dim)) if ids is None else list(ids)
        self.energies = energies
        self.grid = grid

    @classmethod
    def from_grid(cls, grid, m, branch="positive"):
        """All momentum modes of a (coarse) Grid3D, every one on-shell
        (kappa = 0) at its branch energy."""
        pmesh = np.stack(np.broadcast_arrays(
            *[grid.dual_mesh(a) for a in range(3)]), axis=-1)
        p3 = pmesh.reshape(-1, 3)
        e = dispersion(m, p3)
        if branch == "negative":
            e = -e
        return cls(np.zeros(len(p3)), p3=p3,
                   branches=[branch] * len(p3), energies=e, grid=grid)

    def to_dict(self):
        return {"modes": [
            {"id": self.ids[k], "kappa": float(self.kappas[k]),
             "onshell": bool(self.kappas[k] == 0.0),
             "p3": [float(c) for c in self.p3[k]],
             "branch": self.branches[k]}
            for k in range(self.dim)]}

    @classmethod
    def from_dict(cls, d):
        modes = d["modes"]
        return cls([m["kappa"] for m in modes],
                   p3=[m["p3"] for m in modes],
                   branches=[m["branch"] for m in modes],
                   ids=[m["id"] for m in modes],
                   allow_indefinite=True)


# ---------------------------------------------------------------------------
# dense n-event tensors
# ---------------------------------------------------------------------------

SYM_NONE = "none"
SYM_S = "symmetric"
SYM_A = "antisymmetric"

_SYM_TOL = 1e-12


def _projector_apply(tensor, kind):
    """(1/n!) sum over slot permutations, signed for the antisymmetric
    projector (parity by inversion count)."""
    n = tensor.ndim
    acc = np.zeros_like(tensor)
    for perm in itertools.permutations(range(n)):
        if kind == SYM_A:
            inv = sum(1 for i in range(n) for j in range(i + 1, n)
                      if perm[i] > perm[j])
            sign = -1.0 if inv % 2 else 1.0
        else:
            sign = 1.0
        acc = acc + sign * np.transpose(tensor, perm)
    return acc / math.factorial(n)


class NEventState:
    """Rank-n amplitude tensor over a shared mode space, unit norm."""

    def __init__(self, tensor, modes=None, symmetry=SYM_NONE,
                 normalize=True, check=True):
        tensor = np.asarray(tensor, dtype=complex)
        if tensor.ndim < 1:
            raise ValueError("need at least one event slot")
        if tensor.ndim > 4:
            raise ValueError("dense tensors capped at n = 4")
        if len(set(tensor.shape)) != 1:
            raise ValueError("all event slots share one mode dimension")
        if modes is not None and modes.dim != tensor.shape[0]:
            raise ValueError("tensor does not match the mode space")
        self.tensor = tensor
        self.modes = modes
        self.symmetry = symmetry
        if normalize:
            nrm = self.norm()
            if nrm < _SYM_TOL:
                raise AnnihilatedStateError("zero amplitude tensor")
            self.tensor = self.tensor / nrm
        if check and symmetry in (SYM_S, SYM_A):
            proj = _projector_apply(self.tensor, symmetry)
            if np.max(np.abs(proj - self.tensor)) > 1e-10:
                raise ValueError(f"tensor is not {symmetry}")

    @property
    def n(self):
        return self.tensor.ndim

    @property
    def dim(self):
        return self.tensor.shape[0]

    def norm(self):
        return float(np.linalg.norm(self.tensor.ravel()))

    def overlap(self, other):
        return complex(np.vdot(self.tensor, other.tensor))

    def copy(self):
        return NEventState(self.tensor.copy(), self.modes, self.symmetry,
                           normalize=False, check=False)


def symmetrize(state, kind):
    """Apply the symmetric (kind 'S') or antisymmetric ('A') projector
    and renormalise.  Raises AnnihilatedStateError if the projection
    kills the state (Pauli exclusion on repeated factors)."""
    sym = {"S": SYM_S, "A": SYM_A}.get(kind, kind)
    if sym not in (SYM_S, SYM_A):
        raise ValueError("kind must be 'S' or 'A'")
    proj = _projector_apply(state.tensor, sym)
    nrm = np.linalg.norm(proj.ravel())
    if nrm < _SYM_TOL:
        raise AnnihilatedStateError(
            "projection annihilates the state")
    return NEventState(proj / nrm, state.modes, sym,
                       normalize=False, check=False)


def lift_product_form(alphas, terms, modes=None):
    """Sum of product states: sum_l alpha_l (psi^(l,1) x ... x psi^(l,n)).

    Each term is a list of n single-event amplitude vectors over the
    shared mode space (OnShellState amplitudes may be passed; their
    momentum arrays are flattened).  The resulting tensor depends only
    on the total amplitude, not on the chosen decomposition.
    """
    alphas = np.asarray(alphas, dtype=complex)
    if len(alphas) != len(terms):
        raise ValueError("one coefficient per product term")
    acc = None
    for alpha, factors in zip(alphas, terms):
        vecs = []
        for f in factors:
            arr = f.psi if hasattr(f, "psi") else np.asarray(f, dtype=complex)
            vecs.append(arr.ravel())
        term = vecs[0]
        for vec in vecs[1:]:
            term = np.multiply.outer(term, vec)
        acc = alpha * term if acc is None else acc + alpha * term
    return NEventState(acc, modes)


def slice_equal_time(state, t):
    """Equal-time n-particle wavefunction: advance every event's mode
    with its dispersion phase e^{-i E_k t}.  If the mode space is
    grid-backed the result is returned in position representation
    (rank-n array over the grid shapes), otherwise in mode space."""
    if state.modes is None or state.modes.energies is None:
        raise ValueError("needs an energy-labelled mode space")
    phases = np.exp(-1j * state.modes.energies * t)
    out = state.tensor.copy()
    for j in range(state.n):
        shape = [1] * state.n
        shape[j] = state.dim
        out = out * phases.reshape(shape)
    grid = state.modes.grid
    if grid is None:
        nrm = np.linalg.norm(out.ravel())
        return out / nrm
    full = out.reshape(grid.shape * state.n)
    for j in range(state.n):
        sub = np.moveaxis(full, tuple(range(3 * j, 3 * j + 3)), (0, 1, 2))
        sub = ifft3(sub, grid)
        full = np.moveaxis(sub, (0, 1, 2), tuple(range(3 * j, 3 * j + 3)))
    nrm = np.sqrt(np.sum(np.abs(full) ** 2) * grid.cell_volume ** state.n)
    return full / nrm


# ---------------------------------------------------------------------------
# n-body constraints
# ---------------------------------------------------------------------------


class NBodyConstraint:
    """Sum of single-event constraint operators, one per tensor slot.

    Each K_j is a diagonal symbol (1D array over modes) or a dense
    Hermitian matrix.  Positivity is checked unless explicitly waived
    (the indefinite counterexample needs the waiver).
    """

    def __init__(self, k_list, allow_indefinite=False):
        self.k_list = []
        for k in k_list:
            k = np.asarray(k, dtype=float)
            if k.ndim == 1:
                eigs = k
            elif k.ndim == 2 and k.shape[0] == k.shape[1]:
                eigs = np.linalg.eigvalsh(k)
            else:
                raise ValueError("K must be a diagonal symbol or a matrix")
            if not allow_indefinite and np.min(eigs) < -1e-12:
                raise ValueError("constraint symbols must be >= 0")
            self.k_list.append(k)

    def _apply_slot(self, tensor, j):
        k = self.k_list[j]
        if k.ndim == 1:
            shape = [1] * tensor.ndim
            shape[j] = len(k)
            return tensor * k.reshape(shape)
        moved = np.moveaxis(tensor, j, -1)
        moved = moved @ k.T
        return np.moveaxis(moved, -1, j)

    def apply(self, tensor):
        acc = np.zeros_like(tensor)
        for j in range(tensor.ndim):
            acc = acc + self._apply_slot(tensor, j)
        return acc


def nbody_apply(constraint, state):
    """(image NEventState or None, relative residual ||K psi||/||psi||)."""
    image = constraint.apply(state.tensor)
    residual = float(np.linalg.norm(image.ravel())
                     / np.linalg.norm(state.tensor.ravel()))
    if residual < _SYM_TOL:
        return None, residual
    out = NEventState(image, state.modes, SYM_NONE,
                      normalize=True, check=False)
    out.symmetry = state.symmetry
    return out, residual


def _dense_slot_matrix(k, dim):
    k = np.asarray(k, dtype=float)
    return np.diag(k) if k.ndim == 1 else k


def _nullspace(mat, tol=1e-10):
    w, v = np.linalg.eigh(mat)
    return v[:, np.abs(w) < tol]


def kernel_intersection_check(k_list, n, allow_indefinite=False, tol=1e-10):
    """Compare ker(sum_j K_j) with the intersection of single kernels.

    Builds the full n-slot operator densely (product dimension capped
    at 4096) and computes exact nullspaces.  With every K_j >= 0 the
    two spaces coincide; the report records both dimensions, whether
    the spaces agree, and the positivity flags, so an indefinite K_j
    shows the equality failing.
    """
    dims = [np.asarray(k).shape[0] for k in k_list]
    if len(set(dims)) != 1 or len(k_list) != n:
        raise ValueError("one K per slot over a common mode dimension")
    d = dims[0]
    total = d ** n
    if total > 4096:
        raise ValueError("product dimension exceeds the 4096 cap")
    eyes = [np.eye(d) for _ in range(n)]
    big = np.zeros((total, total))
    lifted = []
    for j, k in enumerate(k_list):
        mats = list(eyes)
        mats[j] = _dense_slot_matrix(k, d)
        term = mats[0]
        for mmat in mats[1:]:
            term = np.kron(term, mmat)
        lifted.append(term)
        big += term
    ker_sum = _nullspace(big, tol)
    # intersection of the single-slot kernels: nullspace of the stacked
    # (always >= 0) quadratic forms sum_j K_j^T K_j
    sq = sum(term.T @ term for term in lifted)
    ker_inter = _nullspace(sq, tol)
    # subspace equality via projector distance
    proj_sum = ker_sum @ ker_sum.T
    proj_inter = ker_inter @ ker_inter.T
    gap = float(np.max(np.abs(proj_sum - proj_inter))) if total else 0.0
    positive = all(float(np.min(np.linalg.eigvalsh(
        _dense_slot_matrix(k, d)))) > -1e-12 for k in k_list)
    return {
        "dim_kernel_sum": ker_sum.shape[1],
        "dim_kernel_intersection": ker_inter.shape[1],
        "subspace_gap": gap,
        "equal": ker_sum.shape[1] == ker_inter.shape[1] and gap < 1e-8,
        "all_positive": positive,
    }


# ---------------------------------------------------------------------------
# occupation-number (Fock) form
# ---------------------------------------------------------------------------


class FockState:
    """Superposition over occupation vectors of a ModeSet, including
    superpositions of different total event numbers.

    terms: {occupation tuple: complex amplitude}; occupations are
    per-mode counts (fermionic: 0/1).  The empty occupation is the
    no-events vacuum.  Unit total norm.
    """

    def __init__(self, modes, terms, statistics="bose", normalize=True):
        if statistics not in ("bose", "fermi"):
            raise ValueError("statistics must be 'bose' or 'fermi'")
        clean = {}
        for occ, amp in terms.items():
            occ = tuple(int(o) for o in occ)
            if len(occ) != modes.dim:
                raise ValueError("occupation length must match ModeSet")
            if any(o < 0 for o in occ):
                raise ValueError("negative occupation")
            if statistics == "fermi" and any(o > 1 for o in occ):
                raise ValueError("fermionic occupations are 0 or 1")
            if sum(occ) > 6:
                raise ValueError("occupation form capped at 6 events")
            if amp != 0:
                clean[occ] = clean.get(occ, 0.0) + complex(amp)
        self.modes = modes
        self.statistics = statistics
        self.terms = clean
        if normalize:
            nrm = self.norm()
            if nrm < _SYM_TOL:
                raise AnnihilatedStateError("zero Fock state")
            self.terms = {o: a / nrm for o, a in self.terms.items()}

    @classmethod
    def vacuum(cls, modes, statistics="bose"):
        """|0>_4: no events at any place or time (distinct from a field
        ground state — it is the empty occupation, not a lowest-energy
        dynamical state)."""
        return cls(modes, {(0,) * modes.dim: 1.0}, statistics)

    def norm(self):
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.terms.values())))

    def alphas(self):
        """Per-event-number weights alpha_n (root of the mass in each
        total-occupation sector)."""
        out = {}
        for occ, amp in self.terms.items():
            n = sum(occ)
            out[n] = out.get(n, 0.0) + abs(amp) ** 2
        return {n: float(np.sqrt(v)) for n, v in sorted(out.items())}

    def _fermi_sign(self, occ, k):
        return -1.0 if sum(occ[:k]) % 2 else 1.0

    def create(self, k):
        terms = {}
        for occ, amp in self.terms.items():
            if self.statistics == "fermi":
                if occ[k]:
                    continue  # a'^2 = 0
                amp = amp * self._fermi_sign(occ, k)
                new = occ[:k] + (1,) + occ[k + 1:]
            else:
                amp = amp * np.sqrt(occ[k] + 1.0)
                new = occ[:k] + (occ[k] + 1,) + occ[k + 1:]
            terms[new] = terms.get(new, 0.0) + amp
        return FockState(self.modes, terms, self.statistics, normalize=False)

    def annihilate(self, k):
        terms = {}
        for occ, amp in self.terms.items():
            if occ[k] == 0:
                continue
            if self.statistics == "fermi":
                amp = amp * self._fermi_sign(occ, k)
                new = occ[:k] + (0,) + occ[k + 1:]
            else:
                amp = amp * np.sqrt(float(occ[k]))
                new = occ[:k] + (occ[k] - 1,) + occ[k + 1:]
            terms[new] = terms.get(new, 0.0) + amp
        return FockState(self.modes, terms, self.statistics, normalize=False)

    def to_dict(self):
        doc = self.modes.to_dict()
        doc["terms"] = [
            {"occupations": list(occ), "re": float(a.real),
             "im": float(a.imag)}
            for occ, a in sorted(self.terms.items())]
        doc["alphas"] = [a for _, a in sorted(self.alphas().items())]
        doc["statistics"] = self.statistics
        return doc

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc):
        modes = ModeSet.from_dict(doc)
        terms = {tuple(t["occupations"]): t["re"] + 1j * t["im"]
                 for t in doc["terms"]}
        return cls(modes, terms, doc.get("statistics", "bose"),
                   normalize=False)

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


def fock_constraint_apply(fock):
    """Apply sum_k kappa_k n_k occupation-wise.

    Returns (image FockState or None, relative residual).  The kernel
    is exactly the span of occupation states using only kappa = 0
    modes — event-number superpositions included — plus the vacuum.
    """
    kappas = fock.modes.kappas
    terms = {}
    for occ, amp in fock.terms.items():
        weight = float(np.dot(kappas, occ))
        if weight != 0.0:
            terms[occ] = amp * weight
    residual = (np.sqrt(sum(abs(a) ** 2 for a in terms.values()))
                / fock.norm())
    if not terms:
        return None, 0.0
    return (FockState(fock.modes, terms, fock.statistics, normalize=False),
            float(residual))


def boost_multievent(state, v, axis=1, edge_tol=1e-5):
    """Boost every event slot of a grid-backed on-shell tensor state
    with the slice-space boost formula; preserves the symmetry flag.

    |v| <= 0.6 keeps the coarse mode grids clear of the band edge; the
    edge-mass tolerance is looser than the single-event default because
    demonstration mode grids are deliberately coarse.
    """
    if abs(v) > 0.6:
        raise ValueError("|v| capped at 0.6 for multi-event boosts")
    modes = state.modes
    if modes is None or modes.grid is None:
        raise ValueError("needs a grid-backed mode space")
    kind = KG_PLUS if modes.branches[0] == "positive" else KG_MINUS
    # recover the mass from any mode's on-shell energy
    m = float(np.sqrt(modes.energies[0] ** 2
                      - np.dot(modes.p3[0], modes.p3[0])))
    grid = modes.grid
    out = state.tensor.reshape(grid.shape * state.n)
    for j in range(state.n):
        sub = np.moveaxis(out, tuple(range(3 * j, 3 * j + 3)), (-3, -2, -1))
        sub = boost_onshell_field(sub, grid, m, kind, v, axis, edge_tol)
        out = np.moveaxis(sub, (-3, -2, -1), tuple(range(3 * j, 3 * j + 3)))
    tensor = out.reshape((modes.dim,) * state.n)
    result = NEventState(tensor, modes, SYM_NONE, normalize=True, check=False)
    result.symmetry = state.symmetry
    return result
