"""
Tests for unitary Poincare actions: commutation relations, translation
phases, invariance of scalar products, expectation covariance, the
generator <-> finite-transform map, and the edge-mass guard.
"""

import numpy as np
import pytest

from eventqm import (Grid4D, EventState, LorentzTransform, PoincareElement,
                     ClearanceError, commutator_check,
                     generator_exponential_check, scalar_product_invariance,
                     translate)


def _packet(grid, **kw):
    defaults = dict(widths=[1.3] * 4, momentum=[0.25, 0.2, -0.15, 0.1])
    defaults.update(kw)
    return EventState.gaussian_packet(grid, **defaults)


def test_canonical_commutators():
    g = Grid4D.cubic(32, 0.55)
    st = _packet(g)
    for mu in range(4):
        for nu in range(4):
            r = commutator_check(st, ("X", mu), ("P", nu))
            assert r < 1e-6, (mu, nu, r)


def test_generator_commutators():
    g = Grid4D.cubic(32, 0.55)
    st = _packet(g)
    assert commutator_check(st, ("M", 0, 1), ("P", 0)) < 1e-6
    assert commutator_check(st, ("M", 1, 2), ("P", 3)) < 1e-6
    assert commutator_check(st, ("M", 0, 1), ("M", 1, 2)) < 1e-6
    assert commutator_check(st, ("M", 0, 1), ("M", 2, 3)) < 1e-6


def test_generator_exponential_matches_finite_transform():
    g = Grid4D.cubic(32, 0.55)
    st = _packet(g)
    assert generator_exponential_check(st, 0, 1, 0.3) < 1e-6
    assert generator_exponential_check(st, 1, 2, 0.7) < 1e-6


def test_translation_shifts_position_mean():
    g = Grid4D.cubic(24, 0.7)
    st = _packet(g, momentum=[0.0, 0.0, 0.0, 0.0])
    a = [0.7, -1.4, 0.7, 0.0]
    el = PoincareElement.translation_only(a)
    out = el.apply_position(st)
    assert np.max(np.abs(out.four_position_mean()
                         - (st.four_position_mean() + a))) < 1e-8
    # grid-commensurate shift is an exact sample relabeling
    want = np.roll(st.field, (1, -2, 1, 0), axis=(0, 1, 2, 3))
    assert np.max(np.abs(out.field - want)) < 1e-10


def test_scalar_product_invariance():
    g = Grid4D.cubic(24, 0.62)
    a = _packet(g, centers=[0.3, -0.2, 0.25, 0.0])
    b = _packet(g, centers=[-0.2, 0.3, 0.0, 0.2],
                momentum=[0.15, -0.2, 0.2, 0.0])
    for el in (PoincareElement(LorentzTransform.boost(1, 0.5)),
               PoincareElement(LorentzTransform.rotation(3, 0.8),
                               [0.3, 0.2, -0.4, 0.1])):
        before, after = scalar_product_invariance(el, a, b, "position")
        assert abs(after - before) < 1e-6
        before, after = scalar_product_invariance(el, a, b, "momentum")
        assert abs(after - before) < 1e-6


def test_expectation_covariance():
    g = Grid4D.cubic(24, 0.62)
    st = _packet(g, centers=[0.3, -0.2, 0.25, 0.0])
    el = PoincareElement(LorentzTransform.boost(2, -0.4),
                         [0.4, -0.3, 0.25, 0.0])
    out = el.apply_position(st)
    lam = el.lorentz.matrix
    want_x = lam @ st.four_position_mean() + el.translation
    want_p = lam @ st.four_momentum_mean()
    assert np.max(np.abs(out.four_position_mean() - want_x)) < 1e-5
    assert np.max(np.abs(out.four_momentum_mean() - want_p)) < 1e-5


def test_momentum_rep_action_matches_position_rep():
    g = Grid4D.cubic(20, 0.65)
    st = _packet(g)
    el = PoincareElement(LorentzTransform.boost(1, 0.35), [0.3, 0.1, 0.0, 0.2])
    via_pos = el.apply_position(st).to_momentum_rep()
    via_mom = el.apply_momentum(st.to_momentum_rep())
    # the two routes agree up to resampling error
    gap = np.max(np.abs(via_pos.field - via_mom.field))
    assert gap < 5e-5


def test_composition_equals_sequential():
    g = Grid4D.cubic(24, 0.62)
    st = _packet(g, momentum=[0.1, 0.1, 0.0, 0.0])
    one = PoincareElement(LorentzTransform.boost(1, 0.2))
    two = PoincareElement(LorentzTransform.boost(1, 0.25))
    seq = two.apply_position(one.apply_position(st))
    once = two.compose(one).apply_position(st)
    gap = np.max(np.abs(seq.field - once.field)) * np.sqrt(g.cell_volume)
    assert gap < 2e-6


def test_clearance_guard_raises():
    g = Grid4D.cubic(16, 0.6)
    st = _packet(g, centers=[0.0, 3.8, 0.0, 0.0],
                 momentum=[0.0, 0.0, 0.0, 0.0])
    el = PoincareElement(LorentzTransform.boost(1, 0.6))
    with pytest.raises(ClearanceError):
        el.apply_position(st)
