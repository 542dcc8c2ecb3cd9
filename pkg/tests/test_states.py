"""
Tests for 4D event states: normalization, Born slab probabilities,
moments, uncertainty products, serialization.
"""

import numpy as np

from eventqm import (AxisGrid, Grid4D, EventState, MOMENTUM, POSITION,
                     random_band_limited)


def _packet(grid, **kw):
    return EventState.gaussian_packet(grid, **kw)


def test_normalization_and_density():
    g = Grid4D.cubic(12, 0.7)
    st = _packet(g, widths=[1.2] * 4)
    assert abs(st.norm() - 1.0) < 1e-12
    assert abs(np.sum(st.density()) * g.cell_volume - 1.0) < 1e-12
    mom = st.to_momentum_rep()
    assert abs(mom.norm() - 1.0) < 1e-12
    back = mom.to_position_rep()
    assert np.max(np.abs(back.field - st.field)) < 1e-12


def test_gaussian_moments():
    g = Grid4D.cubic(24, 0.6)
    c = [0.4, -0.3, 0.2, 0.1]
    p = [0.3, 0.5, -0.2, 0.1]
    st = _packet(g, centers=c, widths=[1.1] * 4, momentum=p)
    assert np.max(np.abs(st.four_position_mean() - c)) < 1e-8
    assert np.max(np.abs(st.four_momentum_mean() - p)) < 1e-8
    for mu in range(4):
        dx, dp, prod = st.uncertainty_product(mu)
        assert abs(dx - 1.1 / np.sqrt(2)) < 1e-8
        assert abs(prod - 0.5) < 1e-6


def test_born_probability_slab():
    # half-space through a symmetric packet: exactly 1/2
    g = Grid4D.cubic(24, 0.6)
    st = _packet(g, widths=[1.3] * 4)
    p_half = st.born_probability({"axis": 1, "lo": 0.0, "hi": np.inf})
    assert abs(p_half - 0.5) < 1e-10
    # one-sigma slab of |Phi|^2 along a fine time axis: erf(1/sqrt 2);
    # slab boundary weighting converges like delta^2, so refine the axis
    gf = Grid4D(axes=[AxisGrid.centered(512, 0.05)]
                + [AxisGrid.centered(8, 0.9) for _ in range(3)])
    stf = _packet(gf, widths=[1.3] * 4)
    sig = 1.3 / np.sqrt(2)
    p_sig = stf.born_probability({"axis": 0, "lo": -sig, "hi": sig})
    from scipy.special import erf
    assert abs(p_sig - erf(1 / np.sqrt(2))) < 1e-4
    # complement adds to one
    p_out = stf.born_probability(
        lambda t, x, y, z: ~((t >= -sig) & (t <= sig)))
    assert abs(p_sig + p_out - 1.0) < 1e-2


def test_momentum_rep_probability():
    g = Grid4D.cubic(16, 0.7)
    st = _packet(g, widths=[1.2] * 4, momentum=[0.6, 0.0, 0.0, 0.0])
    mom = st.to_momentum_rep()
    p_pos = mom.born_probability({"axis": 0, "lo": 0.0, "hi": np.inf})
    assert p_pos > 0.8  # carrier at p^0 = +0.6, width 1/(1.2 sqrt 2)


def test_random_states_uncertainty_bound():
    rng = np.random.default_rng(11)
    g = Grid4D.cubic(12, 0.8)
    for _ in range(25):
        st = random_band_limited(g, rng)
        assert abs(st.norm() - 1.0) < 1e-12
        for mu in range(4):
            _, _, prod = st.uncertainty_product(mu)
            assert prod >= 0.5 - 1e-6


def test_save_load_roundtrip(tmp_path):
    g = Grid4D.cubic(8, 0.9)
    st = _packet(g, widths=[1.4] * 4, momentum=[0.2, 0.1, 0.0, -0.1])
    path = str(tmp_path / "state.json")
    st.save(path)
    back = EventState.load(path)
    assert back.grid == st.grid
    assert back.rep == st.rep
    assert np.max(np.abs(back.field - st.field)) < 1e-15


def test_edge_clearance_flags_offcenter_packet():
    g = Grid4D.cubic(16, 0.6)
    ok = _packet(g, widths=[1.2] * 4)
    bad = _packet(g, centers=[0.0, 4.0, 0.0, 0.0], widths=[1.2] * 4)
    assert ok.edge_clearance() < 1e-4
    assert bad.edge_clearance() > 100 * ok.edge_clearance()
