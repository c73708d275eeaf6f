import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mpbsim import sigmodel as sm


GEO8 = sm.ArrayGeometry(8)


# ---------- steering ----------

def test_steering_broadside_is_all_ones():
    a = sm.steering(0.0, GEO8)
    assert np.allclose(a, 1.0)
    assert abs(np.vdot(a, a).real - 8.0) < 1e-14


def test_steering_thirty_degrees_two_elements():
    a = sm.steering(30.0, sm.ArrayGeometry(2, spacing=0.5))
    assert np.allclose(a, [1.0, 1j])


def test_steering_rejects_endfire():
    for doa in (90.0, -90.0, 120.0):
        with pytest.raises(ValueError):
            sm.steering(doa, GEO8)


@given(st.floats(-89.99, 89.99))
def test_steering_norm_is_element_count(doa):
    a = sm.steering(doa, GEO8)
    assert abs(np.vdot(a, a).real - 8.0) < 1e-12


# ---------- Gold codes ----------

def test_gold_autocorrelation_peak():
    for idx in (0, 1, 17, 32):
        c = sm.gold31(idx)
        assert c.shape == (31,)
        assert set(np.unique(c)) <= {-1.0, 1.0}
        assert int(c @ c) == 31


def test_gold_cross_correlation_three_valued():
    """Periodic cross-correlations of distinct codes take values in {-1,-9,7}."""
    codes = [sm.gold31(i) for i in range(33)]
    allowed = {-1, -9, 7}
    for i, j in itertools.combinations(range(33), 2):
        ci, cj = codes[i], codes[j]
        for lag in range(31):
            corr = int(ci @ np.roll(cj, lag))
            assert corr in allowed, (i, j, lag, corr)


def test_gold_codes_distinct_and_range_checked():
    codes = [tuple(sm.gold31(i)) for i in range(33)]
    assert len(set(codes)) == 33
    with pytest.raises(ValueError):
        sm.gold31(33)
    with pytest.raises(ValueError):
        sm.gold31(-1)


# ---------- SOI sequence ----------

def test_soi_sequence_tiles_code():
    code = sm.gold31(0)
    spec = sm.SoiSpec(31, code, bits=np.ones(3))
    s = sm.soi_sequence(spec, range(62))
    assert np.array_equal(s[:31], code.astype(complex))
    assert np.array_equal(s[31:], code.astype(complex))


def test_soi_sequence_bit_sign():
    code = sm.gold31(0)
    spec = sm.SoiSpec(31, code, bits=np.array([-1.0, 1.0]))
    s = sm.soi_sequence(spec, range(31))
    assert np.array_equal(s, -code.astype(complex))


def test_soi_sequence_symbol_energy():
    code = sm.gold31(2)
    spec = sm.SoiSpec(31, code, bits=np.ones(4))
    s = sm.soi_sequence(spec, range(4 * 31))
    for k in range(4):
        win = s[k * 31:(k + 1) * 31]
        assert abs(np.sum(np.abs(win) ** 2) - 31.0) < 1e-12


# ---------- interferer sequences ----------

def test_tone_zero_offset_is_constant():
    rng = np.random.default_rng(5)
    spec = sm.InterfererSpec("tone", normalized_offset=0.0)
    s = sm.interferer_sequence(spec, range(200), rng)
    assert s.shape == (1, 200)
    assert np.abs(np.abs(s) - 1.0).max() < 1e-12
    assert np.abs(s - s[0, 0]).max() < 1e-12


def test_periodical_noise_tiles_with_period_31():
    rng = np.random.default_rng(6)
    spec = sm.InterfererSpec("periodical_noise")
    s = sm.interferer_sequence(spec, range(31 * 5), rng)[0]
    assert np.array_equal(s[:31], s[31:62])
    assert np.array_equal(s[:31], s[124:155])


def test_bpsk_white_is_uncorrelated():
    rng = np.random.default_rng(7)
    spec = sm.InterfererSpec("bpsk_white")
    s = sm.interferer_sequence(spec, range(100_000), rng)[0].real
    bound = 3.0 / np.sqrt(s.size)
    for lag in (1, 2, 5):
        rho = np.mean(s[lag:] * s[:-lag])
        assert abs(rho) <= bound, (lag, rho)


def test_mai_rows_share_one_delayed_stream():
    rng = np.random.default_rng(8)
    spec = sm.InterfererSpec("mai_multipath", user_code=1,
                             path_delays=(0, 4), path_doas=(10.0, -30.0))
    s = sm.interferer_sequence(spec, range(310), rng)
    assert s.shape == (2, 310)
    assert np.array_equal(s[1, 4:], s[0, :-4])


def test_interferer_unit_power_all_kinds():
    kinds = [
        sm.InterfererSpec("bpsk_white"),
        sm.InterfererSpec("tone", normalized_offset=0.37),
        sm.InterfererSpec("periodical_noise"),
        sm.InterfererSpec("mai_multipath", user_code=2, path_delays=(3,),
                          path_doas=(20.0,)),
    ]
    for spec in kinds:
        rng = np.random.default_rng(9)
        s = sm.interferer_sequence(spec, range(100_000), rng)
        for row in s:
            p = np.mean(np.abs(row) ** 2)
            assert 0.98 <= p <= 1.02, (spec.kind, p)


# ---------- block synthesis ----------

def _scenario(**over):
    base = dict(
        geometry=GEO8,
        soi=sm.SoiSpec(31, sm.gold31(0), power=2.0),
        interferers=(),
        noise_var=1.0,
        symbols=50,
        seed=3,
    )
    base.update(over)
    return sm.Scenario(**base)


def test_synth_blocks_soi_only_is_exact():
    sc = _scenario()
    blocks = sm.synth_blocks(sc, include=("soi",)).blocks
    assert blocks.shape == (50, 8, 31)
    bits = sm.soi_bits(sc)
    a0 = sm.steering(0.0, GEO8)
    for k in (0, 7, 49):
        expect = np.sqrt(2.0) * bits[k] * np.outer(a0, sm.gold31(0))
        assert np.abs(blocks[k] - expect).max() < 1e-12


def test_synth_blocks_noise_moments():
    sc = _scenario(symbols=500, soi=sm.SoiSpec(31, sm.gold31(0), power=0.0),
                   noise_var=2.5)
    blocks = sm.synth_blocks(sc, include=("noise",)).blocks
    var = np.mean(np.abs(blocks) ** 2)
    assert abs(var - 2.5) / 2.5 < 0.02


def test_synth_blocks_deterministic():
    sc = _scenario(interferers=(sm.InterfererSpec("periodical_noise",
                                                  doa_deg=30.0, power=100.0),))
    b1 = sm.synth_blocks(sc).blocks
    b2 = sm.synth_blocks(sc).blocks
    assert np.array_equal(b1, b2)


def test_mc_stream_changes_noise_not_realization():
    ints = (sm.InterfererSpec("periodical_noise", doa_deg=30.0, power=100.0),
            sm.InterfererSpec("tone", doa_deg=-40.0, power=50.0,
                              normalized_offset=2.0 / 31.0))
    sc_a = _scenario(interferers=ints, mc_stream=0)
    sc_b = _scenario(interferers=ints, mc_stream=1)
    pa = sm.realize_paths(sc_a)
    pb = sm.realize_paths(sc_b)
    # the drawn interference realization is a function of the seed alone
    for ra, rb in zip(pa, pb):
        if ra.waveform is not None:
            assert np.array_equal(ra.waveform, rb.waveform)
    na = sm.synth_blocks(sc_a, include=("noise",)).blocks
    nb = sm.synth_blocks(sc_b, include=("noise",)).blocks
    assert not np.array_equal(na, nb)


def test_component_split_sums_to_whole():
    """Separately synthesized components add up to the full blocks (same streams)."""
    sc = _scenario(symbols=40,
                   interferers=(sm.InterfererSpec("bpsk_white", doa_deg=30.0,
                                                  power=10.0),))
    whole = sm.synth_blocks(sc).blocks
    soi = sm.synth_blocks(sc, include=("soi",)).blocks
    rest = sm.synth_blocks(sc, include=("interference", "noise")).blocks
    assert np.abs(whole - (soi + rest)).max() < 1e-12


def test_iter_blocks_batch_starts():
    sc = _scenario(symbols=40)
    starts = [k0 for k0, _ in sm.iter_blocks(sc, batch=16)]
    sizes = [x.shape[0] for _, x in sm.iter_blocks(sc, batch=16)]
    assert starts == [0, 16, 32] and sizes == [16, 16, 8]
