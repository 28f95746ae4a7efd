import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal

from otafl.dsp import (
    OOB_FLOOR_DBM,
    circ_conv,
    clip_amplitude,
    dft_direct,
    dft_paper,
    idft_direct,
    idft_paper,
    oob_power_dbm,
    oversample_pad,
    papr,
    rect_filter,
)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


complex_vectors = arrays(
    np.complex128,
    st.integers(1, 64),
    elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
)


class TestTransforms:
    def test_dc_bin_gives_constant(self):
        g = np.zeros(8, dtype=complex)
        g[0] = 1
        assert_allclose(idft_paper(g), np.ones(8), atol=1e-15)

    def test_two_point_idft(self):
        assert_allclose(idft_paper([1, 1]), [2, 0], atol=1e-15)

    def test_two_point_dft(self):
        assert_allclose(dft_paper([2, 0]), [1, 1], atol=1e-15)

    def test_constant_maps_to_dc(self):
        y = np.full(16, 3 - 2j)
        expected = np.zeros(16, dtype=complex)
        expected[0] = 3 - 2j
        assert_allclose(dft_paper(y), expected, atol=1e-14)

    @pytest.mark.parametrize("m", [1, 2, 8, 32, 128, 4096])
    def test_round_trip(self, m):
        g = crandn(np.random.default_rng(m), m)
        assert np.max(np.abs(dft_paper(idft_paper(g)) - g)) < 1e-10

    @pytest.mark.parametrize("m", [1, 3, 8, 32, 128])
    def test_fast_matches_direct(self, m):
        rng = np.random.default_rng(100 + m)
        g = crandn(rng, m)
        assert_allclose(idft_paper(g), idft_direct(g), atol=1e-10)
        assert_allclose(dft_paper(g), dft_direct(g), atol=1e-10)

    def test_direct_two_point(self):
        assert_allclose(idft_direct([1, 1]), [2, 0], atol=1e-15)
        assert_allclose(dft_direct([2, 0]), [1, 1], atol=1e-15)

    @pytest.mark.parametrize("fn", [idft_paper, dft_paper])
    def test_empty_rejected(self, fn):
        with pytest.raises(ValueError):
            fn([])

    @given(complex_vectors)
    def test_parseval_constant(self, s):
        # sum |s|^2 = M * sum |Y|^2 under the 1/M analysis convention
        m = s.size
        lhs = np.sum(np.abs(s) ** 2)
        rhs = m * np.sum(np.abs(dft_paper(s)) ** 2)
        assert rhs == pytest.approx(lhs, rel=1e-9, abs=1e-9)

    def test_noise_variance_per_bin(self):
        m, sigma2, draws = 32, 0.7, 100_000 // 32 + 1
        rng = np.random.default_rng(4)
        y = np.sqrt(sigma2 * m / 2) * crandn(rng, draws * 32 // m, m)
        var = np.mean(np.abs(dft_paper(y)) ** 2)
        assert var == pytest.approx(sigma2, rel=0.02)

    def test_batched_last_axis(self):
        g = crandn(np.random.default_rng(0), 5, 16)
        assert_allclose(idft_paper(g)[3], idft_paper(g[3]))


class TestOversample:
    def test_identity_at_one(self):
        assert_array_equal(oversample_pad([1, 2], 1), [1, 2])

    def test_pad(self):
        assert_array_equal(oversample_pad([1, 1], 2), [1, 1, 0, 0])

    def test_zero_factor_rejected(self):
        with pytest.raises(ValueError):
            oversample_pad([1, 1], 0)

    @pytest.mark.parametrize("l_os", [1, 2, 4, 8])
    def test_sample_coincidence(self, l_os):
        g = crandn(np.random.default_rng(l_os), 32)
        fine = idft_paper(oversample_pad(g, l_os))
        assert np.max(np.abs(fine[::l_os] - idft_paper(g))) < 1e-10


class TestClip:
    def test_below_threshold(self):
        assert clip_amplitude(np.array([3 + 4j]), 10)[0] == 3 + 4j

    def test_scales_to_level(self):
        assert_allclose(clip_amplitude(np.array([3 + 4j]), 2.5), [1.5 + 2j], rtol=1e-15)

    def test_zero_fixed_point(self):
        assert clip_amplitude(np.array([0j]), 1.0)[0] == 0
        assert clip_amplitude(np.array([0j]), 0.0)[0] == 0

    def test_zero_level_gives_zero_signal(self):
        assert_array_equal(clip_amplitude(np.array([1 + 1j, -2]), 0.0), [0, 0])

    def test_real_stays_real(self):
        out = clip_amplitude(np.array([-3.0, 0.5, 2.0]), 1.0)
        assert not np.iscomplexobj(out)
        assert_array_equal(out, [-1.0, 0.5, 1.0])

    def test_disabled(self):
        x = crandn(np.random.default_rng(1), 50) * 10
        assert_array_equal(clip_amplitude(x, np.inf), x)

    def test_negative_level_rejected(self):
        with pytest.raises(ValueError):
            clip_amplitude([1.0], -1.0)

    @given(complex_vectors, st.floats(0, 1e3))
    def test_bound_phase_idempotence(self, x, a_max):
        out = clip_amplitude(x, a_max)
        assert np.all(np.abs(out) <= a_max * (1 + 1e-12))
        assert np.all(np.abs(out) <= np.abs(x))
        assert_array_equal(clip_amplitude(out, a_max), out)
        keep = np.abs(x) <= a_max
        assert_array_equal(out[keep], x[keep])
        moved = (~keep) & (a_max > 0)
        assert_allclose(np.angle(out[moved]), np.angle(x[moved]), atol=1e-12)


class TestFilterAndOob:
    def test_filter_definition(self):
        assert_array_equal(rect_filter([1, 2, 3, 4], 2), [1, 2, 0, 0])

    def test_in_band_unchanged(self):
        x = np.array([1, 2j, 0, 0])
        assert_array_equal(rect_filter(x, 2), x)

    def test_band_too_wide(self):
        with pytest.raises(ValueError):
            rect_filter([1, 2], 3)
        with pytest.raises(ValueError):
            oob_power_dbm([1, 2], 3)

    @given(complex_vectors, st.data())
    def test_filter_projection(self, x, data):
        m = data.draw(st.integers(1, x.size))
        once = rect_filter(x, m)
        assert_array_equal(rect_filter(once, m), once)
        assert np.sum(np.abs(once) ** 2) <= np.sum(np.abs(x) ** 2)

    def test_oob_floor(self):
        assert oob_power_dbm([1, 1, 0, 0], 2) == OOB_FLOOR_DBM

    def test_oob_one_milliwatt(self):
        assert oob_power_dbm([5, 1, 1, 0], 2) == pytest.approx(0.0, abs=1e-12)

    def test_oob_clipped_pipeline(self):
        rng = np.random.default_rng(7)
        spec = dft_paper(clip_amplitude(idft_paper(oversample_pad(crandn(rng, 32), 4)), 4.0))
        assert oob_power_dbm(spec, 32) > OOB_FLOOR_DBM
        assert oob_power_dbm(rect_filter(spec, 32), 32) == OOB_FLOOR_DBM

    def test_oob_rowwise(self):
        out = oob_power_dbm(np.array([[1, 0, 1], [1, 0, 0]]), 2)
        assert_allclose(out, [0.0, OOB_FLOOR_DBM])


class TestPapr:
    def test_constant_envelope(self):
        x = np.exp(1j * np.linspace(0, 5, 40))
        assert papr(x) == pytest.approx(1.0)

    def test_two_samples(self):
        assert papr([2, 0]) == pytest.approx(2.0)

    def test_all_zero(self):
        with pytest.raises(ValueError):
            papr(np.zeros(4))

    def test_gaussian_62006(self):
        # E[max of n chi2(1)] ~ 2 ln n gives about 13.4 dB for n = 62006
        rng = np.random.default_rng(11)
        vals = [10 * np.log10(papr(rng.standard_normal(62006))) for _ in range(200)]
        assert np.mean(vals) == pytest.approx(10 * np.log10(2 * np.log(62006)), abs=1.0)


class TestCircConv:
    def test_unit_impulse(self):
        s = crandn(np.random.default_rng(0), 8)
        assert_allclose(circ_conv(s, [1]), s)

    def test_delay(self):
        s = np.arange(5, dtype=complex)
        assert_allclose(circ_conv(s, [0, 1]), np.roll(s, 1))

    def test_taps_too_long(self):
        with pytest.raises(ValueError):
            circ_conv([1, 2], [1, 2, 3])

    def test_direct_definition(self):
        rng = np.random.default_rng(5)
        s, h = crandn(rng, 8), crandn(rng, 3)
        ref = np.array([sum(h[c] * s[(i - c) % 8] for c in range(3)) for i in range(8)])
        assert_allclose(circ_conv(s, h), ref, atol=1e-12)

    def test_convolution_theorem(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            s, h = crandn(rng, 8), crandn(rng, rng.integers(1, 9))
            hp = np.zeros(8, dtype=complex)
            hp[: h.size] = h
            lhs = dft_paper(circ_conv(s, h))
            rhs = 8 * dft_paper(s) * dft_paper(hp)
            assert np.max(np.abs(lhs - rhs)) <= 1e-9 * np.max(np.abs(rhs))
