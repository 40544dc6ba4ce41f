import numpy as np
import pytest

from srqa.imgcore import ImageError
from srqa.steerpyr import SteerableDecomposition, decompose, filter_bank, reconstruct


def rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


class TestDecompose:
    def test_zero_image_zero_bands(self):
        d = decompose(np.zeros((64, 64)))
        assert rms(d.highpass) == 0.0
        assert rms(d.lowpass) == 0.0
        for level in d.bands:
            for band in level:
                assert np.abs(band).max() == 0.0

    def test_band_shapes(self):
        d = decompose(np.random.default_rng(0).random((64, 96)))
        assert d.highpass.shape == (64, 96)
        assert [b.shape for b in d.bands[0]] == [(64, 96)] * 6
        assert [b.shape for b in d.bands[1]] == [(32, 48)] * 6
        assert d.lowpass.shape == (16, 24)

    def test_too_small(self):
        with pytest.raises(ImageError, match="too small"):
            decompose(np.zeros((16, 64)))

    def test_complex_dtype(self):
        d = decompose(np.random.default_rng(0).random((32, 32)))
        assert np.iscomplexobj(d.bands[0][0])
        dr = decompose(np.random.default_rng(0).random((32, 32)), complex_bands=False)
        assert not np.iscomplexobj(dr.bands[0][0])


class TestPartitionOfUnity:
    @pytest.mark.parametrize("shape", [(32, 32), (64, 96), (128, 64), (36, 44)])
    def test_squared_responses_sum_to_one(self, shape):
        fb = filter_bank(shape)
        total = np.abs(fb["highpass"]) ** 2 + np.abs(fb["lowpass"]) ** 2
        for level in fb["bands"]:
            for resp in level:
                total = total + np.abs(resp) ** 2
        assert np.abs(total - 1.0).max() < 1e-10


class TestReconstruct:
    def test_impulse_roundtrip(self):
        img = np.zeros((64, 64))
        img[32, 32] = 1.0
        d = decompose(img, complex_bands=False)
        assert rms(reconstruct(d) - img) < 1e-6

    def test_natural_roundtrip(self, natural_corpus):
        for img in natural_corpus.values():
            d = decompose(img, complex_bands=False)
            assert rms(reconstruct(d) - img) < 1e-6

    def test_complex_roundtrip_via_real_parts(self, corpus_image):
        d = decompose(corpus_image, complex_bands=True)
        assert rms(reconstruct(d) - corpus_image) < 1e-6

    def test_zeroed_decomposition(self):
        d = decompose(np.random.default_rng(1).random((32, 32)), complex_bands=False)
        zeroed = SteerableDecomposition(
            highpass=np.zeros_like(d.highpass),
            bands=[[np.zeros_like(b) for b in level] for level in d.bands],
            lowpass=np.zeros_like(d.lowpass),
            complex_bands=False,
            orig_shape=d.orig_shape,
            work_shape=d.work_shape,
        )
        assert rms(reconstruct(zeroed)) == 0.0

    def test_single_band_reconstructions_sum_to_input(self):
        rng = np.random.default_rng(2)
        img = rng.random((32, 32))
        d = decompose(img, complex_bands=False)

        def keep_only(hp=False, band=None, lp=False):
            return SteerableDecomposition(
                highpass=d.highpass if hp else np.zeros_like(d.highpass),
                bands=[
                    [
                        b if band == (s, k) else np.zeros_like(b)
                        for k, b in enumerate(level)
                    ]
                    for s, level in enumerate(d.bands)
                ],
                lowpass=d.lowpass if lp else np.zeros_like(d.lowpass),
                complex_bands=False,
                orig_shape=d.orig_shape,
                work_shape=d.work_shape,
            )

        acc = reconstruct(keep_only(hp=True)) + reconstruct(keep_only(lp=True))
        for s in range(2):
            for k in range(6):
                acc += reconstruct(keep_only(band=(s, k)))
        assert rms(acc - img) < 1e-6

    def test_odd_input_padded_and_cropped_back(self):
        rng = np.random.default_rng(3)
        img = rng.random((33, 47))
        d = decompose(img, complex_bands=False)
        assert d.work_shape == (36, 48)
        out = reconstruct(d)
        assert out.shape == (33, 47)
        assert rms(out - img) < 1e-6

    def test_malformed_band_shape(self):
        d = decompose(np.random.default_rng(1).random((32, 32)))
        d.bands[1][2] = np.zeros((7, 7))
        with pytest.raises(ValueError, match="malformed"):
            reconstruct(d)


class TestProperties:
    def test_linearity(self):
        rng = np.random.default_rng(4)
        i1 = rng.random((32, 32))
        i2 = rng.random((32, 32))
        a, b = 0.7, -0.3
        d1 = decompose(i1)
        d2 = decompose(i2)
        d12 = decompose(a * i1 + b * i2 - (a * i1 + b * i2).min())
        # linearity up to the DC shift, which lands in the lowpass only
        for s in range(2):
            for k in range(6):
                want = a * d1.bands[s][k] + b * d2.bands[s][k]
                assert np.abs(d12.bands[s][k] - want).max() < 1e-9

    def test_shiftability_energy(self, corpus_image):
        img = corpus_image[:64, :64]
        d1 = decompose(img)
        d2 = decompose(np.roll(img, 1, axis=1))
        for s in range(2):
            for k in range(6):
                e1 = np.sum(np.abs(d1.bands[s][k]) ** 2)
                e2 = np.sum(np.abs(d2.bands[s][k]) ** 2)
                assert abs(e1 - e2) <= 0.01 * max(e1, e2)

    def test_orientation_selectivity(self):
        y, x = np.mgrid[0:64, 0:64].astype(float)
        ang = np.pi / 6  # wave vector at 30 degrees
        grating = 0.5 + 0.5 * np.sin(1.5 * (np.cos(ang) * x + np.sin(ang) * y))
        d = decompose(grating)
        energies = [float(np.sum(np.abs(b) ** 2)) for b in d.bands[0]]
        assert int(np.argmax(energies)) == 1  # 30-degree band
