import numpy as np
import pytest

from srqa.featglobal import (
    DegenerateBandError,
    GLOBAL_DIM,
    build_neighborhoods,
    divisive_normalize,
    global_features,
)
from srqa.stats import GAMMA_HI, kurtosis, structural_correlation
from srqa.steerpyr import SteerableDecomposition, decompose


def make_decomp(fill=None, seed=0, size=64):
    rng = np.random.default_rng(seed)

    def arr(shape):
        if fill is not None:
            return np.full(shape, fill, dtype=float)
        return rng.standard_normal(shape)

    half, quarter = size // 2, size // 4
    return SteerableDecomposition(
        highpass=arr((size, size)),
        bands=[[arr((size, size)) for _ in range(6)],
               [arr((half, half)) for _ in range(6)]],
        lowpass=arr((quarter, quarter)),
        complex_bands=False,
        orig_shape=(size, size),
        work_shape=(size, size),
    )


class TestBuildNeighborhoods:
    def test_vector_length(self, corpus_image):
        d = decompose(corpus_image[:64, :64])
        nb = build_neighborhoods(d, 1, 0)
        assert nb.shape == (64 * 64, 15)

    def test_zero_decomposition(self):
        d = make_decomp(fill=0.0)
        assert np.abs(build_neighborhoods(d, 1, 0)).max() == 0.0

    def test_hand_enumerated_layout(self):
        d = make_decomp(fill=0.0, size=8)
        band = np.arange(64, dtype=float).reshape(8, 8)
        adjacent = 100.0 + np.arange(64, dtype=float).reshape(8, 8)
        parent = 1000.0 + np.arange(16, dtype=float).reshape(4, 4)
        d.bands[0][0] = band
        d.bands[0][1] = adjacent
        d.bands[1][0] = parent
        nb = build_neighborhoods(d, 1, 0)
        y, x = 2, 3
        vec = nb[y * 8 + x]
        self_vals = [band[y + dy, x + dx] for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
        adj_vals = [adjacent[y, x], adjacent[y - 1, x], adjacent[y + 1, x],
                    adjacent[y, x - 1], adjacent[y, x + 1]]
        parent_val = parent[y // 2, x // 2]
        np.testing.assert_array_equal(vec, self_vals + adj_vals + [parent_val])

    def test_boundary_symmetric_extension(self):
        d = make_decomp(fill=0.0, size=8)
        band = np.arange(64, dtype=float).reshape(8, 8)
        d.bands[0][0] = band
        vec = build_neighborhoods(d, 1, 0)[0]  # corner (0, 0)
        # symmetric extension mirrors the edge rows/cols onto themselves
        expected_self = [band[0, 0], band[0, 0], band[0, 1],
                         band[0, 0], band[0, 0], band[0, 1],
                         band[1, 0], band[1, 0], band[1, 1]]
        np.testing.assert_array_equal(vec[:9], expected_self)

    def test_coarsest_scale_uses_lowpass_parent(self):
        d = make_decomp(fill=0.0, size=8)
        d.bands[1][2] = np.arange(16, dtype=float).reshape(4, 4)
        d.lowpass = 500.0 + np.arange(4, dtype=float).reshape(2, 2)
        nb = build_neighborhoods(d, 2, 2)
        assert nb[0, 14] == d.lowpass[0, 0]
        assert nb[3 * 4 + 3, 14] == d.lowpass[1, 1]

    def test_bad_indices(self):
        d = make_decomp()
        with pytest.raises(ValueError):
            build_neighborhoods(d, 3, 0)
        with pytest.raises(ValueError):
            build_neighborhoods(d, 1, 6)


class TestDivisiveNormalize:
    def test_gaussian_band_stays_gaussian(self):
        d = make_decomp(seed=0)
        band = np.asarray(d.bands[0][0])
        norm = divisive_normalize(band, build_neighborhoods(d, 1, 0))
        assert 2.5 <= kurtosis(norm.values.ravel()) <= 3.5

    def test_zhat_positive(self):
        d = make_decomp(seed=1)
        norm = divisive_normalize(d.bands[0][0], build_neighborhoods(d, 1, 0))
        assert np.all(norm.zhat > 0)

    def test_natural_band_gaussianized(self, corpus_image):
        d = decompose(corpus_image)
        band = np.asarray(d.bands[0][2]).real
        norm = divisive_normalize(band, build_neighborhoods(d, 1, 2))
        k_raw = kurtosis(band.ravel())
        k_norm = kurtosis(norm.values.ravel())
        assert abs(k_norm - 3.0) < abs(k_raw - 3.0)

    def test_constant_band_degenerate(self):
        d = make_decomp(fill=0.7)
        band = np.asarray(d.bands[0][0])
        with pytest.raises(DegenerateBandError):
            divisive_normalize(band, build_neighborhoods(d, 1, 0))

    def test_explicit_q(self):
        d = make_decomp(seed=2)
        nb = build_neighborhoods(d, 1, 0)
        norm = divisive_normalize(d.bands[0][0], nb, Q=np.eye(15))
        assert np.all(np.isfinite(norm.values))


class TestGlobalFeatures:
    def test_length_and_ranges(self, corpus_image):
        feats = global_features(corpus_image)
        assert feats.shape == (GLOBAL_DIM,)
        gammas = feats[:18]
        corrs = feats[18:]
        assert np.all(gammas >= 0.1) and np.all(gammas <= 10.0)
        assert np.all(corrs >= -1.0) and np.all(corrs <= 1.0)

    def test_zero_image_flagged_defaults(self):
        feats = global_features(np.zeros((64, 64)))
        np.testing.assert_allclose(feats[:18], GAMMA_HI)
        np.testing.assert_allclose(feats[18:], 0.0)

    def test_band_self_correlation_diagnostic(self, corpus_image):
        d = decompose(corpus_image[:64, :64])
        mag = np.abs(np.asarray(d.bands[0][0]))
        assert structural_correlation(mag, mag) == pytest.approx(1.0, abs=1e-9)

    def test_scale_invariance(self, corpus_image):
        f1 = global_features(corpus_image)
        f2 = global_features(0.5 * corpus_image)
        np.testing.assert_allclose(f1, f2, atol=1e-3)

    def test_deterministic(self, corpus_image):
        np.testing.assert_array_equal(global_features(corpus_image),
                                      global_features(corpus_image.copy()))

    def test_gaussianization_rate_on_corpus(self, natural_corpus):
        improved = 0
        total = 0
        for img in natural_corpus.values():
            d = decompose(img)
            for s in (1, 2):
                for k in range(6):
                    band = np.asarray(d.bands[s - 1][k]).real
                    nb = build_neighborhoods(d, s, k)
                    norm = divisive_normalize(band, nb).values
                    improved += abs(kurtosis(norm.ravel()) - 3.0) < abs(
                        kurtosis(band.ravel()) - 3.0
                    )
                    total += 1
        assert improved / total >= 0.9

    def test_too_small(self):
        with pytest.raises(Exception):
            global_features(np.zeros((16, 16)))

    def test_golden_vector(self, natural_corpus):
        # frozen output of the first verified run on the camera crop
        golden = [
            1.421834691109, 1.950953277767, 2.119451212373, 1.544326369403,
            1.964192809181, 2.003458849894, 1.009092332449, 1.283003795269,
            1.420315036543, 1.092913381149, 1.427158084034, 1.342133454945,
            1.155783068572, 1.583724817978, 1.757200257232, 1.319810686321,
            1.689694183256, 1.593349420028, 0.327829571438, 0.30931527245,
            0.30824638742, 0.306391371793, 0.311421826614, 0.308842937111,
            0.293441996172, 0.285529835639, 0.286844854517, 0.285395558675,
            0.291722302683, 0.301017282183, 0.725156314518, 0.435193414156,
            0.383420772085, 0.450735313467, 0.733393405322, 0.562031015649,
            0.370148335542, 0.337297576455, 0.474093609579, 0.68363298313,
            0.459844360611, 0.319136925692, 0.673173587775, 0.353768154466,
            0.543501407744,
        ]
        feats = global_features(natural_corpus["camera"])
        np.testing.assert_allclose(feats, golden, atol=1e-9)
