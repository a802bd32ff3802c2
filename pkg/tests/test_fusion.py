"""Bilinear fusion, sentiment features and fused feature assembly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memefuse.errors import ConfigError, DataError
from memefuse.fusion import (
    MODES,
    BilinearParams,
    FusionConfig,
    assemble,
    bilinear_backward,
    bilinear_fuse,
    bilinear_fuse_batch,
    feature_dim,
    init_bilinear,
    sentiment_feature,
)
from memefuse.store import EmbeddingRecord

from oracles import assert_gradients_close, central_difference_gradient, naive_bilinear


def random_bilinear(rng, out_dim, dm, dh):
    return BilinearParams(
        M=rng.standard_normal((out_dim, dm, dh)), b=rng.standard_normal(out_dim)
    )


class TestBilinearFuse:
    def test_zero_tensor_returns_bias(self):
        params = BilinearParams(M=np.zeros((2, 3, 4)), b=np.array([0.5, -1.0]))
        rng = np.random.default_rng(1)
        for _ in range(5):
            out = bilinear_fuse(rng.standard_normal(3), rng.standard_normal(4), params)
            np.testing.assert_array_equal(out, [0.5, -1.0])

    def test_hand_picked_single_interaction(self):
        M = np.array([[[0.0, 1.0], [0.0, 0.0]]])
        params = BilinearParams(M=M, b=np.zeros(1))
        out = bilinear_fuse(np.array([1.0, 0.0]), np.array([0.0, 1.0]), params)
        np.testing.assert_allclose(out, [1.0])

    def test_bilinearity_in_first_argument(self):
        rng = np.random.default_rng(2)
        params = random_bilinear(rng, 3, 4, 5)
        params.b[:] = 0.0
        m, h = rng.standard_normal(4), rng.standard_normal(5)
        np.testing.assert_allclose(
            bilinear_fuse(2 * m, h, params), 2 * bilinear_fuse(m, h, params), rtol=1e-12
        )

    @pytest.mark.parametrize("shape", [(1, 1, 1), (2, 3, 4), (8, 8, 8), (5, 8, 2)])
    def test_matches_triple_loop_oracle(self, shape):
        rng = np.random.default_rng(sum(shape))
        params = random_bilinear(rng, *shape)
        m, h = rng.standard_normal(shape[1]), rng.standard_normal(shape[2])
        got = bilinear_fuse(m, h, params)
        want = naive_bilinear(m, h, params.M, params.b)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)

    def test_batch_path_matches_single(self):
        rng = np.random.default_rng(3)
        params = random_bilinear(rng, 4, 3, 5)
        M_rows = rng.standard_normal((6, 3))
        H_rows = rng.standard_normal((6, 5))
        batched = bilinear_fuse_batch(M_rows, H_rows, params)
        for i in range(6):
            np.testing.assert_allclose(
                batched[i], bilinear_fuse(M_rows[i], H_rows[i], params), rtol=1e-12
            )

    def test_shape_mismatch_rejected(self):
        params = BilinearParams(M=np.zeros((2, 3, 4)), b=np.zeros(2))
        with pytest.raises(ConfigError, match="mismatch"):
            bilinear_fuse(np.zeros(5), np.zeros(4), params)


class TestBilinearBackward:
    def test_zero_upstream_gives_zero_gradients(self):
        rng = np.random.default_rng(4)
        params = random_bilinear(rng, 3, 2, 2)
        grads = bilinear_backward(
            rng.standard_normal(2), rng.standard_normal(2), params, np.zeros(3)
        )
        for g in grads:
            assert np.all(g == 0.0)

    def test_bias_gradient_is_upstream(self):
        rng = np.random.default_rng(5)
        params = random_bilinear(rng, 4, 3, 2)
        g = rng.standard_normal(4)
        _, _, _, d_b = bilinear_backward(
            rng.standard_normal(3), rng.standard_normal(2), params, g
        )
        np.testing.assert_array_equal(d_b, g)

    def test_matches_finite_differences_on_2x2x2(self):
        rng = np.random.default_rng(6)
        params = random_bilinear(rng, 2, 2, 2)
        m, h = rng.standard_normal(2), rng.standard_normal(2)
        g = rng.standard_normal(2)
        d_m, d_h, d_M, d_b = bilinear_backward(m, h, params, g)

        def loss_of(flat):
            mm = flat[:2]
            hh = flat[2:4]
            MM = flat[4:12].reshape(2, 2, 2)
            bb = flat[12:14]
            return float(g @ (np.einsum("j,ijk,k->i", mm, MM, hh) + bb))

        flat = np.concatenate([m, h, params.M.ravel(), params.b])
        numeric = central_difference_gradient(loss_of, flat)
        analytic = np.concatenate([d_m, d_h, d_M.ravel(), d_b])
        assert_gradients_close(analytic, numeric)


class TestSentimentFeature:
    def test_zeros(self):
        out = sentiment_feature(np.zeros(3), np.zeros(3))
        np.testing.assert_array_equal(out, np.zeros(9))

    def test_layout(self):
        out = sentiment_feature(np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))
        np.testing.assert_array_equal(out, [1, 0, 0, 0, 0, 1, 1, 0, 1])

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(7)
        s_t, s_v = rng.standard_normal(4), rng.standard_normal(4)
        perm = rng.permutation(4)
        base = sentiment_feature(s_t, s_v)
        permuted = sentiment_feature(s_t[perm], s_v[perm])
        np.testing.assert_array_equal(
            permuted, np.concatenate([base[:4][perm], base[4:8][perm], base[8:][perm]])
        )

    def test_missing_channel_rejected(self):
        with pytest.raises(ConfigError, match="senti"):
            sentiment_feature(None, np.zeros(3))
        with pytest.raises(ConfigError, match="shapes"):
            sentiment_feature(np.zeros(3), np.zeros(2))


def make_record(rng, d_m=6, d_h=5, k=3, **drop):
    fields = {
        "e_m": rng.standard_normal(d_m),
        "h": rng.standard_normal(d_h),
        "s_t": rng.standard_normal(k),
        "s_v": rng.standard_normal(k),
    }
    fields.update(drop)
    return EmbeddingRecord(id="r", split="train", label=0, **fields)


class TestAssemble:
    def test_mm_only_is_identity(self):
        rng = np.random.default_rng(8)
        rec = make_record(rng)
        cfg = FusionConfig(mode="mm_only", d_m=6)
        np.testing.assert_array_equal(assemble(rec, cfg), rec.e_m)

    def test_cap_bilinear_default_dims_length(self):
        # 768 + 768 + 768 concatenation.
        assert feature_dim(FusionConfig(mode="cap_bilinear")) == 2304

    def test_combined_default_dims_length(self):
        assert feature_dim(FusionConfig(mode="combined")) == 2313

    def test_senti_default_dims_length(self):
        assert feature_dim(FusionConfig(mode="senti")) == 777

    def test_cap_concat_dims(self):
        assert feature_dim(FusionConfig(mode="cap_concat")) == 1536

    def test_missing_channel_names_record_and_channel(self):
        rng = np.random.default_rng(9)
        rec = make_record(rng, h=None)
        cfg = FusionConfig(mode="cap_concat", d_m=6, d_h=5)
        with pytest.raises(DataError, match="'r'.*'cap'"):
            assemble(rec, cfg)

    def test_bilinear_mode_requires_params(self):
        rng = np.random.default_rng(10)
        rec = make_record(rng)
        cfg = FusionConfig(mode="cap_bilinear", d_m=6, d_h=5, bilinear_dim=4)
        with pytest.raises(ConfigError, match="bilinear"):
            assemble(rec, cfg)

    def test_combined_layout_and_determinism(self):
        rng = np.random.default_rng(11)
        rec = make_record(rng)
        cfg = FusionConfig(mode="combined", d_m=6, d_h=5, bilinear_dim=4, k=3)
        params = init_bilinear(cfg, np.random.default_rng(0))
        out = assemble(rec, cfg, params)
        np.testing.assert_array_equal(out[:6], rec.e_m)
        np.testing.assert_array_equal(out[6:11], rec.h)
        np.testing.assert_allclose(out[11:15], bilinear_fuse(rec.e_m, rec.h, params))
        np.testing.assert_array_equal(out[15:], sentiment_feature(rec.s_t, rec.s_v))
        np.testing.assert_array_equal(out, assemble(rec, cfg, params))


@settings(max_examples=60, deadline=None)
@given(
    mode=st.sampled_from(MODES),
    d_m=st.integers(min_value=1, max_value=24),
    d_h=st.integers(min_value=1, max_value=24),
    bilinear_dim=st.integers(min_value=1, max_value=12),
    k=st.integers(min_value=1, max_value=6),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_assemble_length_always_matches_feature_dim(mode, d_m, d_h, bilinear_dim, k, seed):
    rng = np.random.default_rng(seed)
    cfg = FusionConfig(mode=mode, d_m=d_m, d_h=d_h, bilinear_dim=bilinear_dim, k=k)
    rec = make_record(rng, d_m=d_m, d_h=d_h, k=k)
    params = init_bilinear(cfg, rng) if cfg.uses_bilinear else None
    assert assemble(rec, cfg, params).shape == (feature_dim(cfg),)


def test_config_rejects_unknown_mode_and_bad_dims():
    with pytest.raises(ConfigError, match="mode"):
        FusionConfig(mode="gated_sum")
    with pytest.raises(ConfigError, match="bilinear_dim"):
        FusionConfig(mode="cap_bilinear", bilinear_dim=0)
