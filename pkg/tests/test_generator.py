import numpy as np
import pytest

from conftest import random_affine, sampled_affine, small_config
from polypix import tensor as tz
from polypix.errors import ArgumentError
from polypix.generator import (
    AffineParams,
    GeneratorConfig,
    affine_from_w,
    count_params,
    init_generator,
    latent_to_affine,
    level_features,
    map_latent,
    parameter_order,
    render_columns,
    sample,
    synthesize,
)
from polypix.grid import column_subset, make_grid, nested_dense_grid


class TestConfig:
    def test_defaults_match_model_dimensions(self):
        cfg = GeneratorConfig()
        assert (cfg.z_dim, cfg.w_dim, cfg.levels) == (64, 512, 10)
        assert cfg.class_embed_dim == cfg.w_dim

    def test_invalid_configs(self):
        with pytest.raises(ArgumentError):
            GeneratorConfig(levels=0)
        with pytest.raises(ArgumentError):
            GeneratorConfig(feature_dim=0)
        with pytest.raises(ArgumentError):
            GeneratorConfig(leaky_slope=1.5)

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ArgumentError):
            GeneratorConfig.from_dict({"z_dim": 4, "bogus": 1})


class TestInit:
    def test_seeded_determinism(self):
        cfg = small_config()
        a = init_generator(cfg, seed=7)
        b = init_generator(cfg, seed=7)
        assert all(np.array_equal(a.params[k].data, b.params[k].data) for k in a.params)
        c = init_generator(cfg, seed=8)
        assert any(not np.array_equal(a.params[k].data, c.params[k].data) for k in a.params)

    def test_allocation_matches_count(self):
        cfg = small_config(num_classes=5)
        gen = init_generator(cfg, seed=0)
        assert sum(v.data.size for v in gen.params.values()) == count_params(cfg)

    def test_affine_head_bias_layout(self):
        gen = init_generator(small_config(), seed=1)
        bias = gen.params["affine_head.0.bias"].data.reshape(-1, 3)
        assert np.all(bias[:, 0] == 0) and np.all(bias[:, 1] == 0)
        assert np.any(bias[:, 2] != 0)


class TestCountParams:
    def test_hand_enumerated_tiny_model(self):
        # mapping.0: 4*2+4, mapping.1: 4*4+4, head: 6*4+6, synth: 2*2+2, rgb: 3*2+3
        cfg = GeneratorConfig(z_dim=2, w_dim=4, levels=1, feature_dim=2)
        assert count_params(cfg) == 12 + 20 + 30 + 6 + 9

    def test_paper_scale_anchors(self):
        ten = count_params(GeneratorConfig(levels=10, feature_dim=512, z_dim=64, w_dim=512))
        two = count_params(GeneratorConfig(levels=2, feature_dim=512, z_dim=64, w_dim=512))
        assert abs(ten - 13.52e6) <= 0.25 * 13.52e6
        assert abs(two - 2.98e6) <= 0.25 * 2.98e6

    def test_monotone_in_levels_and_width(self):
        counts = [count_params(GeneratorConfig(levels=l, feature_dim=512))
                  for l in (2, 4, 7, 10, 14)]
        assert counts == sorted(counts) and len(set(counts)) == 5
        assert count_params(GeneratorConfig(levels=10, feature_dim=1024)) > counts[3]

    def test_embedding_counted_when_conditional(self):
        base = small_config()
        cond = small_config(num_classes=9)
        expected_extra = 9 * cond.class_embed_dim + base.w_dim * cond.class_embed_dim
        assert count_params(cond) == count_params(base) + expected_extra

    def test_canonical_order(self):
        names = [n for n, _ in parameter_order(small_config(num_classes=2, levels=2))]
        assert names == [
            "class_embedding",
            "mapping.0.weight", "mapping.0.bias",
            "mapping.1.weight", "mapping.1.bias",
            "affine_head.0.weight", "affine_head.0.bias",
            "synthesis.0.weight", "synthesis.0.bias",
            "affine_head.1.weight", "affine_head.1.bias",
            "synthesis.1.weight", "synthesis.1.bias",
            "rgb_head.weight", "rgb_head.bias",
        ]


class TestMapping:
    def test_w_has_configured_length(self, tiny_gen):
        w = map_latent(tiny_gen, np.zeros(8))
        assert w.shape == (16,)
        default = init_generator(GeneratorConfig(levels=1, feature_dim=4), seed=0)
        assert map_latent(default, np.zeros(64)).shape == (512,)

    def test_deterministic(self, tiny_gen):
        z = np.random.default_rng(0).standard_normal(8)
        assert np.array_equal(map_latent(tiny_gen, z), map_latent(tiny_gen, z))

    def test_wrong_z_length(self, tiny_gen):
        with pytest.raises(ArgumentError):
            map_latent(tiny_gen, np.zeros(7))

    def test_class_handling(self):
        gen = init_generator(small_config(num_classes=3), seed=2)
        w0 = map_latent(gen, np.zeros(8), class_id=0)
        w2 = map_latent(gen, np.zeros(8), class_id=2)
        assert not np.array_equal(w0, w2)
        with pytest.raises(ArgumentError):
            map_latent(gen, np.zeros(8))
        with pytest.raises(ArgumentError):
            map_latent(gen, np.zeros(8), class_id=3)


class TestAffineHeads:
    def test_shapes(self, tiny_gen):
        aff = affine_from_w(tiny_gen, np.zeros(16))
        assert aff.matrices.shape == (4, 12, 3)

    def test_zero_w_returns_reshaped_bias(self, tiny_gen):
        aff = affine_from_w(tiny_gen, np.zeros(16))
        for i in range(4):
            bias = tiny_gen.params[f"affine_head.{i}.bias"].data.reshape(12, 3)
            assert np.array_equal(aff.matrices[i], bias)

    def test_deterministic(self, tiny_gen):
        w = np.random.default_rng(5).standard_normal(16)
        a = affine_from_w(tiny_gen, w)
        b = affine_from_w(tiny_gen, w)
        assert np.array_equal(a.matrices, b.matrices)

    def test_wrong_length(self, tiny_gen):
        with pytest.raises(ArgumentError):
            affine_from_w(tiny_gen, np.zeros(15))


class TestSynthesize:
    def test_constant_image_when_xy_columns_zeroed(self, tiny_gen):
        aff = sampled_affine(tiny_gen, 3).with_constant_colors()
        img = synthesize(tiny_gen, aff, make_grid(6, 5))
        for c in range(3):
            channel = img.values[:, :, c]
            assert channel.max() - channel.min() == 0.0

    def test_subset_render_bit_identical(self, tiny_gen):
        rng = np.random.default_rng(0)
        grid = make_grid(11, 13)
        aff = sampled_affine(tiny_gen, 1)
        full = render_columns(tiny_gen, aff, grid.matrix)
        idx = rng.choice(grid.pixels, size=37, replace=False)
        sub = render_columns(tiny_gen, aff, column_subset(grid, idx))
        assert np.array_equal(full[:, idx], sub)

    def test_level_dim_mismatch(self, tiny_gen):
        bad = AffineParams(np.zeros((3, 12, 3), np.float32))
        with pytest.raises(ArgumentError):
            synthesize(tiny_gen, bad, make_grid(4, 4))

    def test_polynomial_degree_identity_activation(self):
        # order-(L+1) differences annihilate the render, order-L do not
        for levels in (1, 2, 3):
            cfg = GeneratorConfig(z_dim=4, w_dim=8, levels=levels, feature_dim=8,
                                  test_identity_activation=True)
            gen = init_generator(cfg, seed=levels, dtype=np.float64)
            aff = AffineParams(
                np.random.default_rng(levels).standard_normal((levels, 8, 3))
            )
            img = synthesize(gen, aff, make_grid(10, 10, dtype=np.float64))
            spread = img.values.max() - img.values.min()
            for axis in (1, 0):
                d = np.diff(img.values, n=levels + 1, axis=axis)
                assert np.abs(d).max() < 1e-6 * spread
                d_low = np.diff(img.values, n=levels, axis=axis)
                assert np.abs(d_low).max() > 1e-6 * spread


class TestSample:
    def test_output_dims(self, tiny_gen):
        img = sample(tiny_gen, np.zeros(8), None, 5, 9)
        assert img.values.shape == (5, 9, 3)

    def test_composition_equality_bitwise(self, tiny_gen):
        z = np.random.default_rng(8).standard_normal(8)
        direct = sample(tiny_gen, z, None, 7, 7)
        staged = synthesize(
            tiny_gen, affine_from_w(tiny_gen, map_latent(tiny_gen, z)), make_grid(7, 7)
        )
        assert np.array_equal(direct.values, staged.values)

    def test_multi_scale_sampling(self, tiny_gen):
        z = np.random.default_rng(9).standard_normal(8)
        small_img = sample(tiny_gen, z, None, 32, 32)
        large = sample(tiny_gen, z, None, 64, 64)
        assert small_img.values.shape == (32, 32, 3)
        assert large.values.shape == (64, 64, 3)

    def test_grid_nesting_through_sample(self, tiny_gen):
        z = np.random.default_rng(10).standard_normal(8)
        base = sample(tiny_gen, z, None, 6, 6)
        aff = latent_to_affine(tiny_gen, z)
        dense = synthesize(tiny_gen, aff, nested_dense_grid(6, 6, 2))
        assert np.array_equal(dense.values[::2, ::2, :], base.values)


class TestLevelFeatures:
    def test_shape(self, tiny_gen):
        feats = level_features(tiny_gen, sampled_affine(tiny_gen, 2), make_grid(4, 5), 1)
        assert feats.shape == (20, 12)

    def test_rgb_head_on_last_features_matches_synthesize(self, tiny_gen):
        aff = sampled_affine(tiny_gen, 4)
        grid = make_grid(5, 5)
        feats = level_features(tiny_gen, aff, grid, tiny_gen.config.levels - 1)
        w = tiny_gen.params["rgb_head.weight"].data
        b = tiny_gen.params["rgb_head.bias"].data
        manual = tz.matmul(tz.Tensor(w), tz.Tensor(feats.T.copy()), column_stable=True)
        manual = manual.data + b
        img = synthesize(tiny_gen, aff, grid)
        np.testing.assert_array_equal(manual, img.to_matrix())

    def test_level_out_of_range(self, tiny_gen):
        with pytest.raises(ArgumentError):
            level_features(tiny_gen, sampled_affine(tiny_gen, 2), make_grid(3, 3), 4)


def test_pixel_independence_random_cases():
    rng = np.random.default_rng(42)
    for case in range(10):
        cfg = GeneratorConfig(
            z_dim=int(rng.integers(2, 8)),
            w_dim=int(rng.integers(4, 16)),
            levels=int(rng.integers(1, 5)),
            feature_dim=int(rng.integers(2, 20)),
        )
        gen = init_generator(cfg, seed=case)
        aff = random_affine(cfg, seed=case)
        grid = make_grid(int(rng.integers(2, 12)), int(rng.integers(2, 12)))
        full = render_columns(gen, aff, grid.matrix)
        size = int(rng.integers(1, grid.pixels + 1))
        idx = rng.choice(grid.pixels, size=size, replace=False)
        sub = render_columns(gen, aff, column_subset(grid, idx))
        assert np.array_equal(full[:, idx], sub)
