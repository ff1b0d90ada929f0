import math

import numpy as np
import pytest

from cfgrid import (
    FourierConfig,
    NumericValidationError,
    RoPEConfig,
    ShapeMismatchError,
    fourier_embed,
    rope_relative_check,
    rope_rotate,
    write_tensors,
    read_tensors,
)


def oracle_rope(x, p, dim, base):
    """Scalar per-pair rotation using math functions."""
    out = np.empty(dim)
    for i in range(1, dim // 2 + 1):
        theta = base ** (-2.0 * i / dim)
        angle = p * theta
        c, s = math.cos(angle), math.sin(angle)
        a, b = x[2 * i - 2], x[2 * i - 1]
        out[2 * i - 2] = a * c - b * s
        out[2 * i - 1] = a * s + b * c
    return out


def oracle_gelu(v):
    return 0.5 * v * (1.0 + math.erf(v / math.sqrt(2.0)))


def oracle_fourier(x, p, cfg):
    """Scalar re-implementation of the embedding."""
    half = cfg.dim // 2
    f = np.empty(cfg.dim)
    for i in range(half):
        phase = 2.0 * math.pi * sum(cfg.W[i, j] * p[j] for j in range(cfg.input_dim))
        f[i] = math.cos(phase)
        f[half + i] = math.sin(phase)
    f = f / math.sqrt(cfg.dim)
    h = np.empty(cfg.dim)
    for i in range(cfg.dim):
        v = sum(cfg.w1[i, j] * f[j] for j in range(cfg.dim)) + cfg.b1[i]
        h[i] = v if cfg.bypass_activation else oracle_gelu(v)
    out = np.empty(cfg.dim)
    for i in range(cfg.dim):
        out[i] = x[i] + sum(cfg.w2[i, j] * h[j] for j in range(cfg.dim)) + cfg.b2[i]
    return out


class TestRoPEConfig:
    def test_frequencies_follow_formula(self):
        cfg = RoPEConfig(dim=8, base=10000.0)
        want = [10000.0 ** (-2.0 * i / 8) for i in (1, 2, 3, 4)]
        assert np.allclose(cfg.frequencies(), want, rtol=0, atol=0)

    @pytest.mark.parametrize("dim", [0, 3, -2])
    def test_odd_or_nonpositive_dim_rejected(self, dim):
        with pytest.raises(NumericValidationError):
            RoPEConfig(dim=dim)

    def test_base_must_exceed_one(self):
        with pytest.raises(NumericValidationError):
            RoPEConfig(dim=4, base=1.0)


class TestRopeRotate:
    def test_zero_position_is_identity(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(8)
        assert np.array_equal(rope_rotate(x, 0.0, RoPEConfig(dim=8)), x)

    def test_quarter_turn(self):
        cfg = RoPEConfig(dim=2, base=10000.0)
        theta = 10000.0 ** (-2.0 / 2.0)
        p = (math.pi / 2.0) / theta
        out = rope_rotate(np.array([1.0, 0.0]), p, cfg)
        assert np.allclose(out, [0.0, 1.0], rtol=0, atol=1e-9)

    def test_norm_preserved(self):
        rng = np.random.default_rng(5)
        cfg = RoPEConfig(dim=16)
        for _ in range(50):
            x = rng.standard_normal(16)
            p = float(rng.uniform(-100, 100))
            got = np.linalg.norm(rope_rotate(x, p, cfg))
            assert abs(got - np.linalg.norm(x)) <= 1e-6 * np.linalg.norm(x)

    def test_linear_in_x(self):
        rng = np.random.default_rng(7)
        cfg = RoPEConfig(dim=12)
        x, y = rng.standard_normal((2, 12))
        a, b = 2.5, -1.25
        p = 17.0
        lhs = rope_rotate(a * x + b * y, p, cfg)
        rhs = a * rope_rotate(x, p, cfg) + b * rope_rotate(y, p, cfg)
        assert np.allclose(lhs, rhs, rtol=0, atol=1e-6)

    def test_composition(self):
        rng = np.random.default_rng(9)
        cfg = RoPEConfig(dim=10)
        for _ in range(50):
            x = rng.standard_normal(10)
            p1, p2 = rng.uniform(-50, 50, 2)
            once = rope_rotate(x, p1 + p2, cfg)
            twice = rope_rotate(rope_rotate(x, p1, cfg), p2, cfg)
            assert np.allclose(once, twice, rtol=0, atol=1e-6)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(11)
        for dim in (2, 6, 32):
            cfg = RoPEConfig(dim=dim)
            x = rng.standard_normal(dim)
            p = float(rng.uniform(-20, 20))
            assert np.allclose(
                rope_rotate(x, p, cfg), oracle_rope(x, p, dim, cfg.base), rtol=0, atol=1e-12
            )

    def test_batched_matches_per_row(self):
        rng = np.random.default_rng(13)
        cfg = RoPEConfig(dim=8)
        xs = rng.standard_normal((5, 8))
        ps = rng.uniform(-10, 10, 5)
        batched = rope_rotate(xs, ps, cfg)
        for n in range(5):
            assert np.allclose(batched[n], rope_rotate(xs[n], ps[n], cfg), rtol=0, atol=1e-12)

    def test_wrong_dim_rejected(self):
        with pytest.raises(ShapeMismatchError):
            rope_rotate(np.zeros(6), 1.0, RoPEConfig(dim=8))


class TestRopeRelativeCheck:
    def test_equal_positions(self):
        rng = np.random.default_rng(17)
        cfg = RoPEConfig(dim=8)
        x, y = rng.standard_normal((2, 8))
        assert rope_relative_check(x, y, 3.0, 3.0, cfg) <= 1e-6

    def test_zero_vector_gives_zero(self):
        rng = np.random.default_rng(19)
        cfg = RoPEConfig(dim=8)
        y = rng.standard_normal(8)
        assert rope_relative_check(np.zeros(8), y, 2.0, 5.0, cfg) == 0.0

    def test_random_draws(self):
        rng = np.random.default_rng(23)
        cfg = RoPEConfig(dim=16)
        for _ in range(100):
            x, y = rng.standard_normal((2, 16))
            p1, p2 = rng.uniform(-100, 100, 2)
            bound = 1e-6 * np.linalg.norm(x) * np.linalg.norm(y)
            assert rope_relative_check(x, y, p1, p2, cfg) <= bound


class TestFourierConfig:
    def test_shape_validation(self):
        with pytest.raises(ShapeMismatchError):
            FourierConfig(
                input_dim=2, dim=4,
                W=np.zeros((3, 2)),  # needs (2, 2)
                w1=np.eye(4), b1=np.zeros(4), w2=np.eye(4), b2=np.zeros(4),
            )

    def test_nonfinite_rejected(self):
        w = np.zeros((2, 2))
        w[0, 0] = np.nan
        with pytest.raises(NumericValidationError):
            FourierConfig(
                input_dim=2, dim=4, W=w,
                w1=np.eye(4), b1=np.zeros(4), w2=np.eye(4), b2=np.zeros(4),
            )

    def test_from_seed_deterministic(self):
        a = FourierConfig.from_seed(8, seed=42)
        b = FourierConfig.from_seed(8, seed=42)
        c = FourierConfig.from_seed(8, seed=43)
        assert np.array_equal(a.W, b.W) and np.array_equal(a.w1, b.w1)
        assert not np.array_equal(a.W, c.W)

    def test_tensor_round_trip(self, tmp_path):
        cfg = FourierConfig.from_seed(6, seed=1)
        path = tmp_path / "weights.cfgt"
        write_tensors(path, cfg.to_tensors())
        loaded = FourierConfig.from_tensors(read_tensors(path))
        assert np.array_equal(loaded.W, cfg.W)
        assert np.array_equal(loaded.w2, cfg.w2)

    def test_from_tensors_missing_entry(self):
        cfg = FourierConfig.from_seed(4, seed=0)
        tensors = cfg.to_tensors()
        del tensors["mlp.b2"]
        with pytest.raises(ShapeMismatchError):
            FourierConfig.from_tensors(tensors)


class TestFourierEmbed:
    def test_zero_projection_identity_mlp(self):
        cfg = FourierConfig.identity_test(dim=6)
        x = np.arange(6.0)
        out = fourier_embed(x, np.array([3.0, -2.0]), cfg)
        base = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]) / math.sqrt(6.0)
        assert np.array_equal(out, x + base)

    def test_zero_head_is_identity_on_x(self):
        cfg = FourierConfig.zero_output(dim=8, seed=2)
        rng = np.random.default_rng(29)
        x = rng.standard_normal(8)
        assert np.array_equal(fourier_embed(x, np.array([0.5, 1.5]), cfg), x)

    def test_positional_term_independent_of_x(self):
        cfg = FourierConfig.from_seed(8, seed=3)
        rng = np.random.default_rng(31)
        x = rng.standard_normal(8)
        p = rng.uniform(-2, 2, 2)
        assert np.array_equal(
            fourier_embed(x, p, cfg), x + fourier_embed(np.zeros(8), p, cfg)
        )

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(37)
        for seed in range(5):
            cfg = FourierConfig.from_seed(8, seed=seed)
            x = rng.standard_normal(8)
            p = rng.uniform(-3, 3, 2)
            want = oracle_fourier(x, p, cfg)
            assert np.allclose(fourier_embed(x, p, cfg), want, rtol=0, atol=1e-6)

    def test_period_shift_matches_oracle(self):
        cfg = FourierConfig.from_seed(8, seed=4)
        rng = np.random.default_rng(41)
        x = rng.standard_normal(8)
        p = rng.uniform(-1, 1, 2)
        # a full period of the first projection row leaves that row's
        # phase unchanged modulo 2 pi; outputs still match the oracle
        w00 = cfg.W[0, 0]
        shifted = p + np.array([1.0 / w00, 0.0])
        assert np.allclose(
            fourier_embed(x, shifted, cfg), oracle_fourier(x, shifted, cfg), rtol=0, atol=1e-6
        )

    def test_batched_matches_per_row(self):
        cfg = FourierConfig.from_seed(6, seed=5)
        rng = np.random.default_rng(43)
        xs = rng.standard_normal((4, 6))
        ps = rng.uniform(-2, 2, (4, 2))
        batched = fourier_embed(xs, ps, cfg)
        for n in range(4):
            assert np.allclose(batched[n], fourier_embed(xs[n], ps[n], cfg), rtol=0, atol=1e-12)

    def test_shape_mismatch_rejected(self):
        cfg = FourierConfig.from_seed(6, seed=0)
        with pytest.raises(ShapeMismatchError):
            fourier_embed(np.zeros(4), np.zeros(2), cfg)
        with pytest.raises(ShapeMismatchError):
            fourier_embed(np.zeros(6), np.zeros(3), cfg)
        with pytest.raises(ShapeMismatchError):
            fourier_embed(np.zeros((2, 6)), np.zeros(2), cfg)
