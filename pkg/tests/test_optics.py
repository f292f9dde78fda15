import numpy as np
import pytest

from lgwave.optics import (
    NORMALS_PER_REALIZATION,
    SIGMA,
    Context,
    HiddenState,
    OpticalParams,
    SourceParams,
    detect,
    norm,
    sample_hidden,
    source_output,
    stage1,
    stage2,
    stage3,
)


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def make_state(**kwargs):
    zeros = {k: np.zeros(2, dtype=complex) for k in ("z1", "z2", "z3", "zp1", "zp2", "zp3", "zp4")}
    zeros.update(kwargs)
    return HiddenState(**zeros)


class TestSampleHidden:
    def test_component_moments(self):
        h = sample_hidden(rng(1), 100_000)
        z = np.concatenate([h.z1, h.z2, h.z3, h.zp1, h.zp2, h.zp3, h.zp4])
        assert abs(z.real.var() - 0.5) < 0.01
        assert abs(z.imag.var() - 0.5) < 0.01
        assert 0.99 < np.mean(np.abs(z) ** 2) < 1.01

    def test_independent_calls(self):
        g = rng(2)
        n = 100_000
        h1 = sample_hidden(g, n)
        h2 = sample_hidden(g, n)
        corr = np.mean(h1.z1 * np.conj(h2.z1))
        assert abs(corr) < 3 / np.sqrt(n)

    def test_reproducible(self):
        h1 = sample_hidden(rng(3), 100)
        h2 = sample_hidden(rng(3), 100)
        for f in ("z1", "z2", "z3", "zp1", "zp2", "zp3", "zp4"):
            assert np.array_equal(getattr(h1, f), getattr(h2, f))

    def test_fixed_draw_count_per_realization(self):
        # a batch of n must consume exactly n * NORMALS_PER_REALIZATION draws
        n = 17
        sample_hidden(rng(4), n)
        g = rng(4)
        g.standard_normal(n * NORMALS_PER_REALIZATION)
        probe1 = g.standard_normal()
        g2 = rng(4)
        sample_hidden(g2, n)
        probe2 = g2.standard_normal()
        assert probe1 == probe2

    def test_single_realization_shape(self):
        h = sample_hidden(rng(5))
        assert h.z1.shape == (2,)


class TestSourceOutput:
    def test_zero_squeezing(self):
        h = make_state(
            z1=np.array([1.0, 0.0], dtype=complex),
            z2=np.array([1j, 0.0]),
            z3=np.array([0.0, 1.0], dtype=complex),
        )
        a1, a2, a3 = source_output(h, SourceParams(r=0.0))
        np.testing.assert_allclose(a1, [SIGMA, 0])
        np.testing.assert_allclose(a2, [1j * SIGMA, 0])
        np.testing.assert_allclose(a3, [0, SIGMA])

    def test_second_moments(self):
        # E[||a1||^2] = cosh 2r and E[a1 a2^T] = sigma^2 sinh(2r) I
        r = 0.3
        n = 1_000_000
        h = sample_hidden(rng(6), n)
        a1, a2, _ = source_output(h, SourceParams(r=r))
        power = (np.abs(a1) ** 2).sum(axis=1)
        se = power.std() / np.sqrt(n)
        assert abs(power.mean() - np.cosh(2 * r)) < 3 * se

        prod_hh = a1[:, 0] * a2[:, 0]
        target = SIGMA**2 * np.sinh(2 * r)
        se = prod_hh.std() / np.sqrt(n)
        assert abs(prod_hh.mean() - target) < 3 * se
        # off-diagonal: H with V uncorrelated
        prod_hv = a1[:, 0] * a2[:, 1]
        se = prod_hv.std() / np.sqrt(n)
        assert abs(prod_hv.mean()) < 3 * se

    def test_negative_r_rejected(self):
        with pytest.raises(ValueError):
            SourceParams(r=-0.1)


def ctx(b, t1=0.5, t2=0.75, t3=0.75, theta1=0.0, theta2=0.0):
    return Context(b=b, optics=OpticalParams(t1=t1, t2=t2, t3=t3, theta1=theta1, theta2=theta2))


class TestStages:
    def test_stage1_open(self):
        h = make_state()
        a2 = np.array([1.0, 0.0], dtype=complex)
        a3 = np.zeros(2, dtype=complex)
        out2, out3 = stage1(a2, a3, h, ctx((1, 1, 1, 1), t1=0.5, theta1=0.0))
        np.testing.assert_allclose(out2, [np.sqrt(0.5), 0])
        np.testing.assert_allclose(out3, [np.sqrt(0.5), 0])

    def test_stage1_blocked_arm_is_vacuum(self):
        h = make_state(zp2=np.array([2.0, -1j]))
        a2 = np.array([5.0, 5.0], dtype=complex)
        a3 = np.array([-3.0, 1.0], dtype=complex)
        out2, _ = stage1(a2, a3, h, ctx((1, 0, 1, 1)))
        np.testing.assert_allclose(out2, SIGMA * h.zp2)

    def test_stage2_open(self):
        h = make_state()
        a2 = np.array([1.0, 0.0], dtype=complex)
        a3 = np.zeros(2, dtype=complex)
        out2, out3 = stage2(a2, a3, h, ctx((1, 1, 1, 1), t2=0.75, theta2=0.0))
        np.testing.assert_allclose(out2, [0.5, 0])
        np.testing.assert_allclose(out3, [np.sqrt(0.75), 0])

    def test_stage2_blocked_arm_is_vacuum(self):
        h = make_state(zp4=np.array([1.0, 1.0], dtype=complex))
        a2 = np.array([5.0, 5.0], dtype=complex)
        a3 = np.array([-3.0, 1.0], dtype=complex)
        _, out3 = stage2(a2, a3, h, ctx((1, 1, 1, 0)))
        np.testing.assert_allclose(out3, SIGMA * h.zp4)

    def test_stage3_full_transmission(self):
        a2 = np.array([1.0, 2j])
        a3 = np.array([3.0, -1j])
        out2, out3 = stage3(a2, a3, ctx((1, 1, 1, 1), t3=1.0))
        np.testing.assert_allclose(out2, a2)
        np.testing.assert_allclose(out3, -a3)

    def test_stage3_example(self):
        a2 = np.array([1.0, 0.0], dtype=complex)
        a3 = np.array([1.0, 0.0], dtype=complex)
        out2, out3 = stage3(a2, a3, ctx((1, 1, 1, 1), t3=0.75))
        np.testing.assert_allclose(out2, [np.sqrt(0.75) + 0.5, 0])
        np.testing.assert_allclose(out3, [0.5 - np.sqrt(0.75), 0])

    def test_unblocked_norm_conservation(self):
        # 10^4 random inputs and parameters, all three stages, 1e-12
        n = 10_000
        g = rng(7)
        h = sample_hidden(g, n)
        a2 = (g.standard_normal((n, 2)) + 1j * g.standard_normal((n, 2)))
        a3 = (g.standard_normal((n, 2)) + 1j * g.standard_normal((n, 2)))
        c = ctx(
            (1, 1, 1, 1),
            t1=g.uniform(), t2=g.uniform(), t3=g.uniform(),
            theta1=g.uniform(0, 2 * np.pi), theta2=g.uniform(0, 2 * np.pi),
        )
        p_in = norm(a2) ** 2 + norm(a3) ** 2
        for stage in (lambda x, y: stage1(x, y, h, c),
                      lambda x, y: stage2(x, y, h, c),
                      lambda x, y: stage3(x, y, c)):
            o2, o3 = stage(a2, a3)
            p_out = norm(o2) ** 2 + norm(o3) ** 2
            np.testing.assert_allclose(p_out, p_in, rtol=1e-12, atol=1e-12)

    def test_blocked_output_independent_of_input(self):
        n = 100_000
        g = rng(8)
        h = sample_hidden(g, n)
        a2 = g.standard_normal((n, 2)) + 1j * g.standard_normal((n, 2))
        a3 = np.zeros_like(a2)
        out2, _ = stage1(a2, a3, h, ctx((1, 0, 1, 1)))
        corr = np.mean(out2[:, 0] * np.conj(a2[:, 0]))
        assert abs(corr) < 3 / np.sqrt(n)


class TestDetect:
    def test_below_threshold(self):
        assert not detect(np.array([1.5, 1.3j]), 2.0)

    def test_strict_at_zero(self):
        assert not detect(np.zeros(2, dtype=complex), 0.0)

    def test_above_threshold(self):
        assert detect(np.array([3.0, 0.0], dtype=complex), 2.0)

    def test_batched(self):
        a = np.array([[3.0, 0.0], [0.1, 0.0]], dtype=complex)
        np.testing.assert_array_equal(detect(a, 2.0), [True, False])

    def test_negative_gamma_rejected(self):
        with pytest.raises(ValueError):
            detect(np.zeros(2, dtype=complex), -1.0)


class TestParams:
    def test_transmittance_range(self):
        with pytest.raises(ValueError):
            OpticalParams(t1=1.5)

    def test_context_bits(self):
        with pytest.raises(ValueError):
            Context(b=(1, 2, 0, 1))
