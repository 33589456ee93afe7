import math

import numpy as np
import pytest

import oracles
from conftest import random_model, reference_model
from starloc import (
    CarrierConfig,
    DesignKind,
    DimensionMismatchError,
    EnergySplit,
    PathLossModel,
    PowerAllocation,
    RankDeficientError,
    SingularFimError,
    SystemModel,
    UpaConfig,
    analytic_mean_jacobian,
    block_inverse_via_projections,
    channel_params_from_scene,
    crlb_channel,
    crlb_position,
    fim_channel,
    fim_position,
    jacobian,
    make_design,
    mean_vector,
    measurement_matrices,
    simulate_measurement,
)
from starloc.fisher import _inverse_and_condition, link_coefficients

# Reference scenario at 15 dB with a DFT design and even splits.
RMSE_OUTDOOR = 0.013780116032855949
RMSE_INDOOR = 0.019952239553492027
CONDITION = 327673.52812456427
CRLB_AZ1 = 0.011819760832355478
CRLB_D1 = 5.76358374077929e-09
CRLB_D2 = 9.133677330093853e-10
CRLB_D3 = 9.063986102028355e-10


def tiny_model(seed=0, **overrides):
    rng = np.random.default_rng(seed)
    model = random_model(rng, min_elements=2)
    if overrides:
        from dataclasses import replace

        model = replace(model, **overrides)
    return model


class TestEnergySplit:
    def test_from_refraction(self):
        s = EnergySplit.from_refraction(0.6)
        assert s.eps1 == 0.6
        assert s.eps2 == pytest.approx(0.8, rel=1e-15)

    def test_endpoints(self):
        assert EnergySplit.from_refraction(0.0).eps2 == 1.0
        assert EnergySplit.from_refraction(1.0).eps2 == 0.0

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            EnergySplit(0.5, 0.5)
        with pytest.raises(ValueError):
            EnergySplit(-0.1, 1.0)
        with pytest.raises(ValueError):
            EnergySplit.from_refraction(1.5)


class TestPowerAllocation:
    def test_from_outdoor(self):
        a = PowerAllocation.from_outdoor(0.6, total_power=2.0)
        assert a.eta1 == 0.6
        assert a.eta2 == pytest.approx(0.8, rel=1e-15)
        assert a.total_power == 2.0

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            PowerAllocation(0.9, 0.9)
        with pytest.raises(ValueError):
            PowerAllocation.from_outdoor(0.5, total_power=0.0)
        with pytest.raises(ValueError):
            PowerAllocation.from_outdoor(2.0)


class TestSystemModel:
    def test_profile_element_count_must_match_surface(self):
        m = tiny_model()
        bad = make_design(DesignKind.RANDOM, m.ris_upa.size + 1, m.k_slots, seed=0)
        with pytest.raises(DimensionMismatchError):
            tiny_model(profiles=bad)

    def test_profile_slots_must_match_model(self):
        m = tiny_model()
        bad = make_design(DesignKind.RANDOM, m.ris_upa.size, m.k_slots + 1, seed=0)
        with pytest.raises(DimensionMismatchError):
            tiny_model(profiles=bad)

    def test_noise_variance_sign(self):
        with pytest.raises(ValueError):
            tiny_model(noise_variance=-1.0)
        # zero noise is allowed (noiseless simulation) but has no SNR scale
        quiet = tiny_model(noise_variance=0.0)
        with pytest.raises(ValueError):
            quiet.snr_scale

    def test_snr_scale(self):
        m = tiny_model(noise_variance=0.25)
        assert m.snr_scale == pytest.approx(m.alloc.total_power / 0.25, rel=1e-15)


class TestMeasurementMatrices:
    def test_shapes(self):
        m = tiny_model()
        mats = measurement_matrices(m)
        mk = m.bs_upa.size * m.k_slots
        assert mats.direct.shape == (mk, m.bs_upa.size)
        assert mats.reflection.shape == (mk, m.ris_upa.size)
        assert mats.refraction.shape == (mk, m.ris_upa.size)

    def test_direct_is_tiled_identity(self):
        m = tiny_model()
        mats = measurement_matrices(m)
        expected = np.tile(np.eye(m.bs_upa.size), (m.k_slots, 1))
        assert np.array_equal(mats.direct, expected)

    def test_slot_blocks_weight_anchor_channel(self):
        from starloc import bs_ris_channel, spherical_from_positions

        m = tiny_model()
        mats = measurement_matrices(m)
        h4 = bs_ris_channel(
            spherical_from_positions(m.scene.bs, m.scene.ris),
            m.bs_upa,
            m.ris_upa,
            m.loss,
            m.carrier,
        )
        mm = m.bs_upa.size
        for slot in (0, m.k_slots - 1):
            block = mats.reflection[slot * mm : (slot + 1) * mm]
            np.testing.assert_allclose(
                block, h4 * m.profiles.reflection[:, slot][None, :], atol=1e-15
            )
            block = mats.refraction[slot * mm : (slot + 1) * mm]
            np.testing.assert_allclose(
                block, h4 * m.profiles.refraction[:, slot][None, :], atol=1e-15
            )


def test_link_coefficients_pattern():
    split = EnergySplit.from_refraction(0.6)
    alloc = PowerAllocation.from_outdoor(0.3)
    c = link_coefficients(split, alloc)
    eta2 = math.sqrt(1 - 0.09)
    np.testing.assert_allclose(
        c, [0.3, 0.3, 0.3, 0.24, 0.24, 0.24, eta2 * 0.6, eta2 * 0.6, eta2 * 0.6], rtol=1e-15
    )


class TestMeanVector:
    def test_manual_assembly(self):
        m = tiny_model(3)
        params = channel_params_from_scene(m.scene)
        from starloc import los_channel

        mats = measurement_matrices(m)
        h1 = los_channel(params.bs_outdoor, m.bs_upa, m.loss, m.carrier)
        h2 = los_channel(params.ris_outdoor, m.ris_upa, m.loss, m.carrier)
        h3 = los_channel(params.ris_indoor, m.ris_upa, m.loss, m.carrier)
        c = link_coefficients(m.split, m.alloc)
        manual = c[0] * (mats.direct @ h1) + c[3] * (mats.reflection @ h2) + c[6] * (mats.refraction @ h3)
        assert np.array_equal(mean_vector(m, params), manual)

    def test_default_params_come_from_scene(self):
        m = tiny_model(4)
        params = channel_params_from_scene(m.scene)
        assert np.array_equal(mean_vector(m), mean_vector(m, params))


class TestMeanJacobian:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(12):
            m = random_model(rng)
            params = channel_params_from_scene(m.scene)
            g = analytic_mean_jacobian(m, params).g
            fd = oracles.fd_mean_jacobian(m, params)
            colscale = np.linalg.norm(g, axis=0)
            floor = 1e-9 * colscale.max()
            rel = np.linalg.norm(g - fd, axis=0) / np.maximum(colscale, floor)
            assert rel.max() <= 1e-5

    def test_matches_entrywise_construction(self):
        rng = np.random.default_rng(7)
        for _ in range(8):
            m = random_model(rng)
            params = channel_params_from_scene(m.scene)
            g = analytic_mean_jacobian(m, params).g
            ew = oracles.entrywise_mean_jacobian(m, params)
            assert np.max(np.abs(g - ew)) <= 1e-12 * np.max(np.abs(g))

    def test_reference_scenario_finite_differences(self):
        m = reference_model()
        params = channel_params_from_scene(m.scene)
        g = analytic_mean_jacobian(m, params).g
        fd = oracles.fd_mean_jacobian(m, params)
        colscale = np.linalg.norm(g, axis=0)
        rel = np.linalg.norm(g - fd, axis=0) / colscale
        assert rel.max() <= 1e-5

    def test_mu_matches_mean_vector(self):
        m = tiny_model(5)
        mj = analytic_mean_jacobian(m)
        assert np.array_equal(mj.mu, mean_vector(m))


class TestChannelFim:
    def test_structure(self):
        m = tiny_model(6)
        f = fim_channel(m)
        assert f.gram.shape == (9, 9)
        assert np.array_equal(f.gram, f.gram.T)
        assert np.array_equal(f.matrix, f.snr_scale * f.gram)
        assert np.linalg.eigvalsh(f.gram)[0] >= -1e-10 * np.abs(f.gram).max()

    def test_matches_brute_force_gram(self):
        m = tiny_model(8)
        g = analytic_mean_jacobian(m).g
        f = fim_channel(m)
        brute = (g.conj().T @ g).real
        np.testing.assert_allclose(f.gram, (brute + brute.T) / 2, atol=0)

    def test_snr_moves_matrix_not_gram(self):
        base = tiny_model(9, noise_variance=1.0)
        quiet = tiny_model(9, noise_variance=0.1)
        f1, f2 = fim_channel(base), fim_channel(quiet)
        assert np.array_equal(f1.gram, f2.gram)
        np.testing.assert_allclose(f2.matrix, 10.0 * f1.matrix, rtol=1e-14)

    def test_singular_when_direct_array_has_one_element(self):
        m = tiny_model(10, bs_upa=UpaConfig(1, 1))
        with pytest.raises(SingularFimError) as exc:
            crlb_channel(fim_channel(m))
        assert exc.value.condition_number == np.inf


class TestPositionFim:
    def test_chain_rule(self):
        m = tiny_model(11)
        f = fim_channel(m)
        jac = jacobian(m.scene)
        p = fim_position(f, jac)
        expected = jac.full @ f.gram @ jac.full.T
        np.testing.assert_allclose(p.gram, (expected + expected.T) / 2, atol=0)
        assert p.matrix.shape == (6, 6)
        assert p.snr_scale == f.snr_scale

    def test_structured_design_decouples_mobiles(self):
        m = reference_model(DesignKind.DFT)
        p = fim_position(fim_channel(m), jacobian(m.scene))
        diag_scale = max(
            np.abs(p.gram[0:3, 0:3]).max(), np.abs(p.gram[3:6, 3:6]).max()
        )
        assert np.abs(p.gram[0:3, 3:6]).max() <= 1e-10 * diag_scale


class TestCrlb:
    def test_channel_crlb_reference_frozen(self):
        f = fim_channel(reference_model())
        c = crlb_channel(f)
        assert c[0] == pytest.approx(CRLB_AZ1, rel=1e-9)
        assert c[2] == pytest.approx(CRLB_D1, rel=1e-9)
        assert c[5] == pytest.approx(CRLB_D2, rel=1e-9)
        assert c[8] == pytest.approx(CRLB_D3, rel=1e-9)

    def test_channel_crlb_matches_plain_inverse(self):
        rng = np.random.default_rng(1)
        checked = 0
        while checked < 6:
            m = random_model(rng, min_elements=2)
            g = analytic_mean_jacobian(m).g
            try:
                c = crlb_channel(fim_channel(m))
            except SingularFimError:
                continue
            oracle = np.diag(oracles.direct_crlb(g, m.snr_scale))
            np.testing.assert_allclose(c, oracle, rtol=1e-10)
            checked += 1

    def test_position_report_reference_frozen(self):
        m = reference_model()
        rep = crlb_position(fim_position(fim_channel(m), jacobian(m.scene)))
        assert rep.rmse_outdoor == pytest.approx(RMSE_OUTDOOR, rel=1e-9)
        assert rep.rmse_indoor == pytest.approx(RMSE_INDOOR, rel=1e-9)
        assert rep.condition_number == pytest.approx(CONDITION, rel=1e-8)
        assert rep.channel_crlb is None

    def test_position_crlb_matches_plain_inverse(self):
        m = reference_model()
        p = fim_position(fim_channel(m), jacobian(m.scene))
        rep = crlb_position(p)
        oracle = np.linalg.inv(p.matrix)
        scale = np.abs(oracle).max()
        assert np.abs(rep.position_crlb - oracle).max() <= 1e-8 * scale

    def test_rmse_fields_are_block_root_traces(self):
        m = tiny_model(13)
        rep = crlb_position(fim_position(fim_channel(m), jacobian(m.scene)))
        c = rep.position_crlb
        assert rep.rmse_outdoor == pytest.approx(math.sqrt(np.trace(c[:3, :3])), rel=1e-15)
        assert rep.rmse_indoor == pytest.approx(math.sqrt(np.trace(c[3:, 3:])), rel=1e-15)

    def test_power_scaling_is_exact(self):
        m_lo = reference_model()
        from dataclasses import replace

        alloc_hi = PowerAllocation(m_lo.alloc.eta1, m_lo.alloc.eta2, m_lo.alloc.total_power * 100.0)
        m_hi = replace(m_lo, alloc=alloc_hi)
        rep_lo = crlb_position(fim_position(fim_channel(m_lo), jacobian(m_lo.scene)))
        rep_hi = crlb_position(fim_position(fim_channel(m_hi), jacobian(m_hi.scene)))
        np.testing.assert_allclose(
            rep_lo.position_crlb, 100.0 * rep_hi.position_crlb, rtol=1e-12
        )
        assert rep_lo.rmse_outdoor / rep_hi.rmse_outdoor == pytest.approx(10.0, rel=1e-12)
        assert rep_lo.rmse_indoor / rep_hi.rmse_indoor == pytest.approx(10.0, rel=1e-12)

    def test_channel_crlb_passthrough(self):
        m = tiny_model(14)
        f = fim_channel(m)
        p = fim_position(f, jacobian(m.scene))
        c = crlb_channel(f)
        rep = crlb_position(p, channel_crlb=c)
        assert np.array_equal(rep.channel_crlb, c)


class TestInverseGuard:
    def test_condition_limit_enforced(self):
        with pytest.raises(SingularFimError) as exc:
            _inverse_and_condition(np.diag([1.0, 1e-13]))
        assert exc.value.condition_number == pytest.approx(1e13, rel=1e-6)

    def test_well_conditioned_inverse(self):
        inv, cond = _inverse_and_condition(np.diag([2.0, 0.5]))
        np.testing.assert_allclose(inv, np.diag([0.5, 2.0]), rtol=1e-14)
        assert cond == pytest.approx(4.0, rel=1e-12)

    def test_zero_diagonal_is_singular(self):
        with pytest.raises(SingularFimError):
            _inverse_and_condition(np.diag([1.0, 0.0]))

    def test_scaling_invariance(self):
        # Badly scaled but intrinsically well-conditioned input within the
        # limit must still invert accurately.
        rng = np.random.default_rng(0)
        a = rng.normal(size=(5, 5))
        base = a @ a.T + 5.0 * np.eye(5)
        s = np.diag([1.0, 10.0, 100.0, 1e3, 31.0])
        gram = s @ base @ s
        inv, _ = _inverse_and_condition(gram)
        np.testing.assert_allclose(inv @ gram, np.eye(5), atol=1e-10)


class TestBlockProjections:
    def test_matches_full_inverse_blocks_reference(self):
        m = reference_model()
        jac = jacobian(m.scene)
        rep = crlb_position(fim_position(fim_channel(m), jac))
        out, ind = block_inverse_via_projections(m, jac)
        scale_out = np.abs(rep.position_crlb[:3, :3]).max()
        scale_in = np.abs(rep.position_crlb[3:, 3:]).max()
        assert np.abs(out - rep.position_crlb[:3, :3]).max() <= 1e-8 * scale_out
        assert np.abs(ind - rep.position_crlb[3:, 3:]).max() <= 1e-8 * scale_in

    def test_matches_full_inverse_blocks_random(self):
        rng = np.random.default_rng(21)
        checked = 0
        while checked < 5:
            m = random_model(rng, min_elements=2)
            jac = jacobian(m.scene)
            try:
                rep = crlb_position(fim_position(fim_channel(m), jac))
            except SingularFimError:
                continue
            out, ind = block_inverse_via_projections(m, jac)
            scale = np.abs(rep.position_crlb).max()
            assert np.abs(out - rep.position_crlb[:3, :3]).max() <= 1e-7 * scale
            assert np.abs(ind - rep.position_crlb[3:, 3:]).max() <= 1e-7 * scale
            checked += 1

    def test_rank_deficient_surface_rejected(self):
        m = tiny_model(15, ris_upa=UpaConfig(1, 1), k_slots=4,
                       profiles=make_design(DesignKind.DFT, 1, 4))
        with pytest.raises(RankDeficientError):
            block_inverse_via_projections(m, jacobian(m.scene))


class TestSimulateMeasurement:
    def test_seeded_and_noiseless(self):
        m = tiny_model(16)
        a = simulate_measurement(m, seed=5)
        b = simulate_measurement(m, seed=5)
        c = simulate_measurement(m, seed=6)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        quiet = tiny_model(16, noise_variance=0.0)
        clean = simulate_measurement(quiet, seed=5)
        expected = math.sqrt(quiet.alloc.total_power) * mean_vector(quiet)
        assert np.array_equal(clean, expected)

    def test_noise_power(self):
        m = tiny_model(17, noise_variance=0.8)
        mu = math.sqrt(m.alloc.total_power) * mean_vector(m)
        draws = 400
        total = 0.0
        for s in range(draws):
            y = simulate_measurement(m, seed=s)
            total += np.sum(np.abs(y - mu) ** 2)
        per_entry = total / (draws * mu.size)
        assert per_entry == pytest.approx(0.8, rel=0.05)
