import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from silm.errors import DomainError, ValidationError
from silm.leakage import objective_value
from silm.linalg import is_semi_unitary
from silm.network import NetworkConfig, draw_channels
from silm.solver import (PrecoderKind, SolverParams,
                         apply_intra_cell_precoding,
                         assemble_downlink_precoders, effective_channel,
                         intra_cell_precoder, mmse_power, run_silm,
                         step2_receive_update, step3_transmit_update)

from conftest import FIG6, instance


def descent_margin(J):
    return 1e-9 * (1 + abs(J))


class TestHalfSteps:
    @pytest.mark.parametrize("seed", range(10))
    def test_each_half_step_descends(self, seed):
        cfg, ch, st0 = instance(seed, **FIG6, w=0.02)
        J0 = objective_value(cfg, ch, st0)
        st1 = step2_receive_update(cfg, ch, st0)
        J1 = objective_value(cfg, ch, st1)
        st2 = step3_transmit_update(cfg, ch, st1)
        J2 = objective_value(cfg, ch, st2)
        assert J1 <= J0 + descent_margin(J0)
        assert J2 <= J1 + descent_margin(J1)

    def test_receive_step_leaves_transmitters(self, mixed_instance):
        cfg, ch, st = mixed_instance
        new = step2_receive_update(cfg, ch, st)
        assert new.dl_bs is st.dl_bs and new.ul_user is st.ul_user
        new = step3_transmit_update(cfg, ch, st)
        assert new.dl_user is st.dl_user and new.ul_bs is st.ul_bs


class TestRunSilm:
    def test_trace_monotone(self):
        cfg, ch, st = instance(1, **FIG6, w=0.005)
        rep = run_silm(cfg, ch, SolverParams(max_iters=40, rel_tol=1e-12), state=st)
        tr = np.array(rep.objective_trace)
        assert len(tr) == 1 + 2 * rep.iterations_run
        assert np.all(np.diff(tr) <= 1e-9 * (1 + tr[:-1]))

    @pytest.mark.parametrize("kw", [
        dict(L_d=3, L_u=0, K=2, N_b=5, N_m=3, s=1),
        dict(L_d=0, L_u=3, K=2, N_b=5, N_m=3, s=1),
        dict(L_d=2, L_u=2, K=2, N_b=4, N_m=3, s=2),
        dict(L_d=2, L_u=1, K=2, N_b=4, N_m=2, s=1, w=0.0),
    ])
    def test_degenerate_shapes_run(self, kw):
        cfg = NetworkConfig(**{"rho_db": -10.0, "w": 0.02, **kw})
        rng = np.random.default_rng(3)
        ch = draw_channels(cfg, rng)
        rep = run_silm(cfg, ch, rng=rng)
        tr = np.array(rep.objective_trace)
        assert np.all(np.diff(tr) <= 1e-9 * (1 + tr[:-1]))
        assert is_semi_unitary(rep.final_state.dl_bs, 1e-10)
        assert is_semi_unitary(rep.final_state.ul_user, 1e-10)

    def test_isolated_cell_is_immediately_optimal(self):
        cfg = NetworkConfig(L_d=1, L_u=0, K=2, N_b=4, N_m=3, s=1, w=0.0)
        rng = np.random.default_rng(0)
        ch = draw_channels(cfg, rng)
        rep = run_silm(cfg, ch, rng=rng)
        assert rep.converged and rep.iterations_run == 1
        assert rep.objective_trace[-1] == 0.0

    def test_deterministic(self):
        cfg = NetworkConfig(**FIG6, w=0.01)
        reps = []
        for _ in range(2):
            rng = np.random.default_rng(42)
            ch = draw_channels(cfg, rng)
            reps.append(run_silm(cfg, ch, rng=rng))
        assert reps[0].objective_trace == reps[1].objective_trace
        assert np.array_equal(reps[0].final_state.V_d, reps[1].final_state.V_d)

    def test_converged_state_is_fixed_point(self):
        cfg, ch, st = instance(8, **FIG6, w=0.01)
        rep = run_silm(cfg, ch, SolverParams(max_iters=500, rel_tol=1e-12), state=st)
        assert rep.converged
        fin = rep.final_state
        J = objective_value(cfg, ch, fin)
        again = step3_transmit_update(cfg, ch, step2_receive_update(cfg, ch, fin))
        assert abs(objective_value(cfg, ch, again) - J) <= 1e-10 * (1 + J)

    def test_no_unitarity_drift(self):
        cfg, ch, st = instance(2, **FIG6, w=0.02)
        rep = run_silm(cfg, ch, SolverParams(max_iters=300, rel_tol=1e-15), state=st)
        assert rep.iterations_run >= 100
        fin = rep.final_state
        for U in (fin.dl_bs, fin.dl_user, fin.ul_bs, fin.ul_user):
            assert is_semi_unitary(U, 1e-10)

    def test_needs_rng_or_state(self):
        cfg = NetworkConfig(**FIG6)
        ch = draw_channels(cfg, np.random.default_rng(0))
        with pytest.raises(ValidationError):
            run_silm(cfg, ch)

    def test_invalid_config(self):
        cfg = NetworkConfig(K=3, s=2, N_m=2, N_b=5)
        with pytest.raises(ValidationError):
            run_silm(cfg, None, rng=np.random.default_rng(0))

    @pytest.mark.parametrize("kw", [dict(max_iters=0), dict(rel_tol=0.0),
                                    dict(precoder="svd")])
    def test_params_validated(self, kw):
        with pytest.raises(ValueError):
            SolverParams(**kw)


class TestMMSE:
    def test_identity_power_limited(self):
        V, mu = intra_cell_precoder(np.eye(2), 0.5)
        assert mu == pytest.approx(1.0, rel=1e-6)
        np.testing.assert_allclose(V, np.eye(2) / 2, atol=1e-12)

    def test_identity_unconstrained(self):
        V, mu = intra_cell_precoder(np.eye(2), 2.0)
        assert mu == 0.0
        np.testing.assert_allclose(V, np.eye(2), atol=1e-15)

    def test_power_function(self):
        sv = np.array([2.0, 1.0, 0.0])
        assert mmse_power(sv, 0.0) == pytest.approx(0.25 + 1.0)
        assert mmse_power(sv, 1.0) == pytest.approx(4 / 25 + 1 / 4)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5),
           logP=st.floats(-3, 3))
    def test_power_met(self, seed, n, logP):
        rng = np.random.default_rng(seed)
        Ht = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        P = 10.0 ** logP
        V, mu = intra_cell_precoder(Ht, P)
        assert np.vdot(V, V).real == pytest.approx(P, rel=1e-9)
        assert mu >= 0
        if mu > 0:
            expected = np.linalg.solve(mu * np.eye(n) + Ht.conj().T @ Ht, Ht.conj().T)
            expected *= math.sqrt(P / np.vdot(expected, expected).real)
            np.testing.assert_allclose(V, expected, atol=1e-6 * math.sqrt(P))

    def test_matched_filter_limit(self, rng):
        Ht = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        V, mu = intra_cell_precoder(Ht, 1e-8)
        mf = Ht.conj().T / np.linalg.norm(Ht)
        assert mu > 1e3
        assert np.linalg.norm(V / np.linalg.norm(V) - mf) < 1e-3

    def test_zero_channel(self):
        V, mu = intra_cell_precoder(np.zeros((3, 3)), 6.0)
        np.testing.assert_allclose(V, math.sqrt(2.0) * np.eye(3))

    def test_bad_power(self):
        with pytest.raises(ValidationError):
            intra_cell_precoder(np.eye(2), 0.0)


class TestZF:
    def test_diagonalizes(self, rng):
        Ht = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        V, mu = intra_cell_precoder(Ht, 5.0, PrecoderKind.ZF)
        assert mu == 0.0
        prod = Ht @ V
        c = prod[0, 0]
        np.testing.assert_allclose(prod, c * np.eye(4), atol=1e-10 * abs(c))
        assert np.vdot(V, V).real == pytest.approx(5.0, rel=1e-12)

    def test_singular(self):
        with pytest.raises(DomainError):
            intra_cell_precoder(np.array([[1.0, 1.0], [1.0, 1.0]]), 1.0, "zf")


class TestDownlinkAssembly:
    def test_effective_channel(self, mixed_instance):
        cfg, ch, st = mixed_instance
        Ht = effective_channel(cfg, ch, st, 1)
        assert Ht.shape == (cfg.Ks, cfg.Ks)
        for k in range(cfg.K):
            blk = st.G_d_perp[1, k].conj().T @ ch.dl[1, 1, k] @ st.V_prime[1]
            np.testing.assert_allclose(Ht[k * cfg.s:(k + 1) * cfg.s], blk)
        with pytest.raises(IndexError):
            effective_channel(cfg, ch, st, cfg.L_d)

    def test_total_power(self, mixed_instance):
        cfg, ch, st = mixed_instance
        st = apply_intra_cell_precoding(cfg, ch, st)
        for a in range(cfg.L_d):
            Vk = assemble_downlink_precoders(st, a)
            assert Vk.shape == (cfg.K, cfg.N_b, cfg.s)
            power = sum(np.vdot(V, V).real for V in Vk)
            assert power == pytest.approx(cfg.P, rel=1e-9)

    def test_zf_removes_intra_cell_interference(self, mixed_instance):
        cfg, ch, st = mixed_instance
        st = apply_intra_cell_precoding(cfg, ch, st, PrecoderKind.ZF)
        Vk = assemble_downlink_precoders(st, 0)
        for k in range(cfg.K):
            F = st.G_d_perp[0, k]
            for j in range(cfg.K):
                if j != k:
                    leak = F.conj().T @ ch.dl[0, 0, k] @ Vk[j]
                    assert np.linalg.norm(leak) <= 1e-9


def test_random_restart_lands_near_same_objective():
    # the solver is a local method, but restarts on an easy instance agree
    cfg = NetworkConfig(L_d=2, L_u=0, K=1, N_b=4, N_m=2, s=1, rho_db=-10.0, w=0.0)
    ch = draw_channels(cfg, np.random.default_rng(1))
    finals = []
    for seed in range(3):
        rng = np.random.default_rng(100 + seed)
        rep = run_silm(cfg, ch, SolverParams(max_iters=300, rel_tol=1e-12), rng=rng)
        finals.append(rep.objective_trace[-1])
    assert max(finals) <= 1e-8
