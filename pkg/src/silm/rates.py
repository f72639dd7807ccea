"""
Achievable sum-rates with all interference treated as Gaussian noise.

Downlink users decode their own streams after projecting onto the receive
subspace; each uplink BS decodes all users of its cell jointly after
projecting onto its receive subspace. Uplink users transmit ``s`` streams at
power ``P/(K s)`` each, so their precoders enter with that prefactor, while
downlink precoders ``V' V''`` already carry the power ``P``. Rates are in
bits per channel use.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import logdet_hpd

__all__ = [
    "RateReport",
    "dl_interference_covariances",
    "ul_interference_covariances",
    "dl_signal_covariances",
    "ul_signal_covariances",
    "downlink_sum_rate",
    "uplink_sum_rate",
    "sum_rates",
    "covariance_consistency_check",
]


def _h(X):
    return np.swapaxes(X, -1, -2).conj()


def _gram(X):
    return X @ _h(X)


@dataclass(frozen=True)
class RateReport:
    per_dl_user_rate: np.ndarray    # (L_d, K)
    per_ul_cell_rate: np.ndarray    # (L_u,)
    R_DL: float
    R_UL: float

    @property
    def R_total(self):
        return self.R_DL + self.R_UL


def dl_interference_covariances(cfg, ch, st):
    """Interference-plus-noise covariance at each DL user antenna, (L_d, K, N_m, N_m).

    Covers intra-cell streams of the other users, other DL BSs, all UL users
    and unit-variance noise.
    """
    Ld, K, Nm = cfg.L_d, cfg.K, cfg.N_m
    Vk = st.dl_user_precoders()                    # (Ld, K, Nb, s)
    out = np.empty((Ld, K, Nm, Nm), dtype=complex)
    for a in range(Ld):
        for k in range(K):
            C = np.eye(Nm, dtype=complex)
            H = ch.dl[a, a, k]
            for i in range(K):
                if i != k:
                    C += _gram(H @ Vk[a, i])
            for b in range(Ld):
                if b != a:
                    C += _gram(ch.dl[b, a, k] @ st.V_d[b])
            for u in range(cfg.L_u):
                for j in range(K):
                    C += (cfg.P / cfg.Ks) * _gram(ch.ul_to_dl[u, j, a, k] @ st.G_u_perp[u, j])
            out[a, k] = C
    return out


def dl_signal_covariances(cfg, ch, st):
    """Desired-signal covariance at each DL user antenna, (L_d, K, N_m, N_m)."""
    Vk = st.dl_user_precoders()
    idx = np.arange(cfg.L_d)
    return _gram(ch.dl[idx, idx] @ Vk)


def ul_interference_covariances(cfg, ch, st):
    """Interference-plus-noise covariance at each UL BS antenna, (L_u, N_b, N_b)."""
    Lu, K, Nb = cfg.L_u, cfg.K, cfg.N_b
    out = np.empty((Lu, Nb, Nb), dtype=complex)
    for u in range(Lu):
        C = np.eye(Nb, dtype=complex)
        for b in range(Lu):
            if b == u:
                continue
            for i in range(K):
                C += (cfg.P / cfg.Ks) * _gram(ch.ul[b, i, u] @ st.G_u_perp[b, i])
        for a in range(cfg.L_d):
            C += _gram(ch.dl_to_ul[a, u] @ st.V_d[a])
        out[u] = C
    return out


def ul_signal_covariances(cfg, ch, st):
    """Covariance of all own-cell users' signals at each UL BS, (L_u, N_b, N_b)."""
    idx = np.arange(cfg.L_u)
    own = ch.ul[idx, :, idx] @ st.G_u_perp        # (u, k, Nb, s)
    return (cfg.P / cfg.Ks) * np.sum(_gram(own), axis=1)


def _rate(C, S):
    # log2 det(I + C^{-1} S) = log2 det(C + S) - log2 det(C) for HPD C
    return max(0.0, logdet_hpd(C + S) - logdet_hpd(C))


def downlink_sum_rate(cfg, ch, st):
    """Per-user DL rates (L_d, K) and their sum."""
    C_all = dl_interference_covariances(cfg, ch, st)
    S_all = dl_signal_covariances(cfg, ch, st)
    F = st.G_d_perp
    rates = np.zeros((cfg.L_d, cfg.K))
    for a in range(cfg.L_d):
        for k in range(cfg.K):
            Fh = _h(F[a, k])
            rates[a, k] = _rate(Fh @ C_all[a, k] @ F[a, k], Fh @ S_all[a, k] @ F[a, k])
    return rates, float(rates.sum())


def uplink_sum_rate(cfg, ch, st):
    """Per-cell UL rates (L_u,) with joint decoding, and their sum."""
    C_all = ul_interference_covariances(cfg, ch, st)
    S_all = ul_signal_covariances(cfg, ch, st)
    V = st.V_u
    rates = np.zeros(cfg.L_u)
    for u in range(cfg.L_u):
        Vh = _h(V[u])
        rates[u] = _rate(Vh @ C_all[u] @ V[u], Vh @ S_all[u] @ V[u])
    return rates, float(rates.sum())


def sum_rates(cfg, ch, st):
    dl, R_DL = downlink_sum_rate(cfg, ch, st)
    ul, R_UL = uplink_sum_rate(cfg, ch, st)
    return RateReport(per_dl_user_rate=dl, per_ul_cell_rate=ul, R_DL=R_DL, R_UL=R_UL)


def _rel_dev(emp, ana):
    return float(np.linalg.norm(emp - ana) / np.linalg.norm(ana))


def covariance_consistency_check(cfg, ch, st, n_samples, rng):
    """Largest relative Frobenius gap between simulated and analytic covariances.

    Received signals are simulated sample by sample and projected on each
    receiver's subspace. Both the interference-plus-noise covariance used
    by the rate formulas and the total (signal included) covariance are
    compared, at every DL user and UL BS.
    """
    from .network import simulate_received_signal

    if n_samples < 10_000:
        raise ValidationError(f"n_samples must be >= 10000, got {n_samples}")
    emp = simulate_received_signal(cfg, ch, st, n_samples, rng)
    C_dl = dl_interference_covariances(cfg, ch, st)
    S_dl = dl_signal_covariances(cfg, ch, st)
    C_ul = ul_interference_covariances(cfg, ch, st)
    S_ul = ul_signal_covariances(cfg, ch, st)

    dev = 0.0
    F = st.G_d_perp
    for a in range(cfg.L_d):
        for k in range(cfg.K):
            Fa, Fh = F[a, k], _h(F[a, k])
            dev = max(dev,
                      _rel_dev(Fh @ emp.dl_ipn[a, k] @ Fa, Fh @ C_dl[a, k] @ Fa),
                      _rel_dev(Fh @ emp.dl_total[a, k] @ Fa,
                               Fh @ (C_dl[a, k] + S_dl[a, k]) @ Fa))
    V = st.V_u
    for u in range(cfg.L_u):
        Vu, Vh = V[u], _h(V[u])
        dev = max(dev,
                  _rel_dev(Vh @ emp.ul_ipn[u] @ Vu, Vh @ C_ul[u] @ Vu),
                  _rel_dev(Vh @ emp.ul_total[u] @ Vu, Vh @ (C_ul[u] + S_ul[u]) @ Vu))
    return dev
