"""
Weighted signal-and-interference leakage objective and the covariance
matrices whose extreme eigenvectors minimize it block by block.

All quantities are computed for every receiver/transmitter at once using
stacked arrays (see :mod:`silm.network` for the index layout). The
single-index helpers (``cov_dl_user`` etc.) just slice the stacked result.

Sign convention of the returned parts: the covariance used for a block is
``interference - w * signal`` on the receive side (``G`` of DL users,
``V`` of UL BSs) and ``interference + w * signal`` on the transmit side
(``V'`` of DL BSs, ``G`` of UL users). The block minimizer is always the
``v_min`` of that covariance for the signal-carrying subspace.
"""

from typing import NamedTuple

import numpy as np

__all__ = [
    "ObjectiveBreakdown",
    "dl_user_term_parts",
    "ul_user_term_parts",
    "dl_user_terms",
    "ul_user_terms",
    "dl_user_term",
    "ul_user_term",
    "total_objective",
    "objective_value",
    "dl_user_covariance_parts",
    "ul_bs_covariance_parts",
    "dl_bs_covariance_parts",
    "ul_user_covariance_parts",
    "dl_user_covariances",
    "ul_bs_covariances",
    "dl_bs_covariances",
    "ul_user_covariances",
    "cov_dl_user",
    "cov_ul_bs",
    "cov_dl_bs",
    "cov_ul_user",
]


def _h(X):
    return np.swapaxes(X, -1, -2).conj()


def _gram(X):
    return X @ _h(X)


def _energy(X):
    """Squared Frobenius norm over the last two axes."""
    return np.sum(X.real ** 2 + X.imag ** 2, axis=(-2, -1))


def _offdiag(n):
    return 1.0 - np.eye(n)


def _diag_pairs(X):
    """``X[i, ..., i, ...]`` for arrays whose axes 0 and 2 are both a cell index."""
    n = X.shape[0]
    idx = np.arange(n)
    return X[idx, :, idx]


def _check_index(name, i, n):
    if not (0 <= i < n):
        raise IndexError(f"{name}={i} out of range [0, {n})")


class ObjectiveBreakdown(NamedTuple):
    """Per-user leakage terms and their sum."""

    dl: np.ndarray      # (L_d, K)
    ul: np.ndarray      # (L_u, K)
    total: float


# ---------------------------------------------------------------------------
# objective
# ---------------------------------------------------------------------------

def dl_user_term_parts(cfg, ch, st):
    """Interference and (unweighted) signal-leakage power at each DL user.

    Returns two (L_d, K) arrays: inter-cell DL plus UL interference inside the
    receive subspace, and the own-cell signal power falling in the
    interference subspace ``G``.
    """
    F = st.G_d_perp
    Fh = _h(F)                                     # (Ld, K, s, Nm)
    HV = ch.dl @ st.V_prime[:, None, None]         # (b, a, k, Nm, Ks)
    e_dl = _energy(Fh[None] @ HV)                  # (b, a, k)
    interf = np.sum(e_dl * _offdiag(cfg.L_d)[:, :, None], axis=0)

    HF = ch.ul_to_dl @ st.G_u_perp[:, :, None, None]   # (u, j, a, k, Nm, s)
    interf = interf + np.sum(_energy(Fh[None, None] @ HF), axis=(0, 1))

    HV_own = HV[np.arange(cfg.L_d), np.arange(cfg.L_d)]    # (a, k, Nm, Ks)
    leak = _energy(_h(st.G_d) @ HV_own)
    return interf, leak


def ul_user_term_parts(cfg, ch, st):
    """Interference and (unweighted) signal-leakage power for each UL user.

    Returns two (L_u, K) arrays. The interference part charges UL user
    ``(u, k)`` with cross-cell UL users of the same index landing in BS
    ``u``'s receive subspace plus all DL BS interference there; the leakage
    part is user ``(u, k)``'s signal power falling outside that subspace.
    """
    Vh = _h(st.V_u)                                # (Lu, Ks, Nb)
    HF = ch.ul @ st.G_u_perp[:, :, None]           # (b, k, u, Nb, s)
    e_ul = _energy(Vh[None, None] @ HF)            # (b, k, u)
    interf = np.sum(e_ul * _offdiag(cfg.L_u)[:, None, :], axis=0).T     # (u, k)

    HV = ch.dl_to_ul @ st.V_prime[:, None]         # (a, u, Nb, Ks)
    e_dl = np.sum(_energy(Vh[None] @ HV), axis=0)  # (u,)
    interf = interf + e_dl[:, None]

    HF_own = _diag_pairs(HF)                       # (u, k, Nb, s)
    leak = _energy(_h(st.V_u_perp)[:, None] @ HF_own)
    return interf, leak


def dl_user_terms(cfg, ch, st):
    interf, leak = dl_user_term_parts(cfg, ch, st)
    return interf + cfg.w * leak


def ul_user_terms(cfg, ch, st):
    interf, leak = ul_user_term_parts(cfg, ch, st)
    return interf + cfg.w * leak


def dl_user_term(cfg, ch, st, a, k):
    """Weighted leakage charged to user `k` of downlink cell `a`."""
    _check_index("a", a, cfg.L_d)
    _check_index("k", k, cfg.K)
    return float(dl_user_terms(cfg, ch, st)[a, k])


def ul_user_term(cfg, ch, st, u, k):
    """Weighted leakage charged to user `k` of uplink cell `u`."""
    _check_index("u", u, cfg.L_u)
    _check_index("k", k, cfg.K)
    return float(ul_user_terms(cfg, ch, st)[u, k])


def total_objective(cfg, ch, st):
    dl = dl_user_terms(cfg, ch, st)
    ul = ul_user_terms(cfg, ch, st)
    return ObjectiveBreakdown(dl, ul, float(dl.sum() + ul.sum()))


def objective_value(cfg, ch, st):
    return total_objective(cfg, ch, st).total


# ---------------------------------------------------------------------------
# covariances
# ---------------------------------------------------------------------------

def dl_user_covariance_parts(cfg, ch, st):
    """(interference, signal) covariances at every DL user, (L_d, K, N_m, N_m)."""
    HV = ch.dl @ st.V_prime[:, None, None]         # (b, a, k, Nm, Ks)
    G = _gram(HV)
    interf = np.sum(G * _offdiag(cfg.L_d)[:, :, None, None, None], axis=0)
    HF = ch.ul_to_dl @ st.G_u_perp[:, :, None, None]
    interf = interf + np.sum(_gram(HF), axis=(0, 1))
    signal = G[np.arange(cfg.L_d), np.arange(cfg.L_d)]
    return interf, signal


def ul_bs_covariance_parts(cfg, ch, st):
    """(interference, signal) covariances at every UL BS, (L_u, N_b, N_b).

    The DL-BS term is counted ``K`` times because every user of the cell
    carries it in the objective.
    """
    HF = ch.ul @ st.G_u_perp[:, :, None]           # (b, k, u, Nb, s)
    G = np.sum(_gram(HF), axis=1)                  # (b, u, Nb, Nb)
    interf = np.sum(G * _offdiag(cfg.L_u)[:, :, None, None], axis=0)
    HV = ch.dl_to_ul @ st.V_prime[:, None]         # (a, u, Nb, Ks)
    interf = interf + cfg.K * np.sum(_gram(HV), axis=0)
    signal = G[np.arange(cfg.L_u), np.arange(cfg.L_u)]
    return interf, signal


def dl_bs_covariance_parts(cfg, ch, st):
    """(interference, signal) covariances at every DL BS, (L_d, N_b, N_b)."""
    Hh = _h(ch.dl)                                 # (a, b, j, Nb, Nm)
    A = Hh @ st.G_d_perp[None]                     # (a, b, j, Nb, s)
    G = np.sum(_gram(A), axis=2)                   # (a, b, Nb, Nb)
    interf = np.sum(G * _offdiag(cfg.L_d)[:, :, None, None], axis=1)
    B = _h(ch.dl_to_ul) @ st.V_u[None]             # (a, u, Nb, Ks)
    interf = interf + cfg.K * np.sum(_gram(B), axis=1)
    Hh_own = Hh[np.arange(cfg.L_d), np.arange(cfg.L_d)]   # (a, j, Nb, Nm)
    signal = np.sum(_gram(Hh_own @ st.G_d), axis=1)
    return interf, signal


def ul_user_covariance_parts(cfg, ch, st):
    """(interference, signal) covariances at every UL user, (L_u, K, N_m, N_m)."""
    A = _h(ch.ul_to_dl) @ st.G_d_perp[None, None]  # (u, k, a, j, Nm, s)
    interf = np.sum(_gram(A), axis=(2, 3))
    Hh = _h(ch.ul)                                 # (u, k, b, Nm, Nb)
    G = _gram(Hh @ st.V_u[None, None])             # (u, k, b, Nm, Nm)
    interf = interf + np.sum(G * _offdiag(cfg.L_u)[:, None, :, None, None], axis=2)
    Hh_own = _diag_pairs(Hh)                       # (u, k, Nm, Nb)
    signal = _gram(Hh_own @ st.V_u_perp[:, None])
    return interf, signal


def dl_user_covariances(cfg, ch, st):
    interf, signal = dl_user_covariance_parts(cfg, ch, st)
    return interf - cfg.w * signal


def ul_bs_covariances(cfg, ch, st):
    interf, signal = ul_bs_covariance_parts(cfg, ch, st)
    return interf - cfg.w * signal


def dl_bs_covariances(cfg, ch, st):
    interf, signal = dl_bs_covariance_parts(cfg, ch, st)
    return interf + cfg.w * signal


def ul_user_covariances(cfg, ch, st):
    interf, signal = ul_user_covariance_parts(cfg, ch, st)
    return interf + cfg.w * signal


def cov_dl_user(cfg, ch, st, a, k):
    """Covariance whose ``v_max(., N_m - s)`` is the optimal ``G`` of DL user (a, k)."""
    _check_index("a", a, cfg.L_d)
    _check_index("k", k, cfg.K)
    return dl_user_covariances(cfg, ch, st)[a, k]


def cov_ul_bs(cfg, ch, st, u):
    """Covariance whose ``v_min(., Ks)`` is the optimal receive subspace of UL BS u."""
    _check_index("u", u, cfg.L_u)
    return ul_bs_covariances(cfg, ch, st)[u]


def cov_dl_bs(cfg, ch, st, a):
    """Covariance whose ``v_min(., Ks)`` is the optimal ``V'`` of DL BS a."""
    _check_index("a", a, cfg.L_d)
    return dl_bs_covariances(cfg, ch, st)[a]


def cov_ul_user(cfg, ch, st, u, k):
    """Covariance whose ``v_max(., N_m - s)`` is the optimal ``G`` of UL user (u, k)."""
    _check_index("u", u, cfg.L_u)
    _check_index("k", k, cfg.K)
    return ul_user_covariances(cfg, ch, st)[u, k]
