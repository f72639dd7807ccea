"""
Alternating minimization of the leakage objective followed by intra-cell
MMSE or ZF precoding of each downlink cell.

One iteration is two half-steps. The receive half-step refreshes the DL user
interference subspaces and the UL BS receive subspaces; the transmit
half-step refreshes the DL BS inter-cell precoders and the UL user
precoders. No objective term couples two blocks of the same half-step, so
updating them all from the same prior state is an exact block-coordinate
descent and the objective never increases.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .leakage import (dl_bs_covariances, dl_user_covariances, objective_value,
                      ul_bs_covariances, ul_user_covariances)
from .linalg import hermitian_eig
from .network import check_config, init_precoders

__all__ = [
    "PrecoderKind",
    "SolverParams",
    "SolverReport",
    "step2_receive_update",
    "step3_transmit_update",
    "run_silm",
    "effective_channel",
    "intra_cell_precoder",
    "mmse_power",
    "apply_intra_cell_precoding",
    "assemble_downlink_precoders",
]


class PrecoderKind(str, enum.Enum):
    MMSE = "mmse"
    ZF = "zf"


@dataclass(frozen=True)
class SolverParams:
    """Stopping rule and intra-cell precoder choice.

    Iteration stops once a full iteration changes the objective by at most
    ``rel_tol * (1 + J)``, or after ``max_iters`` iterations.
    """

    max_iters: int = 100
    rel_tol: float = 1e-6
    precoder: PrecoderKind = PrecoderKind.MMSE

    def __post_init__(self):
        problems = []
        if self.max_iters < 1:
            problems.append(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.rel_tol > 0:
            problems.append(f"rel_tol must be > 0, got {self.rel_tol}")
        if problems:
            raise ValidationError("; ".join(problems), problems)
        object.__setattr__(self, "precoder", PrecoderKind(self.precoder))


@dataclass
class SolverReport:
    objective_trace: list
    iterations_run: int
    converged: bool
    final_state: object
    mu: np.ndarray = field(default=None)


def _refresh_bases(Q, old):
    """Ascending eigenbases of a stack of covariances.

    Blocks whose covariance is identically zero keep their previous basis:
    every basis is optimal then, and keeping the old one makes the update a
    true fixed point.
    """
    if Q.size == 0:
        return old
    new = hermitian_eig(Q).vectors
    zero = ~np.any(Q != 0, axis=(-2, -1))
    if np.any(zero):
        new = np.where(zero[..., None, None], old, new)
    return new


def step2_receive_update(cfg, ch, st):
    """Replace every DL user ``G`` and every UL BS receive subspace.

    ``G = v_max(Q, N_m - s)`` and ``V_u = v_min(Q, Ks)``; with ascending
    eigenbases both are simply the full eigenvector matrix split at the
    signal dimension.
    """
    dl_user = _refresh_bases(dl_user_covariances(cfg, ch, st), st.dl_user)
    ul_bs = _refresh_bases(ul_bs_covariances(cfg, ch, st), st.ul_bs)
    return st.replace(dl_user=dl_user, ul_bs=ul_bs)


def step3_transmit_update(cfg, ch, st):
    """Replace every DL BS precoder ``V'`` and every UL user precoder."""
    dl_bs = _refresh_bases(dl_bs_covariances(cfg, ch, st), st.dl_bs)
    ul_user = _refresh_bases(ul_user_covariances(cfg, ch, st), st.ul_user)
    return st.replace(dl_bs=dl_bs, ul_user=ul_user)


def effective_channel(cfg, ch, st, a):
    """Stacked ``(G_perp_k)^H H_k V'`` blocks of DL cell `a`, shape (Ks, Ks)."""
    if not (0 <= a < cfg.L_d):
        raise IndexError(f"a={a} out of range [0, {cfg.L_d})")
    Fh = np.swapaxes(st.G_d_perp[a], -1, -2).conj()         # (K, s, Nm)
    blocks = Fh @ ch.dl[a, a] @ st.V_prime[a]                # (K, s, Ks)
    return blocks.reshape(cfg.Ks, cfg.Ks)


def mmse_power(sv, mu):
    """``trace(V'' V''^H)`` of the MMSE precoder from the singular values."""
    sv = sv[sv > 0]
    return float(np.sum(sv ** 2 / (mu + sv ** 2) ** 2))


def _scale_to(V, P):
    power = float(np.real(np.vdot(V, V)))
    return V * math.sqrt(P / power)


def intra_cell_precoder(Ht, P, kind=PrecoderKind.MMSE, rtol=1e-9):
    """MMSE (or ZF) precoder over an effective channel, with total power `P`.

    MMSE: ``V'' = (mu I + Ht Ht^H)^{-1} Ht^H`` with ``mu`` chosen so that
    ``trace(V'' V''^H) = P``. The power is strictly decreasing in ``mu``;
    the bracket doubles from 1 until the power drops below ``P`` and is then
    bisected. If even ``mu = 0`` gives less than ``P`` the ZF solution is
    scaled up and ``mu = 0`` is returned. ZF is ``mu = 0`` followed by a
    global scaling.

    Returns
    -------
    V : ndarray, shape (n, n)
    mu : float
    """
    kind = PrecoderKind(kind)
    Ht = np.asarray(Ht, dtype=complex)
    n = Ht.shape[0]
    if Ht.ndim != 2 or Ht.shape[1] != n:
        raise ValidationError(f"effective channel must be square, got {Ht.shape}")
    if not P > 0:
        raise ValidationError(f"P must be positive, got {P}")
    U, sv, Wh = np.linalg.svd(Ht)
    smax = sv[0] if sv.size else 0.0

    if kind is PrecoderKind.ZF:
        if smax == 0 or sv[-1] <= 1e-12 * smax:
            raise DomainError("ZF requires invertible effective channel",
                              min_eigenvalue=float(sv[-1] ** 2) if sv.size else 0.0)
        V = (Wh.conj().T / sv) @ U.conj().T
        return _scale_to(V, P), 0.0

    if smax == 0:
        # nothing to invert; spread the power evenly
        return math.sqrt(P / n) * np.eye(n, dtype=complex), 0.0

    sv_k = sv[sv > 1e-12 * smax]
    if mmse_power(sv_k, 0.0) <= P:
        mu = 0.0
    else:
        hi = 1.0
        while mmse_power(sv_k, hi) >= P:
            hi *= 2.0
        lo = 0.0 if hi == 1.0 else hi / 2.0
        for _ in range(200):
            mu = 0.5 * (lo + hi)
            p = mmse_power(sv_k, mu)
            if abs(p - P) <= rtol * 1e-3 * P or hi - lo <= 1e-15 * hi:
                break
            if p > P:
                lo = mu
            else:
                hi = mu
    d = np.zeros_like(sv)
    d[:sv_k.size] = sv_k / (mu + sv_k ** 2)
    V = (Wh.conj().T * d) @ U.conj().T
    return _scale_to(V, P), mu


def apply_intra_cell_precoding(cfg, ch, st, kind=PrecoderKind.MMSE):
    """Compute the intra-cell precoder ``V''`` of every downlink cell."""
    V_dprime = np.empty_like(st.V_dprime)
    mu = np.zeros(cfg.L_d)
    for a in range(cfg.L_d):
        V_dprime[a], mu[a] = intra_cell_precoder(
            effective_channel(cfg, ch, st, a), cfg.P, kind)
    return st.replace(V_dprime=V_dprime, mu=mu)


def assemble_downlink_precoders(st, a):
    """Per-user precoders ``V'_a V''_{a,k}`` of cell `a`, shape (K, N_b, s)."""
    return st.dl_user_precoders()[a]


def run_silm(cfg, ch, params=None, rng=None, state=None):
    """Run the alternating leakage minimization and intra-cell precoding.

    Parameters
    ----------
    cfg : NetworkConfig
    ch : ChannelSet
    params : SolverParams, optional
    rng : numpy.random.Generator, optional
        Used only to draw the random initial bases when `state` is None.
    state : PrecoderState, optional
        Starting point; overrides the random initialization.

    Returns
    -------
    SolverReport
        ``objective_trace[0]`` is the objective at the starting point,
        followed by one entry per half-step.
    """
    check_config(cfg)
    params = params or SolverParams()
    if state is None:
        if rng is None:
            raise ValidationError("need an rng or an initial state")
        state = init_precoders(cfg, rng)

    J = objective_value(cfg, ch, state)
    trace = [J]
    converged = False
    it = 0
    while it < params.max_iters:
        it += 1
        J_prev = J
        state = step2_receive_update(cfg, ch, state)
        trace.append(objective_value(cfg, ch, state))
        state = step3_transmit_update(cfg, ch, state)
        J = objective_value(cfg, ch, state)
        trace.append(J)
        if abs(J_prev - J) <= params.rel_tol * (1.0 + J):
            converged = True
            break

    state = apply_intra_cell_precoding(cfg, ch, state, params.precoder)
    return SolverReport(objective_trace=trace, iterations_run=it,
                        converged=converged, final_state=state, mu=state.mu)
