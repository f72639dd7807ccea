"""
Scenario description, channel draws and precoder state for the mixed
uplink/downlink multi-cell network.

Channel arrays are indexed transmitter-first, mirroring the superscript /
subscript convention of the system model:

=====================  ================================  ===================
attribute              shape                             meaning
=====================  ================================  ===================
``dl``                 (L_d, L_d, K, N_m, N_b)           ``dl[b, a, k]``: DL BS b -> user k of DL cell a
``ul_to_dl``           (L_u, K, L_d, K, N_m, N_m)        ``ul_to_dl[u, j, a, k]``: UL user (u, j) -> DL user (a, k)
``ul``                 (L_u, K, L_u, N_b, N_m)           ``ul[b, k, u]``: UL user (b, k) -> UL BS u
``dl_to_ul``           (L_d, L_u, N_b, N_b)              ``dl_to_ul[a, u]``: DL BS a -> UL BS u
=====================  ================================  ===================
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError
from .linalg import random_semi_unitary

__all__ = [
    "NetworkConfig",
    "ChannelSet",
    "PrecoderState",
    "ReceivedCovariances",
    "validate_config",
    "check_config",
    "draw_channels",
    "init_precoders",
    "simulate_received_signal",
    "db_to_linear",
]


def db_to_linear(db):
    """Power ratio for a value in dB; ``-inf`` maps to exactly 0."""
    if db == -math.inf:
        return 0.0
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class NetworkConfig:
    """Scalars describing one network scenario.

    ``P`` is the total transmit power of a downlink BS (and the sum over the
    users of an uplink cell). Noise has unit variance, so ``P`` is the SNR.
    ``rho_db`` is the cross-cell channel power gain in dB; ``-inf`` isolates
    the cells. ``w`` weighs the signal-leakage terms (``w = 0`` is plain
    interference leakage minimization).
    """

    L_d: int = 1
    L_u: int = 0
    K: int = 1
    N_b: int = 2
    N_m: int = 2
    s: int = 1
    P: float = 10.0
    rho_db: float = -20.0
    w: float = 0.0

    @classmethod
    def from_snr_db(cls, snr_db, **kwargs):
        return cls(P=db_to_linear(snr_db), **kwargs)

    @property
    def Ks(self):
        return self.K * self.s

    @property
    def snr_db(self):
        return 10.0 * math.log10(self.P)

    @property
    def rho2(self):
        """Variance of a cross-cell channel entry."""
        return db_to_linear(self.rho_db)

    def replace(self, **changes):
        return replace(self, **changes)


def validate_config(cfg):
    """Return a list of every constraint `cfg` violates (empty when valid)."""
    problems = []
    ints = {"L_d": cfg.L_d, "L_u": cfg.L_u, "K": cfg.K, "N_b": cfg.N_b,
            "N_m": cfg.N_m, "s": cfg.s}
    for name, value in ints.items():
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            problems.append(f"{name} must be an integer, got {value!r}")
    if problems:
        return problems
    if cfg.L_d < 0 or cfg.L_u < 0:
        problems.append("cell counts must be non-negative")
    if cfg.L_d + cfg.L_u < 1:
        problems.append("need at least one cell (L_d + L_u >= 1)")
    if cfg.K < 1:
        problems.append("K must be at least 1")
    if cfg.N_b < 1 or cfg.N_m < 1:
        problems.append("antenna counts must be at least 1")
    if cfg.s < 1:
        problems.append("s must be at least 1")
    if cfg.s > cfg.N_m:
        problems.append(f"s exceeds N_m ({cfg.s} > {cfg.N_m})")
    if cfg.K * cfg.s > cfg.N_b:
        problems.append(f"Ks exceeds N_b ({cfg.K}*{cfg.s} > {cfg.N_b})")
    if not (math.isfinite(cfg.P) and cfg.P > 0):
        problems.append(f"P must be positive and finite, got {cfg.P}")
    if math.isnan(cfg.rho_db) or cfg.rho_db == math.inf:
        problems.append(f"rho_db must be finite or -inf, got {cfg.rho_db}")
    if not (math.isfinite(cfg.w) and cfg.w >= 0):
        problems.append(f"w must be a non-negative real, got {cfg.w}")
    return problems


def check_config(cfg):
    """Raise `ValidationError` listing all problems if `cfg` is invalid."""
    problems = validate_config(cfg)
    if problems:
        raise ValidationError("invalid network config: " + "; ".join(problems),
                              problems)


@dataclass(frozen=True)
class ChannelSet:
    """All channel matrices of one network realization (see module docs)."""

    dl: np.ndarray
    ul_to_dl: np.ndarray
    ul: np.ndarray
    dl_to_ul: np.ndarray


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def draw_channels(cfg, rng):
    """Draw i.i.d. Rayleigh channels: CN(0, 1) inside a cell, CN(0, rho^2) across.

    Every entry is drawn regardless of ``rho_db`` so that the random stream
    consumed is the same for all gains; cross-cell arrays are then scaled,
    which makes them exactly zero for ``rho_db = -inf``.
    """
    check_config(cfg)
    Ld, Lu, K, Nb, Nm = cfg.L_d, cfg.L_u, cfg.K, cfg.N_b, cfg.N_m
    rho = math.sqrt(cfg.rho2)

    dl = _cn(rng, (Ld, Ld, K, Nm, Nb))
    ul_to_dl = _cn(rng, (Lu, K, Ld, K, Nm, Nm))
    ul = _cn(rng, (Lu, K, Lu, Nb, Nm))
    dl_to_ul = _cn(rng, (Ld, Lu, Nb, Nb))

    dl_scale = np.where(np.eye(Ld, dtype=bool), 1.0, rho)
    dl = dl * dl_scale[:, :, None, None, None]
    ul_scale = np.where(np.eye(Lu, dtype=bool), 1.0, rho)
    ul = ul * ul_scale[:, None, :, None, None]
    return ChannelSet(dl=dl, ul_to_dl=ul_to_dl * rho, ul=ul,
                      dl_to_ul=dl_to_ul * rho)


@dataclass(frozen=True)
class PrecoderState:
    """Design variables of the algorithm, held as full unitary bases.

    Each basis is ordered so that its leading columns are the subspace that
    carries signal and the trailing ones its orthogonal complement:

    * ``dl_bs[a]`` (N_b x N_b): ``V'_a`` is the first ``Ks`` columns.
    * ``dl_user[a, k]`` (N_m x N_m): receive subspace ``G_perp`` is the first
      ``s`` columns, interference subspace ``G`` the remaining ``N_m - s``.
    * ``ul_bs[u]`` (N_b x N_b): receive subspace ``V_u`` is the first ``Ks``
      columns, ``V_u_perp`` the rest.
    * ``ul_user[u, k]`` (N_m x N_m): transmit precoder ``G_perp`` first,
      ``G`` after.

    ``V_dprime[a]`` is the (Ks x Ks) intra-cell precoder of DL cell ``a``.
    """

    s: int
    K: int
    dl_bs: np.ndarray
    dl_user: np.ndarray
    ul_bs: np.ndarray
    ul_user: np.ndarray
    V_dprime: np.ndarray
    mu: np.ndarray = field(default=None)

    @property
    def Ks(self):
        return self.K * self.s

    @property
    def V_prime(self):
        return self.dl_bs[..., :self.Ks]

    @property
    def G_d(self):
        return self.dl_user[..., self.s:]

    @property
    def G_d_perp(self):
        return self.dl_user[..., :self.s]

    @property
    def V_u(self):
        return self.ul_bs[..., :self.Ks]

    @property
    def V_u_perp(self):
        return self.ul_bs[..., self.Ks:]

    @property
    def G_u(self):
        return self.ul_user[..., self.s:]

    @property
    def G_u_perp(self):
        return self.ul_user[..., :self.s]

    @property
    def V_d(self):
        """Overall downlink precoders ``V'_a V''_a`` with shape (L_d, N_b, Ks)."""
        return self.V_prime @ self.V_dprime

    def dl_user_precoders(self):
        """Per-user precoders, shape (L_d, K, N_b, s)."""
        V = self.V_d
        Ld, Nb = V.shape[0], V.shape[1]
        return V.reshape(Ld, Nb, self.K, self.s).transpose(0, 2, 1, 3)

    def replace(self, **changes):
        return replace(self, **changes)


def _random_bases(rng, lead, n):
    out = np.empty(lead + (n, n), dtype=complex)
    for idx in np.ndindex(*lead):
        out[idx] = random_semi_unitary(n, n, rng)
    return out


def init_precoders(cfg, rng):
    """Random unitary starting point; ``V''`` is a scaled identity of power P."""
    check_config(cfg)
    Ld, Lu, K, Nb, Nm = cfg.L_d, cfg.L_u, cfg.K, cfg.N_b, cfg.N_m
    Ks = cfg.Ks
    dl_bs = _random_bases(rng, (Ld,), Nb)
    dl_user = _random_bases(rng, (Ld, K), Nm)
    ul_bs = _random_bases(rng, (Lu,), Nb)
    ul_user = _random_bases(rng, (Lu, K), Nm)
    V_dprime = np.broadcast_to(np.sqrt(cfg.P / Ks) * np.eye(Ks, dtype=complex),
                               (Ld, Ks, Ks)).copy()
    return PrecoderState(s=cfg.s, K=K, dl_bs=dl_bs, dl_user=dl_user,
                         ul_bs=ul_bs, ul_user=ul_user, V_dprime=V_dprime,
                         mu=np.zeros(Ld))


@dataclass(frozen=True)
class ReceivedCovariances:
    """Sample covariances at every receiver, in the raw antenna domain.

    ``*_total`` is the covariance of the full received vector, ``*_ipn`` of
    the received vector with the desired component removed (interference plus
    noise). For a DL user the desired component is its own streams; for a UL
    BS it is all users of its cell, which are decoded jointly.
    ``dl_tx_power[a]`` and ``ul_tx_power[u, k]`` are sample means of
    ``||x||^2`` at the transmitters.
    """

    dl_total: np.ndarray
    dl_ipn: np.ndarray
    ul_total: np.ndarray
    ul_ipn: np.ndarray
    dl_tx_power: np.ndarray
    ul_tx_power: np.ndarray
    n_samples: int


def _outer_sum(Y):
    # Y has shape (..., n, T); returns sum over T of y y^H
    return Y @ np.swapaxes(Y, -1, -2).conj()


def simulate_received_signal(cfg, ch, st, n_samples, rng, chunk=20000):
    """Generate received signals sample by sample and return their covariances.

    Data symbols and noise are unit-variance circular Gaussians. A downlink
    BS sends ``V'V''`` times its symbols; an uplink user sends
    ``sqrt(P/(K s)) G_perp`` times its symbols, so each uplink user spends
    ``P/K``. This is a test oracle for the analytic covariances in
    :mod:`silm.rates`; samples are processed in chunks to bound memory.
    """
    if n_samples < 100:
        raise ValidationError(f"n_samples must be >= 100, got {n_samples}")
    check_config(cfg)
    Ld, Lu, K, Nb, Nm, s = cfg.L_d, cfg.L_u, cfg.K, cfg.N_b, cfg.N_m, cfg.s
    Vk = st.dl_user_precoders()                      # (Ld, K, Nb, s)
    Fu = np.sqrt(cfg.P / cfg.Ks) * st.G_u_perp       # (Lu, K, Nm, s)

    acc = {
        "dl_total": np.zeros((Ld, K, Nm, Nm), complex),
        "dl_ipn": np.zeros((Ld, K, Nm, Nm), complex),
        "ul_total": np.zeros((Lu, Nb, Nb), complex),
        "ul_ipn": np.zeros((Lu, Nb, Nb), complex),
    }
    dl_pow = np.zeros(Ld)
    ul_pow = np.zeros((Lu, K))

    done = 0
    while done < n_samples:
        T = min(chunk, n_samples - done)
        done += T
        sym_d = _cn(rng, (Ld, K, s, T))
        sym_u = _cn(rng, (Lu, K, s, T))
        x_dk = Vk @ sym_d                            # (Ld, K, Nb, T)
        x_d = x_dk.sum(axis=1)                       # (Ld, Nb, T)
        x_u = Fu @ sym_u                             # (Lu, K, Nm, T)
        dl_pow += np.sum(np.abs(x_d) ** 2, axis=(-2, -1))
        ul_pow += np.sum(np.abs(x_u) ** 2, axis=(-2, -1))

        # downlink users
        y_all_bs = np.einsum("bakmn,bnt->bakmt", ch.dl, x_d)
        cross = np.einsum("ujakmn,ujnt->akmt", ch.ul_to_dl, x_u)
        own = np.einsum("aakmn,aknt->akmt", ch.dl, x_dk)
        y_dl = y_all_bs.sum(axis=0) + cross + _cn(rng, (Ld, K, Nm, T))
        acc["dl_total"] += _outer_sum(y_dl)
        acc["dl_ipn"] += _outer_sum(y_dl - own)

        # uplink BSs
        y_users = np.einsum("bkumn,bknt->bkumt", ch.ul, x_u)
        from_dl = np.einsum("aumn,ant->umt", ch.dl_to_ul, x_d)
        own_u = np.einsum("ukumt->umt", y_users)
        y_ul = y_users.sum(axis=(0, 1)) + from_dl + _cn(rng, (Lu, Nb, T))
        acc["ul_total"] += _outer_sum(y_ul)
        acc["ul_ipn"] += _outer_sum(y_ul - own_u)

    n = float(n_samples)
    return ReceivedCovariances(
        dl_total=acc["dl_total"] / n, dl_ipn=acc["dl_ipn"] / n,
        ul_total=acc["ul_total"] / n, ul_ipn=acc["ul_ipn"] / n,
        dl_tx_power=dl_pow / n, ul_tx_power=ul_pow / n, n_samples=n_samples)
