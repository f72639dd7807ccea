import dataclasses

import numpy as np
import pytest

from silm.network import NetworkConfig, draw_channels, init_precoders

FIG6 = dict(L_d=2, L_u=2, K=2, N_b=4, N_m=4, s=1, rho_db=-20.0)


def random_hermitian(rng, n, scale=1.0):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (A + A.conj().T) / 2


def random_hpd(rng, n):
    B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return B @ B.conj().T + np.eye(n)


def instance(seed, **cfg_kwargs):
    """(cfg, channels, random initial state) for a config built from kwargs."""
    cfg = NetworkConfig(**cfg_kwargs)
    rng = np.random.default_rng(seed)
    return cfg, draw_channels(cfg, rng), init_precoders(cfg, rng)


def zero_channels(ch):
    return dataclasses.replace(ch, **{f.name: np.zeros_like(getattr(ch, f.name))
                                      for f in dataclasses.fields(ch)})


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def mixed_instance():
    return instance(3, L_d=2, L_u=1, K=2, N_b=5, N_m=3, s=1, P=10.0,
                    rho_db=-5.0, w=0.3)


# acceptance results, echoed once more at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
