import pytest

import secalign as sa


@pytest.fixture(scope="session")
def bench_config():
    """The desk-scale benchmark layout used throughout the suite."""
    return sa.NetworkConfig.uniform(Ma=12, Nb=2, da=3, K=4, Mk=9, Nk=4, dk=2, L=16)


@pytest.fixture(scope="session")
def bench_channels(bench_config):
    return sa.generate_channels(bench_config, seed=7)


def config_with_da(config, da):
    return sa.NetworkConfig(
        Ma=config.Ma, Nb=config.Nb, da=da, K=config.K,
        Mk=config.Mk, Nk=config.Nk, dk=config.dk, L=config.L,
    )


@pytest.fixture(scope="session")
def canonical_model():
    """Secrecy model at the benchmark operating point (20 dB everywhere)."""
    return sa.SecrecyModel(
        power=sa.PowerProfile(Pa=100.0, Pk=(100.0,) * 4, theta=0.5),
        alpha_a=4,
        alpha_k=(2,) * 4,
        L=16,
        eps_th=0.1,
        sigma2=16.0,
        Rb=4.0,
    )
