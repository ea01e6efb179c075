import numpy as np
import pytest

from delayh2 import (
    ConstraintSpace,
    DelayGraph,
    GeneralizedPlant,
    conjugate_product,
    constraint_space,
    delay_matrix,
    impulse_response,
    model_matching_matrices,
    spectral_radius,
)
from delayh2.statespace import StateSpaceModel


def make_chain_plant() -> GeneralizedPlant:
    """Three coupled subsystems in a line; each node measures and actuates
    its own state, performance weights state and input equally."""
    a = np.array([[1.5, 1.0, 0.0], [1.0, 1.5, 1.0], [0.0, 1.0, 1.5]])
    return GeneralizedPlant(
        a=a,
        b1=np.hstack([np.eye(3), np.zeros((3, 3))]),
        b2=np.eye(3),
        c1=np.vstack([np.eye(3), np.zeros((3, 3))]),
        c2=np.eye(3),
        d12=np.vstack([np.zeros((3, 3)), np.eye(3)]),
        d21=np.hstack([np.zeros((3, 3)), np.eye(3)]),
        block_rows=(1, 1, 1),
        block_cols=(1, 1, 1),
    )


def make_chain_graph() -> DelayGraph:
    return DelayGraph(
        3, (1, 1, 1), ((0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 1, 1))
    )


def make_sweep_plant() -> GeneralizedPlant:
    """Two decoupled modes (one stable, one not), scalar blocks per node."""
    return GeneralizedPlant(
        a=np.diag([0.9, 1.1]),
        b1=np.hstack([np.ones((2, 1)), np.zeros((2, 2))]),
        b2=0.1 * np.eye(2),
        c1=np.vstack([np.ones((1, 2)), np.zeros((2, 2))]),
        c2=0.1 * np.eye(2),
        d12=np.vstack([np.zeros((1, 2)), np.eye(2)]),
        d21=np.hstack([np.zeros((2, 1)), np.eye(2)]),
        block_rows=(1, 1),
        block_cols=(1, 1),
    )


@pytest.fixture(scope="session")
def chain_plant() -> GeneralizedPlant:
    return make_chain_plant()


@pytest.fixture(scope="session")
def chain_space(chain_plant) -> ConstraintSpace:
    d = delay_matrix(make_chain_graph())
    return constraint_space(d, chain_plant.block_rows, chain_plant.block_cols)


@pytest.fixture(scope="session")
def sweep_plant() -> GeneralizedPlant:
    return make_sweep_plant()


def markov_max(model, lags):
    resp = impulse_response(model, max(lags))
    return max(np.abs(resp[k]).max(initial=0.0) for k in lags)


def lemma_identity_errors(plant, gains, tail_lags=20):
    """Max deviations of the three model-matching product identities.

    The first two identities (the conjugate products collapsing to the
    constant innovation weights) are evaluated through the library's own
    conjugate-product machinery; the cross-term identity is evaluated with
    an independent Laurent-series convolution of raw Markov parameters.
    """
    import oracles

    p11, p12, p21 = model_matching_matrices(plant, gains)

    causal, anti = conjugate_product(p12, p12)
    err_omega = np.abs(causal.d - gains.omega).max()
    err_omega = max(err_omega, markov_max(causal, range(1, tail_lags + 1)))
    err_omega = max(err_omega, markov_max(anti, range(1, tail_lags + 1)))

    p21_t = StateSpaceModel(p21.a.T, p21.c.T, p21.b.T, p21.d.T)
    causal_t, anti_t = conjugate_product(p21_t, p21_t)
    err_psi = np.abs(causal_t.d.T - gains.psi).max()
    err_psi = max(err_psi, markov_max(causal_t, range(1, tail_lags + 1)))
    err_psi = max(err_psi, markov_max(anti_t, range(1, tail_lags + 1)))

    rho = max(
        spectral_radius(p11.a), spectral_radius(p12.a), spectral_radius(p21.a)
    )
    horizon = oracles.horizon_for(rho, tail=1e-16, lo=60)
    # the anticausal outer factor reaches back `horizon` lags, so the inner
    # product is needed out to lag tail_lags + horizon
    l12 = oracles.Laurent.from_model(p12, 2 * horizon + tail_lags).conjugate()
    l11 = oracles.Laurent.from_model(p11, 2 * horizon + tail_lags)
    l21 = oracles.Laurent.from_model(p21, horizon).conjugate()
    inner = l12.multiply(l11, 1, tail_lags + horizon)
    triple = inner.multiply(l21, 1, tail_lags)
    err_cross = np.abs(triple.terms).max()
    return err_omega, err_psi, err_cross


def random_qp_instance(rng):
    """Small random plant + monotone random constraint, ready for the QP.

    Returns (plant, vsys, cs, gains); dimensions stay small so the
    brute-force KKT solver remains applicable.  The constraint pattern is
    arbitrary (no quadratic-invariance guarantee), which is fine for
    comparing the two QP solvers but not for conformance claims about the
    resulting controller.
    """
    import oracles
    from delayh2 import riccati_gains, vectorized_system

    n = int(rng.integers(1, 5))
    n_blocks = int(rng.integers(1, 4))
    block_rows = oracles.random_block_sizes(rng, n_blocks)
    block_cols = oracles.random_block_sizes(rng, n_blocks)
    plant = oracles.random_normalized_plant(
        rng, n, sum(block_rows), sum(block_cols),
        block_rows=block_rows, block_cols=block_cols,
    )
    n_lags = int(rng.integers(1, 4))
    pats = oracles.random_monotone_patterns(rng, n_lags, (n_blocks, n_blocks))
    cs = ConstraintSpace(n_lags, block_rows, block_cols, tuple(pats))
    gains = riccati_gains(plant)
    vsys = vectorized_system(plant, gains)
    return plant, vsys, cs, gains


def random_qi_instance(rng):
    """Random plant + delay constraint that is quadratically invariant.

    The delay matrix comes from a complete graph whose communication
    distances never exceed 2, so d[k,l] <= d[k,i] + 1 + d[j,l] holds for
    every quadruple whatever the (strictly proper) plant does; the QI
    premise of the synthesis theorems is then satisfied by construction and
    is double-checked here.  Returns (plant, delays, cs).
    """
    import oracles
    from delayh2 import DelayMatrix, check_qi, plant_block_delays

    n_nodes = int(rng.integers(2, 4))
    comp = rng.integers(1, 3, size=n_nodes)
    comm = rng.integers(0, 3, size=(n_nodes, n_nodes))
    np.fill_diagonal(comm, 0)
    delays = DelayMatrix(comp[:, None] + comm.T)
    block_rows = oracles.random_block_sizes(rng, n_nodes)
    block_cols = oracles.random_block_sizes(rng, n_nodes)
    n = int(rng.integers(1, 5))
    plant = oracles.random_normalized_plant(
        rng, n, sum(block_rows), sum(block_cols),
        block_rows=block_rows, block_cols=block_cols,
    )
    p = plant_block_delays(plant.g22, block_rows, block_cols, delays.max_delay())
    assert check_qi(delays, p).ok
    cs = constraint_space(delays, block_rows, block_cols)
    return plant, delays, cs
