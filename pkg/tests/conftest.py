import numpy as np
import pytest

from stvarkit import harness
from stvarkit.model import ModelSpec, ParamVector, simulate


@pytest.fixture(scope="session")
def lstvar1_spec():
    return ModelSpec(d=2, p=1, M=2, weight_kind="logistic", switch_var=0, switch_lag=0)


@pytest.fixture(scope="session")
def lstvar1_params():
    return harness.LSTVAR1


@pytest.fixture(scope="session")
def lstvar2_params():
    return harness.LSTVAR2


@pytest.fixture(scope="session")
def lstvar1_sim(lstvar1_spec, lstvar1_params):
    """A medium-length simulated sample shared across read-only tests."""
    return simulate(lstvar1_spec, lstvar1_params, T=2000, seed=20240801)


@pytest.fixture(scope="session")
def linear_spec():
    return ModelSpec(d=2, p=1, M=1, weight_kind="threshold")


@pytest.fixture(scope="session")
def linear_params():
    return ParamVector(
        phi=[[0.1, -0.2]],
        A=[[[[0.5, 0.1], [-0.2, 0.3]]]],
        B=[[[0.6, 0.2], [-0.3, 0.4]]],
        weight_params=[],
        nu=[4.0, 7.0],
        lam=[-0.3, 0.2],
    )


def random_stable_params(rng, spec, max_modulus=0.85):
    """Random parameter draw with every regime inside the stability region."""
    d, p, M = spec.d, spec.p, spec.M
    A = np.empty((M, p, d, d))
    for m in range(M):
        while True:
            cand = rng.normal(0.0, 0.4, size=(p, d, d)) / (1 + np.arange(p))[:, None, None]
            comp = np.zeros((d * p, d * p))
            for i in range(p):
                comp[:d, i * d : (i + 1) * d] = cand[i]
            if p > 1:
                comp[d:, : d * (p - 1)] = np.eye(d * (p - 1))
            if np.max(np.abs(np.linalg.eigvals(comp))) < max_modulus:
                A[m] = cand
                break
    B = np.empty((M, d, d))
    for m in range(M):
        while True:
            cand = rng.normal(0.0, 0.5, size=(d, d)) + 0.5 * np.eye(d)
            if abs(np.linalg.det(cand)) > 0.05:
                B[m] = cand
                break
    if spec.weight_kind == "logistic":
        wp = np.array([rng.normal(0.0, 0.5), rng.uniform(1.0, 8.0)])
    elif spec.weight_kind == "threshold":
        wp = np.sort(rng.normal(0.0, 0.5, size=M - 1))
        while np.any(np.diff(wp) <= 1e-6):
            wp = np.sort(rng.normal(0.0, 0.5, size=M - 1))
    else:
        wp = np.empty(0)
    return ParamVector(
        phi=rng.normal(0.0, 0.5, size=(M, d)),
        A=A,
        B=B,
        weight_params=wp,
        nu=rng.uniform(3.0, 20.0, size=d),
        lam=rng.uniform(-0.7, 0.7, size=d),
    )
