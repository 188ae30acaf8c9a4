import numpy as np
import pytest

import kerrcat as kc

# reference operating point: periodic dynamics with an even-cat collapse state
REF_DELTA = 4.8
REF_CHI = 0.1


@pytest.fixture(scope="session")
def ref_params():
    return kc.ModelParams(detuning=REF_DELTA, kerr=REF_CHI)


@pytest.fixture(scope="session")
def bare_params():
    return kc.ModelParams()


@pytest.fixture(scope="session")
def coherent5():
    return kc.coherent_state(5.0, 128)


@pytest.fixture(scope="session")
def mixture5():
    return kc.mixture_state(5.0, 128)


@pytest.fixture(scope="session")
def coherent2_small():
    return kc.coherent_state(2.0, 24)


def max_block_dev(a: kc.JointState, b: kc.JointState) -> float:
    return max(
        float(np.max(np.abs(getattr(a, name) - getattr(b, name))))
        for name in ("ee", "eg", "ge", "gg")
    )
