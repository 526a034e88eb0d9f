import pytest

from relaygap.model import SystemParams


def unit_gain(P=(1.0, 1.0, 1.0, 1.0), sigma2=(1.0, 1.0, 1.0, 1.0),
              PR=1.0, sigmaR2=1.0) -> SystemParams:
    """All-unit-gain system: sigma_bar2 == sigma2, so orderings are explicit."""
    return SystemParams(
        h=(1.0, 1.0, 1.0, 1.0),
        g=(1.0, 1.0, 1.0, 1.0),
        P=tuple(float(p) for p in P),
        sigma2=tuple(float(s) for s in sigma2),
        sigmaR2=float(sigmaR2),
        PR=float(PR),
    )


@pytest.fixture
def unit_params() -> SystemParams:
    return unit_gain()
