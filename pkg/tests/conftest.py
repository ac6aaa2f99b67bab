import pytest

from rabi_metrology import GaussianPacket, PhysicalParams


@pytest.fixture
def paper_params() -> PhysicalParams:
    """Desk-scale parameter set with the rounded Planck constant."""
    return PhysicalParams(hbar=1e-34)


@pytest.fixture
def codata_params() -> PhysicalParams:
    return PhysicalParams()


@pytest.fixture
def paper_packet(paper_params) -> GaussianPacket:
    return GaussianPacket.from_params(paper_params)
