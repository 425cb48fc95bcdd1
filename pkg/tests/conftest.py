import pytest

from fdnoma.config import SystemParams, default_params, validate


def make_params(**overrides) -> SystemParams:
    """Baseline parameter set with selective overrides, validated."""
    from dataclasses import replace

    return validate(replace(SystemParams(), **overrides))


@pytest.fixture
def baseline() -> SystemParams:
    """4-antenna setup at 20 dB on both hops."""
    return default_params(20.0)
