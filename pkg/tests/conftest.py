import pytest

from wpkit.volumes import default_cache


@pytest.fixture(scope="session")
def cache():
    """Shared volume cache, seeded from the shipped prebuilt table."""
    return default_cache()
