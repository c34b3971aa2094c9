import pytest

from smoothsums import sieve


@pytest.fixture(scope="session")
def table():
    """Shared table: primes and SPF data up to 10^6."""
    return sieve(10**6)


@pytest.fixture(scope="session")
def small_table():
    return sieve(10**4)
