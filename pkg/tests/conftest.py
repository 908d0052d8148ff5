import pytest

from pstab import (
    EigenformSpec,
    coefficient_table,
    delta_coefficients,
    delta_prime_eigenvalues,
    petersson_norm_level1,
)


@pytest.fixture(scope="session")
def delta_table_2k():
    return delta_coefficients(2000)


@pytest.fixture(scope="session")
def delta_lambdas_1e4():
    return delta_prime_eigenvalues(10**4)


@pytest.fixture(scope="session")
def cm32_table_160k():
    return coefficient_table(EigenformSpec.cm32(), 160_000)


@pytest.fixture(scope="session")
def delta_norm_result():
    return petersson_norm_level1(EigenformSpec.delta())
