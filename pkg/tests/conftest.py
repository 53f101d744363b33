import pytest

from RelCert.coset_space import SubgroupSpec, build_coset_space, trivial_subgroup
from RelCert.groups import parse_group_spec
from RelCert.services.configuration_manager import ConfigurationManager


@pytest.fixture(autouse=True)
def fresh_configuration():
    # settings changed by a test must not leak into the next one
    ConfigurationManager.initialize()
    yield


@pytest.fixture
def f2():
    return parse_group_spec("free(a,b)")


@pytest.fixture
def z():
    return parse_group_spec("abelian(1)")


@pytest.fixture
def z2():
    return parse_group_spec("abelian(2)")


@pytest.fixture
def f2_factors(f2):
    return [SubgroupSpec.from_words(f2, "A", ["a"]), SubgroupSpec.from_words(f2, "B", ["b"])]


@pytest.fixture
def z_mod_2(z):
    return build_coset_space(z, [SubgroupSpec.from_words(z, "2Z", ["x1^2"])], 2)


@pytest.fixture
def z_trivial(z):
    return build_coset_space(z, [trivial_subgroup()], 6)
