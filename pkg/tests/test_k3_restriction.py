import pytest

from fano_instantons.chow_core import UNIT, euler_pair, load_registry, threefold
from fano_instantons.instanton_invariants import default_grid, gamma
from fano_instantons.k3_restriction import K3Class, K3Data, euler_pair_k3, lagrangian_check, restrict

REGISTRY = load_registry()


@pytest.mark.parametrize(
    "name, h2",
    [("P3", 4), ("Q", 6), ("Y1", 2), ("Y5", 10), ("X4", 6), ("X12", 22)],
)
def test_polarization_degree(name, h2):
    # a K3 section of genus g has H^2 = 2g - 2
    assert K3Data.of(REGISTRY[name]).h2 == h2


def test_structure_sheaf_pairing():
    S = K3Data(4)
    O = K3Class(1, 0, 0)
    assert euler_pair_k3(O, O, S) == 2
    # Riemann-Roch: chi(O_S(H)) = 2 + H^2 / 2
    assert euler_pair_k3(O, K3Class(1, 1, 2), S) == 4
    assert restrict(UNIT, threefold("P3")) == K3Class(1, 0, 0)


def test_restriction_of_line_class():
    # a line meets a quartic K3 in four points
    X = threefold("P3")
    assert restrict(gamma(X, 1, 1).character, X).s == -4


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_half_dimension_identity(name):
    X = REGISTRY[name]
    for n, k in default_grid(X):
        ok, rec = lagrangian_check(X, n, k)
        assert ok, rec
        assert rec.paper_value == 2 * (1 - euler_pair(gamma(X, n, k).character, gamma(X, n, k).character, X))


def test_squared_index_polarization_breaks_identity_on_quadric():
    X = threefold("Q")
    g = restrict(gamma(X, 2, 1).character, X)
    wrong = K3Data(X.index**2 * X.degree)
    assert 2 - euler_pair_k3(g, g, wrong) != 2 * (1 - euler_pair(gamma(X, 2, 1).character, gamma(X, 2, 1).character, X))
