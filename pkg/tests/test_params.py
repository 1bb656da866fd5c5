import pytest

from clustermjd import SystemParams


def test_defaults_are_table_scenario(table1):
    assert (table1.M, table1.K, table1.n) == (4, 5, 6)
    assert table1.alpha == 0.5
    assert table1.gamma == 100.0
    assert table1.gamma_tilde == 600.0
    assert table1.gamma_db == pytest.approx(20.0)


def test_antenna_constraint_enforced():
    with pytest.raises(ValueError, match="n must equal K\\+1"):
        SystemParams(M=4, K=5, n=4, alpha=0.5, gamma=100.0)


@pytest.mark.parametrize("kwargs", [
    dict(M=2, K=1, n=2, alpha=0.5, gamma=1.0),
    dict(M=3, K=0, n=1, alpha=0.5, gamma=1.0),
    dict(M=3, K=1, n=2, alpha=-0.1, gamma=1.0),
    dict(M=3, K=1, n=2, alpha=1.5, gamma=1.0),
    dict(M=3, K=1, n=2, alpha=0.5, gamma=0.0),
])
def test_invalid_parameters_rejected(kwargs):
    with pytest.raises(ValueError):
        SystemParams(**kwargs)


def test_gamma_tilde_exact():
    p = SystemParams.make(K=7, gamma=12.5)
    assert p.gamma_tilde == 8 * 12.5
