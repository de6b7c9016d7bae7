import pytest

from src import config
from src.config import Config


def test_numeric_helpers(monkeypatch):
    monkeypatch.setenv('TREEPACK_SEARCH_BUDGET', '1e8')
    monkeypatch.setenv('TREEPACK_EPS', '0.1')
    assert config._int('TREEPACK_SEARCH_BUDGET', '5') == 100000000
    assert config._float('TREEPACK_EPS', '0.05') == 0.1
    assert config._int('TREEPACK_UNSET_KNOB', '7') == 7


def test_defaults_validate():
    Config.validate()


@pytest.mark.parametrize("attr, value, env_name", [
    ('EPS', 1.5, 'TREEPACK_EPS'),
    ('D', 1.0, 'TREEPACK_D'),
    ('CLUSTERS', 0, 'TREEPACK_CLUSTERS'),
    ('GAMMA', 0.5, 'TREEPACK_GAMMA'),
    ('C', 0, 'TREEPACK_C'),
    ('BETA', 0, 'TREEPACK_BETA'),
    ('MU', 0.1, 'TREEPACK_MU'),
    ('HUB_C', -1, 'TREEPACK_HUB_C'),
    ('LOG_LEVEL', 'LOUD', 'LOG_LEVEL'),
])
def test_validate_names_the_variable(monkeypatch, attr, value, env_name):
    monkeypatch.setattr(Config, attr, value)
    with pytest.raises(ValueError, match=env_name):
        Config.validate()


def test_validate_rejects_bad_budgets(monkeypatch):
    monkeypatch.setattr(Config, 'SEARCH_BUDGET', 0)
    with pytest.raises(ValueError, match='budgets'):
        Config.validate()


def test_as_dict_snapshot():
    body = Config.as_dict()
    assert body['eps'] == Config.EPS
    assert body['hub_c'] == Config.HUB_C
    assert set(body) >= {'seed', 'gamma', 'beta', 'mu', 'search_budget', 'assign_budget'}
