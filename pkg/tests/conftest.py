"""
Shared fixtures

Logging to file and the default run store are redirected before any src
module reads its configuration.
"""

import os

os.environ.setdefault('LOG_FILE', '')
os.environ.setdefault('LOG_LEVEL', 'WARNING')

import pytest  # noqa: E402

from src.graph_core import build_graph, build_rooted_tree  # noqa: E402
from src.oracle import path_tree  # noqa: E402


@pytest.fixture(autouse=True)
def isolated_db(tmp_path, monkeypatch):
    """Point the default run store at a throwaway file"""
    from src.config import Config
    monkeypatch.setattr(Config, 'DB_PATH', str(tmp_path / 'data' / 'bench_runs.db'))


@pytest.fixture
def k33():
    return build_graph(3, 3, complete=True)


@pytest.fixture
def path6():
    return path_tree(6)


@pytest.fixture
def small_tree():
    """
    Balanced tree on 8 vertices

        0 -> 1, 2 ; 1 -> 3, 4 ; 2 -> 5 ; 5 -> 6 ; 3 -> 7
    """
    return build_rooted_tree([-1, 0, 0, 1, 1, 2, 5, 3], 0)


@pytest.fixture
def half_split_graph():
    """Two disjoint K_{3,3} blocks on sides of size 6"""
    edges = [(a, b) for a in range(3) for b in range(3)]
    edges += [(a, b) for a in range(3, 6) for b in range(3, 6)]
    return build_graph(6, 6, edges)
