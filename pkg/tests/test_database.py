from datetime import datetime, timedelta

import pytest

from src.config import Config
from src.database import RunStore


@pytest.fixture
def store():
    s = RunStore(':memory:')
    yield s
    s.close()


def trial(i, status='ok', **extra):
    row = {'suite': 'decompose', 'trial': i, 'seed': 100 + i, 'status': status, 'elapsed': 0.5}
    row.update(extra)
    return row


def test_store_and_fetch(store):
    assert store.store_results([trial(0, detail={'seeds': 3}), trial(1)]) == 2
    runs = store.get_runs()
    assert [r['trial'] for r in runs] == [0, 1]
    assert runs[0]['detail'] == {'seeds': 3}
    assert runs[1]['detail'] is None


def test_filter_by_suite(store):
    store.store_results([trial(0), {**trial(1), 'suite': 'assign'}])
    assert len(store.get_runs('assign')) == 1
    assert store.get_runs('pack') == []


def test_empty_batch(store):
    assert store.store_results([]) == 0


def test_stats(store):
    store.store_results([trial(0), trial(1, status='error'), trial(2)])
    stats = store.get_stats()
    assert stats['total_runs'] == 3
    assert stats['mean_elapsed'] == pytest.approx(0.5)
    assert stats['by_status'] == {'ok': 2, 'error': 1}


def test_cleanup_old_runs(store):
    old = (datetime.now() - timedelta(days=40)).isoformat()
    store.store_results([trial(0, timestamp=old), trial(1)])
    assert store.cleanup_old_data(days=30) == 1
    assert [r['trial'] for r in store.get_runs()] == [1]


def test_default_path_is_created(tmp_path):
    s = RunStore()
    try:
        assert s.db_path == Config.DB_PATH
        assert (tmp_path / 'data').is_dir()
    finally:
        s.close()


def test_file_store_persists(tmp_path):
    path = str(tmp_path / 'runs' / 'bench.db')
    first = RunStore(path)
    first.store_results([trial(0)])
    first.close()
    second = RunStore(path)
    try:
        assert len(second.get_runs()) == 1
    finally:
        second.close()
