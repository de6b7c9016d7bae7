import json
from fractions import Fraction

import pytest

from src.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, RunConfig, dispatch, random_tree_family
from src.database import RunStore
from src.formats import read_graph, read_tree


def load(path):
    return json.loads(path.read_text(encoding='utf-8'))


@pytest.fixture
def host_and_tree(tmp_path):
    host = tmp_path / 'host.txt'
    tree = tmp_path / 'tree.txt'
    assert dispatch(['gen-graph', '--sides', '20', '20', '--p', '1', '-o', str(host)]) == EXIT_OK
    assert dispatch(['gen-tree', '--n-per-class', '12', '--max-degree', '3', '--seed', '4',
                     '-o', str(tree)]) == EXIT_OK
    return host, tree


class TestGenerators:
    def test_files_parse_back(self, host_and_tree):
        host, tree = host_and_tree
        assert read_graph(host).edge_count == 400
        T = read_tree(tree)
        assert T.class_sizes() == (12, 12)
        assert tree.read_text(encoding='utf-8').startswith('# seed 4')

    def test_tree_to_stdout(self, capsys):
        assert dispatch(['gen-tree', '--n-per-class', '2', '--max-degree', '2']) == EXIT_OK
        assert 'tree 4' in capsys.readouterr().out


class TestEmbedVerify:
    def test_embed_then_verify(self, host_and_tree, tmp_path):
        host, tree = host_and_tree
        out = tmp_path / 'emb.json'
        assert dispatch(['embed', str(host), str(tree), '--engine', 'greedy', '-o', str(out)]) == EXIT_OK
        document = load(out)
        assert document['command'] == 'embed'
        assert len(document['map']) == 24
        report = tmp_path / 'verify.json'
        assert dispatch(['verify', str(host), str(out), '-o', str(report)]) == EXIT_OK
        assert load(report)['ok'] is True

    def test_verify_against_empty_host(self, host_and_tree, tmp_path):
        host, tree = host_and_tree
        emb = tmp_path / 'emb.json'
        dispatch(['embed', str(host), str(tree), '--engine', 'greedy', '-o', str(emb)])
        empty = tmp_path / 'empty.txt'
        dispatch(['gen-graph', '--sides', '20', '20', '--p', '0', '-o', str(empty)])
        report = tmp_path / 'verify.json'
        assert dispatch(['verify', str(empty), str(emb), '-o', str(report)]) == EXIT_FAILURE
        body = load(report)
        assert body['ok'] is False
        assert body['kind'] == 'missing_edge'

    def test_decompose(self, host_and_tree, tmp_path):
        _, tree = host_and_tree
        out = tmp_path / 'dec.json'
        assert dispatch(['decompose', str(tree), '--beta', '0.4', '-o', str(out)]) == EXIT_OK
        assert load(out)['decomposition']['beta'] == '2/5'


class TestUsage:
    def test_no_command(self):
        assert dispatch([]) == EXIT_USAGE

    def test_missing_required_flag(self):
        assert dispatch(['gen-tree', '--max-degree', '3']) == EXIT_USAGE

    def test_knob_out_of_range(self, host_and_tree):
        _, tree = host_and_tree
        assert dispatch(['decompose', str(tree), '--gamma', '0.7']) == EXIT_USAGE

    def test_malformed_tree_file(self, tmp_path):
        bad = tmp_path / 'bad.txt'
        bad.write_text('garbage\n', encoding='utf-8')
        assert dispatch(['decompose', str(bad)]) == EXIT_USAGE

    def test_missing_file(self, tmp_path):
        assert dispatch(['decompose', str(tmp_path / 'nope.txt')]) == EXIT_USAGE

    def test_pack_needs_a_source(self):
        assert dispatch(['pack']) == EXIT_USAGE

    def test_run_config_rejects_preset(self):
        with pytest.raises(ValueError):
            RunConfig(command='embed', preset='lab')


class TestOracle:
    def test_k53(self, tmp_path):
        out = tmp_path / 'k53.json'
        assert dispatch(['oracle', 'k53', '-o', str(out)]) == EXIT_OK
        assert load(out)['status'] == 'UNSAT'

    def test_dstar_bound(self, capsys):
        assert dispatch(['oracle', 'dstar-bound', '100', '0.1']) == EXIT_OK
        body = json.loads(capsys.readouterr().out)
        assert body['impossible'] is True
        assert body['max_copies_upper_bound'] == 21

    def test_doublestar(self, tmp_path):
        out = tmp_path / 'ds.json'
        assert dispatch(['oracle', 'doublestar', '3', '-o', str(out)]) == EXIT_OK
        body = load(out)
        assert len(body['embeddings']) == 3
        assert body['edges'] == 15

    def test_obstruction(self, capsys):
        assert dispatch(['oracle', 'obstruction', '1']) == EXIT_OK
        assert json.loads(capsys.readouterr().out)['obstructed'] is True

    def test_pack_search_unsat_is_a_failure(self, tmp_path):
        host = tmp_path / 'k11.txt'
        tree = tmp_path / 'p4.txt'
        dispatch(['gen-graph', '--sides', '1', '1', '-o', str(host)])
        tree.write_text('tree 4 0\n-1 0 1 2\n', encoding='utf-8')
        assert dispatch(['oracle', 'pack', str(host), str(tree), '-o', str(tmp_path / 'o.json')]) == EXIT_FAILURE


class TestPack:
    def test_tree_family(self):
        trees = random_tree_family(400, Fraction(1, 4), 4, seed=7)
        assert len(trees) == 4
        assert all(T.class_sizes() == (200, 200) for T in trees)
        assert all(T.max_degree <= 10 for T in trees)

    def test_random_pack(self, tmp_path):
        out = tmp_path / 'pack.json'
        argv = ['pack', '--random', 't=4', 'n=400', 'gamma=0.25', '--seed', '7', '-o', str(out)]
        assert dispatch(argv) == EXIT_OK
        body = load(out)
        assert len(body['embeddings']) == 4
        assert len(body['ledger']) == 4

    def test_zone_overflow_is_a_failure(self):
        assert dispatch(['pack', '--random', 't=3', 'n=100', 'gamma=0.25']) == EXIT_FAILURE


class TestAssignAndBench:
    def test_assign_with_capacity(self, tmp_path):
        pairs = tmp_path / 'pairs.csv'
        pairs.write_text('x,y\n3,0\n0,3\n3,0\n0,3\n', encoding='utf-8')
        out = tmp_path / 'groups.json'
        assert dispatch(['assign', str(pairs), '--groups', '2', '--capacity', '3', '-o', str(out)]) == EXIT_OK
        groups = load(out)['groups']
        assert sorted(i for g in groups for i in g) == [0, 1, 2, 3]

    def test_assign_needs_m_or_capacity(self, tmp_path):
        pairs = tmp_path / 'pairs.csv'
        pairs.write_text('1,1\n', encoding='utf-8')
        assert dispatch(['assign', str(pairs), '--groups', '1']) == EXIT_USAGE

    def test_bench_records_runs(self, tmp_path):
        db = tmp_path / 'runs.db'
        rows = tmp_path / 'runs.csv'
        out = tmp_path / 'bench.json'
        argv = ['bench', '--suite', 'decompose', '--trials', '3', '--seed', '11',
                '--db', str(db), '--csv', str(rows), '-o', str(out)]
        assert dispatch(argv) == EXIT_OK
        assert load(out)['ok'] == 3
        assert len(rows.read_text(encoding='utf-8').strip().splitlines()) == 4
        store = RunStore(str(db))
        try:
            runs = store.get_runs('decompose')
            assert [r['seed'] for r in runs] == [11, 12, 13]
        finally:
            store.close()
