#!/usr/bin/env python3
"""
treepack command line
Generators, pipeline commands, verification, oracles and benchmarks

Exit codes: 0 success, 1 failed verification / UNSAT where existence was
requested / pipeline failure, 2 usage or configuration error.
"""

import argparse
import csv
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import psutil

from src.assignment import AssignmentInstance, assign_to_groups, branch_and_bound, partition_pieces
from src.config import Config
from src.database import RunStore
from src.embedder import EmbedderConfig, embed_tree
from src.errors import FormatError, TreePackError
from src.formats import (emit_json, embedding_to_dict, guest_from_dict, guest_to_dict, load_json,
                         packing_from_dict, packing_to_dict, read_graph, read_tree, format_graph,
                         format_tree)
from src.generators import gen_assignment_instance, gen_graph, gen_tree
from src.graph_core import build_graph, verify_embedding, verify_packing
from src.logger import setup_logger
from src.oracle import (SearchStatus, brute_force_pack, double_star_copy_bound,
                        double_star_decomposition, empirical_containment_probe, high_degree_obstruction,
                        k53_paths_unsat, log_star_tree, two_double_star_tree)
from src.packer import PackerConfig, pack_trees
from src.tree_decomp import beta_decompose
from src.utils import check, cross, floor_frac, sqrt_frac

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

BENCH_SUITES = ('decompose', 'assign', 'embed', 'pack')


@dataclass
class RunConfig:
    """Resolved arguments of one command, validated before dispatch"""

    command: str
    inputs: List[str] = field(default_factory=list)
    gamma: float = Config.GAMMA
    eps: float = Config.EPS
    d: float = Config.D
    s: int = Config.CLUSTERS
    c: float = Config.C
    beta: float = Config.BETA
    mu: float = Config.MU
    engine: str = 'regularity'
    seed: int = Config.SEED
    output: Optional[str] = None
    budget: Optional[int] = None
    preset: str = 'desk'

    def __post_init__(self):
        if not 0 < self.gamma < 0.5:
            raise ValueError(f"--gamma must lie in (0, 1/2), got {self.gamma}")
        if not 0 < self.eps < 1:
            raise ValueError(f"--eps must lie in (0, 1), got {self.eps}")
        if not 0 <= self.d < 1:
            raise ValueError(f"--d must lie in [0, 1), got {self.d}")
        if self.s < 1:
            raise ValueError(f"--s must be >= 1, got {self.s}")
        if self.c <= 0:
            raise ValueError(f"--c must be positive, got {self.c}")
        if not 0 < self.beta < 1:
            raise ValueError(f"--beta must lie in (0, 1), got {self.beta}")
        if not 0 <= self.mu < 0.1:
            raise ValueError(f"--mu must lie in [0, 0.1), got {self.mu}")
        if self.budget is not None and self.budget < 1:
            raise ValueError(f"--budget must be positive, got {self.budget}")
        if self.preset not in ('desk', 'asymptotic'):
            raise ValueError(f"--preset must be 'desk' or 'asymptotic', got {self.preset!r}")

    def embedder_config(self) -> EmbedderConfig:
        if self.preset == 'asymptotic':
            return EmbedderConfig.asymptotic_preset(self.gamma, engine=self.engine, seed=self.seed)
        return EmbedderConfig(gamma=self.gamma, eps=self.eps, d=self.d, s=self.s, c=self.c,
                              beta=self.beta, mu=self.mu, engine=self.engine, seed=self.seed)

    def to_dict(self) -> dict:
        return asdict(self)


def _run_config(args: argparse.Namespace) -> RunConfig:
    values = {'command': args.command, 'inputs': [str(p) for p in getattr(args, 'inputs', []) or []]}
    for key in ('gamma', 'eps', 'd', 's', 'c', 'beta', 'mu', 'engine', 'seed', 'output', 'budget', 'preset'):
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _write_text(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding='utf-8')


def cmd_gen_tree(args) -> int:
    logger.info(f"Seed: {args.seed}")
    T = gen_tree(args.n_per_class, args.max_degree, args.seed)
    _write_text(f"# seed {args.seed}\n" + format_tree(T), args.output)
    return EXIT_OK


def cmd_gen_graph(args) -> int:
    logger.info(f"Seed: {args.seed}")
    side_a, side_b = args.sides
    G = gen_graph(side_a, side_b, args.p, args.seed, args.min_degree)
    _write_text(f"# seed {args.seed}\n" + format_graph(G), args.output)
    return EXIT_OK


def cmd_decompose(args) -> int:
    run = _run_config(args)
    T = read_tree(args.tree)
    dec = beta_decompose(T, Fraction(str(run.beta)))
    emit_json({'command': 'decompose', 'decomposition': dec.to_dict()}, run.output)
    return EXIT_OK


def _read_pairs(path: str) -> List[tuple]:
    pairs = []
    with open(path, newline='', encoding='utf-8') as handle:
        for row in csv.reader(handle):
            if not row or row[0].strip().startswith('#'):
                continue
            try:
                pairs.append((int(row[0]), int(row[1])))
            except (ValueError, IndexError):
                if pairs:
                    raise FormatError(f"{path}: bad pair row {row!r}")
                # header row
    return pairs


def cmd_assign(args) -> int:
    run = _run_config(args)
    pairs = _read_pairs(args.pairs)
    if args.capacity is not None:
        groups = assign_to_groups(pairs, args.groups, Fraction(str(args.capacity)), run.budget or -1)
        capacity = float(args.capacity)
    else:
        if args.m is None:
            raise ValueError("assign needs --m (or --capacity for an unchecked instance)")
        instance = AssignmentInstance(tuple(pairs), args.m, args.groups, Fraction(str(run.mu)))
        groups = partition_pieces(instance, run.budget or -1)
        capacity = float(instance.capacity)
    emit_json({'command': 'assign', 'capacity': capacity, 'groups': groups}, run.output)
    return EXIT_OK


def cmd_embed(args) -> int:
    run = _run_config(args)
    cfg = run.embedder_config()
    logger.info(f"Seed: {cfg.seed}")
    G = read_graph(args.graph)
    T = read_tree(args.tree)
    embedding = embed_tree(G, T, cfg, args.guest_id)
    result = verify_embedding(G, T, embedding)
    if not result:
        logger.error(cross(f"Embedding failed verification: {result.message}"))
        return EXIT_FAILURE
    emit_json({'command': 'embed', **embedding_to_dict(embedding)}, run.output)
    return EXIT_OK


def _parse_assignments(tokens: Sequence[str]) -> Dict[str, str]:
    values = {}
    for token in tokens:
        key, sep, value = token.partition('=')
        if not sep:
            raise ValueError(f"--random expects key=value, got {token!r}")
        values[key.strip()] = value.strip()
    return values


def random_tree_family(n: int, gamma: Fraction, t: int, seed: int, c: float = Config.PACK_C,
                       max_degree: Optional[int] = None, per_class: Optional[int] = None) -> list:
    """
    t random balanced trees with degree <= c*sqrt(n)

    Trees default to (1-2*gamma)n vertices per class, inside the (1-gamma)n
    bound, which leaves the greedy forest engine room to finish every forest.
    """
    per_class = per_class or floor_frac((1 - 2 * gamma) * n)
    max_degree = max_degree or max(2, floor_frac(Fraction(str(c)) * sqrt_frac(n)))
    return [gen_tree(per_class, max_degree, seed * 1000 + i) for i in range(t)]


def cmd_pack(args) -> int:
    run = _run_config(args)
    logger.info(f"Seed: {run.seed}")
    if args.manifest:
        manifest = load_json(args.manifest)
        n = int(manifest['n'])
        gamma = Fraction(str(manifest['gamma']))
        trees = [guest_from_dict(body) for body in manifest['trees']]
    elif args.random:
        values = _parse_assignments(args.random)
        n = int(values['n'])
        gamma = Fraction(values.get('gamma', str(run.gamma)))
        t = int(values.get('t', math.floor(n ** (0.5 - float(gamma)))))
        trees = random_tree_family(n, gamma, t, run.seed,
                                   float(values.get('c', Config.PACK_C)),
                                   int(values['max_degree']) if 'max_degree' in values else None,
                                   int(values['per_class']) if 'per_class' in values else None)
    else:
        raise ValueError("pack needs --random key=value ... or --manifest FILE")

    cfg = PackerConfig(engine=run.engine, seed=run.seed)
    result = pack_trees(n, gamma, trees, cfg)
    verdict = verify_packing(build_graph(n, n, complete=True), result.packing)
    if not verdict:
        logger.error(cross(f"Packing failed verification: {verdict.message}"))
        return EXIT_FAILURE
    emit_json(packing_to_dict(result.packing, command='pack', seed=run.seed, layout=result.layout(),
                              ledger=result.trace), run.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    G = read_graph(args.graph)
    packing = packing_from_dict(load_json(args.packing))
    result = verify_packing(G, packing)
    body = {'command': 'verify', 'ok': bool(result), 'embeddings': len(packing)}
    if not result:
        body.update(kind=result.kind, witness=list(result.witness), message=result.message)
        logger.error(cross(f"Verification failed: {result.message}"))
    else:
        logger.info(check(f"{len(packing)} embeddings verified, {packing.edge_total()} edges"))
    emit_json(body, getattr(args, 'output', None))
    return EXIT_OK if result else EXIT_FAILURE


def cmd_oracle(args) -> int:
    budget = args.budget if args.budget is not None else -1
    kind = args.oracle
    if kind == 'k53':
        report = k53_paths_unsat(budget)
        emit_json({'command': 'oracle k53', **report.to_dict()}, args.output)
        confirmed = report.status is SearchStatus.UNSAT
        logger.info(check("K_{5,3} claim confirmed") if confirmed else cross("K_{5,3} claim not confirmed"))
        return EXIT_OK if confirmed else EXIT_FAILURE

    if kind == 'pack':
        G = read_graph(args.graph)
        guests = [read_tree(path) for path in args.trees]
        report = brute_force_pack(G, guests, budget, args.orientations)
        emit_json({'command': 'oracle pack', **report.to_dict()}, args.output)
        return EXIT_OK if report.status is SearchStatus.FOUND else EXIT_FAILURE

    if kind == 'doublestar':
        packing = double_star_decomposition(args.n)
        emit_json(packing_to_dict(packing, command='oracle doublestar', n=args.n,
                                  host=[2 * args.n - 1, args.n], edges=packing.edge_total()), args.output)
        return EXIT_OK

    if kind == 'dstar-bound':
        bound = double_star_copy_bound(args.n, Fraction(args.eps))
        emit_json({'command': 'oracle dstar-bound', **bound.to_dict()}, args.output)
        return EXIT_OK

    if kind == 'logstar':
        T = log_star_tree(args.n, Fraction(args.alpha))
        emit_json({'command': 'oracle logstar', 'n': args.n, 'alpha': args.alpha,
                   'max_degree': T.max_degree, 'tree': guest_to_dict(T)}, args.output)
        return EXIT_OK

    if kind == 'probe':
        logger.info(f"Seed: {args.seed}")
        report = empirical_containment_probe(args.n, Fraction(args.alpha), args.p, args.trials, args.seed, budget)
        emit_json({'command': 'oracle probe', **report.to_dict()}, args.output)
        return EXIT_OK

    if kind == 'obstruction':
        T = two_double_star_tree(args.l)
        size = 2 * args.l + 1
        report = high_degree_obstruction(T, 2 * size - 1, size)
        emit_json({'command': 'oracle obstruction', 'l': args.l, 'tree': guest_to_dict(T),
                   **report.to_dict()}, args.output)
        return EXIT_OK

    raise ValueError(f"unknown oracle {kind!r}")


# ---------------------------------------------------------------------------
# Bench
# ---------------------------------------------------------------------------

def bench_trial(suite: str, trial: int, seed: int) -> Dict[str, Any]:
    """One seeded trial; runs in a worker process"""
    start = time.perf_counter()
    status, detail = 'ok', {}
    try:
        if suite == 'decompose':
            beta = (Fraction(1, 10), Fraction(1, 5), Fraction(2, 5))[trial % 3]
            rng_size = 10 + (seed * 7919 + trial) % 241
            T = gen_tree(rng_size, 6, seed)
            dec = beta_decompose(T, beta)
            detail = {'vertices': T.vertex_count, 'beta': str(beta), 'seeds': len(dec.seeds),
                      'pieces': len(dec.pieces)}
        elif suite == 'assign':
            instance = gen_assignment_instance(seed)
            groups = partition_pieces(instance)
            detail = {'pairs': len(instance.pairs), 's': instance.s, 'groups': groups}
            if len(instance.pairs) <= 12:
                exact, _ = branch_and_bound(instance.pairs, instance.s, instance.capacity)
                if exact is None:
                    status = 'disagree'
        elif suite == 'embed':
            n = (60, 120)[trial % 2]
            T = gen_tree(floor_frac(Fraction(7, 10) * n), max(2, n // 20), seed)
            G = build_graph(n, n, complete=True)
            embedding = embed_tree(G, T, EmbedderConfig(seed=seed))
            if not verify_embedding(G, T, embedding):
                status = 'invalid'
            detail = {'n': n, 'vertices': T.vertex_count, 'beta': embedding.meta.get('beta')}
        elif suite == 'pack':
            n, gamma = 400, Fraction(1, 4)
            trees = random_tree_family(n, gamma, 4, seed)
            result = pack_trees(n, gamma, trees, PackerConfig(seed=seed))
            detail = {'n': n, 'k': result.k, 'd_n': result.d_n, 'edges': result.packing.edge_total()}
        else:
            raise ValueError(f"unknown bench suite {suite!r}")
    except TreePackError as e:
        status, detail = 'error', {'error': type(e).__name__, 'message': str(e)}
    return {
        'suite': suite,
        'trial': trial,
        'seed': seed,
        'status': status,
        'elapsed': time.perf_counter() - start,
        'peak_rss': psutil.Process().memory_info().rss,
        'detail': detail,
    }


def cmd_bench(args) -> int:
    logger.info(f"Seed: {args.seed}")
    seeds = [args.seed + i for i in range(args.trials)]
    start = time.perf_counter()
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(bench_trial, args.suite, i, s) for i, s in enumerate(seeds)]
            results = [f.result() for f in futures]
    else:
        results = [bench_trial(args.suite, i, s) for i, s in enumerate(seeds)]
    results.sort(key=lambda r: r['trial'])
    elapsed = time.perf_counter() - start

    failures = [r for r in results if r['status'] != 'ok']
    summary = {
        'command': 'bench',
        'suite': args.suite,
        'seed': args.seed,
        'trials': len(results),
        'ok': len(results) - len(failures),
        'failed_trials': [r['trial'] for r in failures],
        'elapsed': round(elapsed, 3),
        'peak_rss': max((r['peak_rss'] for r in results), default=0),
    }

    if args.csv:
        with open(args.csv, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.DictWriter(handle, fieldnames=['suite', 'trial', 'seed', 'status', 'elapsed', 'peak_rss'])
            writer.writeheader()
            for r in results:
                writer.writerow({k: r[k] for k in writer.fieldnames})
        logger.info(check(f"CSV written: {args.csv}"))

    if args.db:
        store = RunStore(args.db)
        try:
            store.store_results(results)
        finally:
            store.close()

    emit_json(summary, args.output)
    if failures:
        logger.error(cross(f"{len(failures)} of {len(results)} {args.suite} trials failed"))
        return EXIT_FAILURE
    logger.info(check(f"{len(results)} {args.suite} trials passed in {elapsed:.2f}s"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _knobs(parser: argparse.ArgumentParser):
    group = parser.add_argument_group('pipeline knobs')
    group.add_argument('--gamma', type=float, help=f'host slack (default {Config.GAMMA})')
    group.add_argument('--eps', type=float, help=f'regularity eps (default {Config.EPS})')
    group.add_argument('--d', type=float, help=f'density threshold (default {Config.D})')
    group.add_argument('--s', type=int, help=f'clusters per side (default {Config.CLUSTERS})')
    group.add_argument('--c', type=float, help=f'max-degree coefficient (default {Config.C})')
    group.add_argument('--beta', type=float, help=f'piece size fraction (default {Config.BETA})')
    group.add_argument('--mu', type=float, help=f'assignment slack (default {Config.MU})')
    group.add_argument('--engine', choices=['regularity', 'greedy'], help='embedding engine')
    group.add_argument('--preset', choices=['desk', 'asymptotic'], help='constant wiring (default desk)')
    group.add_argument('--seed', type=int, default=Config.SEED, help=f'rng seed (default {Config.SEED})')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='treepack',
        description='Balanced tree packing toolkit',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  # Random balanced tree and host
  python -m src.cli gen-tree --n-per-class 42 --max-degree 3 --seed 7 -o tree.txt
  python -m src.cli gen-graph --sides 60 60 --p 1 -o host.txt

  # Embed and verify
  python -m src.cli embed host.txt tree.txt --engine regularity -o emb.json
  python -m src.cli verify host.txt emb.json

  # Pack four trees into K_{400,400}
  python -m src.cli pack --random t=4 n=400 gamma=0.25 --engine greedy --seed 7

  # Oracles
  python -m src.cli oracle k53
  python -m src.cli oracle dstar-bound 100 0.1

  # Benchmarks
  python -m src.cli bench --suite decompose --trials 1000 --workers 4 --csv runs.csv
        '''
    )
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('gen-tree', help='random balanced tree')
    p.add_argument('--n-per-class', type=int, required=True)
    p.add_argument('--max-degree', type=int, required=True)
    p.add_argument('--seed', type=int, default=Config.SEED)
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_gen_tree)

    p = sub.add_parser('gen-graph', help='random bipartite host')
    p.add_argument('--sides', type=int, nargs=2, required=True, metavar=('N_A', 'N_B'))
    p.add_argument('--p', type=float, default=1.0)
    p.add_argument('--min-degree', type=int)
    p.add_argument('--seed', type=int, default=Config.SEED)
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_gen_graph)

    p = sub.add_parser('decompose', help='beta-decomposition of a tree')
    p.add_argument('tree')
    _knobs(p)
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser('assign', help='assign (x,y) pairs from a CSV into groups')
    p.add_argument('pairs')
    p.add_argument('--groups', type=int, required=True, help='number of groups s')
    p.add_argument('--m', type=int, help='group size m (checked instance)')
    p.add_argument('--capacity', type=float, help='plain per-group capacity (unchecked instance)')
    p.add_argument('--budget', type=int, help='branch-and-bound node limit')
    _knobs(p)
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_assign)

    p = sub.add_parser('embed', help='embed a tree into a host')
    p.add_argument('graph')
    p.add_argument('tree')
    p.add_argument('--guest-id', default='T')
    _knobs(p)
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_embed)

    p = sub.add_parser('pack', help='pack balanced trees into K_{n,n}')
    p.add_argument('--random', nargs='+', metavar='KEY=VALUE',
                   help='t=, n=, gamma=, and optionally c=, max_degree=, per_class=')
    p.add_argument('--manifest', help='JSON with n, gamma and a list of trees')
    _knobs(p)
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_pack, engine='greedy')

    p = sub.add_parser('verify', help='verify a packing or embedding against a host')
    p.add_argument('graph')
    p.add_argument('packing')
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser('oracle', help='exhaustive checks and constructions')
    osub = p.add_subparsers(dest='oracle', required=True)
    o = osub.add_parser('k53', help='three 6-vertex paths into K_{5,3}')
    o = osub.add_parser('pack', help='exhaustive packing search')
    o.add_argument('graph')
    o.add_argument('trees', nargs='+')
    o.add_argument('--orientations', choices=['fixed', 'both'], default='fixed')
    o = osub.add_parser('doublestar', help='decompose K_{2n-1,n} into D_{n,n}')
    o.add_argument('n', type=int)
    o = osub.add_parser('dstar-bound', help='copy bound for large double stars')
    o.add_argument('n', type=int)
    o.add_argument('eps')
    o = osub.add_parser('logstar', help='log-star adversarial tree')
    o.add_argument('n', type=int)
    o.add_argument('alpha')
    o = osub.add_parser('probe', help='containment frequency in G(n,n,p)')
    o.add_argument('n', type=int)
    o.add_argument('alpha')
    o.add_argument('p', type=float)
    o.add_argument('--trials', type=int, default=20)
    o.add_argument('--seed', type=int, default=Config.SEED)
    o = osub.add_parser('obstruction', help='two-double-star degree obstruction')
    o.add_argument('l', type=int)
    for o in osub.choices.values():
        o.add_argument('--budget', type=int, help=f'search node limit (default {Config.SEARCH_BUDGET})')
        o.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser('bench', help='seeded benchmark suites')
    p.add_argument('--suite', choices=BENCH_SUITES, required=True)
    p.add_argument('--trials', type=int, default=20)
    p.add_argument('--workers', type=int, default=1)
    p.add_argument('--seed', type=int, default=Config.SEED)
    p.add_argument('--csv', help='write per-trial rows to this CSV file')
    p.add_argument('--db', help=f'record trials in this SQLite file (e.g. {Config.DB_PATH})')
    p.add_argument('-o', '--output')
    p.set_defaults(handler=cmd_bench)
    return parser


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run the command and map failures to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        Config.validate()
        return args.handler(args)
    except FormatError as e:
        logger.error(cross(f"Input error: {e}"))
        return EXIT_USAGE
    except TreePackError as e:
        logger.error(cross(f"{type(e).__name__}: {e}"))
        # input and configuration problems derive from ValueError
        return EXIT_USAGE if isinstance(e, ValueError) else EXIT_FAILURE
    except (ValueError, KeyError) as e:
        logger.error(cross(f"Usage error: {e}"))
        return EXIT_USAGE
    except OSError as e:
        logger.error(cross(f"I/O error: {e}"))
        return EXIT_USAGE


def main():
    sys.exit(dispatch())


if __name__ == '__main__':
    main()
