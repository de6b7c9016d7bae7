"""
Artifact formats
Graph/tree text formats and the JSON documents exchanged by the CLI
"""

import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.errors import FormatError
from src.graph_core import (BalancedForest, BipartiteGraph, Embedding, Guest,
                            Packing, RootedTree, Side, build_graph,
                            build_rooted_tree)

SCHEMA_VERSION = 1

PathLike = Union[str, Path]


def _content_lines(text: str):
    for raw in text.splitlines():
        line = raw.split('#', 1)[0].strip()
        if line:
            yield line


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> BipartiteGraph:
    """
    Parse `bipartite <nA> <nB> [complete]` followed by `<a> <b>` lines
    """
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty graph file")
    header = lines[0].split()
    if header[0] != 'bipartite' or len(header) not in (3, 4):
        raise FormatError(f"bad graph header: {lines[0]!r}")
    try:
        n_a, n_b = int(header[1]), int(header[2])
    except ValueError as e:
        raise FormatError(f"bad side sizes in header: {lines[0]!r}") from e
    if len(header) == 4:
        if header[3] != 'complete':
            raise FormatError(f"unknown graph flag {header[3]!r}")
        if len(lines) > 1:
            raise FormatError("a complete graph lists no edges")
        return build_graph(n_a, n_b, complete=True)

    edges = []
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"bad edge line: {line!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as e:
            raise FormatError(f"bad edge line: {line!r}") from e
    return build_graph(n_a, n_b, edges)


def format_graph(G: BipartiteGraph) -> str:
    if G.edge_count == G.side_a_size * G.side_b_size and G.edge_count > 0:
        return f"bipartite {G.side_a_size} {G.side_b_size} complete\n"
    lines = [f"bipartite {G.side_a_size} {G.side_b_size}"]
    lines.extend(f"{a} {b}" for a, b in sorted(G.edges))
    return '\n'.join(lines) + '\n'


def parse_tree(text: str) -> RootedTree:
    """
    Parse `tree <n> <root>` followed by the n parent indices (-1 at the root)
    """
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty tree file")
    header = lines[0].split()
    if header[0] != 'tree' or len(header) != 3:
        raise FormatError(f"bad tree header: {lines[0]!r}")
    try:
        n, root = int(header[1]), int(header[2])
        parent = [int(tok) for line in lines[1:] for tok in line.split()]
    except ValueError as e:
        raise FormatError("tree file holds a non-integer token") from e
    if len(parent) != n:
        raise FormatError(f"header announces {n} vertices, parent list has {len(parent)}")
    return build_rooted_tree(parent, root)


def format_tree(T: RootedTree) -> str:
    return f"tree {T.vertex_count} {T.root}\n{' '.join(str(p) for p in T.parent)}\n"


def read_graph(path: PathLike) -> BipartiteGraph:
    return parse_graph(Path(path).read_text(encoding='utf-8'))


def write_graph(path: PathLike, G: BipartiteGraph):
    Path(path).write_text(format_graph(G), encoding='utf-8')


def read_tree(path: PathLike) -> RootedTree:
    return parse_tree(Path(path).read_text(encoding='utf-8'))


def write_tree(path: PathLike, T: RootedTree):
    Path(path).write_text(format_tree(T), encoding='utf-8')


# ---------------------------------------------------------------------------
# JSON documents
# ---------------------------------------------------------------------------

def _json_default(obj: Any):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Side):
        return obj.value
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def to_json(document: Dict[str, Any]) -> str:
    body = {'schema_version': SCHEMA_VERSION}
    body.update(document)
    return json.dumps(body, default=_json_default, indent=2, ensure_ascii=False)


def emit_json(document: Dict[str, Any], path: Optional[PathLike] = None):
    """Write a JSON document to `path`, or to stdout when no path is given"""
    text = to_json(document)
    if path is None:
        sys.stdout.write(text + '\n')
    else:
        Path(path).write_text(text + '\n', encoding='utf-8')


def load_json(path: PathLike) -> Dict[str, Any]:
    try:
        document = json.loads(Path(path).read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON: {e}") from e
    version = document.get('schema_version')
    if version != SCHEMA_VERSION:
        raise FormatError(f"{path}: unsupported schema_version {version!r}")
    return document


def guest_to_dict(guest: Guest) -> Dict[str, Any]:
    if isinstance(guest, RootedTree):
        return {'kind': 'tree', 'root': guest.root, 'parent': list(guest.parent)}
    body = {
        'kind': 'forest',
        'components': [guest_to_dict(c) for c in guest.components],
        'flips': list(guest.flips),
    }
    if guest.origin is not None:
        body['origin'] = list(guest.origin)
    return body


def guest_from_dict(body: Dict[str, Any]) -> Guest:
    kind = body.get('kind')
    if kind == 'tree':
        return build_rooted_tree(body['parent'], body['root'])
    if kind == 'forest':
        components = tuple(guest_from_dict(c) for c in body['components'])
        origin = body.get('origin')
        return BalancedForest(components, tuple(bool(f) for f in body['flips']),
                              tuple(origin) if origin is not None else None)
    raise FormatError(f"unknown guest kind {kind!r}")


def embedding_to_dict(e: Embedding) -> Dict[str, Any]:
    body = {
        'guest_id': e.guest_id,
        'guest': guest_to_dict(e.guest),
        'map': [[v, e.vertex_map[v][0].value, int(e.vertex_map[v][1])] for v in sorted(e.vertex_map)],
    }
    for key in ('engine', 'seed', 'config'):
        if key in e.meta:
            body[key] = e.meta[key]
    extra = {k: v for k, v in e.meta.items() if k not in ('engine', 'seed', 'config')}
    if extra:
        body['meta'] = extra
    return body


def embedding_from_dict(body: Dict[str, Any]) -> Embedding:
    try:
        vertex_map = {int(v): (Side(side), int(index)) for v, side, index in body['map']}
        meta = dict(body.get('meta', {}))
        for key in ('engine', 'seed', 'config'):
            if key in body:
                meta[key] = body[key]
        return Embedding(str(body['guest_id']), guest_from_dict(body['guest']), vertex_map, meta)
    except (KeyError, ValueError, TypeError) as e:
        raise FormatError(f"malformed embedding document: {e}") from e


def packing_to_dict(packing: Packing, **extra: Any) -> Dict[str, Any]:
    body = {'embeddings': [embedding_to_dict(e) for e in packing]}
    body.update(extra)
    return body


def packing_from_dict(body: Dict[str, Any]) -> Packing:
    if 'embeddings' in body:
        return Packing(tuple(embedding_from_dict(e) for e in body['embeddings']))
    if 'map' in body:
        return Packing((embedding_from_dict(body),))
    raise FormatError("document holds neither a packing nor an embedding")
