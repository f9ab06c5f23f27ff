"""Per-endpoint input cones and path sampling.

For each endpoint the input cone is its transitive fanin truncated at
registers and primary inputs. Besides the pseudo-STA slowest path we
draw K_i random paths per endpoint, K_i proportional to the number of
driving registers, via backward uniform-random walks.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass

from .bog import CONST0, CONST1, PI, REG, BogGraph, EndpointRef
from .errors import UnknownEndpoint
from .sta import PathSample, TimingAnnotation, extract_slowest_path, make_path_sample

# K_i = clamp(ceil(BETA * |driving_sources|), K_MIN, K_MAX)
BETA = 0.5
K_MIN = 2
K_MAX = 32


@dataclass(frozen=True)
class InputCone:
    endpoint: EndpointRef
    nodes: frozenset[int]
    driving_sources: frozenset[int]


def sample_count(n_driving: int, beta: float = BETA, k_min: int = K_MIN,
                 k_max: int = K_MAX) -> int:
    return max(k_min, min(k_max, math.ceil(beta * n_driving)))


def extract_cone(g: BogGraph, ep: EndpointRef) -> InputCone:
    """Reverse-reachability closure stopping at REG/PI boundaries."""
    if not any(e.id == ep.id and e.name == ep.name for e in g.endpoints):
        raise UnknownEndpoint(f"{g.design}: endpoint {ep.name} not in graph")
    seen = {ep.id}
    stack = [ep.id]
    sources = set()
    while stack:
        v = stack.pop()
        k = g.kinds[v]
        if k in (REG, PI):
            sources.add(v)
            continue
        if k in (CONST0, CONST1):
            continue
        for f in g.fanins[v]:
            if f not in seen:
                seen.add(f)
                stack.append(f)
    return InputCone(ep, frozenset(seen), frozenset(sources))


def endpoint_rng(seed: int, endpoint_name: str) -> random.Random:
    """Independent deterministic stream per (seed, endpoint)."""
    h = hashlib.blake2b(endpoint_name.encode(), digest_size=8).digest()
    return random.Random(seed ^ int.from_bytes(h, "big"))


def _random_walk(g: BogGraph, start: int, rng: random.Random) -> list[int]:
    """Backward uniform walk over non-constant fanins until a source."""
    nodes = [start]
    v = start
    while True:
        k = g.kinds[v]
        if k in (REG, PI, CONST0, CONST1):
            break
        fins = [f for f in g.fanins[v] if g.kinds[f] not in (CONST0, CONST1)]
        if not fins:
            break
        v = rng.choice(fins)
        nodes.append(v)
    nodes.reverse()
    return nodes


def sample_paths(g: BogGraph, ann: TimingAnnotation, cone: InputCone,
                 rng_seed: int, beta: float = BETA, k_min: int = K_MIN,
                 k_max: int = K_MAX) -> list[PathSample]:
    """The slowest path plus K_i seeded random paths for one endpoint.

    Random duplicates of the slowest path are re-drawn up to 10 times,
    then kept as-is so the count contract stays exact.
    """
    ep = cone.endpoint
    slowest = extract_slowest_path(g, ann, ep)
    k_i = sample_count(len(cone.driving_sources), beta, k_min, k_max)
    rng = endpoint_rng(rng_seed, ep.name)
    samples = [slowest]
    for _ in range(k_i):
        nodes = _random_walk(g, ep.id, rng)
        attempts = 0
        while tuple(nodes) == slowest.node_sequence and attempts < 10:
            nodes = _random_walk(g, ep.id, rng)
            attempts += 1
        samples.append(make_path_sample(g, ann, ep, nodes, "random"))
    return samples


def driving_source_counts(g: BogGraph) -> dict[str, int]:
    """Driving-register/PI count per endpoint, batched.

    Propagates source-membership bitsets (arbitrary-precision ints)
    through the DAG; equivalent to per-endpoint cone extraction but one
    pass over the graph.
    """
    sources = [i for i in range(g.n_nodes) if g.kinds[i] in (REG, PI)]
    src_bit = {v: 1 << j for j, v in enumerate(sources)}
    reach = [0] * g.n_nodes
    for v in range(g.n_nodes):
        k = g.kinds[v]
        if k in (REG, PI):
            reach[v] = src_bit[v]
        elif k in (CONST0, CONST1):
            reach[v] = 0
        else:
            acc = 0
            for f in g.fanins[v]:
                acc |= reach[f]
            reach[v] = acc
    counts = {}
    for ep in g.endpoints:
        r = reach[ep.id]
        if g.kinds[ep.id] in (REG, PI):
            r = src_bit[ep.id]
        counts[ep.name] = bin(r).count("1")
    return counts


__all__ = [
    "BETA", "K_MIN", "K_MAX", "InputCone", "extract_cone", "sample_paths",
    "sample_count", "driving_source_counts", "endpoint_rng",
]
