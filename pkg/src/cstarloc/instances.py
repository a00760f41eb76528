"""Seeded random instances, size profiles and the two-point golden fixture."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import serialization as ser
from .algebra import CStarAlgebra
from .errors import InvalidArgument
from .module import HilbertModule, linear_span, submodule_from_generators
from .states import ConvexDecomposition, PositiveFunctional, rule_from_json, sigma_convex_truncate

# hard desk-scale ceiling; profiles may be smaller
MAX_BLOCK_DIM = 4
MAX_BLOCKS = 3
MAX_RANK = 3
MAX_PARTS = 4


@dataclass(frozen=True)
class SizeProfile:
    name: str
    max_block_dim: int
    max_blocks: int
    max_rank: int
    max_parts: int
    probe_states: int = 20
    sigma_terms: int = 30

    def __post_init__(self):
        if not (1 <= self.max_block_dim <= MAX_BLOCK_DIM and 1 <= self.max_blocks <= MAX_BLOCKS
                and 1 <= self.max_rank <= MAX_RANK and 1 <= self.max_parts <= MAX_PARTS):
            raise InvalidArgument(
                f"profile {self.name!r} exceeds desk-scale bounds "
                f"(block dim <= {MAX_BLOCK_DIM}, blocks <= {MAX_BLOCKS}, rank <= {MAX_RANK}, "
                f"parts <= {MAX_PARTS})"
            )
        if self.probe_states < 0 or self.sigma_terms < 1:
            raise InvalidArgument("probe_states must be >= 0 and sigma_terms >= 1")


PROFILES = {
    "small": SizeProfile("small", 2, 2, 2, 3),
    "default": SizeProfile("default", 3, 3, 2, 4),
    "large": SizeProfile("large", 4, 3, 3, 4),
}

FIXTURES = ("c2-example",)


def load_profile(name):
    """Profile by name, or from a JSON file holding SizeProfile fields."""
    if name in PROFILES or name in FIXTURES:
        return PROFILES.get(name, name)
    path = Path(name)
    if path.is_file():
        data = json.loads(path.read_text(encoding="utf-8"))
        data.setdefault("name", path.stem)
        try:
            return SizeProfile(**data)
        except TypeError as exc:
            raise InvalidArgument(f"bad profile file {name}: {exc}") from exc
    raise InvalidArgument(f"unknown profile {name!r}; choose from {sorted(PROFILES) + list(FIXTURES)}")


@dataclass(frozen=True, eq=False)
class InstanceSpec:
    """A JSON-backed problem instance; the objects are materialized on demand."""

    data: dict

    @classmethod
    def from_json(cls, obj, validate=True):
        if validate:
            ser.validate(obj, ser.INSTANCE_SCHEMA)
        inst = cls(obj)
        inst._check_shapes()
        return inst

    @classmethod
    def load(cls, path):
        return cls.from_json(ser.load_json(path))

    def to_json(self):
        return self.data

    def dumps(self):
        return ser.dumps(self.data)

    @cached_property
    def digest(self):
        return ser.digest(self.data)

    @property
    def seed(self):
        return self.data["seed"]

    @cached_property
    def algebra(self):
        return CStarAlgebra(tuple(self.data["block_dims"]))

    @cached_property
    def module(self):
        return HilbertModule(self.algebra, self.data["rank"])

    def _subspace(self, key):
        obj = self.data.get(key)
        if obj is None:
            return None
        gens = [ser.decode_module_element(self.module, g) for g in obj["generators"]]
        if obj["kind"] == "linear":
            return linear_span(gens)
        return submodule_from_generators(gens)

    @cached_property
    def L(self):
        return self._subspace("L")

    @cached_property
    def H(self):
        return self._subspace("H")

    @cached_property
    def K(self):
        return self._subspace("K")

    @cached_property
    def x0(self):
        return ser.decode_module_element(self.module, self.data["x0"])

    def _functional(self, blocks):
        return PositiveFunctional(self.algebra, tuple(ser.decode_blocks(blocks)))

    @cached_property
    def decomposition(self):
        d = self.data["decomposition"]
        parts = tuple(self._functional(b) for b in d["densities"])
        return ConvexDecomposition(tuple(d["weights"]), parts)

    @cached_property
    def sigma_decomposition(self):
        s = self.data.get("sigma")
        if s is None:
            return None
        parts = self.decomposition.parts
        return sigma_convex_truncate(rule_from_json(s["rule"]), lambda j: parts[(j - 1) % len(parts)], s["N"])

    @cached_property
    def probe_states(self):
        return [self._functional(b) for b in self.data.get("probe_states", [])]

    def _check_shapes(self):
        dims = self.data["block_dims"]
        rank = self.data["rank"]

        def element_ok(el):
            return len(el) == len(dims) and all(
                len(b) == d and all(len(row) == d for row in b) for b, d in zip(el, dims)
            )

        def module_ok(x):
            return len(x) == rank and all(element_ok(c) for c in x)

        for key in ("L", "H", "K"):
            if key in self.data and not all(module_ok(g) for g in self.data[key]["generators"]):
                raise ser.InputError(f"{key}: generator shapes do not match block_dims/rank")
        if not module_ok(self.data["x0"]):
            raise ser.InputError("x0 shape does not match block_dims/rank")
        dens = self.data["decomposition"]["densities"] + self.data.get("probe_states", [])
        if not all(element_ok(b) for b in dens):
            raise ser.InputError("density shapes do not match block_dims")
        if len(self.data["decomposition"]["weights"]) != len(self.data["decomposition"]["densities"]):
            raise ser.InputError("decomposition weights and densities differ in length")


def _random_density(rng, dims):
    """Random PSD blocks of total trace one; per-block rank is random (possibly zero)."""
    while True:
        ranks = [int(rng.integers(0, d + 1)) for d in dims]
        if sum(ranks):
            break
    blocks = []
    for d, r in zip(dims, ranks):
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        u, _ = np.linalg.qr(z)
        mu = np.zeros(d)
        mu[:r] = rng.uniform(0.1, 1.0, size=r)
        blocks.append((u * mu) @ u.conj().T)
    total = sum(np.trace(b).real for b in blocks)
    return [0.5 * (b + b.conj().T) / total for b in blocks]


def _random_matrix(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def _low_rank_generator(rng, dims, n, ranks):
    """Module element whose block-k stack (n*d_k x d_k) has rank ranks[k]."""
    comps = [[None] * len(dims) for _ in range(n)]
    for k, (d, r) in enumerate(zip(dims, ranks)):
        stack = _random_matrix(rng, n * d, r) @ _random_matrix(rng, r, d)
        for i in range(n):
            comps[i][k] = stack[i * d:(i + 1) * d]
    return [ser.encode_blocks(c) for c in comps]


def _proper_generators(rng, dims, n, count):
    # one block stays rank-deficient in every generator, so count <= n keeps L proper
    short = int(rng.integers(len(dims)))
    gens = []
    for _ in range(count):
        ranks = [int(rng.integers(0, d + 1)) for d in dims]
        ranks[short] = int(rng.integers(0, dims[short]))
        gens.append(_low_rank_generator(rng, dims, n, ranks))
    return gens


def generate_instance(seed, size_profile="default"):
    """Deterministic instance for `seed`; identical seeds give byte-identical JSON."""
    profile = load_profile(size_profile) if isinstance(size_profile, str) else size_profile
    if profile == "c2-example":
        return c2_example()
    if seed < 0:
        raise InvalidArgument("seed must be non-negative")
    rng = np.random.default_rng(seed)
    nblocks = int(rng.integers(1, profile.max_blocks + 1))
    dims = [int(d) for d in rng.integers(1, profile.max_block_dim + 1, size=nblocks)]
    n = int(rng.integers(1, profile.max_rank + 1))
    L = _proper_generators(rng, dims, n, int(rng.integers(1, n + 1)))
    core = _proper_generators(rng, dims, n, 1)
    H = core + _proper_generators(rng, dims, n, int(rng.integers(0, n + 1)))
    K = core + _proper_generators(rng, dims, n, int(rng.integers(0, n + 1)))
    nparts = int(rng.integers(min(2, profile.max_parts), profile.max_parts + 1))
    raw = rng.uniform(0.2, 1.0, size=nparts)
    weights = [float(w) for w in raw / raw.sum()]
    densities = [ser.encode_blocks(_random_density(rng, dims)) for _ in range(nparts)]
    x0 = [ser.encode_blocks([_random_matrix(rng, d, d) for d in dims]) for _ in range(n)]
    probes = [ser.encode_blocks(_random_density(rng, dims)) for _ in range(profile.probe_states)]
    ratio = float(rng.uniform(0.3, 0.6))
    data = {
        "schema": "cstarloc.instance/1",
        "seed": int(seed),
        "profile": profile.name,
        "block_dims": dims,
        "rank": n,
        "L": {"kind": "submodule", "generators": L},
        "H": {"kind": "submodule", "generators": H},
        "K": {"kind": "submodule", "generators": K},
        "decomposition": {"weights": weights, "densities": densities},
        "sigma": {"rule": {"rule": "geometric", "ratio": ratio}, "N": profile.sigma_terms},
        "x0": x0,
        "probe_states": probes,
    }
    # round-trip through JSON so in-memory and file instances are bit-identical;
    # the schema holds by construction, shapes are still checked
    return InstanceSpec.from_json(json.loads(json.dumps(data)), validate=False)


def c2_example():
    """Two-point algebra C({1,2}) as a module over itself, omega = (omega_1 + omega_2)/2.

    L is the line through p1 + p2 (a convex set, not a submodule); x0 = p1 - p2.
    H and K are the coordinate submodules generated by p1 and p2.
    """
    one, zero = [[[1.0, 0.0]]], [[[0.0, 0.0]]]
    p1, p2 = [one, zero], [zero, one]
    p1p2 = [one, one]
    data = {
        "schema": "cstarloc.instance/1",
        "seed": 0,
        "profile": "c2-example",
        "block_dims": [1, 1],
        "rank": 1,
        "L": {"kind": "linear", "generators": [[p1p2]]},
        "H": {"kind": "submodule", "generators": [[p1]]},
        "K": {"kind": "submodule", "generators": [[p2]]},
        "decomposition": {"weights": [0.5, 0.5], "densities": [p1, p2]},
        "sigma": {"rule": {"rule": "finite", "weights": [0.5, 0.5]}, "N": 2},
        "x0": [[one, [[[-1.0, 0.0]]]]],
        "probe_states": [p1, p2, [[[[0.5, 0.0]]], [[[0.5, 0.0]]]], [[[[0.25, 0.0]]], [[[0.75, 0.0]]]]],
    }
    return InstanceSpec.from_json(data)
