"""Seeded instance generators and the experiment grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import textio
from .model import Instance, Variant, extra_constraint_lhs

DEFAULT_A = 100.0
DEFAULT_D = 1e-2
DEFAULT_GAMMA = 0.05
DEFAULT_KS = (4, 8, 16, 32, 64, 128)
DEFAULT_MS = (10, 50, 100, 200, 300, 400)
DEFAULT_CS_CCMSP1 = (1e-2, 1e-3, 1e-7)
DEFAULT_C_CCMSP2PLUS = 1e-7


def validate_extra_constraint(inst: Instance) -> bool:
    """Does the variance term stay below one job's expected time on any machine?"""
    return extra_constraint_lhs(inst.sizes, inst.d, inst.c, inst.gamma) < inst.a


def gen_ccmsp1(k: int, m: int, a: float = DEFAULT_A, d: float = DEFAULT_D,
               c: float = 1e-2, gamma: float = DEFAULT_GAMMA) -> Instance:
    if k < 1:
        raise ValueError("k must be at least 1")
    if m < 1 or m % 2:
        raise ValueError(f"CCMSP1 needs an even group size, got m = {m}")
    return Instance((m,) * k, a, d, c, gamma, Variant.CCMSP1)


def _draw_sizes(k: int, n: int, rng: np.random.Generator) -> list[int]:
    # f uses the jobs still unassigned before group i
    sizes = []
    for i in range(k - 1):
        left = n - sum(sizes)
        groups_left = k - i
        f = -(-left // groups_left)
        h = -(-f // 2)
        while True:
            m = f + int(rng.integers(-h, h + 1))
            # every later group must still get at least one job
            if 1 <= m <= left - (groups_left - 1):
                break
        sizes.append(m)
    sizes.append(n - sum(sizes))
    return sizes


def gen_ccmsp2plus(k: int, n: int, seed: int, a: float = DEFAULT_A, d: float = DEFAULT_D,
                   c: float = DEFAULT_C_CCMSP2PLUS,
                   gamma: float = DEFAULT_GAMMA) -> tuple[Instance, Instance]:
    """An even-n instance with random group sizes and its odd companion (one extra job).

    Raises InstanceError when the extra constraint fails at these parameters.
    """
    if k < 1 or n < k:
        raise ValueError(f"need 1 <= k <= n, got k = {k}, n = {n}")
    if n % 2:
        raise ValueError(f"the base instance needs an even job count, got n = {n}")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    sizes = sorted(_draw_sizes(k, n, rng))
    odd_sizes = list(sizes)
    odd_sizes[int(rng.integers(k))] += 1
    even = Instance(tuple(sizes), a, d, c, gamma, Variant.CCMSP2PLUS)
    odd = Instance(tuple(sorted(odd_sizes)), a, d, c, gamma, Variant.CCMSP2PLUS)
    return even, odd


def _fmt_c(c: float) -> str:
    return repr(float(c))


@dataclass(frozen=True)
class GridPoint:
    instance_id: str
    instance: Instance
    variant: Variant
    k: int
    size_param: int
    c: float
    parity: str

    @property
    def n(self) -> int:
        return self.instance.n


@dataclass(frozen=True)
class GridSpec:
    """A grid of experiment instances.

    For CCMSP1 ``sizes`` lists group sizes m; for CCMSP2PLUS it lists the
    per-group multipliers, so the base instance has n = k * multiplier jobs.
    """

    variant: Variant = Variant.CCMSP1
    ks: tuple[int, ...] = DEFAULT_KS
    sizes: tuple[int, ...] = DEFAULT_MS
    cs: tuple[float, ...] | None = None
    a: float = DEFAULT_A
    d: float = DEFAULT_D
    gamma: float = DEFAULT_GAMMA
    seed: int = 0
    parity: tuple[str, ...] = ("even", "odd")

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.cs is None:
            default = (DEFAULT_CS_CCMSP1 if self.variant is Variant.CCMSP1
                       else (DEFAULT_C_CCMSP2PLUS,))
            object.__setattr__(self, "cs", default)
        if self.variant not in (Variant.CCMSP1, Variant.CCMSP2PLUS):
            raise ValueError(f"no grid generator for {self.variant.value}")
        if not set(self.parity) <= {"even", "odd"} or not self.parity:
            raise ValueError(f"parity must be a subset of even/odd, got {self.parity}")

    def points(self) -> Iterator[GridPoint]:
        if self.variant is Variant.CCMSP1:
            for c in self.cs:
                for m in self.sizes:
                    for k in self.ks:
                        inst = gen_ccmsp1(k, m, self.a, self.d, c, self.gamma)
                        yield GridPoint(f"ccmsp1-k{k}-m{m}-c{_fmt_c(c)}", inst,
                                        self.variant, k, m, c, "even")
            return
        for c in self.cs:
            for mult in self.sizes:
                for k in self.ks:
                    seed = instance_seed(self.seed, k, mult)
                    even, odd = gen_ccmsp2plus(k, k * mult, seed, self.a, self.d, c, self.gamma)
                    for parity, inst in (("even", even), ("odd", odd)):
                        if parity in self.parity:
                            yield GridPoint(
                                f"ccmsp2plus-k{k}-n{k * mult}-c{_fmt_c(c)}-{parity}",
                                inst, self.variant, k, mult, c, parity,
                            )

    def to_items(self) -> list[tuple[str, object]]:
        items = [
            ("variant", self.variant.value),
            ("k", list(self.ks)),
            ("m" if self.variant is Variant.CCMSP1 else "n_mult", list(self.sizes)),
            ("c", [float(c) for c in self.cs]),
            ("a", self.a),
            ("d", self.d),
            ("gamma", self.gamma),
            ("seed", self.seed),
        ]
        if self.variant is Variant.CCMSP2PLUS:
            items.append(("parity", list(self.parity)))
        return items

    @classmethod
    def from_mapping(cls, doc: dict[str, str]) -> "GridSpec":
        variant = Variant(doc.get("variant", "CCMSP1"))
        kwargs = {"variant": variant}
        if "k" in doc:
            kwargs["ks"] = tuple(textio.as_ints(doc["k"]))
        size_key = "m" if variant is Variant.CCMSP1 else "n_mult"
        if size_key in doc:
            kwargs["sizes"] = tuple(textio.as_ints(doc[size_key]))
        if "c" in doc:
            kwargs["cs"] = tuple(textio.as_floats(doc["c"]))
        for key in ("a", "d", "gamma"):
            if key in doc:
                kwargs[key] = float(doc[key])
        if "seed" in doc:
            kwargs["seed"] = int(doc["seed"])
        if "parity" in doc:
            kwargs["parity"] = tuple(textio.as_words(doc["parity"]))
        return cls(**kwargs)


def instance_seed(base_seed: int, k: int, multiplier: int) -> int:
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(k), int(multiplier)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def write_grid(spec: GridSpec, out_dir) -> list[dict]:
    """Write one instance file per grid point plus ``manifest.csv``; returns the manifest rows."""
    import csv
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for p in spec.points():
        fname = f"{p.instance_id}.inst"
        p.instance.save(out / fname)
        rows.append({
            "file": fname,
            "instance_id": p.instance_id,
            "variant": p.variant.value,
            "k": p.k,
            "n": p.n,
            "size_param": p.size_param,
            "c": format(p.c, ".12g"),
            "parity": p.parity,
        })
    with open(out / "manifest.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["file"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return rows
