from __future__ import annotations

import hashlib

import numpy as np
from attrs import define, field

STREAMS = ("split", "init", "batch_order", "smo_scan", "search", "synth")


def _stream_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "little")


@define(frozen=True)
class SeedPlan:
    """Fans one global seed out into named, independent sub-seeds.

    Every random stream in a run is a PCG64 generator built from one of these.
    """

    seed: int = field()

    @seed.validator  # type: ignore
    def check_seed(self, _, seed: int):
        if seed < 0:
            raise ValueError("Seed must be an unsigned integer")

    def sub_seed(self, name: str) -> int:
        seq = np.random.SeedSequence(self.seed, spawn_key=(_stream_key(name),))
        return int(seq.generate_state(1, dtype=np.uint32)[0])

    def generator(self, name: str) -> np.random.Generator:
        return np.random.default_rng(self.sub_seed(name))

    def as_dict(self) -> dict[str, int | str]:
        return {"global": self.seed, "generator": "PCG64"} | {
            name: self.sub_seed(name) for name in STREAMS
        }
