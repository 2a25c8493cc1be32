"""Counter-based, splittable random streams.

A :class:`Stream` is just a key path such as ``(base_seed, "masks", 3)``.
Generators are built from it on demand with Philox, so the numbers a stream
produces depend only on its key and never on the order in which sibling
streams were consumed.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


def _words(part: int | str) -> tuple[int, int, int]:
    # fixed-width (kind, lo, hi) encoding: SeedSequence concatenates words,
    # so variable-width parts could make two different paths collide
    if isinstance(part, str):
        return (1, zlib.crc32(part.encode("utf-8")), 0)
    part = int(part)
    if part < 0 or part > _U64:
        raise ValueError(f"stream key parts must fit in 64 unsigned bits, got {part}")
    return (0, part & 0xFFFFFFFF, part >> 32)


@dataclass(frozen=True)
class Stream:
    key: tuple[int, ...]

    @classmethod
    def from_seed(cls, seed: int) -> Stream:
        return cls(_words(seed))

    def child(self, part: int | str) -> Stream:
        return Stream(self.key + _words(part))

    def children(self, n: int) -> list[Stream]:
        return [self.child(i) for i in range(n)]

    def generator(self) -> np.random.Generator:
        # SeedSequence ignores trailing zero words; the length prefix keeps
        # child(0) distinct from its parent
        entropy = [len(self.key), *self.key]
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def as_stream(stream: Stream | int) -> Stream:
    if isinstance(stream, Stream):
        return stream
    return Stream.from_seed(int(stream))
