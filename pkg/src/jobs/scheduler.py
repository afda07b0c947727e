"""
Dynamic chunk scheduling over a byte range

A coordinator hands out chunks of the input from a monotone cursor. Each
chunk is about half of the remaining work divided by the number of workers,
never smaller than ``min_chunk`` (except for the final remainder). Early
chunks are large; chunks shrink towards the end so that slow and fast
workers finish at about the same time.

Chunk sizes depend only on how much work is left, so the sequence of chunks
is the same no matter which worker picks up which chunk.
"""

from dataclasses import dataclass
from typing import Iterator, List, Optional


@dataclass(frozen=True)
class WorkChunk:
    """Half-open byte range ``[start, end)`` of the input"""

    start: int
    end: int

    @property
    def size(self) -> int:
        return self.end - self.start


def next_chunk(remaining_work: int, workers: int, min_chunk: int) -> int:
    """
    Size of the next chunk

    >>> next_chunk(1000, 4, 10)
    125
    >>> next_chunk(8, 4, 10)
    8
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if min_chunk < 1:
        raise ValueError(f"min_chunk must be >= 1, got {min_chunk}")
    if remaining_work <= 0:
        return 0
    return min(remaining_work, max(min_chunk, remaining_work // (2 * workers)))


class ChunkCursor:
    """Monotone cursor handing out consecutive chunks of ``[0, total)``"""

    def __init__(self, total: int, workers: int, min_chunk: int):
        self.total = total
        self.workers = workers
        self.min_chunk = min_chunk
        self.position = 0

    @property
    def remaining(self) -> int:
        return self.total - self.position

    def take(self) -> Optional[WorkChunk]:
        size = next_chunk(self.remaining, self.workers, self.min_chunk)
        if size == 0:
            return None
        chunk = WorkChunk(self.position, self.position + size)
        self.position = chunk.end
        return chunk

    def __iter__(self) -> Iterator[WorkChunk]:
        while True:
            chunk = self.take()
            if chunk is None:
                return
            yield chunk


def plan_chunks(total: int, workers: int, min_chunk: int) -> List[WorkChunk]:
    """Every chunk the cursor would hand out, in order"""
    return list(ChunkCursor(total, workers, min_chunk))
