"""Counter-based random streams for the simulation harness.

Each replication owns a Philox substream keyed by (seed, replication
index), so any replication can be regenerated in isolation — on another
process, on another machine, or out of order — and byte-identical
results fall out for free.  Uniforms come from the top 53 bits of the
raw counter output, centered so 0 and 1 are unreachable; Gaussians go
through :func:`seqt.special.gauss_quantile` rather than a library
ziggurat so the draw is a pure function of the counter words.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .special import gauss_quantile

__all__ = ["ReplicationStream"]

_U64_MAX = 2**64 - 1


class ReplicationStream:
    """The (seed, rep) substream of the harness's random source."""

    def __init__(self, seed: int, rep: int):
        if not 0 <= seed <= _U64_MAX:
            raise DomainError(f"seed must fit in 64 unsigned bits, got {seed}")
        if rep < 0:
            raise DomainError(f"replication index must be nonnegative, got {rep}")
        self.seed = seed
        self.rep = rep
        # build the key as uint64 directly: a plain list would be cast
        # through float64 and mangle seeds above 2^53
        key = np.array([seed, rep], dtype=np.uint64)
        self._bits = np.random.Philox(key=key)

    def uniforms(self, count: int) -> np.ndarray:
        """``count`` doubles uniform on the open interval (0, 1)."""
        if count < 0:
            raise DomainError(f"count must be nonnegative, got {count}")
        words = self._bits.random_raw(count)
        return ((words >> np.uint64(11)).astype(np.float64) + 0.5) / 2.0**53

    def gaussians(self, count: int) -> np.ndarray:
        """``count`` standard Gaussians by inverse-CDF transform."""
        if count == 0:
            return np.empty(0)
        return gauss_quantile(self.uniforms(count))
