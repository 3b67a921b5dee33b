"""Counter-based random streams.

Every draw is a pure function of (seed, counter), so a stream can be
replayed from its seed alone and child streams derived with ``derive()``
are independent of draw order and worker count. The generator is the
splitmix64 sequence: value(i) = finalize(seed + (i+1) * GOLDEN).
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
# Domain separator so derived child seeds never alias the draw stream.
_DERIVE_DOMAIN = 0xD1B54A32D192ED03


def _mix(z: int) -> int:
    """splitmix64 finalizer on a python int (mod 2^64)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
        return z ^ (z >> np.uint64(31))


def _fold(h: int, v: int) -> int:
    return _mix(h ^ _mix((v + _GOLDEN) & _MASK))


def _key_to_int(part) -> int:
    if isinstance(part, str):
        # Fold utf-8 bytes 8 at a time, length-prefixed so "ab","c" != "a","bc".
        data = part.encode("utf-8")
        h = _mix(len(data) ^ 0x5B5B)
        for off in range(0, len(data), 8):
            h = _fold(h, int.from_bytes(data[off : off + 8], "little"))
        return h
    return int(part) & _MASK


class Rng:
    """A seeded stream of reproducible draws.

    Instances are cheap; derive one per work item rather than sharing a
    stream across threads.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        self._counter = 0

    def derive(self, *key) -> "Rng":
        """Child stream addressed by a key of ints and/or strings."""
        h = _mix(self.seed ^ _DERIVE_DOMAIN)
        for part in key:
            h = _fold(h, _key_to_int(part))
        return Rng(h)

    def raw(self, n: int) -> np.ndarray:
        """Next n uint64 values from the stream."""
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            state = np.uint64(self.seed) + idx * np.uint64(_GOLDEN)
        return _mix_array(state)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        """Uniform float64 draws in [low, high)."""
        n = 1 if size is None else int(np.prod(size))
        u = (self.raw(n) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
        out = low + (high - low) * u
        if size is None:
            return float(out[0])
        return out.reshape(size)

    def normal(self, mean: float = 0.0, std: float = 1.0, size=None):
        """Gaussian draws via Box-Muller."""
        n = 1 if size is None else int(np.prod(size))
        m = (n + 1) // 2
        u = (self.raw(2 * m) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
        u1 = 1.0 - u[:m]  # (0, 1], keeps log finite
        u2 = u[m:]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        out = mean + std * z
        if size is None:
            return float(out[0])
        return out.reshape(size)

    def integers(self, bound: int, size=None):
        """Uniform ints in [0, bound). Modulo bias is < 2^-50 for desk-scale bounds."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        n = 1 if size is None else int(np.prod(size))
        vals = (self.raw(n) % np.uint64(bound)).astype(np.int64)
        if size is None:
            return int(vals[0])
        return vals.reshape(size)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n)."""
        out = np.arange(n, dtype=np.int64)
        if n < 2:
            return out
        r = self.raw(n - 1)
        for i in range(n - 1, 0, -1):
            j = int(r[n - 1 - i] % np.uint64(i + 1))
            out[i], out[j] = out[j], out[i]
        return out

    def choice_subset(self, items, k: int) -> list:
        """k distinct items, uniform over subsets, order randomized."""
        items = list(items)
        if not 0 <= k <= len(items):
            raise ValueError(f"cannot choose {k} from {len(items)} items")
        idx = self.permutation(len(items))[:k]
        return [items[i] for i in idx]

    def bernoulli(self, p: float, size=None):
        u = self.uniform(size=size)
        if size is None:
            return u < p
        return u < p
