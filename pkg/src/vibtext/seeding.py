import zlib

import numpy as np


def derive_seed(seed: int, *keys) -> int:
    """Deterministic 64-bit child seed; string keys are hashed with crc32."""
    spawn = tuple(k if isinstance(k, int) else zlib.crc32(str(k).encode()) for k in keys)
    lo, hi = np.random.SeedSequence(int(seed), spawn_key=spawn).generate_state(2, np.uint32)
    return int(hi) << 32 | int(lo)
