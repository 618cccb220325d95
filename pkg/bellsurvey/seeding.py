"""
Deterministic seed derivation.

Every random draw in the package is driven by a 64-bit seed handed to
``np.random.default_rng``. Seeds for independent streams (survey trials,
see-saw restarts, the fixed-settings draw) are derived from a master seed
with the splitmix64 finalizer, so a trial's randomness never depends on
how many other trials ran before it or on which worker ran it:

    z = (master + GAMMA * (stream + 1)) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    seed = z ^ (z >> 31)

with GAMMA = 0x9E3779B97F4A7C15.
"""

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

# Stream tag for the once-per-survey settings draw: b"settings" as a big-endian integer
SETTINGS_STREAM = int.from_bytes(b"settings", "big")


def splitmix64(value: int) -> int:
    """Avalanche a 64-bit integer"""
    z = value & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, stream: int) -> int:
    """
    Derive the seed of one independent stream.

    Args:
        master_seed: Survey or optimizer master seed
        stream: Stream index (trial id, restart index or a tag constant)

    Returns:
        64-bit seed
    """
    return splitmix64((master_seed + GAMMA * (stream + 1)) & MASK64)
