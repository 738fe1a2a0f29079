"""Bundles as dense bitsets.

A bundle over the ground set {0, ..., n-1} is a plain int: bit j is set iff
item j is in the bundle. The serialized form is lowercase hex with bit 0
standing for item 0.
"""

from .errors import MalformedBundleError


def from_items(items) -> int:
    mask = 0
    for j in items:
        mask |= 1 << j
    return mask


def items(mask: int) -> list[int]:
    return list(iter_items(mask))


def iter_items(mask: int):
    """Yield set bit positions in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def size(mask: int) -> int:
    return mask.bit_count()


def full_mask(n: int) -> int:
    return (1 << n) - 1


def check_bundle(mask: int, n: int) -> None:
    if mask < 0 or mask >> n:
        raise MalformedBundleError(f"bundle {mask:#x} uses items outside 0..{n - 1}")


def to_hex(mask: int) -> str:
    return format(mask, "x")


def from_hex(text: str) -> int:
    mask = int(text, 16)
    if mask < 0:
        raise MalformedBundleError(f"negative bundle {text!r}")
    return mask


def submasks(mask: int):
    """All submasks of mask in ascending numeric order, 0 and mask included."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def lower_half(mask: int) -> int:
    """The smaller-id half of a nonempty bitset, rounded up."""
    take = (mask.bit_count() + 1) // 2
    out = 0
    for _ in range(take):
        low = mask & -mask
        out |= low
        mask ^= low
    return out


def chunks(mask: int, k: int) -> list[int]:
    """Split into consecutive ascending-id blocks of at most k items each."""
    if k < 1:
        raise ValueError("block size must be at least 1")
    out = []
    block = 0
    count = 0
    for j in iter_items(mask):
        block |= 1 << j
        count += 1
        if count == k:
            out.append(block)
            block = 0
            count = 0
    if block:
        out.append(block)
    return out
