"""Occupation-bitmask Fock bases for spin-1/2 fermions on an open chain.

Sites are numbered 1..L in every public interface; bit j-1 of a mask stores
the occupation of site j.  A product configuration (up_mask, down_mask)
stands for the state obtained by applying all spin-up creation operators in
ascending site order, then all spin-down ones:

    |up_mask, down_mask> = (prod_{j in up, ascending} c+_{j,up})
                           (prod_{j in down, ascending} c+_{j,down}) |vacuum>

This spinor ordering is the fixed convention of the whole package.  It never
enters nearest-neighbor hopping within one species (the opposite-spin block
is crossed an even number of times), but singlet/triplet constructors and
the mirror reflection do depend on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import ParameterError

MAX_SITES = 62  # masks must fit a signed 64-bit word with headroom


def popcount(mask: int) -> int:
    """Number of occupied sites in a scalar mask."""
    return int(mask).bit_count()


def popcount_array(masks: np.ndarray) -> np.ndarray:
    """Elementwise popcount for an array of non-negative masks."""
    return np.bitwise_count(masks).astype(np.int64)


def site_bit(site: int) -> int:
    return 1 << (site - 1)


def occupation_matrix(masks: np.ndarray, L: int) -> np.ndarray:
    """(dim, L) float matrix of per-site occupations, sites in ascending order."""
    shifts = np.arange(L, dtype=np.int64)
    return ((masks[:, None] >> shifts) & 1).astype(np.float64)


@dataclass(frozen=True, eq=False)
class SpinSectorBasis:
    """All L-site occupation masks with exactly N particles, sorted ascending."""

    L: int
    N: int
    masks: np.ndarray  # int64, ascending
    index_of: dict

    @property
    def dim(self) -> int:
        return len(self.masks)

    def index(self, mask: int) -> int:
        try:
            return self.index_of[int(mask)]
        except KeyError:
            raise ParameterError(f"mask {mask:#b} not in (L={self.L}, N={self.N}) sector") from None

    @cached_property
    def occupations(self) -> np.ndarray:
        occ = occupation_matrix(self.masks, self.L)
        occ.setflags(write=False)
        return occ


def enumerate_sector(L: int, N: int) -> SpinSectorBasis:
    """Enumerate the fixed-particle-number sector of one spin species."""
    if not 1 <= L <= MAX_SITES:
        raise ParameterError(f"site count L={L} outside [1, {MAX_SITES}]")
    if not 0 <= N <= L:
        raise ParameterError(f"particle count N={N} outside [0, L={L}]")
    masks = np.fromiter(
        (sum(1 << p for p in combo) for combo in combinations(range(L), N)),
        dtype=np.int64,
        count=math.comb(L, N),
    )
    masks.sort()
    masks.setflags(write=False)
    index_of = {int(m): k for k, m in enumerate(masks)}
    return SpinSectorBasis(L=L, N=N, masks=masks, index_of=index_of)


@dataclass(frozen=True, eq=False)
class ProductBasis:
    """Tensor product of an up and a down sector; global index = iu * down.dim + id."""

    up: SpinSectorBasis
    down: SpinSectorBasis

    def __post_init__(self):
        if self.up.L != self.down.L:
            raise ParameterError(f"mismatched site counts: up L={self.up.L}, down L={self.down.L}")

    @property
    def L(self) -> int:
        return self.up.L

    @property
    def dim(self) -> int:
        return self.up.dim * self.down.dim

    def index(self, up_mask: int, down_mask: int) -> int:
        return self.up.index(up_mask) * self.down.dim + self.down.index(down_mask)

    def config(self, g: int) -> tuple[int, int]:
        """Masks (up, down) of the global index g."""
        iu, idn = divmod(g, self.down.dim)
        return int(self.up.masks[iu]), int(self.down.masks[idn])

    @cached_property
    def doublon_counts(self) -> np.ndarray:
        """(dim,) number of doubly occupied sites per configuration."""
        counts = popcount_array(self.up.masks[:, None] & self.down.masks[None, :])
        counts = counts.astype(np.float64).ravel()
        counts.setflags(write=False)
        return counts


def product_basis(L: int, n_up: int, n_down: int) -> ProductBasis:
    return ProductBasis(up=enumerate_sector(L, n_up), down=enumerate_sector(L, n_down))


def _check_site(L: int, site: int, name: str) -> None:
    if not 1 <= site <= L:
        raise ParameterError(f"{name}={site} outside chain [1, {L}]")


def apply_move(L: int, mask: int, src: int, dst: int) -> Optional[tuple[int, int]]:
    """Move one particle from site src to site dst with the Jordan-Wigner sign.

    Returns (new_mask, sign) with sign = (-1)^(occupied sites strictly between
    src and dst), or None when src is empty or dst occupied.  src and dst may
    be any distinct sites; nearest-neighbor hops always carry sign +1.
    """
    _check_site(L, src, "src")
    _check_site(L, dst, "dst")
    if src == dst:
        raise ParameterError("src and dst must differ")
    bs, bd = site_bit(src), site_bit(dst)
    if not mask & bs or mask & bd:
        return None
    lo, hi = (src, dst) if src < dst else (dst, src)
    between = ((1 << (hi - 1)) - 1) & ~((1 << lo) - 1)
    sign = -1 if popcount(mask & between) & 1 else 1
    return mask ^ (bs | bd), sign


def apply_hop(L: int, mask: int, src: int, dst: int) -> Optional[tuple[int, int]]:
    """Nearest-neighbor hop; raises on non-adjacent sites."""
    if abs(src - dst) != 1:
        raise ParameterError(f"hop sites {src}->{dst} are not adjacent")
    return apply_move(L, mask, src, dst)


def mirror_mask(L: int, mask: int) -> int:
    """Reflect a mask about the chain center: site j maps to site L+1-j."""
    if mask >> L:
        raise ParameterError(f"mask {mask:#b} has bits beyond site {L}")
    out = 0
    for i in range(L):
        out |= ((mask >> i) & 1) << (L - 1 - i)
    return out


def reorder_sign(k: int) -> int:
    """Sign picked up when a product of k fermionic operators is reversed.

    Reversal needs k(k-1)/2 adjacent transpositions, one sign flip each.
    """
    return -1 if (k * (k - 1) // 2) & 1 else 1
