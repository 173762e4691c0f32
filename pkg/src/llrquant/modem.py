"""Constellations with Gray labeling, bit mapping, scrambler, interleaver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _gray_codes(nbits: int) -> np.ndarray:
    i = np.arange(1 << nbits)
    return i ^ (i >> 1)


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy symbol alphabet with one bit label per point.

    ``labels[i]`` holds the bits (MSB first) mapped to ``points[i]``.
    ``point_by_label[v]`` inverts the labeling for the label read as an
    integer, which is what the hot mapping/demapping paths use.
    """

    name: str
    points: np.ndarray          # (M,) complex
    labels: np.ndarray          # (M, m) uint8
    point_by_label: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        M, m = self.labels.shape
        if M != 2 ** m or len(self.points) != M:
            raise ValueError("labels must be a bijection onto {0,1}^m")
        energy = np.mean(np.abs(self.points) ** 2)
        if abs(energy - 1.0) > 1e-12:
            raise ValueError(f"constellation energy {energy} != 1")
        ints = self.label_ints()
        if len(np.unique(ints)) != M:
            raise ValueError("duplicate labels")
        pbl = np.zeros(M, dtype=complex)
        pbl[ints] = self.points
        object.__setattr__(self, "point_by_label", pbl)

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]

    @property
    def size(self) -> int:
        return len(self.points)

    def label_ints(self) -> np.ndarray:
        m = self.bits_per_symbol
        weights = 1 << np.arange(m - 1, -1, -1)
        return (self.labels.astype(np.int64) * weights).sum(axis=1)


def _pam_gray(nbits: int) -> tuple[np.ndarray, np.ndarray]:
    """Gray-labeled PAM levels -L+1, ..., L-1 (unnormalized)."""
    L = 1 << nbits
    levels = np.arange(-(L - 1), L, 2, dtype=float)
    codes = _gray_codes(nbits)  # codes[i] labels the i-th level from the left
    return levels, codes


def build_constellation(name: str) -> Constellation:
    """Gray-labeled constellation by name: bpsk, qpsk_gray, or qam16_gray."""
    if name == "bpsk":
        points = np.array([-1.0 + 0j, 1.0 + 0j])
        labels = np.array([[0], [1]], dtype=np.uint8)
        return Constellation(name, points, labels)
    if name == "qpsk_gray":
        # independent BPSK on I and Q
        pts, labs = [], []
        for bi in (0, 1):
            for bq in (0, 1):
                pts.append(((2 * bi - 1) + 1j * (2 * bq - 1)) / np.sqrt(2))
                labs.append([bi, bq])
        return Constellation(name, np.array(pts), np.array(labs, dtype=np.uint8))
    if name == "qam16_gray":
        levels, codes = _pam_gray(2)
        scale = np.sqrt(10.0)  # E[|x|^2] = 2 * mean(levels^2) = 10
        pts, labs = [], []
        for i, li in enumerate(levels):
            for q, lq in enumerate(levels):
                pts.append((li + 1j * lq) / scale)
                ci, cq = codes[i], codes[q]
                labs.append([(ci >> 1) & 1, ci & 1, (cq >> 1) & 1, cq & 1])
        return Constellation(name, np.array(pts), np.array(labs, dtype=np.uint8))
    raise ValueError(f"unknown constellation {name!r}")


def map_bits(bits, constellation: Constellation, mt: int) -> np.ndarray:
    """Map m*mt code bits to a length-mt symbol vector, layer by layer."""
    m = constellation.bits_per_symbol
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size != m * mt:
        raise ValueError(f"expected {m * mt} bits, got {bits.size}")
    weights = 1 << np.arange(m - 1, -1, -1)
    ints = bits.reshape(mt, m) @ weights
    return constellation.point_by_label[ints]


def map_bits_block(bits, constellation: Constellation, mt: int) -> np.ndarray:
    """Vectorized map_bits: (n_uses, m*mt) bits -> (n_uses, mt) symbols."""
    m = constellation.bits_per_symbol
    bits = np.asarray(bits, dtype=np.int64)
    n = bits.shape[0]
    weights = 1 << np.arange(m - 1, -1, -1)
    ints = bits.reshape(n, mt, m) @ weights
    return constellation.point_by_label[ints]


@dataclass(frozen=True)
class ScramblerSequence:
    """Pseudo-random bit sequence with its antipodal sign form."""

    bits: np.ndarray  # (n,) uint8

    @property
    def signs(self) -> np.ndarray:
        return 1 - 2 * self.bits.astype(np.int64)


def draw_scrambler(n: int, rng: np.random.Generator) -> ScramblerSequence:
    return ScramblerSequence(rng.integers(0, 2, size=n, dtype=np.uint8))


def scramble(bits, seq: ScramblerSequence) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != seq.bits.size:
        raise ValueError("length mismatch")
    return bits ^ seq.bits


def descramble_llrs(llrs, seq: ScramblerSequence) -> np.ndarray:
    llrs = np.asarray(llrs, dtype=float)
    if llrs.size != seq.bits.size:
        raise ValueError("length mismatch")
    return llrs * seq.signs


@dataclass(frozen=True)
class Interleaver:
    """Permutation of code bit positions and its inverse."""

    perm: np.ndarray

    @property
    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm))
        return inv


def draw_interleaver(n: int, rng: np.random.Generator) -> Interleaver:
    return Interleaver(rng.permutation(n))


def interleave(bits, il: Interleaver) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.size != il.perm.size:
        raise ValueError("length mismatch")
    return bits[il.perm]


def deinterleave(values, il: Interleaver) -> np.ndarray:
    values = np.asarray(values)
    if values.size != il.perm.size:
        raise ValueError("length mismatch")
    out = np.empty_like(values)
    out[il.perm] = values
    return out
