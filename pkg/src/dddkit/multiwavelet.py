"""GHM multiwavelet packet decomposition.

A scalar signal is first turned into a stream of 2-vectors by a pairwise
prefilter, then split by the Geronimo-Hardin-Massopust matrix filter bank::

    low[n]  = sum_k H[k] @ v[(2n + k) mod M]
    high[n] = sum_k G[k] @ v[(2n + k) mod M]

with periodic extension. The block operator is orthogonal, so energy is
conserved at every level and synthesis is the transpose of analysis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InsufficientSamples

_R2 = math.sqrt(2.0)

GHM_H = np.array([
    [[3 / (5 * _R2), 4 / 5], [-1 / 20, -3 / (10 * _R2)]],
    [[3 / (5 * _R2), 0.0], [9 / 20, 1 / _R2]],
    [[0.0, 0.0], [9 / 20, -3 / (10 * _R2)]],
    [[0.0, 0.0], [-1 / 20, 0.0]],
])
GHM_G = np.array([
    [[-1 / 20, -3 / (10 * _R2)], [1 / (10 * _R2), 3 / 10]],
    [[9 / 20, -1 / _R2], [-9 / (10 * _R2), 0.0]],
    [[9 / 20, -3 / (10 * _R2)], [9 / (10 * _R2), -3 / 10]],
    [[-1 / 20, 0.0], [-1 / (10 * _R2), 0.0]],
])

# Rotation taking the pair direction (1, 1) onto (sqrt 2, 1), the eigenvector of
# sum(H) for eigenvalue sqrt 2, so slowly varying input lands in the low band.
_PHI = math.atan2(1.0, _R2) - math.pi / 4
PREFILTER = np.array([[math.cos(_PHI), -math.sin(_PHI)],
                      [math.sin(_PHI), math.cos(_PHI)]])

DEPTH = 3


@dataclass(frozen=True)
class MultiFilterBank:
    H: np.ndarray
    G: np.ndarray

    def orthogonality_defect(self) -> float:
        """Largest deviation from the double-shift orthonormality conditions."""
        worst = 0.0
        L = self.H.shape[0]
        eye = np.eye(2)
        for m in range(-(L // 2), L // 2 + 1):
            for A, B, target in ((self.H, self.H, eye), (self.G, self.G, eye),
                                 (self.H, self.G, 0 * eye)):
                acc = np.zeros((2, 2))
                for k in range(L):
                    if 0 <= k + 2 * m < L:
                        acc += A[k] @ B[k + 2 * m].T
                want = target if m == 0 else 0 * eye
                worst = max(worst, float(np.abs(acc - want).max()))
        return worst


GHM = MultiFilterBank(GHM_H, GHM_G)


@dataclass(frozen=True)
class PacketTree:
    """Leaves of a full packet tree in natural order (low = 0, high = 1, root bit first)."""

    depth: int
    leaves: tuple
    length: int  # vectors of the (possibly truncated) input stream

    def __len__(self):
        return len(self.leaves)


def prefilter(samples) -> np.ndarray:
    """Map consecutive sample pairs to 2-vectors; an odd trailing sample is dropped."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptyInput("prefilter needs at least one sample pair")
    m = x.size // 2
    if m == 0:
        raise EmptyInput("prefilter needs at least one sample pair")
    pairs = x[:2 * m].reshape(m, 2)
    return pairs @ PREFILTER.T


def postfilter(stream) -> np.ndarray:
    return (np.asarray(stream) @ PREFILTER).ravel()


def _taps(m, L):
    return (2 * np.arange(m // 2)[:, None] + np.arange(L)[None, :]) % m


def analysis_step(stream, bank: MultiFilterBank = GHM):
    v = np.asarray(stream, dtype=np.float64)
    m = v.shape[0]
    if m < 2 or m % 2:
        raise InsufficientSamples(f"analysis needs an even number >= 2 of vectors, got {m}")
    idx = _taps(m, bank.H.shape[0])
    low = np.zeros((m // 2, 2))
    high = np.zeros((m // 2, 2))
    for k in range(bank.H.shape[0]):
        vk = v[idx[:, k]]
        low += vk @ bank.H[k].T
        high += vk @ bank.G[k].T
    return low, high


def synthesis_step(low, high, bank: MultiFilterBank = GHM):
    low = np.asarray(low, dtype=np.float64)
    high = np.asarray(high, dtype=np.float64)
    m = 2 * low.shape[0]
    idx = _taps(m, bank.H.shape[0])
    v = np.zeros((m, 2))
    for k in range(bank.H.shape[0]):
        np.add.at(v, idx[:, k], low @ bank.H[k] + high @ bank.G[k])
    return v


def packet_decompose(stream, bank: MultiFilterBank = GHM, depth: int = DEPTH) -> PacketTree:
    """Full packet tree; the stream is truncated to a multiple of ``2**depth`` vectors."""
    v = np.asarray(stream, dtype=np.float64)
    block = 2 ** depth
    if v.ndim != 2 or v.shape[1] != 2:
        raise ValueError("stream must have shape (M, 2)")
    if v.shape[0] < block:
        raise InsufficientSamples(f"need at least {block} vectors, got {v.shape[0]}")
    used = v.shape[0] - v.shape[0] % block
    nodes = [v[:used]]
    for _ in range(depth):
        nxt = []
        for node in nodes:
            nxt.extend(analysis_step(node, bank))
        nodes = nxt
    return PacketTree(depth, tuple(nodes), used)


def packet_reconstruct(tree: PacketTree, bank: MultiFilterBank = GHM) -> np.ndarray:
    nodes = list(tree.leaves)
    while len(nodes) > 1:
        nodes = [synthesis_step(nodes[i], nodes[i + 1], bank) for i in range(0, len(nodes), 2)]
    return nodes[0]


def band_energies(tree: PacketTree) -> np.ndarray:
    return np.array([float(np.sum(leaf * leaf)) for leaf in tree.leaves])


def wavelet_features(samples) -> np.ndarray:
    """The 8 depth-3 band energies of a scalar window (>= 16 samples)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2 * 2 ** DEPTH:
        raise InsufficientSamples(f"wavelet features need at least {2 * 2 ** DEPTH} samples, "
                                  f"got {x.size}")
    return band_energies(packet_decompose(prefilter(x)))


def band_energy_vector(tree: PacketTree, window_index: int = -1):
    from .features import WAVELET8, FeatureVector

    return FeatureVector(WAVELET8.names, band_energies(tree), window_index)
