"""Phase-profile designs for a surface that refracts and reflects at once.

Each element splits its incident energy between a transmitted (refracted)
wave toward the indoor side and a reflected wave toward the outdoor side,
with independently controllable unit-modulus phases per training slot. A
design is the pair of n x k phase matrices (refraction, reflection).

The estimation-optimal structured designs make the stacked profile rows
orthogonal and keep the reflection rows orthogonal to the all-ones pilot
row, which decouples the two mobiles' information. Rows 0..n-1 of a 2n-row
orthogonal family are assigned to the reflection profile (row 0 is the
all-ones row for DFT/Hadamard) and rows n..2n-1 to the refraction profile.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatchError,
    InsufficientSlotsError,
    NotPowerOfTwoError,
    RankDeficientError,
)


class DesignKind(str, Enum):
    DFT = "dft"
    HADAMARD = "hadamard"
    RANDOM = "random"


@dataclass(frozen=True)
class PhaseProfilePair:
    """Refraction and reflection phase schedules, each n x k, unit modulus."""

    refraction: np.ndarray
    reflection: np.ndarray
    kind: DesignKind
    seed: int | None = None

    def __post_init__(self):
        if self.refraction.ndim != 2 or self.refraction.shape != self.reflection.shape:
            raise DimensionMismatchError(
                f"profile matrices must share an n x k shape, got "
                f"{self.refraction.shape} and {self.reflection.shape}"
            )

    @property
    def n_elements(self) -> int:
        return self.refraction.shape[0]

    @property
    def k_slots(self) -> int:
        return self.refraction.shape[1]


def _is_power_of_two(k: int) -> bool:
    return k > 0 and (k & (k - 1)) == 0


def make_design(
    kind: DesignKind, n: int, k: int, seed: int | None = None
) -> PhaseProfilePair:
    """Build the phase schedules of one design.

    DFT and Hadamard take 2n rows of a k x k orthogonal family and need
    k >= 2n; Hadamard additionally needs k to be a power of two. Random
    draws i.i.d. uniform phases from a seeded generator.
    """
    kind = DesignKind(kind)
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if kind is DesignKind.RANDOM:
        rng = np.random.default_rng(seed)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=(2, n, k))
        return PhaseProfilePair(
            refraction=np.exp(1j * phases[0]),
            reflection=np.exp(1j * phases[1]),
            kind=kind,
            seed=seed,
        )
    if kind is DesignKind.HADAMARD and not _is_power_of_two(k):
        raise NotPowerOfTwoError(f"Hadamard design needs a power-of-two slot count, got k={k}")
    if k < 2 * n:
        raise InsufficientSlotsError(
            f"structured designs need k >= 2n slots, got k={k} for n={n}"
        )
    if kind is DesignKind.DFT:
        rows = np.exp(-2j * np.pi * np.outer(np.arange(2 * n), np.arange(k)) / k)
    else:
        rows = scipy.linalg.hadamard(k)[: 2 * n].astype(complex)
    return PhaseProfilePair(
        refraction=rows[n : 2 * n], reflection=rows[:n], kind=kind, seed=None
    )


def orthogonality_defect(pair: PhaseProfilePair) -> float:
    """Worst normalized inner product between [1, reflection'] and refraction'.

    Zero means the refraction schedule is orthogonal both to the all-ones
    pilot direction and to every reflection row, which is the condition for
    the two mobiles' Fisher information to decouple. Normalized by the slot
    count so a from-the-same-orthogonal-family design scores exactly 0.
    """
    k = pair.k_slots
    pilot_and_reflection = np.column_stack([np.ones(k), pair.reflection.T])
    cross = pilot_and_reflection.conj().T @ pair.refraction.T
    return float(np.abs(cross).max() / k)


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans of ``a`` and ``b``.

    Spans are taken via rank-revealing orthonormal bases, so rank-deficient
    inputs are handled by their effective rank; only an all-zero input is
    rejected. Returns angles in ascending order, length min(rank a, rank b).
    """
    qa = scipy.linalg.orth(np.asarray(a))
    qb = scipy.linalg.orth(np.asarray(b))
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        raise RankDeficientError("cannot take principal angles against a rank-zero span")
    sigma = scipy.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    return np.sort(np.arccos(np.clip(sigma, 0.0, 1.0)))
