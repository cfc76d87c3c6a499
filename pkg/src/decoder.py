"""
Concatenated Code Decoder Module

Maximum-likelihood message-passing decoding of an L-fold concatenated k=1
stabilizer code in the Pauli frame. Each pass decodes every block of the
current level independently and hands its posterior over logical classes
up as the prior of one "qubit" of the next level.

Qubit layout: at every level, block j consists of the b consecutive
positions j*b ... j*b + b - 1, so a level-L code on n = b^L qubits is
decoded by repeated reshape(-1, b).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .stabilizer import (
    LogicalClass,
    PauliOperator,
    StabilizerCode,
    logical_class,
    logical_operator,
    min_weight_logical,
    multiply,
    stabilizer_group,
    syndrome_index,
)

NORMALIZATION_TOL = 1e-9

# Gathered prior entries held in memory at once during block decoding
_GATHER_BUDGET = 1 << 21


class DecoderContradiction(ValueError):
    """Raised when the priors give zero probability to every explanation of a syndrome."""


@dataclass(frozen=True)
class PriorVector:
    """Probability vector [p_I, p_X, p_Y, p_Z] for one qubit (or one block)."""
    p_i: float
    p_x: float
    p_y: float
    p_z: float

    def __post_init__(self):
        values = self.as_array()
        if np.any(values < 0.0):
            raise ValueError(f"prior entries must be nonnegative: {values}")
        if abs(values.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"prior must sum to 1, got {values.sum()}")

    @classmethod
    def depolarizing(cls, p):
        return cls(1.0 - p, p / 3.0, p / 3.0, p / 3.0)

    @classmethod
    def located(cls):
        return cls(0.25, 0.25, 0.25, 0.25)

    def as_array(self):
        return np.array([self.p_i, self.p_x, self.p_y, self.p_z], dtype=float)


@dataclass(frozen=True)
class ConcatenatedCode:
    base: StabilizerCode
    levels: int

    def __post_init__(self):
        if self.base.k != 1:
            raise ValueError(f"concatenation needs a k = 1 base code, got k = {self.base.k}")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")

    @property
    def block_size(self):
        return self.base.n

    @property
    def n(self):
        return self.base.n ** self.levels


@dataclass(frozen=True)
class BlockOutcome:
    effective_class: LogicalClass
    posterior: np.ndarray


@dataclass(frozen=True)
class DecodeOutcome:
    chosen: LogicalClass
    residual: LogicalClass
    posterior: np.ndarray

    @property
    def success(self):
        return self.chosen == self.residual


def final_decision(posterior) -> LogicalClass:
    """Most probable logical class; ties go to the first of I, X, Y, Z."""
    return LogicalClass(int(np.argmax(np.asarray(posterior, dtype=float))))


def _as_letters(error, n):
    if isinstance(error, PauliOperator):
        letters = error.letters()
    else:
        letters = np.asarray(error, dtype=np.uint8)
    if letters.shape != (n,):
        raise ValueError(f"true error must cover {n} qubits, got shape {letters.shape}")
    if np.any(letters > 3):
        raise ValueError("letter codes must lie in 0..3")
    return letters


def _as_priors(priors, n):
    if isinstance(priors, (list, tuple)) and priors and isinstance(priors[0], PriorVector):
        priors = np.stack([p.as_array() for p in priors])
    priors = np.asarray(priors, dtype=float)
    if priors.shape != (n, 4):
        raise ValueError(f"priors must have shape ({n}, 4), got {priors.shape}")
    if np.any(priors < 0.0):
        raise ValueError("priors must be nonnegative")
    if np.any(np.abs(priors.sum(axis=1) - 1.0) > NORMALIZATION_TOL):
        raise ValueError("every prior must sum to 1")
    return priors


class BlockDecoder:
    """
    Lookup tables for exact block decoding with one base code.

    pattern_syndrome / pattern_class : indexed by the base-4 encoding of a
        block's letters (qubit i in bits 2i, 2i+1)
    coset_letters : [syndrome, class, stabilizer element, qubit] letters of
        R_s * L_c * M, the members of the class-c coset under syndrome s
    """

    def __init__(self, base: StabilizerCode):
        if base.k != 1:
            raise ValueError(f"block decoding needs k = 1, got k = {base.k}")
        self.base = base
        self.b = base.n
        self._shifts = 2 * np.arange(self.b, dtype=np.int64)

        n_patterns = 4 ** self.b
        self.pattern_syndrome = np.empty(n_patterns, dtype=np.int64)
        self.pattern_class = np.empty(n_patterns, dtype=np.uint8)
        for idx in range(n_patterns):
            letters = [(idx >> (2 * i)) & 3 for i in range(self.b)]
            s, cls = logical_class(base, PauliOperator.from_letters(letters))
            self.pattern_syndrome[idx] = syndrome_index(s)
            self.pattern_class[idx] = int(cls)

        group = stabilizer_group(base)
        self.coset_letters = np.empty((base.syndrome_count, 4, len(group), self.b), dtype=np.uint8)
        for s, recovery in base.recovery_table.items():
            for cls in LogicalClass:
                shifted = multiply(recovery, logical_operator(base, cls))
                for m, element in enumerate(group):
                    self.coset_letters[syndrome_index(s), int(cls), m] = multiply(shifted, element).letters()

        per_block = 4 * len(group) * self.b
        self._chunk = max(1, _GATHER_BUDGET // per_block)

    def decode_blocks(self, priors, letters):
        """
        Decode many blocks at once.

        Parameters:
        -----------
        priors : numpy.ndarray
            Shape (B, b, 4), per-qubit priors of each block
        letters : numpy.ndarray
            Shape (B, b), true error letters of each block

        Returns:
        --------
        tuple of numpy.ndarray
            Posteriors of shape (B, 4) and effective classes of shape (B,)
        """
        n_blocks = letters.shape[0]
        idx = (letters.astype(np.int64) << self._shifts).sum(axis=1)
        synd = self.pattern_syndrome[idx]
        effective = self.pattern_class[idx]

        posterior = np.empty((n_blocks, 4), dtype=float)
        qubits = np.arange(self.b)[None, None, None, :]
        for start in range(0, n_blocks, self._chunk):
            stop = min(start + self._chunk, n_blocks)
            cosets = self.coset_letters[synd[start:stop]]
            rows = np.arange(stop - start)[:, None, None, None]
            gathered = priors[start:stop][rows, qubits, cosets]
            # class-major, stabilizer-minor
            mass = gathered.prod(axis=3).sum(axis=2)
            total = mass.sum(axis=1)
            if np.any(total <= 0.0):
                bad = start + int(np.argmax(total <= 0.0))
                raise DecoderContradiction(
                    f"block {bad}: priors give zero probability to syndrome {int(synd[bad])}"
                )
            posterior[start:stop] = mass / total[:, None]

        assert np.all(np.abs(posterior.sum(axis=1) - 1.0) < NORMALIZATION_TOL), "posterior not normalized"
        return posterior, effective


def block_decode(base: StabilizerCode, priors, true_error, decoder: Optional[BlockDecoder] = None) -> BlockOutcome:
    """Decode a single block of the base code."""
    decoder = decoder or BlockDecoder(base)
    priors = _as_priors(priors, base.n)
    letters = _as_letters(true_error, base.n)
    posterior, effective = decoder.decode_blocks(priors[None], letters[None])
    return BlockOutcome(LogicalClass(int(effective[0])), posterior[0])


class ConcatenatedDecoder:
    """
    Message-passing decoder for a concatenated code.

    The block tables are built once per instance and reused for every pass
    and every trial.
    """

    def __init__(self, code: ConcatenatedCode):
        self.code = code
        self.blocks = BlockDecoder(code.base)

    def decode(self, priors, true_error) -> DecodeOutcome:
        n, b = self.code.n, self.code.block_size
        priors = _as_priors(priors, n)
        letters = _as_letters(true_error, n)
        for _ in range(self.code.levels):
            priors, letters = self.blocks.decode_blocks(priors.reshape(-1, b, 4), letters.reshape(-1, b))
        return DecodeOutcome(
            chosen=final_decision(priors[0]),
            residual=LogicalClass(int(letters[0])),
            posterior=priors[0],
        )


def decode(code: ConcatenatedCode, priors, true_error) -> DecodeOutcome:
    """
    Decode one concatenated block level by level.

    Parameters:
    -----------
    code : ConcatenatedCode
        Base code and number of levels
    priors : array-like, shape (n, 4), or list of PriorVector
        Per-qubit probabilities of I, X, Y, Z
    true_error : array-like of int
        Letters of the actual error, length n

    Returns:
    --------
    DecodeOutcome
        Chosen class, residual class of the true error and the top-level
        posterior; success means the two classes agree
    """
    return ConcatenatedDecoder(code).decode(priors, true_error)


# ---------------------------------------------------------------------------
# Minimum-weight logical operators of the concatenated code
# ---------------------------------------------------------------------------

def concatenated_min_weight_logical(base: StabilizerCode, levels: int, logical=None):
    """
    Letters of a weight d^L logical operator of the L-level code.

    The top-level minimum-weight logical is expanded recursively: each
    non-identity letter c is replaced by a minimum-weight class-c logical
    of the sub-block below it.
    """
    code = ConcatenatedCode(base, levels)
    representatives = {cls: min_weight_logical(base, cls).letters() for cls in LogicalClass if cls}

    def expand(letters, level):
        if level == 1:
            return letters
        width = base.n ** (level - 1)
        parts = []
        for c in letters:
            if c == 0:
                parts.append(np.zeros(width, dtype=np.uint8))
            else:
                parts.append(expand(representatives[LogicalClass(int(c))], level - 1))
        return np.concatenate(parts)

    top = min_weight_logical(base, logical).letters()
    letters = expand(top, levels)
    assert letters.shape == (code.n,)
    return letters


def uncorrectable_weight(distance: int, levels: int) -> int:
    """Weight of the larger half of a minimum-weight logical of the L-level code."""
    return (distance ** levels + 1) // 2


def split_logical_pattern(base: StabilizerCode, levels: int, logical=None):
    """
    The first ceil(d^L / 2) support positions (in qubit order) of a
    minimum-weight logical. The complementary, lighter part has the same
    syndrome, so ML decoding explains the pattern by it and fails.
    """
    full = concatenated_min_weight_logical(base, levels, logical)
    support = np.flatnonzero(full)
    keep = support[: (len(support) + 1) // 2]
    pattern = np.zeros_like(full)
    pattern[keep] = full[keep]
    return pattern
