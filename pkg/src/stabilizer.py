"""
Stabilizer Code Module

Phaseless Pauli algebra in the binary symplectic picture, the built-in
[[5,1,3]] and [[7,1,3]] codes, and Knill-Laflamme correctability checks for
sets of located/unlocated errors.

Qubit i of a PauliOperator is bit i of its x and z masks and character i of
its letter string (index 0 is the leftmost letter). Letters are coded
I=0, X=1, Y=2, Z=3 everywhere in the toolkit, which makes the phaseless
product of two letters their bitwise XOR.
"""

import itertools
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, Iterable, Iterator, Optional, Tuple

import numpy as np

from .utils import PAULI_LETTERS

DEFAULT_ENUMERATION_CAP = 10 ** 7
MAX_COSET_SEARCH_QUBITS = 12

# (x, z) bit pair -> letter code, indexed by x | (z << 1)
_BITS_TO_LETTER = (0, 1, 3, 2)


class EnumerationCapExceeded(ValueError):
    """Raised when an exhaustive check would enumerate more operators than allowed."""


class LogicalClass(IntEnum):
    I = 0
    X = 1
    Y = 2
    Z = 3

    def compose(self, other):
        return LogicalClass(int(self) ^ int(other))


def _popcount(value):
    return bin(value).count('1')


@dataclass(frozen=True)
class PauliOperator:
    """n-qubit Pauli operator without phase, stored as x and z bit masks."""
    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"bit masks do not fit in {self.n} qubits")

    @classmethod
    def identity(cls, n):
        return cls(n, 0, 0)

    @classmethod
    def from_letters(cls, letters):
        """Build from a sequence of letter codes (0..3)."""
        x = z = 0
        letters = [int(letter) for letter in letters]
        for i, letter in enumerate(letters):
            if not 0 <= letter <= 3:
                raise ValueError(f"letter code must lie in 0..3, got {letter}")
            if letter in (1, 2):
                x |= 1 << i
            if letter in (2, 3):
                z |= 1 << i
        return cls(len(letters), x, z)

    @classmethod
    def from_string(cls, text):
        text = text.strip().upper()
        invalid = set(text) - set(PAULI_LETTERS)
        if invalid or not text:
            raise ValueError(f"Pauli string may only contain I, X, Y, Z: '{text}'")
        return cls.from_letters(PAULI_LETTERS.index(ch) for ch in text)

    @classmethod
    def single(cls, n, qubit, letter):
        letters = [0] * n
        letters[qubit] = int(letter)
        return cls.from_letters(letters)

    @property
    def x_bits(self):
        return tuple((self.x >> i) & 1 for i in range(self.n))

    @property
    def z_bits(self):
        return tuple((self.z >> i) & 1 for i in range(self.n))

    @property
    def weight(self):
        return _popcount(self.x | self.z)

    @property
    def support(self):
        mask = self.x | self.z
        return tuple(i for i in range(self.n) if (mask >> i) & 1)

    def letter(self, qubit):
        return _BITS_TO_LETTER[((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)]

    def letters(self):
        return np.array([self.letter(i) for i in range(self.n)], dtype=np.uint8)

    def sort_key(self):
        return (self.weight, self.x_bits, self.z_bits)

    def __str__(self):
        return ''.join(PAULI_LETTERS[self.letter(i)] for i in range(self.n))


def _check_same_n(a, b):
    if a.n != b.n:
        raise ValueError(f"qubit counts differ: {a.n} vs {b.n}")


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """True iff the symplectic product a.x . b.z + a.z . b.x vanishes mod 2."""
    _check_same_n(a, b)
    return _popcount((a.x & b.z) ^ (a.z & b.x)) % 2 == 0


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Product up to phase; raises ValueError when the qubit counts differ."""
    _check_same_n(a, b)
    return PauliOperator(a.n, a.x ^ b.x, a.z ^ b.z)


def paulis_by_weight(n, max_weight=None) -> Iterator[PauliOperator]:
    """
    All n-qubit Paulis of weight <= max_weight, ordered by weight and then
    lexicographically by (x_bits, z_bits).
    """
    top = n if max_weight is None else max_weight
    for w in range(top + 1):
        layer = []
        for positions in itertools.combinations(range(n), w):
            for letters in itertools.product((1, 2, 3), repeat=w):
                assignment = [0] * n
                for pos, letter in zip(positions, letters):
                    assignment[pos] = letter
                layer.append(PauliOperator.from_letters(assignment))
        layer.sort(key=PauliOperator.sort_key)
        yield from layer


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    """
    [[n, k]] stabilizer code with a syndrome -> recovery lookup table.

    Syndromes are tuples of n - k bits; bit i is 1 iff the error anticommutes
    with generator i.
    """
    name: str
    n: int
    k: int
    generators: Tuple[PauliOperator, ...]
    logical_x: Tuple[PauliOperator, ...]
    logical_z: Tuple[PauliOperator, ...]
    recovery_table: Dict[Tuple[int, ...], PauliOperator] = field(default_factory=dict)

    @classmethod
    def from_strings(cls, name, generators, logical_x, logical_z):
        gens = tuple(PauliOperator.from_string(g) for g in generators)
        n = gens[0].n
        code = cls(
            name=name,
            n=n,
            k=n - len(gens),
            generators=gens,
            logical_x=tuple(PauliOperator.from_string(p) for p in logical_x),
            logical_z=tuple(PauliOperator.from_string(p) for p in logical_z),
        )
        code = code.with_recovery_table(build_recovery_table(code))
        code.validate()
        return code

    def with_recovery_table(self, table):
        return StabilizerCode(
            name=self.name,
            n=self.n,
            k=self.k,
            generators=self.generators,
            logical_x=self.logical_x,
            logical_z=self.logical_z,
            recovery_table=dict(table),
        )

    @property
    def syndrome_count(self):
        return 1 << (self.n - self.k)

    def validate(self):
        """Check every structural invariant; raises ValueError on the first violation."""
        if any(g.n != self.n for g in self.generators + self.logical_x + self.logical_z):
            raise ValueError(f"{self.name}: operators must act on {self.n} qubits")
        if len(self.generators) != self.n - self.k:
            raise ValueError(f"{self.name}: expected {self.n - self.k} generators")
        if len(self.logical_x) != self.k or len(self.logical_z) != self.k:
            raise ValueError(f"{self.name}: expected {self.k} logical X and Z operators")
        for a, b in itertools.combinations(self.generators, 2):
            if not commutes(a, b):
                raise ValueError(f"{self.name}: generators {a} and {b} anticommute")
        logicals = self.logical_x + self.logical_z
        for logical in logicals:
            for g in self.generators:
                if not commutes(logical, g):
                    raise ValueError(f"{self.name}: logical {logical} anticommutes with generator {g}")
        for j, lx in enumerate(self.logical_x):
            for i, lz in enumerate(self.logical_z):
                if commutes(lx, lz) == (i == j):
                    raise ValueError(f"{self.name}: logical X{j} / Z{i} commutation is wrong")
        for a, b in itertools.combinations(self.logical_x, 2):
            if not commutes(a, b):
                raise ValueError(f"{self.name}: logical X operators must commute")
        for a, b in itertools.combinations(self.logical_z, 2):
            if not commutes(a, b):
                raise ValueError(f"{self.name}: logical Z operators must commute")
        if self.recovery_table:
            if len(self.recovery_table) != self.syndrome_count:
                raise ValueError(f"{self.name}: recovery table must cover all {self.syndrome_count} syndromes")
            for s, recovery in self.recovery_table.items():
                if syndrome(self, recovery) != s:
                    raise ValueError(f"{self.name}: recovery {recovery} does not have syndrome {s}")
            if self.recovery_table[(0,) * (self.n - self.k)].weight != 0:
                raise ValueError(f"{self.name}: zero syndrome must map to the identity")
        return self


def syndrome(code: StabilizerCode, e: PauliOperator) -> Tuple[int, ...]:
    """
    Syndrome of an error against the code generators.

    Parameters:
    -----------
    code : StabilizerCode
        Code whose generators are measured
    e : PauliOperator
        Error on code.n qubits

    Returns:
    --------
    tuple of int
        Bit i is 1 when e anticommutes with generator i
    """
    if e.n != code.n:
        raise ValueError(f"error acts on {e.n} qubits, code has {code.n}")
    return tuple(0 if commutes(e, g) else 1 for g in code.generators)


def syndrome_index(bits) -> int:
    """Integer form of a syndrome: bit i of the result is syndrome bit i."""
    return sum(int(b) << i for i, b in enumerate(bits))


def build_recovery_table(code: StabilizerCode):
    """Minimum-weight representative per syndrome, ties broken by (x_bits, z_bits)."""
    table = {}
    for pauli in paulis_by_weight(code.n):
        s = syndrome(code, pauli)
        if s not in table:
            table[s] = pauli
            if len(table) == code.syndrome_count:
                break
    if len(table) != code.syndrome_count:
        raise ValueError(f"{code.name}: generators are not independent")
    return table


def _require_single_logical(code):
    if code.k != 1:
        raise ValueError(f"logical classes are only defined for k = 1, got k = {code.k}")


def classify(code: StabilizerCode, g: PauliOperator) -> LogicalClass:
    """Logical class of an operator commuting with every generator."""
    _require_single_logical(code)
    flips_z = not commutes(g, code.logical_z[0])
    flips_x = not commutes(g, code.logical_x[0])
    if flips_z and flips_x:
        return LogicalClass.Y
    if flips_z:
        return LogicalClass.X
    if flips_x:
        return LogicalClass.Z
    return LogicalClass.I


def logical_class(code: StabilizerCode, e: PauliOperator):
    """Syndrome of e and the logical class of e times its recovery operator."""
    _require_single_logical(code)
    s = syndrome(code, e)
    return s, classify(code, multiply(e, code.recovery_table[s]))


def logical_operator(code: StabilizerCode, cls: LogicalClass) -> PauliOperator:
    _require_single_logical(code)
    cls = LogicalClass(cls)
    if cls is LogicalClass.I:
        return PauliOperator.identity(code.n)
    if cls is LogicalClass.X:
        return code.logical_x[0]
    if cls is LogicalClass.Z:
        return code.logical_z[0]
    return multiply(code.logical_x[0], code.logical_z[0])


def stabilizer_group(code: StabilizerCode):
    """All 2^(n-k) stabilizer elements; element m is the product of generators j with bit j of m set."""
    elements = []
    for m in range(1 << len(code.generators)):
        element = PauliOperator.identity(code.n)
        for j, g in enumerate(code.generators):
            if (m >> j) & 1:
                element = multiply(element, g)
        elements.append(element)
    return elements


# ---------------------------------------------------------------------------
# Error sets and correctability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocatedSet:
    """Sorted set of distinct qubit positions flagged as located."""
    indices: Tuple[int, ...]

    @classmethod
    def of(cls, indices, n):
        values = [int(i) for i in indices]
        if len(set(values)) != len(values):
            raise ValueError(f"located positions must be distinct: {values}")
        if any(not 0 <= i < n for i in values):
            raise ValueError(f"located positions must lie in [0, {n}): {values}")
        return cls(tuple(sorted(values)))

    def __len__(self):
        return len(self.indices)


def error_set_size(n, located_count, w):
    """4^|L| * sum_{i<=w} C(n - |L|, i) 3^i."""
    return 4 ** located_count * sum(math.comb(n - located_count, i) * 3 ** i for i in range(w + 1))


def enumerate_error_set(n, located, w) -> Iterator[PauliOperator]:
    """
    All Paulis arbitrary on the located set and of weight <= w elsewhere.

    Parameters:
    -----------
    n : int
        Number of qubits
    located : LocatedSet or iterable of int
        Located positions
    w : int
        Maximum weight outside the located set
    """
    if not isinstance(located, LocatedSet):
        located = LocatedSet.of(located, n)
    outside = [i for i in range(n) if i not in located.indices]
    if not 0 <= w <= len(outside):
        raise ValueError(f"w must lie in [0, {len(outside)}], got {w}")

    count = 0
    for on_located in itertools.product(range(4), repeat=len(located)):
        base = [0] * n
        for pos, letter in zip(located.indices, on_located):
            base[pos] = letter
        for j in range(w + 1):
            for positions in itertools.combinations(outside, j):
                for letters in itertools.product((1, 2, 3), repeat=j):
                    assignment = list(base)
                    for pos, letter in zip(positions, letters):
                        assignment[pos] = letter
                    count += 1
                    yield PauliOperator.from_letters(assignment)
    assert count == error_set_size(n, len(located), w), "error set cardinality mismatch"


def is_correctable_set(code: StabilizerCode, errors: Iterable[PauliOperator]) -> bool:
    """
    Knill-Laflamme check for a stabilizer code.

    The set is correctable iff no product of two members is a nontrivial
    logical operator, i.e. iff no two members share a syndrome while lying
    in different logical classes.
    """
    seen = {}
    for e in errors:
        if e.n != code.n:
            raise ValueError(f"error acts on {e.n} qubits, code has {code.n}")
        s, cls = logical_class(code, e)
        previous = seen.setdefault(s, cls)
        if previous is not cls:
            return False
    return True


def is_correctable_set_pairwise(code: StabilizerCode, errors: Iterable[PauliOperator]) -> bool:
    """Direct pairwise form of is_correctable_set, quadratic in the set size."""
    errors = list(errors)
    zero = (0,) * (code.n - code.k)
    for i, a in enumerate(errors):
        for b in errors[i:]:
            s, cls = logical_class(code, multiply(a, b))
            if s == zero and cls is not LogicalClass.I:
                return False
    return True


@dataclass(frozen=True)
class EquivalenceReport:
    code_name: str
    t: int
    m: int
    unlocated_correctable: bool
    located_correctable: bool
    operators_checked: int

    @property
    def equivalent(self):
        return self.unlocated_correctable == self.located_correctable


def located_check_size(n, t, m):
    """Operators enumerated by check_located_equivalence for (t, m)."""
    return error_set_size(n, 0, t) + math.comb(n, 2 * m) * error_set_size(n, 2 * m, t - m)


def check_located_equivalence(code: StabilizerCode, t: int, m: int,
                              cap: int = DEFAULT_ENUMERATION_CAP) -> EquivalenceReport:
    """
    Compare correctability of all weight-t unlocated errors with that of every
    combination of 2m located and t - m unlocated errors.

    Raises EnumerationCapExceeded rather than sampling when the exhaustive
    enumeration is larger than ``cap``.
    """
    n = code.n
    if not 0 <= m <= t:
        raise ValueError(f"need 0 <= m <= t, got t={t}, m={m}")
    if 2 * m > n:
        raise ValueError(f"2m = {2 * m} located errors exceed n = {n}")
    if t > n or t - m > n - 2 * m:
        raise ValueError(f"(t={t}, m={m}) does not fit in n = {n} qubits")
    size = located_check_size(n, t, m)
    if size > cap:
        raise EnumerationCapExceeded(
            f"{code.name}: (t={t}, m={m}) needs {size} operators, cap is {cap}"
        )

    unlocated = is_correctable_set(code, enumerate_error_set(n, LocatedSet(()), t))
    located = all(
        is_correctable_set(code, enumerate_error_set(n, LocatedSet(positions), t - m))
        for positions in itertools.combinations(range(n), 2 * m)
    )
    return EquivalenceReport(code.name, t, m, unlocated, located, size)


def verify_located_equivalence(code: StabilizerCode, t: int, m: int,
                               cap: int = DEFAULT_ENUMERATION_CAP) -> bool:
    """True iff both sides of the located/unlocated equivalence agree."""
    return check_located_equivalence(code, t, m, cap).equivalent


# ---------------------------------------------------------------------------
# Built-in codes
# ---------------------------------------------------------------------------

def five_qubit_code() -> StabilizerCode:
    """The perfect [[5,1,3]] code (cyclic XZZXI generators)."""
    return StabilizerCode.from_strings(
        'five',
        ['XZZXI', 'IXZZX', 'XIXZZ', 'ZXIXZ'],
        ['XXXXX'],
        ['ZZZZZ'],
    )


def steane_code() -> StabilizerCode:
    """The [[7,1,3]] CSS code built from the [7,4,3] Hamming code."""
    return StabilizerCode.from_strings(
        'steane',
        ['IIIXXXX', 'IXXIIXX', 'XIXIXIX', 'IIIZZZZ', 'IZZIIZZ', 'ZIZIZIZ'],
        ['XXXXXXX'],
        ['ZZZZZZZ'],
    )


BUILTIN_CODES = {
    'five': five_qubit_code,
    'steane': steane_code,
}


def get_code(name) -> StabilizerCode:
    try:
        return BUILTIN_CODES[name]()
    except KeyError:
        raise ValueError(f"unknown code '{name}', choose from {sorted(BUILTIN_CODES)}")


def min_weight_logical(code: StabilizerCode, logical: Optional[LogicalClass] = None) -> PauliOperator:
    """
    Minimum-weight Pauli with zero syndrome and a nontrivial logical class
    (or exactly the class ``logical`` when given).
    """
    _require_single_logical(code)
    if code.n > MAX_COSET_SEARCH_QUBITS:
        raise ValueError(f"coset search is limited to n <= {MAX_COSET_SEARCH_QUBITS}, got {code.n}")
    zero = (0,) * (code.n - code.k)
    for pauli in paulis_by_weight(code.n):
        if pauli.weight == 0 or syndrome(code, pauli) != zero:
            continue
        cls = classify(code, pauli)
        if cls is LogicalClass.I:
            continue
        if logical is None or cls is LogicalClass(logical):
            return pauli
    raise ValueError(f"{code.name}: no logical operator of class {logical} found")


def code_distance(code: StabilizerCode) -> int:
    return min_weight_logical(code).weight


def code_to_dict(code: StabilizerCode):
    """JSON-ready form: generators, logicals and the recovery table as letter strings."""
    return {
        'name': code.name,
        'n': code.n,
        'k': code.k,
        'generators': [str(g) for g in code.generators],
        'logical_x': [str(p) for p in code.logical_x],
        'logical_z': [str(p) for p in code.logical_z],
        'recovery_table': {
            ''.join(str(b) for b in s): str(code.recovery_table[s])
            for s in sorted(code.recovery_table, key=syndrome_index)
        },
    }


def code_from_dict(data) -> StabilizerCode:
    code = StabilizerCode(
        name=data['name'],
        n=int(data['n']),
        k=int(data['k']),
        generators=tuple(PauliOperator.from_string(g) for g in data['generators']),
        logical_x=tuple(PauliOperator.from_string(p) for p in data['logical_x']),
        logical_z=tuple(PauliOperator.from_string(p) for p in data['logical_z']),
    )
    table = {
        tuple(int(b) for b in key): PauliOperator.from_string(value)
        for key, value in data['recovery_table'].items()
    }
    return code.with_recovery_table(table).validate()
