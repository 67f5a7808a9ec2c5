"""Pauli strings, real-weighted Pauli sums and coefficient-space norms.

Strings are written left to right with position 0 as qubit 0. The integer
encoding is base 4 with ``I=0, X=1, Y=2, Z=3`` and qubit 0 as the most
significant digit, so lexicographic order of strings matches numeric order.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

import numpy as np

from .exceptions import InvalidLetter, LengthMismatch, QubitCountMismatch

LETTERS = "IXYZ"
_DIGIT = {letter: i for i, letter in enumerate(LETTERS)}

# byte -> base-4 digit lookup for vectorised encoding; 255 marks an invalid byte
_BYTE_TABLE = np.full(256, 255, dtype=np.uint8)
for _letter, _digit in _DIGIT.items():
    _BYTE_TABLE[ord(_letter)] = _digit

DEFAULT_TOL = 1e-12


@dataclass(frozen=True, order=True)
class PauliString:
    letters: str

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def code(self) -> int:
        return encode(self.letters)

    @classmethod
    def from_code(cls, code: int, n: int) -> "PauliString":
        return cls(decode(code, n))

    def is_identity(self) -> bool:
        return self.letters.strip("I") == ""

    def __str__(self) -> str:
        return self.letters


def parse_pauli_string(text: str, n: int) -> PauliString:
    """Validate ``text`` as an ``n``-qubit Pauli string.

    Raises
    ------
    LengthMismatch
        If ``len(text) != n``.
    InvalidLetter
        If a character is outside ``{I, X, Y, Z}``; the first offending
        position is reported.
    """
    if len(text) != n:
        raise LengthMismatch(f"Pauli string {text!r} has length {len(text)}, expected {n}")
    for pos, ch in enumerate(text):
        if ch not in _DIGIT:
            raise InvalidLetter(text, pos)
    return PauliString(text)


def encode(letters: str) -> int:
    code = 0
    for pos, ch in enumerate(letters):
        try:
            code = 4 * code + _DIGIT[ch]
        except KeyError:
            raise InvalidLetter(letters, pos) from None
    return code


def decode(code: int, n: int) -> str:
    if code < 0 or code >= 4**n:
        raise ValueError(f"code {code} out of range for {n} qubits")
    out = []
    for _ in range(n):
        code, digit = divmod(code, 4)
        out.append(LETTERS[digit])
    return "".join(reversed(out))


def encode_many(strings: Iterable[str], n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Vectorised base-4 encoding of ``s[start:stop]`` for every string.

    Strings must already be validated. Returns int64 codes; callers keep
    ``stop - start <= 31`` so that codes fit.
    """
    stop = n if stop is None else stop
    strings = list(strings)
    width = stop - start
    if not strings:
        return np.zeros(0, dtype=np.int64)
    if width == 0:
        return np.zeros(len(strings), dtype=np.int64)
    raw = np.frombuffer("".join(strings).encode("ascii"), dtype=np.uint8)
    digits = _BYTE_TABLE[raw.reshape(len(strings), n)[:, start:stop]].astype(np.int64)
    weights = 4 ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return digits @ weights


def decode_many(codes: np.ndarray, n: int) -> list[str]:
    codes = np.asarray(codes, dtype=np.int64)
    if n == 0:
        return [""] * len(codes)
    shifts = 2 * np.arange(n - 1, -1, -1, dtype=np.int64)
    digits = (codes[:, None] >> shifts[None, :]) & 3
    letters = np.frombuffer(LETTERS.encode("ascii"), dtype=np.uint8)[digits]
    return [row.tobytes().decode("ascii") for row in letters]


def _as_real(value, key) -> float:
    if isinstance(value, numbers.Complex) and not isinstance(value, numbers.Real):
        if value.imag != 0:
            raise TypeError(f"complex coefficient {value!r} for {key!r}; coefficients must be real")
        value = value.real
    return float(value)


class PauliSum:
    """Immutable map from ``n``-qubit Pauli strings to real coefficients.

    Duplicate strings passed to the constructor accumulate by addition and
    entries that end up exactly ``0.0`` are removed.

    Parameters
    ----------
    n : int
        Number of qubits.
    terms : mapping or iterable of ``(string, coefficient)`` pairs
    """

    __slots__ = ("_n", "_terms")

    def __init__(self, n: int, terms: Mapping[str, float] | Iterable[tuple[str, float]] = ()):
        if n < 1:
            raise ValueError(f"qubit count must be positive, got {n}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[str, float] = {}
        for key, value in items:
            key = str(key)
            parse_pauli_string(key, n)
            acc[key] = acc.get(key, 0.0) + _as_real(value, key)
        self._n = n
        self._terms = MappingProxyType({k: v for k, v in sorted(acc.items()) if v != 0.0})

    @classmethod
    def _trusted(cls, n: int, terms: dict[str, float]) -> "PauliSum":
        obj = cls.__new__(cls)
        obj._n = n
        obj._terms = MappingProxyType(dict(sorted((k, v) for k, v in terms.items() if v != 0.0)))
        return obj

    @classmethod
    def identity(cls, n: int, coeff: float = 1.0) -> "PauliSum":
        return cls(n, {"I" * n: coeff})

    @property
    def n(self) -> int:
        return self._n

    @property
    def qubits(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[str, float]:
        return self._terms

    def items(self):
        return self._terms.items()

    def coeff(self, string: str) -> float:
        return self._terms.get(string, 0.0)

    def coefficients(self) -> np.ndarray:
        return np.fromiter(self._terms.values(), dtype=np.float64, count=len(self._terms))

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[str]:
        return iter(self._terms)

    def __contains__(self, string) -> bool:
        return string in self._terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self._n == other._n and dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash((self._n, tuple(self._terms.items())))

    def __repr__(self) -> str:
        shown = ", ".join(f"{k}: {v:.6g}" for k, v in list(self._terms.items())[:6])
        more = ", ..." if len(self._terms) > 6 else ""
        return f"PauliSum(n={self._n}, {{{shown}{more}}})"

    def __add__(self, other: "PauliSum") -> "PauliSum":
        _check_same_n(self, other)
        acc = dict(self._terms)
        for k, v in other.items():
            acc[k] = acc.get(k, 0.0) + v
        return PauliSum._trusted(self._n, acc)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return subtract(self, other)

    def __neg__(self) -> "PauliSum":
        return self.scale(-1.0)

    def scale(self, factor: float) -> "PauliSum":
        return PauliSum._trusted(self._n, {k: factor * v for k, v in self._terms.items()})

    def __mul__(self, factor):
        if isinstance(factor, numbers.Real):
            return self.scale(float(factor))
        return NotImplemented

    __rmul__ = __mul__


def _check_same_n(a: PauliSum, b: PauliSum) -> None:
    if a.n != b.n:
        raise QubitCountMismatch(f"qubit counts differ: {a.n} vs {b.n}")


def subtract(a: PauliSum, b: PauliSum) -> PauliSum:
    """Termwise ``a - b``; exact zeros are dropped."""
    _check_same_n(a, b)
    acc = dict(a.terms)
    for k, v in b.items():
        acc[k] = acc.get(k, 0.0) - v
    return PauliSum._trusted(a.n, acc)


@dataclass(frozen=True)
class TracelessSplit:
    identity_coeff: float
    traceless: PauliSum

    @property
    def n(self) -> int:
        return self.traceless.n

    def reassemble(self) -> PauliSum:
        return self.traceless + PauliSum.identity(self.n, self.identity_coeff)


def split_identity(h: PauliSum) -> TracelessSplit:
    ident = "I" * h.n
    rest = {k: v for k, v in h.items() if k != ident}
    return TracelessSplit(h.coeff(ident), PauliSum._trusted(h.n, rest))


def filter_coefficients(h: PauliSum, tol: float = DEFAULT_TOL) -> PauliSum:
    """Keep exactly the terms with ``|c| > tol``."""
    if tol < 0:
        raise ValueError(f"tolerance must be nonnegative, got {tol}")
    return PauliSum._trusted(h.n, {k: v for k, v in h.items() if abs(v) > tol})


def traceless_frobenius_norm(split: TracelessSplit | PauliSum) -> float:
    """Operator Frobenius norm of the traceless part, ``sqrt(2**n * sum c_p**2)``.

    A plain :class:`PauliSum` is split first.
    """
    if isinstance(split, PauliSum):
        split = split_identity(split)
    c = split.traceless.coefficients()
    return math.sqrt(2.0**split.n * float(np.dot(c, c)))
