"""Plain-text Hamiltonian files and the system record that carries them.

Format::

    # qubits: 3
    # anything after '#' is a comment
    XZI  0.25
    IIZ -1.5e-2
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .exceptions import EmptySystem, InvalidLetter, LengthMismatch, ParseError
from .pauli import DEFAULT_TOL, PauliSum, filter_coefficients, parse_pauli_string

_HEADER = re.compile(r"#\s*qubits\s*:\s*(\S+)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class SystemRecord:
    system_id: str
    n: int
    source: str  # "file" or "generator"
    sum: PauliSum
    meta: dict[str, Any] = field(default_factory=dict, compare=False)


def parse_hamiltonian(text: str, tol: float = DEFAULT_TOL, path: str | None = None) -> tuple[PauliSum, dict]:
    """Parse the text format; returns the filtered sum and ingestion metadata."""
    n = None
    acc: dict[str, float] = {}
    lines = dupes = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if n is None:
            m = _HEADER.match(stripped)
            if m:
                try:
                    n = int(m.group(1))
                except ValueError:
                    raise ParseError(lineno, f"qubit count {m.group(1)!r} is not an integer", path) from None
                if n < 1:
                    raise ParseError(lineno, f"qubit count must be positive, got {n}", path)
                continue
        body = stripped.split("#", 1)[0].strip()
        if not body:
            continue
        if n is None:
            raise ParseError(lineno, "term before the '# qubits: <n>' header", path)
        parts = body.split()
        if len(parts) != 2:
            raise ParseError(lineno, f"expected '<PAULI_STRING> <coefficient>', got {body!r}", path)
        word, num = parts
        try:
            parse_pauli_string(word, n)
        except (InvalidLetter, LengthMismatch) as exc:
            raise ParseError(lineno, str(exc), path) from None
        try:
            value = float(num)
        except ValueError:
            raise ParseError(lineno, f"coefficient {num!r} is not a real number", path) from None
        if not math.isfinite(value):
            raise ParseError(lineno, f"coefficient {num!r} is not finite", path)
        lines += 1
        if word in acc:
            dupes += 1
        acc[word] = acc.get(word, 0.0) + value
    if n is None:
        raise ParseError(1, "missing '# qubits: <n>' header", path)
    raw_sum = PauliSum(n, acc)
    h = filter_coefficients(raw_sum, tol)
    if not len(h):
        raise EmptySystem(f"no terms above tol={tol}" + (f" in {path}" if path else ""))
    meta = {"term_lines": lines, "accumulated_duplicates": dupes,
            "filtered_terms": len(raw_sum) - len(h), "tol": tol}
    return h, meta


def read_hamiltonian(path: str | Path, tol: float = DEFAULT_TOL, system_id: str | None = None) -> SystemRecord:
    path = Path(path)
    h, meta = parse_hamiltonian(path.read_text(), tol, str(path))
    meta["path"] = str(path)
    return SystemRecord(system_id or path.stem, h.n, "file", h, meta)


def format_hamiltonian(h: PauliSum) -> str:
    lines = [f"# qubits: {h.n}"]
    lines += [f"{s} {c!r}" for s, c in h.items()]
    return "\n".join(lines) + "\n"


def write_hamiltonian(path: str | Path, h: PauliSum) -> None:
    """Write ``h`` with coefficients in round-trippable ``repr`` form."""
    Path(path).write_text(format_hamiltonian(h))
