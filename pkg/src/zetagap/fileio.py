"""Text file formats: chains, mixtures, numeric matrices, key=value configs.

All writers are atomic (temp file in the target directory, then rename), so a
crashed run never leaves a half-written artifact behind.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .chains import FiniteChain
from .errors import ParseError
from .mixtures import MixtureComponent, MixtureSpec


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _numbered_lines(text: str):
    return [(i + 1, line.strip()) for i, line in enumerate(text.splitlines()) if line.strip()]


def _floats(tokens_line: str, lineno: int) -> list[float]:
    try:
        return [float(t) for t in tokens_line.split()]
    except ValueError as exc:
        raise ParseError(f"line {lineno}: non-numeric token ({exc})") from None


def parse_chain_text(text: str) -> FiniteChain:
    """Chain file: line 1 = state count d, then d rows of the transition
    matrix, then an optional stationary-law line."""
    lines = _numbered_lines(text)
    if not lines:
        raise ParseError("line 1: empty chain file")
    lineno, head = lines[0]
    try:
        d = int(head.split()[0])
    except ValueError:
        raise ParseError(f"line {lineno}: expected the state count, got {head!r}") from None
    if len(lines) < 1 + d:
        raise ParseError(f"line {lines[-1][0]}: expected {d} matrix rows, found {len(lines) - 1}")
    rows = []
    for lineno, line in lines[1 : 1 + d]:
        vals = _floats(line, lineno)
        if len(vals) != d:
            raise ParseError(f"line {lineno}: expected {d} entries, found {len(vals)}")
        rows.append(vals)
    pi = None
    rest = lines[1 + d :]
    if len(rest) > 1:
        raise ParseError(f"line {rest[1][0]}: unexpected trailing content")
    if rest:
        lineno, line = rest[0]
        pi = _floats(line, lineno)
        if len(pi) != d:
            raise ParseError(f"line {lineno}: stationary law needs {d} entries, found {len(pi)}")
    return FiniteChain(np.array(rows), None if pi is None else np.array(pi))


def load_chain(path) -> FiniteChain:
    return parse_chain_text(Path(path).read_text())


def format_chain(chain: FiniteChain, include_pi: bool = True) -> str:
    lines = [str(chain.d)]
    lines += [" ".join(repr(float(v)) for v in row) for row in chain.P]
    if include_pi:
        lines.append(" ".join(repr(float(v)) for v in chain.pi))
    return "\n".join(lines) + "\n"


def save_chain(chain: FiniteChain, path) -> None:
    atomic_write_text(path, format_chain(chain))


def parse_mixture_text(text: str) -> MixtureSpec:
    """Mixture file: header "<components> <states>", then per component a
    weight line, a law line, the kernel rows, and an optional 0/1 mask line
    (recognized by its token count: a weight line has a single token)."""
    lines = _numbered_lines(text)
    if not lines:
        raise ParseError("line 1: empty mixture file")
    lineno, head = lines[0]
    toks = head.split()
    if len(toks) != 2:
        raise ParseError(f"line {lineno}: header must be '<components> <states>'")
    try:
        n_comp, d = int(toks[0]), int(toks[1])
    except ValueError:
        raise ParseError(f"line {lineno}: non-integer header {head!r}") from None
    if d < 2:
        raise ParseError(f"line {lineno}: mixtures need at least 2 states")
    pos = 1
    comps = []
    for c in range(n_comp):
        if pos >= len(lines):
            raise ParseError(f"line {lines[-1][0]}: component {c} missing")
        lineno, line = lines[pos]
        weight = _floats(line, lineno)
        if len(weight) != 1:
            raise ParseError(f"line {lineno}: component weight must be a single number")
        pos += 1
        if pos >= len(lines):
            raise ParseError(f"line {lines[-1][0]}: component {c} law missing")
        lineno, line = lines[pos]
        dist = _floats(line, lineno)
        if len(dist) != d:
            raise ParseError(f"line {lineno}: component law needs {d} entries")
        pos += 1
        rows = []
        for r in range(d):
            if pos >= len(lines):
                raise ParseError(f"line {lines[-1][0]}: kernel row {r} of component {c} missing")
            lineno, line = lines[pos]
            vals = _floats(line, lineno)
            if len(vals) != d:
                raise ParseError(f"line {lineno}: kernel row needs {d} entries")
            rows.append(vals)
            pos += 1
        mask = None
        if pos < len(lines) and len(lines[pos][1].split()) == d:
            lineno, line = lines[pos]
            vals = _floats(line, lineno)
            if any(v not in (0.0, 1.0) for v in vals):
                raise ParseError(f"line {lineno}: mask entries must be 0 or 1")
            mask = np.array(vals, dtype=bool)
            pos += 1
        comps.append(MixtureComponent(weight[0], np.array(dist), np.array(rows), mask))
    if pos != len(lines):
        raise ParseError(f"line {lines[pos][0]}: unexpected trailing content")
    return MixtureSpec(tuple(comps))


def load_mixture(path) -> MixtureSpec:
    return parse_mixture_text(Path(path).read_text())


def save_matrix(array, path) -> None:
    """Whitespace-delimited numeric text, one matrix row (or vector entry) per line."""
    array = np.atleast_2d(np.asarray(array, dtype=float))
    text = "\n".join(" ".join(repr(float(v)) for v in row) for row in array)
    atomic_write_text(path, text + "\n")


def load_matrix(path) -> np.ndarray:
    rows = []
    for lineno, line in _numbered_lines(Path(path).read_text()):
        rows.append(_floats(line, lineno))
        if len(rows[-1]) != len(rows[0]):
            raise ParseError(f"line {lineno}: ragged row")
    return np.array(rows)


def load_vector(path) -> np.ndarray:
    return load_matrix(path).ravel()


def parse_kv_text(text: str) -> dict[str, str]:
    """Flat key=value config; later duplicates win; '#' starts a comment line."""
    out: dict[str, str] = {}
    for lineno, line in _numbered_lines(text):
        if line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def load_kv(path) -> dict[str, str]:
    return parse_kv_text(Path(path).read_text())


def format_kv(pairs: dict) -> str:
    return "\n".join(f"{k}={v}" for k, v in pairs.items()) + "\n"


def save_kv(pairs: dict, path) -> None:
    atomic_write_text(path, format_kv(pairs))
