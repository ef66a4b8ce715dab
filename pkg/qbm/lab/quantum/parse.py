"""Read and write Hamiltonian spec files.

One term per line, sites 0-based, `#` starts a comment:

    spins 3
    field 0 x 0.5
    coupling 0 1 z -1.0

The optional `spins <n>` header fixes the spin count, otherwise n is the largest site
plus one.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Union

from .operators import AXES, HamiltonianSpec, PauliTerm, SpecError

log = logging.getLogger(__name__)


class ParseError(ValueError):
    def __init__(self, msg: str, path: Union[Path, str, None] = None, line: int | None = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location += f"{path}:"
        if line is not None:
            location += f"{line}:"
        super().__init__(f"{location} {msg}" if location else msg)


def _parse_site(token: str) -> int:
    site = int(token)
    if site < 0:
        raise ValueError(f"negative site {site}")
    return site


def _parse_axis(token: str) -> str:
    if token not in AXES:
        raise ValueError(f"unknown axis '{token}'")
    return token


def parse_spec(lines: Iterable[str], path: Union[Path, str, None] = None) -> HamiltonianSpec:
    """Parse spec file lines into a HamiltonianSpec."""
    n = None
    terms = []
    seen = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0].lower()
        try:
            if keyword == "spins" and len(tokens) == 2:
                if n is not None or terms:
                    raise ValueError("'spins' header must come first and only once")
                n = int(tokens[1])
                if n < 1:
                    raise ValueError(f"spin count must be positive, got {n}")
            elif keyword == "field" and len(tokens) == 4:
                terms.append(PauliTerm.field(_parse_site(tokens[1]), _parse_axis(tokens[2]), float(tokens[3])))
            elif keyword == "coupling" and len(tokens) == 5:
                i, j = _parse_site(tokens[1]), _parse_site(tokens[2])
                terms.append(PauliTerm.coupling(i, j, _parse_axis(tokens[3]), float(tokens[4])))
            else:
                raise ValueError(f"cannot parse '{line}'")
        except (ValueError, SpecError) as e:
            raise ParseError(str(e), path=path, line=lineno) from e
        if keyword != "spins":
            key = terms[-1].key
            if key in seen:
                sites = " ".join(str(i) for i in key[1])
                msg = f"duplicate term {key[0]} {sites} {key[2]} (first on line {seen[key]})"
                raise ParseError(msg, path=path, line=lineno)
            seen[key] = lineno
        if n is not None and terms and max(terms[-1].sites) >= n:
            msg = f"site {max(terms[-1].sites)} out of range for {n} spins"
            raise ParseError(msg, path=path, line=lineno)

    if n is None:
        if not terms:
            raise ParseError("no terms and no 'spins' header", path=path)
        n = max(max(term.sites) for term in terms) + 1
    try:
        return HamiltonianSpec(n, tuple(terms))
    except SpecError as e:
        raise ParseError(str(e), path=path) from e


def read_spec(fp: Union[Path, str]) -> HamiltonianSpec:
    """Read a Hamiltonian spec file.

    Parameters
    ----------
    fp : Path or str
        Path to the spec file.

    Returns
    -------
    HamiltonianSpec
        Terms in file order.

    Raises
    ------
    ParseError
        If a line is malformed; the message cites the line number.
    """
    fp = Path(fp)
    with open(fp, encoding="utf-8") as f:
        spec = parse_spec(f, path=fp)
    msg = f"Read {len(spec.terms)} terms on {spec.n} spins from {fp.name}"
    log.debug(msg)
    return spec


def format_spec(spec: HamiltonianSpec) -> str:
    lines = [f"spins {spec.n}"]
    for term in spec.terms:
        sites = " ".join(str(i) for i in term.sites)
        lines.append(f"{term.kind} {sites} {term.axis} {term.weight:.17g}")
    return "\n".join(lines) + "\n"


def write_spec(spec: HamiltonianSpec, fp: Union[Path, str]):
    """Write a spec file that `read_spec` reads back exactly (weights with 17 significant digits)."""
    fp = Path(fp)
    fp.parent.mkdir(parents=True, exist_ok=True)
    with open(fp, "w", encoding="utf-8") as f:
        f.write(format_spec(spec))
