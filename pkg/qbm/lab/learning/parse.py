"""Read and write sample, distribution and moment files."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Union

import numpy as np
import polars as pl

from qbm.lab.quantum.density import MomentVector
from qbm.lab.quantum.operators import HamiltonianSpec, PauliTerm, SpecError
from qbm.lab.quantum.parse import ParseError

from .data import DataError, EmpiricalDistribution, from_samples, from_table

log = logging.getLogger(__name__)

SPIN_TOKENS = {"+1": 1, "1": 1, "-1": -1}
ZERO_ONE_TOKENS = {"1": 1, "0": -1}

MOMENTS_SCHEMA = {
    "kind": pl.String,
    "i": pl.Int64,
    "j": pl.Int64,
    "axis": pl.String,
    "value": pl.Float64,
}


def _content_lines(fp: Path):
    with open(fp, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def _spins(tokens: list[str], mapping: dict, fp: Path, lineno: int) -> list[int]:
    try:
        return [mapping[token] for token in tokens]
    except KeyError as e:
        msg = f"invalid spin value {e.args[0]!r} (expected one of {sorted(mapping)})"
        raise ParseError(msg, path=fp, line=lineno) from None


def read_samples(fp: Union[Path, str], zero_one: bool = False) -> EmpiricalDistribution:
    """Read a sample file into its empirical distribution.

    Parameters
    ----------
    fp : Path or str
        One sample per line, n whitespace-separated spins; `#` starts a comment.
    zero_one : bool, optional
        Read spins as 1/0 with 0 mapped to -1 (default: +1/-1).

    Returns
    -------
    EmpiricalDistribution
        Empirical distribution of the samples.
    """
    fp = Path(fp)
    mapping = ZERO_ONE_TOKENS if zero_one else SPIN_TOKENS
    samples = []
    for lineno, tokens in _content_lines(fp):
        if samples and len(tokens) != len(samples[0]):
            msg = f"sample has {len(tokens)} spins, previous samples have {len(samples[0])}"
            raise ParseError(msg, path=fp, line=lineno)
        samples.append(_spins(tokens, mapping, fp, lineno))
    if not samples:
        raise ParseError("no samples", path=fp)
    q = from_samples(np.array(samples, dtype=np.int8))
    msg = f"Read {len(samples)} samples ({len(q)} distinct) on {q.n} spins from {fp.name}"
    log.info(msg)
    return q


def read_distribution(fp: Union[Path, str]) -> EmpiricalDistribution:
    """Read lines `<config as ±1 tokens> <probability>` into an exact distribution."""
    fp = Path(fp)
    table = {}
    n = None
    for lineno, tokens in _content_lines(fp):
        if len(tokens) < 2:
            raise ParseError("expected spins followed by a probability", path=fp, line=lineno)
        spins = tuple(_spins(tokens[:-1], SPIN_TOKENS, fp, lineno))
        if n is not None and len(spins) != n:
            raise ParseError(f"configuration has {len(spins)} spins, expected {n}", path=fp, line=lineno)
        n = len(spins)
        try:
            probability = float(tokens[-1])
        except ValueError:
            raise ParseError(f"invalid probability {tokens[-1]!r}", path=fp, line=lineno) from None
        if not math.isfinite(probability) or probability < 0:
            raise ParseError(f"invalid probability {probability}", path=fp, line=lineno)
        if spins in table:
            raise ParseError(f"duplicate configuration {tokens[:-1]}", path=fp, line=lineno)
        table[spins] = probability
    if not table:
        raise ParseError("no configurations", path=fp)
    try:
        return from_table(n, table)
    except DataError as e:
        raise ParseError(str(e), path=fp) from e


def write_distribution(q: EmpiricalDistribution, fp: Union[Path, str]):
    """Write the support of `q`, one `<±1 tokens> <probability>` line per configuration."""
    fp = Path(fp)
    fp.parent.mkdir(parents=True, exist_ok=True)
    spins = 1 - 2 * ((q.indices[:, None] >> np.arange(q.n)) & 1)
    with open(fp, "w", encoding="utf-8") as f:
        for row, p in zip(spins, q.probabilities):
            f.write(" ".join(f"{s:+d}" for s in row) + f" {p:.17g}\n")


def write_moments(spec: HamiltonianSpec, moments: MomentVector, fp: Union[Path, str], entropy: float | None = None):
    """Write moments as CSV `kind,i,j,axis,value`, in the term order of `spec`.

    A final row of kind `entropy` records the von Neumann entropy of the target when given.
    """
    fp = Path(fp)
    fp.parent.mkdir(parents=True, exist_ok=True)
    frame = MomentVector(tuple(spec.keys), moments.align(spec)).to_frame()
    if entropy is not None:
        row = pl.DataFrame(
            [{"kind": "entropy", "i": None, "j": None, "axis": None, "value": float(entropy)}], schema=MOMENTS_SCHEMA
        )
        frame = pl.concat([frame, row])
    frame.write_csv(fp, float_precision=17)


def read_moments(fp: Union[Path, str], spec: HamiltonianSpec) -> tuple[MomentVector, float | None]:
    """Read a moment CSV aligned to the term order of `spec`.

    Returns
    -------
    MomentVector
        Target moments for every term of `spec`.
    float or None
        Entropy row value if present.
    """
    fp = Path(fp)
    try:
        frame = pl.read_csv(fp, schema_overrides=MOMENTS_SCHEMA)
    except (pl.exceptions.PolarsError, OSError) as e:
        raise ParseError(f"cannot read moment file: {e}", path=fp) from e
    missing = set(MOMENTS_SCHEMA) - set(frame.columns)
    if missing:
        raise ParseError(f"missing columns {sorted(missing)}", path=fp)

    entropy = None
    keys, values = [], []
    # header is line 1
    for lineno, row in enumerate(frame.iter_rows(named=True), start=2):
        if row["value"] is None or not math.isfinite(row["value"]):
            raise ParseError("missing or non-finite value", path=fp, line=lineno)
        if row["kind"] == "entropy":
            entropy = row["value"]
            continue
        try:
            if row["kind"] == "field":
                term = PauliTerm.field(row["i"], row["axis"])
            elif row["kind"] == "coupling":
                term = PauliTerm.coupling(row["i"], row["j"], row["axis"])
            else:
                raise ParseError(f"unknown kind {row['kind']!r}", path=fp, line=lineno)
        except (SpecError, TypeError) as e:
            raise ParseError(str(e), path=fp, line=lineno) from e
        if abs(row["value"]) > 1 + 1e-9:
            raise ParseError(f"moment {row['value']} outside [-1, 1]", path=fp, line=lineno)
        keys.append(term.key)
        values.append(row["value"])
    moments = MomentVector(tuple(keys), np.clip(values, -1.0, 1.0))
    try:
        aligned = MomentVector(tuple(spec.keys), moments.align(spec))
    except ValueError as e:
        raise ParseError(str(e), path=fp) from e
    msg = f"Read {len(keys)} moments from {fp.name}"
    log.debug(msg)
    return aligned, entropy
