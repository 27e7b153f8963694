"""
Plain-text file formats.

Sequences:      one sequence per line, chips as 1, -1, i, -i separated by commas
                (pair files hold x then y; set files hold D lines)
Paraunitary:    one matrix row per line, entries separated by ';'
Designs:        'D N M' (M is '-' when no order is declared), then P and Q as
                space-separated lines; commas are accepted on read and the
                design name is the file stem
Maps:           CSV with 'k' in the corner, theta along the first row, delay
                bins down the first column, dB values to 6 decimals
                PGM (P5, 8 bit), delay rows by theta columns
Spectra:        CSV with columns theta, re, im, db
Scenes:         one target per line 'delay_bin theta_rad power_db', '#' comments

Every writer is deterministic: identical inputs give byte-identical files.
"""

from __future__ import annotations
import logging
import math
import re
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from ..config import get_settings
from ..errors import InvalidArgumentError, VerificationError
from ..models.ambiguity import AmbiguityMap
from ..models.designs import Design, Number
from ..models.scene import PointTarget
from ..models.waveforms import ComplementarySet, GolayPair, ParaunitaryMatrix, UnimodularSeq

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Waveform = Union[GolayPair, ComplementarySet, ParaunitaryMatrix]

_CHIP_TOKENS = ('1', 'i', '-1', '-i')
_TOKEN_PHASES = {token: phase for phase, token in enumerate(_CHIP_TOKENS)}
_TOKEN_SPLIT = re.compile(r'[\s,]+')


def _content_lines(path: PathLike) -> List[str]:
    text = Path(path).read_text(encoding='utf-8')
    return [line.strip() for line in text.splitlines()
            if line.strip() and not line.strip().startswith('#')]


def _write(path: PathLike, text: str) -> None:
    Path(path).write_text(text, encoding='utf-8')
    logger.info(f"Wrote {path}")


# Sequences

def format_sequence(seq: UnimodularSeq) -> str:
    return ','.join(_CHIP_TOKENS[p] for p in seq.phases)


def parse_sequence(line: str) -> UnimodularSeq:
    phases = []
    for token in line.split(','):
        token = token.strip()
        if token not in _TOKEN_PHASES:
            raise InvalidArgumentError(f"Chip '{token}' is not one of {', '.join(_CHIP_TOKENS)}")
        phases.append(_TOKEN_PHASES[token])
    return UnimodularSeq(phases=tuple(phases))


def write_waveform(path: PathLike, waveform: Waveform) -> None:
    """Write a pair, set or paraunitary matrix."""
    if isinstance(waveform, GolayPair):
        lines = [format_sequence(waveform.x), format_sequence(waveform.y)]
    elif isinstance(waveform, ComplementarySet):
        lines = [format_sequence(s) for s in waveform.members]
    else:
        lines = [';'.join(format_sequence(s) for s in row) for row in waveform.entries]
    _write(path, '\n'.join(lines) + '\n')


def read_waveform(path: PathLike) -> Waveform:
    """
    Read a waveform file; the shape decides the type.

    Lines containing ';' make a paraunitary matrix, two lines a Golay pair,
    any other power-of-two count a complementary set.

    Raises:
        InvalidArgumentError: On unknown chips or inconsistent shapes.
    """
    lines = _content_lines(path)
    if not lines:
        raise InvalidArgumentError(f"Waveform file {path} is empty")
    try:
        if any(';' in line for line in lines):
            rows = tuple(tuple(parse_sequence(cell) for cell in line.split(';')) for line in lines)
            return ParaunitaryMatrix(entries=rows)
        seqs = [parse_sequence(line) for line in lines]
        if len(seqs) == 2:
            return GolayPair(x=seqs[0], y=seqs[1])
        return ComplementarySet(members=tuple(seqs))
    except ValidationError as e:
        raise InvalidArgumentError(f"Invalid waveform file {path}: {e.errors()[0]['msg']}")


# Designs

def _format_number(v: Number) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return '%.17g' % float(v)


def parse_number(token: str) -> Number:
    token = token.strip()
    try:
        if re.fullmatch(r'[+-]?\d+', token):
            return int(token)
        return float(token)
    except ValueError:
        raise InvalidArgumentError(f"'{token}' is not a number")


def format_design(design: Design) -> str:
    M = '-' if design.declared_null_order is None else str(design.declared_null_order)
    return '\n'.join([
        f"{design.D} {design.N} {M}",
        ' '.join(str(p) for p in design.P),
        ' '.join(_format_number(q) for q in design.Q),
    ]) + '\n'


def _tokens(line: str) -> List[str]:
    return [t for t in _TOKEN_SPLIT.split(line.strip()) if t]


def write_design(path: PathLike, design: Design) -> None:
    _write(path, format_design(design))


def read_design(path: PathLike) -> Design:
    """
    Parse and validate a design file.

    P and Q entries may be separated by whitespace or commas.

    Raises:
        InvalidArgumentError: On malformed syntax.
        VerificationError: When the content violates a design invariant
            (alphabet, Q >= 0, declared null order not achieved).
    """
    name = Path(path).stem
    lines = _content_lines(path)
    if len(lines) != 3:
        raise InvalidArgumentError(f"Design file {path} needs a header, a P line and a Q line")
    header = lines[0].split()
    if len(header) != 3:
        raise InvalidArgumentError(f"Design header must be 'D N M', got '{lines[0]}'")
    try:
        D, N = int(header[0]), int(header[1])
    except ValueError:
        raise InvalidArgumentError(f"Design header must be 'D N M', got '{lines[0]}'")
    M = None if header[2] == '-' else int(parse_number(header[2]))
    P = tuple(int(parse_number(t)) for t in _tokens(lines[1]))
    Q = tuple(parse_number(t) for t in _tokens(lines[2]))
    if len(P) != N or len(Q) != N:
        raise VerificationError(f"Header declares N={N} but P has {len(P)} and Q has {len(Q)} entries")
    try:
        return Design(name=name, P=P, Q=Q, D=D, declared_null_order=M)
    except ValidationError as e:
        raise VerificationError(e.errors()[0]['msg'])


# Maps and spectra

def write_map_csv(path: PathLike, amb: AmbiguityMap, floor: Optional[float] = None) -> None:
    """dB map relative to the map's reference, clamped at floor."""
    floor = get_settings().db_floor if floor is None else floor
    db = amb.magnitude_db(floor)
    lines = ['k,' + ','.join('%.9f' % t for t in amb.grid.thetas)]
    for k, row in zip(amb.delays, db):
        lines.append(f"{k}," + ','.join('%.6f' % v for v in row))
    _write(path, '\n'.join(lines) + '\n')


def read_map_csv(path: PathLike):
    """Return (thetas, delays, dB array) from a map CSV."""
    lines = _content_lines(path)
    thetas = np.array([float(t) for t in lines[0].split(',')[1:]])
    delays, rows = [], []
    for line in lines[1:]:
        cells = line.split(',')
        delays.append(int(cells[0]))
        rows.append([float(c) for c in cells[1:]])
    return thetas, np.array(delays), np.array(rows)


def map_to_pgm_bytes(amb: AmbiguityMap, floor: Optional[float] = None) -> bytes:
    """8-bit grayscale: floor dB maps to 0 and 0 dB to 255."""
    floor = get_settings().render_floor_db if floor is None else floor
    if floor >= 0:
        raise InvalidArgumentError(f"Render floor must be negative, got {floor}")
    db = np.clip(amb.magnitude_db(floor), floor, 0.0)
    pixels = np.rint((db - floor) / -floor * 255.0).astype(np.uint8)
    height, width = pixels.shape
    return f"P5\n{width} {height}\n255\n".encode('ascii') + pixels.tobytes()


def write_map_pgm(path: PathLike, amb: AmbiguityMap, floor: Optional[float] = None) -> None:
    Path(path).write_bytes(map_to_pgm_bytes(amb, floor))
    logger.info(f"Wrote {path}")


def write_spectrum_csv(path: PathLike, thetas: Sequence[float], values: np.ndarray,
                       floor: Optional[float] = None) -> None:
    floor = get_settings().db_floor if floor is None else floor
    lines = ['theta,re,im,db']
    for theta, v in zip(thetas, values):
        mag = abs(v)
        db = max(20.0 * math.log10(mag), floor) if mag > 0 else floor
        lines.append('%.9f,%.12e,%.12e,%.6f' % (theta, v.real, v.imag, db))
    _write(path, '\n'.join(lines) + '\n')


# Scenes

def read_scene(path: PathLike) -> List[PointTarget]:
    """
    Parse 'delay_bin theta_rad power_db' lines.

    Raises:
        InvalidArgumentError: On malformed lines or an empty file.
    """
    targets = []
    for number, line in enumerate(_content_lines(path), start=1):
        fields = line.split('#', 1)[0].split()
        if len(fields) != 3:
            raise InvalidArgumentError(f"{path}: target line {number} needs 3 fields, got '{line}'")
        try:
            targets.append(PointTarget(delay_bin=int(fields[0]), doppler_theta=float(fields[1]),
                                       power_db=float(fields[2])))
        except (ValueError, ValidationError):
            raise InvalidArgumentError(f"{path}: cannot parse target line '{line}'")
    if not targets:
        raise InvalidArgumentError(f"Scene file {path} has no targets")
    return targets


def write_scene(path: PathLike, targets: Sequence[PointTarget]) -> None:
    lines = ['# delay_bin theta_rad power_db']
    lines += [f"{t.delay_bin} {t.doppler_theta!r} {t.power_db!r}" for t in targets]
    _write(path, '\n'.join(lines) + '\n')
