"""
Command-line interface.

    python -m pqtrain gen golay --length 64 --out golay64.csv
    python -m pqtrain design maxsnr --n 16 --m 8
    python -m pqtrain verify --design ptm16.design --waveform golay64.csv
    python -m pqtrain ambiguity --design ptm16 --golay 64 --grid -0.1:0.1:1024
    python -m pqtrain scene --file scenes/demo.scene --design binomial16
    python -m pqtrain table1 --n 16

Reports are printed to stdout as key=value lines; logs go to stderr.
Exit codes: 0 success, 1 verification failure, 2 usage error, 3 solver
non-convergence.
"""

import argparse
import logging
import math
import re
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from .config import get_settings
from .errors import ConvergenceError, InvalidArgumentError, VerificationError
from .models.ambiguity import DopplerGrid
from .models.designs import Design
from .models.waveforms import ComplementarySet, GolayPair, ParaunitaryMatrix
from .services import ambiguity as amb_service
from .services import designs as design_service
from .services import formats
from .services.scene import build_scene, render_scene, visibility_report
from .services.spectra import dary_null_orders, design_null_order
from .services.waveforms import check_complementary, complementary_set, golay_pair, paraunitary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3

# Flags whose values may start with '-' (negative Doppler bounds)
_RANGE_FLAGS = ('--grid', '--band')

_SHORTHANDS = (
    (re.compile(r'^ptm(\d+)$'), lambda m: design_service.ptm_design(int(m[1]))),
    (re.compile(r'^binomial(\d+)$'), lambda m: design_service.binomial_design(int(m[1]))),
    (re.compile(r'^conventional(\d+)$'), lambda m: design_service.conventional_design(int(m[1]))),
    (re.compile(r'^maxsnr(\d+):(\d+)$'), lambda m: design_service.max_snr_design(int(m[1]), int(m[2]))[0]),
)


def _report(**fields) -> None:
    print(' '.join(f"{key}={value}" for key, value in fields.items()))


def _fmt_order(order: Optional[int]) -> str:
    return 'none' if order is None else str(order)


def _fmt_db(value: float) -> str:
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return f"{value:.2f}"


def _fmt_residual(residual: float) -> str:
    return str(int(residual)) if float(residual).is_integer() else f"{residual:.3e}"


def _join_range_flags(argv: Sequence[str]) -> List[str]:
    """Rewrite '--grid -0.1:0.1:9' as '--grid=-0.1:0.1:9' so argparse keeps the value."""
    out: List[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in _RANGE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith('-') \
                and ':' in argv[i + 1]:
            out.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def resolve_design(token: str) -> Design:
    """Design from a shorthand (ptmN, binomialN, conventionalN, maxsnrN:M) or a file."""
    for pattern, build in _SHORTHANDS:
        match = pattern.match(token)
        if match:
            return build(match)
    if Path(token).is_file():
        return formats.read_design(token)
    raise InvalidArgumentError(
        f"Unknown design '{token}' (expected ptmN, binomialN, conventionalN, maxsnrN:M or a file)"
    )


def _parse_band(spec: Optional[str], grid: DopplerGrid) -> Tuple[float, float]:
    if spec is None:
        return grid.thetas[0], grid.thetas[-1]
    parts = spec.split(':')
    if len(parts) != 2:
        raise InvalidArgumentError(f"Band must be lo:hi, got '{spec}'")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise InvalidArgumentError(f"Band must be lo:hi, got '{spec}'")
    if lo > hi:
        raise InvalidArgumentError(f"Band lower bound {lo} exceeds upper bound {hi}")
    return lo, hi


def _grid(args: argparse.Namespace) -> DopplerGrid:
    if args.grid:
        return DopplerGrid.parse(args.grid, pri=args.pri)
    return DopplerGrid.periodic(get_settings().default_grid_count, pri=args.pri)


def _safe_name(name: str) -> str:
    return re.sub(r'[^A-Za-z0-9_.-]', '_', name)


def _design_order(design: Design) -> Optional[int]:
    """Declared order when present (the model has already verified it), else the verified one."""
    if design.declared_null_order is not None:
        return design.declared_null_order
    return design_null_order(design)


def _null_report(design: Design) -> dict:
    if design.is_binary:
        return {'null_order': _fmt_order(_design_order(design))}
    orders = dary_null_orders(design.P, design.Q, design.D)
    return {
        'null_order': _fmt_order(_design_order(design)),
        'null_orders': ','.join(_fmt_order(o) for o in orders),
    }


# gen

def cmd_gen(args: argparse.Namespace) -> int:
    if args.kind == 'golay':
        waveform = golay_pair(args.length)
        default = f"golay{args.length}.csv"
    elif args.kind == 'set':
        waveform = complementary_set(args.size, args.length)
        default = f"set{args.size}x{args.length}.csv"
    else:
        if args.order < 1:
            raise InvalidArgumentError(f"Paraunitary order must be >= 1, got {args.order}")
        waveform = paraunitary(args.order, golay_pair(args.chip_length))
        default = f"paraunitary{waveform.D}x{waveform.L}.csv"
    residual = check_complementary(waveform)
    out = args.out or default
    formats.write_waveform(out, waveform)
    _report(kind=args.kind, length=waveform.L, residual=_fmt_residual(residual), file=out)
    return EXIT_OK


# design

def _build_design(args: argparse.Namespace):
    kind = args.kind
    if kind == 'ptm':
        return design_service.ptm_design(args.n), None
    if kind == 'binomial':
        return design_service.binomial_design(args.n), None
    if kind == 'conventional':
        return design_service.conventional_design(args.n), None
    if kind == 'general':
        if args.m is None or not args.coeffs:
            raise InvalidArgumentError("general designs need --m and --coeffs")
        coeffs = [formats.parse_number(t) for t in args.coeffs.split(',')]
        return design_service.general_design(coeffs, args.n, args.m), None
    if kind == 'maxsnr':
        if args.m is None:
            raise InvalidArgumentError("maxsnr designs need --m")
        options = design_service.SolverOptions(tol=args.qp_tol, max_iter=args.max_iter)
        design, _, report = design_service.max_snr_design(args.n, args.m, options)
        return design, report
    return _compose(args), None


def _compose(args: argparse.Namespace) -> Design:
    if args.factor:
        factors = [resolve_design(f) for f in args.factor]
    else:
        if args.n is None or args.count is None:
            raise InvalidArgumentError("compose needs --factor files or --n and --count")
        if args.count < 1:
            raise InvalidArgumentError(f"--count must be >= 1, got {args.count}")
        if args.lift == 'binomial':
            D = 2 ** args.count
            factors = [design_service.binomial_lift_factor(args.n - 1, D) for _ in range(args.count)]
        else:
            factors = [design_service.binomial_design(args.n) for _ in range(args.count)]
    return design_service.compose_dary(factors)


def cmd_design(args: argparse.Namespace) -> int:
    if args.kind != 'compose' and args.n is None:
        raise InvalidArgumentError(f"{args.kind} designs need --n")
    design, report = _build_design(args)
    out = args.out or f"{_safe_name(design.name)}.design"
    formats.write_design(out, design)
    fields = {'design': design.name, 'N': design.N, 'D': design.D}
    fields.update(_null_report(design))
    fields['snr_gain'] = f"{design.snr_gain:.2f}"
    if report is not None:
        fields['kkt_residual'] = f"{report.max_residual:.3e}"
        fields['iterations'] = report.iterations
        fields['sign_search'] = report.sign_search
    fields['file'] = out
    _report(**fields)
    return EXIT_OK


# verify

def _waveform_alphabet(waveform) -> int:
    return 2 if isinstance(waveform, GolayPair) else waveform.D


def cmd_verify(args: argparse.Namespace) -> int:
    settings = get_settings()
    design = formats.read_design(args.design)
    fields = {'design': design.name, 'N': design.N, 'D': design.D}
    fields.update(_null_report(design))
    fields['snr_gain'] = f"{design.snr_gain:.2f}"

    if args.waveform:
        waveform = formats.read_waveform(args.waveform)
        if _waveform_alphabet(waveform) != design.D:
            raise VerificationError(
                f"Waveform alphabet {_waveform_alphabet(waveform)} does not match design D={design.D}"
            )
        residual = check_complementary(waveform)
        if residual != 0:
            raise VerificationError(f"Waveform is not complementary (residual {residual})")
        fields['complementary_residual'] = _fmt_residual(residual)

    if args.kkt is not None:
        if not design.is_binary:
            raise InvalidArgumentError("KKT check applies to binary designs only")
        kkt_tol = settings.kkt_tol if args.kkt_tol is None else args.kkt_tol
        report = design_service.kkt_check(design.r, args.kkt)
        if not report.passes(kkt_tol):
            raise VerificationError(
                f"KKT residual {report.max_residual:.3e} exceeds {kkt_tol:.1e}"
            )
        fields['kkt_residual'] = f"{report.max_residual:.3e}"

    fields['status'] = 'ok'
    _report(**fields)
    return EXIT_OK


# ambiguity

def _waveform_for(design: Design, args: argparse.Namespace):
    if getattr(args, 'waveform', None):
        return formats.read_waveform(args.waveform)
    if design.is_binary:
        return golay_pair(args.golay)
    return complementary_set(design.D, args.golay)


def cmd_ambiguity(args: argparse.Namespace) -> int:
    design = resolve_design(args.design)
    grid = _grid(args)
    lo, hi = _parse_band(args.band, grid)

    if args.paraunitary is not None:
        return _mimo_ambiguity(args, design, grid, lo, hi)

    waveform = _waveform_for(design, args)
    if isinstance(waveform, GolayPair):
        amb = amb_service.cross_ambiguity(design, waveform, grid, args.threads)
    elif isinstance(waveform, ComplementarySet):
        amb = amb_service.cross_ambiguity_dary(design, waveform, grid, args.threads)
    else:
        raise InvalidArgumentError("Use --paraunitary for matrix waveforms")

    out = args.out or f"{_safe_name(design.name)}_ambiguity.csv"
    formats.write_map_csv(out, amb)
    if args.pgm:
        formats.write_map_pgm(args.pgm, amb)
    rolloff = amb.mainlobe_rolloff_db()[amb.band_columns(lo, hi)]
    _report(design=design.name, L=amb.L, points=grid.count,
            max_sidelobe_db=_fmt_db(amb.max_sidelobe_db(lo, hi)),
            mainlobe_min_db=_fmt_db(float(np.min(rolloff))), file=out)
    return EXIT_OK


def _mimo_ambiguity(args: argparse.Namespace, design: Design, grid: DopplerGrid,
                    lo: float, hi: float) -> int:
    if 2 ** args.paraunitary != design.D:
        raise InvalidArgumentError(
            f"Paraunitary order {args.paraunitary} gives D={2 ** args.paraunitary}, design has D={design.D}"
        )
    S = paraunitary(args.paraunitary, golay_pair(args.golay))
    mimo = amb_service.mimo_cross_ambiguity(design, S, grid, args.threads)
    stem = args.out[:-4] if args.out and args.out.endswith('.csv') else (
        args.out or f"{_safe_name(design.name)}_mimo")

    diag, offdiag = -math.inf, -math.inf
    for i in range(mimo.D):
        for j in range(mimo.D):
            entry = mimo.entry(i, j)
            formats.write_map_csv(f"{stem}_{i}{j}.csv", entry)
            if i == j:
                diag = max(diag, entry.max_sidelobe_db(lo, hi))
            else:
                level = float(np.max(entry.magnitude_db(get_settings().db_floor)[:, entry.band_columns(lo, hi)]))
                offdiag = max(offdiag, level)
    _report(design=design.name, D=mimo.D, L=S.L, points=grid.count,
            diag_max_sidelobe_db=_fmt_db(diag), offdiag_max_db=_fmt_db(offdiag), files=f"{stem}_*.csv")
    return EXIT_OK


# scene

def cmd_scene(args: argparse.Namespace) -> int:
    design = resolve_design(args.design)
    targets = formats.read_scene(args.file)
    grid = _grid(args)
    waveform = _waveform_for(design, args)
    if isinstance(waveform, ParaunitaryMatrix):
        raise InvalidArgumentError("Scenes take a Golay pair or a complementary set")
    scene = build_scene(targets, design, waveform, grid, title=Path(args.file).stem)
    band = _parse_band(args.band, grid)

    rendered = render_scene(scene, normalize=not args.raw, threads=args.threads)
    pgm = args.pgm or f"{Path(args.file).stem}_{_safe_name(design.name)}.pgm"
    formats.write_map_pgm(pgm, rendered)
    if args.csv:
        formats.write_map_csv(args.csv, rendered)

    for row in visibility_report(scene, band, threads=args.threads):
        _report(target=row.index, delay=row.delay_bin, theta=f"{row.doppler_theta:.6f}",
                peak_db=_fmt_db(row.peak_db), interference_db=_fmt_db(row.interference_db),
                margin_db=_fmt_db(row.margin_db))
    _report(design=design.name, targets=len(targets), file=pgm)
    return EXIT_OK


# table1

def table1_rows(N: int, M: Optional[int] = None) -> List[Design]:
    """Conventional, PTM, max-SNR and binomial designs of length N."""
    M = N // 2 if M is None else M
    return [
        design_service.conventional_design(N),
        design_service.ptm_design(N),
        design_service.max_snr_design(N, M)[0],
        design_service.binomial_design(N),
    ]


def cmd_table1(args: argparse.Namespace) -> int:
    for design in table1_rows(args.n, args.m):
        _report(design=design.name, null_order=_fmt_order(_design_order(design)),
                snr_gain=f"{design.snr_gain:.2f}")
    return EXIT_OK


# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='pqtrain',
        description="Complementary waveforms and (P,Q) pulse-train designs",
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Log at DEBUG level')
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help='Generate complementary sequences')
    gen.add_argument('kind', choices=['golay', 'set', 'paraunitary'])
    gen.add_argument('--length', type=int, default=64, help='Chip length L (golay, set)')
    gen.add_argument('--size', type=int, default=4, help='Set size D (set)')
    gen.add_argument('--order', type=int, default=1, help='Recursion order K, D = 2^K (paraunitary)')
    gen.add_argument('--chip-length', type=int, default=2, help='Base Golay length (paraunitary)')
    gen.add_argument('--out', help='Output file (default derived from the kind)')
    gen.set_defaults(handler=cmd_gen)

    design = sub.add_parser('design', help='Construct a (P,Q) design')
    design.add_argument('kind', choices=['ptm', 'binomial', 'conventional', 'general', 'maxsnr', 'compose'])
    design.add_argument('--n', type=int, help='Pulse count N (factor length for compose)')
    design.add_argument('--m', type=int, help='Null order M (general, maxsnr)')
    design.add_argument('--coeffs', help='Comma-separated basis coefficients (general)')
    design.add_argument('--factor', action='append', help='Factor design file or shorthand (compose, repeatable)')
    design.add_argument('--count', type=int, help='Number of binomial factors (compose)')
    design.add_argument('--lift', choices=['binomial'], help='Use lifted D-ary binomial factors (compose)')
    design.add_argument('--qp-tol', type=float, help='Interior-point tolerance override')
    design.add_argument('--max-iter', type=int, help='Interior-point iteration cap override')
    design.add_argument('--out', help='Output design file')
    design.set_defaults(handler=cmd_design)

    verify = sub.add_parser('verify', help='Verify a design file and optional waveform file')
    verify.add_argument('--design', required=True, help='Design file')
    verify.add_argument('--waveform', help='Waveform file to check for complementarity')
    verify.add_argument('--kkt', type=int, metavar='M', help='Re-check max-SNR optimality for null order M')
    verify.add_argument('--kkt-tol', type=float, help='KKT tolerance override')
    verify.set_defaults(handler=cmd_verify)

    for name, handler, help_text in (
        ('ambiguity', cmd_ambiguity, 'Compute a cross-ambiguity map'),
        ('scene', cmd_scene, 'Render a multi-target scene'),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--design', required=True, help='Design shorthand or file')
        p.add_argument('--golay', type=int, default=64, help='Golay (or set) chip length L')
        p.add_argument('--waveform', help='Waveform file instead of a generated one')
        p.add_argument('--grid', help='Doppler grid lo:hi:count in radians (default: periodic)')
        p.add_argument('--pri', type=float, help='Pulse repetition interval in seconds (labels only)')
        p.add_argument('--band', help='Doppler band lo:hi for reported levels (default: whole grid)')
        p.add_argument('--threads', type=int, help='Worker threads for grid evaluation')
        p.add_argument('--pgm', help='Write a PGM image of the map')
        p.set_defaults(handler=handler)
        if name == 'ambiguity':
            p.add_argument('--paraunitary', type=int, metavar='K', help='MIMO map set from S_{2^K}')
            p.add_argument('--out', help='Output CSV (MIMO: file stem)')
        else:
            p.add_argument('--file', required=True, help='Scene file')
            p.add_argument('--csv', help='Write the rendered map as CSV')
            p.add_argument('--raw', action='store_true', help='Do not normalize to the peak')

    table = sub.add_parser('table1', help='Null order and SNR gain of the four design families')
    table.add_argument('--n', type=int, default=16, help='Pulse count N')
    table.add_argument('--m', type=int, help='Max-SNR null order (default N/2)')
    table.set_defaults(handler=cmd_table1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_range_flags(argv))
    except SystemExit as e:
        return int(e.code or 0)

    settings = get_settings()
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    try:
        return args.handler(args)
    except VerificationError as e:
        _report(status='fail', reason=f'"{e.reason}"')
        logger.error(f"Verification failed: {e.reason}")
        return EXIT_VERIFY
    except ConvergenceError as e:
        logger.error(f"Solver did not converge: {e} {e.residuals}")
        return EXIT_SOLVER
    except InvalidArgumentError as e:
        print(f"pqtrain: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(f"pqtrain: error: {e.errors()[0]['msg']}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
