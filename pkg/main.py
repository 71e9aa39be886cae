"""
main.py - HexaShrink Command Line

Subcommands:
- decompose:   GRDECL -> .hxs container (prints per-level summary)
- reconstruct: .hxs -> GRDECL at any stored level
- export-vtk:  .hxs -> legacy VTK unstructured grid at any stored level
- stats:       per-level histograms and property ranges (.hxs or GRDECL)
- bench:       ratio and timing tables over the generator fixtures
- generate:    write a generator fixture as GRDECL
- selftest:    run the test suite

Exit codes: 0 success, 1 I/O, 2 usage/range, 3 corrupt or invalid data.
Levels are non-positive: 0 is the input resolution, -L the coarsest.
"""

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

import config
from core.errors import EXIT_IO, EXIT_OK, EXIT_USAGE, HexaShrinkError, SpecInvalid
from core.grid import PropertyKind, QuantizationParams, validate
from core.grdecl import read_grdecl, write_grdecl
from core.synthetic import SyntheticSpec, generate_synthetic
from codec.codecs import available_codecs
from codec.container import PayloadKind, read_container, read_directory, serialize
from codec.entropy import entropy_report
from codec.pyramid import Pyramid, analyze_pyramid
from codec.streaming import analyze_streaming, iter_slabs
from analysis.bench import CompressionBenchmark
from analysis.export import export_grdecl_level, export_vtk_level
from analysis.stats import proportion_table, pyramid_stats, render

logger = logging.getLogger(__name__)


def setup_logging(level: str = None):
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if config.LOG_TO_FILE:
        config.ensure_dirs()
        handlers.append(logging.FileHandler(config.LOGS_DIR / f"hexashrink_{datetime.now().strftime('%Y%m%d')}.log"))
    logging.basicConfig(
        level=getattr(logging, (level or config.LOG_LEVEL).upper()),
        format=config.LOG_FORMAT,
        handlers=handlers,
    )


# ==================== ARGUMENT HELPERS ====================

def command_config(args) -> Dict:
    """Echo of the command line embedded in outputs."""
    return {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key not in ("func", "log_level") and value is not None
    }


def parse_kinds(pairs: Optional[List[str]]) -> Dict[str, PropertyKind]:
    kinds = {}
    for pair in pairs or []:
        name, _, kind = pair.partition("=")
        try:
            kinds[name.upper()] = PropertyKind(kind.lower())
        except ValueError:
            raise SpecInvalid(f"--kind expects NAME=continuous|categorical, got {pair!r}")
    return kinds


def codec_choice(args) -> Dict[str, str]:
    chosen = {}
    for kind in PayloadKind:
        value = getattr(args, f"codec_{kind.label}", None) or args.codec
        if value:
            chosen[kind.label] = value
    return chosen


def quantization(args) -> Optional[QuantizationParams]:
    """Scales given on the command line; None leaves them to the GRDECL header or config."""
    if args.geometry_scale is None and args.property_scale is None:
        return None
    return QuantizationParams(
        geometry_scale=args.geometry_scale or config.GEOMETRY_SCALE,
        property_scale=args.property_scale or config.PROPERTY_SCALE,
    )


def emit(text: str, output: Optional[Path] = None):
    if output:
        Path(output).write_text(text)
        logger.info(f"Wrote {output}")
    else:
        print(text)


# ==================== COMMANDS ====================

def container_summary(pyramid: Pyramid, data: bytes, input_size: int) -> pd.DataFrame:
    """Per-level dims, chunk sizes and zero shares of a serialized pyramid."""
    _, chunks, _ = read_directory(data)
    report = entropy_report(pyramid, codecs=[])
    zeros = report.set_index("chunk")
    rows = []
    for level, dims in enumerate(pyramid.header.level_dims):
        at_level = [c for c in chunks if c.level == level]
        if not at_level:
            continue
        details = [c.name for c in at_level if c.kind == PayloadKind.DETAIL and c.name in zeros.index]
        elements = sum(int(zeros.loc[n, "elements"]) for n in details)
        zero_share = (sum(zeros.loc[n, "zero_ratio"] * zeros.loc[n, "elements"] for n in details) / elements
                      if elements else float("nan"))
        rows.append({
            "level": -level,
            "dims": "x".join(str(d) for d in dims.to_list()),
            "chunks": len(at_level),
            "raw_bytes": sum(c.raw_length for c in at_level),
            "stored_bytes": sum(c.payload_length for c in at_level),
            "detail_zero_share": zero_share,
        })
    df = pd.DataFrame(rows)
    logger.info(f"Container {len(data):,} bytes, ratio {input_size / len(data):.2f} vs {input_size:,} input bytes")
    return df


def cmd_decompose(args) -> int:
    logger.info("=" * 60)
    logger.info(f"DECOMPOSE {args.input}")
    logger.info("=" * 60)
    model = read_grdecl(args.input, quantization(args), parse_kinds(args.kind), args.allow_horizontal_faults)
    report = validate(model)
    for finding in report.findings[:10]:
        logger.warning(f"{finding.code}: {finding.message}")
    if len(report) > 10:
        logger.warning(f"... {len(report) - 10} more findings")

    echo = command_config(args)
    if args.slabs and args.slabs > 1:
        slabs = iter_slabs(model, args.slabs, args.levels)
        pyramid = analyze_streaming(slabs, args.levels, args.epsilon, echo)
    else:
        pyramid = analyze_pyramid(model, args.levels, args.epsilon, echo)

    data = serialize(pyramid, codec_choice(args))
    output = args.output or Path(args.input).with_suffix(".hxs")
    Path(output).write_bytes(data)

    input_size = Path(args.input).stat().st_size
    summary = container_summary(pyramid, data, input_size)
    emit(render({"levels": summary}, args.format)
         + f"\ntotal: {len(data):,} bytes, ratio {input_size / len(data):.3f} ({output})")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    pyramid = read_container(args.input)
    output = args.output or Path(args.input).with_suffix(f".L{abs(args.level)}.grdecl")
    export_grdecl_level(pyramid, args.level, output, pyramid.header.command_config or None)
    return EXIT_OK


def cmd_export_vtk(args) -> int:
    pyramid = read_container(args.input)
    output = args.output or Path(args.input).with_suffix(f".L{abs(args.level)}.vtk")
    export_vtk_level(pyramid, args.level, output, args.keep_inactive, pyramid.header.command_config or None)
    return EXIT_OK


def load_pyramid(args) -> Pyramid:
    path = Path(args.input)
    if path.suffix.lower() == ".hxs":
        return read_container(path)
    model = read_grdecl(path, quantization(args), parse_kinds(args.kind), args.allow_horizontal_faults)
    levels = model.dims.max_levels() if args.levels is None else args.levels
    return analyze_pyramid(model, levels, args.epsilon)


def cmd_stats(args) -> int:
    pyramid = load_pyramid(args)
    histograms, summary = pyramid_stats(pyramid)
    tables = {"levels": summary, "proportions": proportion_table(histograms)}
    if args.entropy:
        tables["chunks"] = entropy_report(pyramid, args.codecs)
    emit(render(tables, args.format), args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    fixtures = config.BENCH_FIXTURES
    if args.fixtures:
        unknown = [name for name in args.fixtures if name not in fixtures]
        if unknown:
            raise SpecInvalid(f"unknown fixtures {unknown} (known: {', '.join(fixtures)})")
        fixtures = {name: fixtures[name] for name in args.fixtures}
    bench = CompressionBenchmark(fixtures, args.codecs, args.max_levels, args.repeats)
    tables = {"ratios": bench.ratio_table()}
    if not args.no_timing:
        tables["timings"] = bench.timing_table()
    emit(render(tables, args.format), args.output)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.fixture not in config.BENCH_FIXTURES:
        raise SpecInvalid(f"unknown fixture {args.fixture!r} (known: {', '.join(config.BENCH_FIXTURES)})")
    spec = dict(config.BENCH_FIXTURES[args.fixture])
    if args.seed is not None:
        spec["seed"] = args.seed
    model = generate_synthetic(SyntheticSpec.from_dict(spec), quantization(args))
    write_grdecl(model, args.output, 0, command_config(args))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from tests.runner import run_all
    return EXIT_OK if run_all(quick=args.quick) else EXIT_USAGE


# ==================== CLI ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hexashrink", description="Reversible multiresolution corner-point grids")
    parser.add_argument("--log-level", help=f"Logging level (default {config.LOG_LEVEL})")
    sub = parser.add_subparsers(dest="command", required=True)

    def ingest_options(p):
        p.add_argument("--geometry-scale", type=int, help="Fixed-point scale of coordinates (power of ten)")
        p.add_argument("--property-scale", type=int, help="Fixed-point scale of continuous properties")
        p.add_argument("--kind", action="append", metavar="NAME=KIND",
                       help="Property kind override (continuous|categorical), repeatable")
        p.add_argument("--epsilon", type=int, default=config.FAULT_EPSILON,
                       help="Quantized tolerance for quadrant equality")
        p.add_argument("--allow-horizontal-faults", action="store_true",
                       default=config.ALLOW_HORIZONTAL_FAULTS,
                       help="Keep layer tops that differ from the bottom above")

    def report_options(p):
        p.add_argument("--format", choices=("text", "csv"), default=config.REPORT_FORMAT)
        p.add_argument("-o", "--output", type=Path, help="Write the report to a file")

    p = sub.add_parser("decompose", help="GRDECL -> .hxs")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--levels", "-L", type=int, required=True)
    p.add_argument("--codec", help=f"Codec for every payload kind ({', '.join(available_codecs())})")
    for kind in PayloadKind:
        p.add_argument(f"--codec-{kind.label}", help=f"Codec for {kind.label} chunks")
    p.add_argument("--slabs", type=int, help="Analyze in this many i-slabs")
    p.add_argument("--format", choices=("text", "csv"), default=config.REPORT_FORMAT)
    ingest_options(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help=".hxs -> GRDECL at a level")
    p.add_argument("input", type=Path)
    p.add_argument("--level", "-t", type=int, default=0, help="0 (full) down to -L (coarsest)")
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("export-vtk", help=".hxs -> legacy VTK at a level")
    p.add_argument("input", type=Path)
    p.add_argument("--level", "-t", type=int, default=0)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--keep-inactive", action="store_true", help="Emit inactive cells with an ACTNUM array")
    p.set_defaults(func=cmd_export_vtk)

    p = sub.add_parser("stats", help="Per-level statistics of a .hxs or GRDECL file")
    p.add_argument("input", type=Path)
    p.add_argument("--levels", "-L", type=int, help="Levels to analyze for GRDECL input (default max)")
    p.add_argument("--entropy", action="store_true", help="Append the per-chunk entropy report")
    p.add_argument("--codecs", nargs="+", help="Codecs for the entropy report")
    ingest_options(p)
    report_options(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="Compression ratio and timing tables")
    p.add_argument("--fixtures", nargs="+", help=f"Subset of {', '.join(config.BENCH_FIXTURES)}")
    p.add_argument("--codecs", nargs="+")
    p.add_argument("--max-levels", type=int)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--no-timing", action="store_true")
    report_options(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="Write a generator fixture as GRDECL")
    p.add_argument("fixture", help=", ".join(config.BENCH_FIXTURES))
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--geometry-scale", type=int)
    p.add_argument("--property-scale", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("selftest", help="Run the test suite")
    p.add_argument("--quick", action="store_true", help="Skip the slow randomized and benchmark checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    try:
        return args.func(args)
    except HexaShrinkError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
