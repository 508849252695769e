"""Command-line front end.

Exit codes: 0 success / accept, 1 reject, 2 error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .config import METHODS, NORMALIZATIONS, PROTOCOLS, Config, ConfigError, load_config
from .dtwcore import format_matrix, format_path
from .evalharness import (ExperimentSpec, ProtocolError, det_csv, eer, report_table,
                          run_experiments)
from .features import FeatureSet
from .segmentation import format_boundaries
from .sigmodel import (SignatureFormatError, group_by_writer, load_directory, read_signature,
                       synth_corpus, write_signature)
from .stability import format_regions, relevance_profile
from .verifier import ReferenceSet, _align, _prepare, enroll, score, with_decision

log = logging.getLogger("smdtw")

EXIT_OK, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _with_header(config: Config, body: str) -> str:
    return "\n".join(config.header_lines()) + "\n" + body


def effective_config(args) -> Config:
    base = load_config(args.config) if getattr(args, "config", None) else Config()
    overrides = {
        "feature_set": getattr(args, "feature_set", None),
        "method": getattr(args, "method", None),
        "normalization": getattr(args, "normalization", None),
        "protocol": getattr(args, "protocol", None),
        "n_references": getattr(args, "references", None),
        "threshold": getattr(args, "threshold", None),
    }
    if overrides["feature_set"] and "," in overrides["feature_set"]:
        overrides["feature_set"] = None       # evaluate handles lists itself
    if overrides["feature_set"] == "all":
        overrides["feature_set"] = None
    return base.updated(**overrides)


# ---------------------------------------------------------------------------
# commands

def cmd_enroll(args) -> int:
    config = effective_config(args)
    sigs = load_directory(args.ref_dir)
    writers = sorted({s.writer_id for s in sigs})
    if len(writers) > 1:
        raise CliError(f"reference directory mixes writers: {', '.join(writers)}")
    if len(sigs) < config.n_references:
        raise CliError(f"found {len(sigs)} signature file(s), need {config.n_references}")
    refs = sorted(sigs, key=lambda s: s.specimen_id)[:config.n_references]
    rs = enroll(refs, config)
    atomic_write(Path(args.out), rs.to_json())
    print(f"enrolled writer {rs.writer_id}: {rs.n} references, "
          f"s_min dtw={rs.s_min_bl:.6g} smdtw={rs.s_min_sm:.6g}, "
          f"mu dtw={rs.mu_bl:.6g} smdtw={rs.mu_sm:.6g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    rs = ReferenceSet.load(args.refset)
    overrides = {k: v for k, v in {
        "feature_set": args.feature_set, "method": args.method,
        "normalization": args.normalization, "threshold": args.threshold,
    }.items() if v is not None}
    base = load_config(args.config, rs.config) if args.config else rs.config
    config = base.updated(**overrides)
    rs = rs.reconfigured(config)
    q = read_signature(args.questioned)
    report = with_decision(score(q, rs, config.method, config.normalization), config.threshold)
    print(report.csv_row())
    return EXIT_OK if report.decision == "accept" else EXIT_REJECT


def _feature_sets(arg: str | None, config: Config) -> list[str]:
    if not arg:
        return [config.feature_set]
    if arg == "all":
        return [fs.value for fs in FeatureSet]
    return [FeatureSet.parse(a.strip()).value for a in arg.split(",")]


def cmd_evaluate(args) -> int:
    config = effective_config(args)
    dataset = load_directory(args.dataset_dir)
    if not dataset:
        raise CliError(f"no signature files in {args.dataset_dir}")
    methods = [args.method] if args.method else list(METHODS)
    norms = [args.normalization] if args.normalization else list(NORMALIZATIONS)
    protocols = [args.protocol] if args.protocol else list(PROTOCOLS)
    out = Path(args.out)
    results: dict[str, dict] = {}
    for fs in _feature_sets(args.feature_set, config):
        cfg = config.updated(feature_set=fs)
        row = results.setdefault(fs, {})
        for protocol in protocols:
            spec = ExperimentSpec(protocol, cfg.n_references, cfg.updated(protocol=protocol))
            pools = run_experiments(dataset, spec, methods, norms, workers=args.workers)
            for (m, n), pool in pools.items():
                value = eer(pool)
                row[(m, n, protocol)] = value
                stem = f"{fs}_{m}_{n}_{protocol}"
                atomic_write(out / f"scores_{stem}.csv", _with_header(spec.config, pool.to_csv()))
                atomic_write(out / f"det_{stem}.csv", _with_header(spec.config, det_csv(pool)))
                print(f"{fs} {m} {n} {protocol}: EER {100 * value:.2f}% "
                      f"({len(pool.genuine)} genuine, {len(pool.impostor)} impostor)")
    table = report_table(results)
    atomic_write(out / "table.tsv", _with_header(config, table))
    print(table, end="")
    return EXIT_OK


def cmd_debug(args) -> int:
    config = effective_config(args)
    sig = read_signature(args.signature)
    q = _prepare(sig, config)
    print("# boundaries")
    print(format_boundaries(q.strokes.segmentation), end="")
    if not args.refset:
        if args.matrices:
            raise CliError("--matrices needs --refset")
        return EXIT_OK
    rs = ReferenceSet.load(args.refset).reconfigured(config)
    found: list = []
    rel = relevance_profile(q.strokes, [r.strokes for r in rs.references], config.thresholds,
                            regions_out=found)
    print("# regions")
    print(format_regions(found, rel), end="")
    if args.matrices:
        if not 0 <= args.ref_index < rs.n:
            raise CliError(f"--ref-index must lie in 0..{rs.n - 1}")
        ref = rs.references[args.ref_index]
        base = _align(q, ref, "dtw", None, config, None, keep=True)
        sm = _align(q, ref, "smdtw", rel, config, None, keep=True)
        print(f"# dtw cost (reference {ref.signature.specimen_id}, rows = reference)")
        print(format_matrix(base.cost_matrix), end="")
        print(f"# dtw path distance={base.distance!r} length={base.path_length}")
        print(format_path(base.path), end="")
        print("# smdtw weights")
        print(format_matrix(sm.weights), end="")
        print("# smdtw cost (weighted)")
        print(format_matrix(sm.cost_matrix), end="")
        print(f"# smdtw path distance={sm.distance!r} length={sm.path_length}")
        print(format_path(sm.path), end="")
    return EXIT_OK


def cmd_synth(args) -> int:
    corpus = synth_corpus(args.writers, args.genuine, args.forgeries, n_strokes=args.strokes,
                          base_seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for s in corpus:
        write_signature(s, out / f"{s.writer_id}_{s.specimen_id}.txt")
    print(f"wrote {len(corpus)} signatures for {len(group_by_writer(corpus))} writers to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, *, protocol: bool = False) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--feature-set", help="F1..F15 (evaluate also takes a list or 'all')")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--normalization", choices=NORMALIZATIONS)
    p.add_argument("--references", type=int, help="number of reference signatures")
    p.add_argument("--threshold", type=float, help="decision threshold (accept if score <= X)")
    if protocol:
        p.add_argument("--protocol", choices=PROTOCOLS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smdtw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enroll", help="enrol a reference set from a directory")
    p.add_argument("ref_dir")
    p.add_argument("--out", required=True, help="where to write the reference set (JSON)")
    _common(p)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("verify", help="score a questioned signature")
    p.add_argument("refset")
    p.add_argument("questioned")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evaluate", help="run the RF/SF protocol over a dataset directory")
    p.add_argument("dataset_dir")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    _common(p, protocol=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("debug", help="dump segmentation, stability regions and cost matrices")
    p.add_argument("signature")
    p.add_argument("--refset")
    p.add_argument("--matrices", action="store_true")
    p.add_argument("--ref-index", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_debug)

    p = sub.add_parser("synth", help="write a synthetic labelled corpus")
    p.add_argument("out")
    p.add_argument("--writers", type=int, default=10)
    p.add_argument("--genuine", type=int, default=15)
    p.add_argument("--forgeries", type=int, default=10)
    p.add_argument("--strokes", type=int, default=8)
    p.add_argument("--seed", type=int, default=1000)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BrokenPipeError:
        sys.stderr.close()                # reader went away, e.g. piped into head
        return EXIT_OK
    except (CliError, ConfigError, ProtocolError, SignatureFormatError,
            OSError, ValueError) as exc:
        print(f"smdtw: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
