"""Command-line surface.

Five subcommands tie the library together:

* ``fit``     accumulate time covariance over a manifest, eigendecompose,
              write a basis file (partial accumulators can be saved and
              merged);
* ``pool``    pool one sequence file into descriptor rows;
* ``image``   render eigen / dynamic / mean images from a PPM frame dir;
* ``report``  reconstruction error vs eigenvalue tail per basis size,
              with a figure next to the table;
* ``bench``   synthetic pooling-method comparison, JSON report plus a
              figure.

Exit codes: 0 success, 1 data error, 2 usage error.  All commands are
deterministic for identical inputs and flags.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import basis as basis_mod
from . import bench as bench_mod
from . import figures, image, storage
from .ppm import write_ppm_bytes
from .pooling import (FeatureSequence, PooledDescriptor, concat, iter_windows,
                      l2_normalize, pool, pool_max, reconstruction_error,
                      sample_regular)

__all__ = ["main", "run", "build_parser"]

REL_MISMATCH_TOL = 1e-6


class UsageError(Exception):
    """Bad flag combination discovered after argparse."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigenpool",
        description="Temporal pooling of feature sequences and RGB frames "
                    "with learned eigen bases, DCT, rank and mean weights.")
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker threads for manifest processing")
    parser.add_argument("--format", choices=("csv", "eepb", "json"),
                        default="csv",
                        help="output format for pool descriptors and report "
                             "tables (bench reports and bases are JSON)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit an eigen basis over a manifest")
    p_fit.add_argument("--manifest", help="file listing sequence files or "
                                          "frame directories, one per line")
    p_fit.add_argument("--length", type=int, metavar="L",
                       help="resampling length (default 25)")
    p_fit.add_argument("--k", type=int, metavar="K",
                       help="basis functions to keep in the output basis")
    p_fit.add_argument("--out", help="basis JSON output path")
    p_fit.add_argument("--merge", nargs="+", metavar="COV",
                       help="merge saved covariance accumulators")
    p_fit.add_argument("--save-cov", metavar="COV",
                       help="save the accumulated covariance")
    p_fit.add_argument("--fig", metavar="PNG",
                       help="render the basis functions and spectrum")

    p_pool = sub.add_parser("pool", help="pool one sequence into descriptors")
    p_pool.add_argument("--input", required=True, help="sequence CSV or EEPB")
    p_pool.add_argument("--basis", help="basis JSON from fit")
    p_pool.add_argument("--method", choices=("dct", "rank", "mean", "max"),
                        help="built-in pooling (alternative to --basis)")
    p_pool.add_argument("--indices", help="1-based basis indices, e.g. 1,2,3")
    p_pool.add_argument("--length", type=int, metavar="L",
                        help="resample the input before pooling")
    p_pool.add_argument("--normalize", action="store_true",
                        help="L2-normalize each descriptor")
    p_pool.add_argument("--concat", action="store_true",
                        help="concatenate the per-index descriptors")
    p_pool.add_argument("--window", type=int, metavar="W",
                        help="pool inside sliding windows of W steps")
    p_pool.add_argument("--stride", type=int, default=8, metavar="S",
                        help="window stride (default 8)")
    p_pool.add_argument("--out", required=True, help="descriptor output path")
    p_pool.add_argument("--provenance", metavar="JSON",
                        help="sidecar JSON with per-row provenance tags")

    p_img = sub.add_parser("image", help="pool RGB frames into images")
    p_img.add_argument("--frames", required=True, help="directory of PPM frames")
    p_img.add_argument("--method", required=True,
                       choices=("eigen", "dynamic", "mean"))
    p_img.add_argument("--basis", help="basis JSON (for --method eigen)")
    p_img.add_argument("--dct-k", type=int, metavar="K",
                       help="use a DCT basis with K functions instead of a file")
    p_img.add_argument("--length", type=int, default=25, metavar="L",
                       help="sampling length for global --dct-k (default 25)")
    p_img.add_argument("--indices", help="1-based basis indices to render")
    p_img.add_argument("--global", dest="global_mode", action="store_true",
                       help="pool the whole clip (default)")
    p_img.add_argument("--window", type=int, metavar="W",
                       help="pool inside sliding windows of W frames")
    p_img.add_argument("--stride", type=int, default=8, metavar="S")
    p_img.add_argument("--out-dir", required=True)
    p_img.add_argument("--raw", action="store_true",
                       help="also export pre-rescale floats as EEPB")

    p_rep = sub.add_parser("report",
                           help="reconstruction error vs eigenvalue tail")
    p_rep.add_argument("--manifest", required=True)
    p_rep.add_argument("--basis", required=True, help="eigen basis JSON")
    p_rep.add_argument("--k-range", metavar="SPEC",
                       help="basis sizes: 'A:B' or comma list (default all)")
    p_rep.add_argument("--out", help="write the table to a file")
    p_rep.add_argument("--fig", metavar="PNG", help="figure path")
    p_rep.add_argument("--no-fig", action="store_true")

    p_bench = sub.add_parser("bench", help="synthetic pooling benchmark")
    p_bench.add_argument("--generator", choices=bench_mod.GENERATORS,
                         default="reversal")
    p_bench.add_argument("--classes", type=int, default=2)
    p_bench.add_argument("--per-class", type=int, default=100)
    p_bench.add_argument("--dim", type=int, default=8)
    p_bench.add_argument("--steps", type=int, default=50)
    p_bench.add_argument("--noise", type=float, default=0.05)
    p_bench.add_argument("--seed", type=int, default=7)
    p_bench.add_argument("--methods", default="mean,max,rank,dct:2,eigen:1+2+3",
                         help="comma-separated method tags")
    p_bench.add_argument("--out", help="JSON report path")
    p_bench.add_argument("--fig", metavar="PNG", help="figure path")
    p_bench.add_argument("--no-fig", action="store_true")
    return parser


def _map_ordered(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool_:
        return list(pool_.map(fn, items))


def _load_resampled(path: Path, length: int) -> FeatureSequence:
    """Manifest entry -> fixed-length sequence (frame dirs are vectorized)."""
    if path.is_dir():
        return image.vectorize(image.load_frame_dir(path), length)
    return sample_regular(storage.read_sequence(path), length)


def _parse_indices(text: str | None, default: list[int]) -> list[int]:
    if text is None:
        return default
    parts = text.replace("+", ",").split(",")
    try:
        indices = [int(p) for p in parts if p.strip()]
    except ValueError:
        raise UsageError(f"bad basis indices {text!r}") from None
    if not indices or any(i < 1 for i in indices):
        raise UsageError("basis indices must be positive integers")
    return indices


def _figure_path(args) -> Path | None:
    if args.no_fig:
        return None
    if args.fig:
        return Path(args.fig)
    if args.out:
        return Path(args.out).with_suffix(".png")
    return None


# -- fit ----------------------------------------------------------------------

def _cmd_fit(args) -> int:
    if not args.manifest and not args.merge:
        raise UsageError("fit needs --manifest and/or --merge")
    if not args.out and not args.save_cov:
        raise UsageError("fit needs --out and/or --save-cov")
    if args.out and args.k is None:
        raise UsageError("--out needs --k")
    parts = []
    if args.merge:
        parts.extend(storage.read_covariance(p) for p in args.merge)
    if args.manifest:
        length = parts[0].length if parts else (args.length or 25)
        if parts and args.length is not None and args.length != length:
            raise UsageError(
                f"--length {args.length} conflicts with merged accumulators "
                f"of length {length}")
        entries = storage.read_manifest(args.manifest)
        sequences = _map_ordered(lambda p: _load_resampled(p, length),
                                 entries, args.threads)
        cov = basis_mod.TimeCovariance.empty(length)
        for seq in sequences:
            cov = basis_mod.accumulate(cov, seq)
        parts.append(cov)
    cov = basis_mod.merge(parts)
    if args.k is not None and not 1 <= args.k <= cov.length:
        raise UsageError(f"--k must be in [1, {cov.length}], got {args.k}")
    if args.save_cov:
        storage.write_covariance(args.save_cov, cov)
    print(f"sequences\t{cov.sequence_count}")
    if args.out or args.fig:
        spectrum = basis_mod.fit_eigen(cov)
        total = math.fsum(spectrum.eigenvalues)
        running = 0.0
        print("index\teigenvalue\tcumulative_energy")
        for j, lam in enumerate(spectrum.eigenvalues, 1):
            running += lam
            energy = running / total if total > 0 else 0.0
            print(f"{j}\t{storage.format_float(lam)}\t"
                  f"{storage.format_float(energy)}")
        if args.out:
            fitted = basis_mod.take_basis(spectrum, args.k)
            storage.write_basis(args.out, fitted)
        if args.fig:
            shown = basis_mod.take_basis(spectrum,
                                         args.k or min(3, cov.length))
            figures.save_basis_figure(shown, args.fig)
    return 0


# -- pool ---------------------------------------------------------------------

def _pool_basis(args, length: int):
    """Resolve the weight source at the given pooling length.

    Returns (basis, indices); basis is None for max pooling.  Length
    mismatches against a loaded basis file are reported by the caller,
    which knows whether the length came from the sequence or --window.
    """
    if (args.basis is None) == (args.method is None):
        raise UsageError("pool needs exactly one of --basis or --method")
    if args.basis is not None:
        loaded = storage.read_basis(args.basis)
        indices = _parse_indices(args.indices,
                                 list(range(1, loaded.count + 1)))
        return loaded, indices
    if args.method == "max":
        if args.indices:
            raise UsageError("max pooling takes no --indices")
        return None, [1]
    indices = _parse_indices(args.indices, [1])
    if args.method == "dct":
        return basis_mod.dct_basis(length, max(indices)), indices
    if args.indices and indices != [1]:
        raise UsageError(f"{args.method} pooling has a single basis index")
    if args.method == "rank":
        return basis_mod.rank_weights(length), [1]
    return basis_mod.mean_weights(length), [1]


def _window_tag(tag: str, span: tuple[int, int]) -> str:
    return f"{tag}@{span[0]}:{span[1]}"


def _cmd_pool(args) -> int:
    seq = storage.read_sequence(args.input)
    if args.length is not None:
        seq = sample_regular(seq, args.length)
    descriptors: list[PooledDescriptor] = []
    if args.window is not None:
        chunks = iter_windows(seq, args.window, args.stride)
        pooled_basis, indices = _pool_basis(args, args.window)
        if pooled_basis is not None and pooled_basis.length != args.window:
            raise ValueError(
                f"{args.basis}: basis length {pooled_basis.length} does not "
                f"match --window {args.window} (expected a length-"
                f"{args.window} basis)")
        for span, chunk in chunks:
            if pooled_basis is None:
                window_descs = [pool_max(chunk)]
            else:
                window_descs = [pool(chunk, pooled_basis, i) for i in indices]
            window_descs = [PooledDescriptor(d.values,
                                             _window_tag(d.provenance, span))
                            for d in window_descs]
            if args.normalize:
                window_descs = [l2_normalize(d) for d in window_descs]
            if args.concat and len(window_descs) > 1:
                window_descs = [concat(window_descs)]
            descriptors.extend(window_descs)
    else:
        pooled_basis, indices = _pool_basis(args, seq.length)
        if pooled_basis is not None and pooled_basis.length != seq.length:
            raise ValueError(
                f"{args.input}: sequence length {seq.length} does not match "
                f"basis length {pooled_basis.length} (expected "
                f"{pooled_basis.length} steps; resample with --length "
                f"{pooled_basis.length})")
        if pooled_basis is None:
            descriptors = [pool_max(seq)]
        else:
            descriptors = [pool(seq, pooled_basis, i) for i in indices]
        if args.normalize:
            descriptors = [l2_normalize(d) for d in descriptors]
        if args.concat and len(descriptors) > 1:
            descriptors = [concat(descriptors)]
    if args.format == "csv":
        storage.write_descriptors_csv(args.out, descriptors)
    elif args.format == "eepb":
        storage.write_descriptors_eepb(args.out, descriptors)
    else:
        storage.atomic_write_text(args.out, storage.descriptors_json(descriptors))
    if args.provenance:
        tags = [d.provenance for d in descriptors]
        storage.atomic_write_text(args.provenance,
                                  storage.dumps_json(tags) + "\n")
    return 0


# -- image --------------------------------------------------------------------

def _image_basis(args, length: int | None):
    """Weight source for the image command.

    ``length`` pins the basis length (window mode, or global --dct-k);
    None lets a loaded basis file define the sampling length itself.
    """
    if args.method == "dynamic":
        return basis_mod.rank_weights(length), [1]
    if args.method == "mean":
        return basis_mod.mean_weights(length), [1]
    if (args.basis is None) == (args.dct_k is None):
        raise UsageError("--method eigen needs exactly one of --basis or --dct-k")
    if args.dct_k is not None:
        loaded = basis_mod.dct_basis(length, args.dct_k)
    else:
        loaded = storage.read_basis(args.basis)
        if length is not None and loaded.length != length:
            raise ValueError(
                f"{args.basis}: basis length {loaded.length} does not match "
                f"the requested sampling length {length}")
    return loaded, _parse_indices(args.indices, list(range(1, loaded.count + 1)))


def _cmd_image(args) -> int:
    if args.global_mode and args.window is not None:
        raise UsageError("--global and --window are mutually exclusive")
    frames = image.load_frame_dir(args.frames)
    stem = Path(args.frames).name
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results: list[tuple[int, int, image.PooledImage]] = []
    if args.window is not None:
        img_basis, indices = _image_basis(args, args.window)
        triples = image.windowed_images(frames, img_basis, args.window,
                                        args.stride)
        results = [t for t in triples if t[1] in indices]
    elif args.method == "dynamic":
        results = [(0, 1, image.dynamic_image(frames))]
    elif args.method == "mean":
        results = [(0, 1, image.mean_image(frames))]
    else:
        length = args.length if args.dct_k is not None else None
        img_basis, indices = _image_basis(args, length)
        results = [(0, i, image.eigen_image(frames, img_basis, i))
                   for i in indices]
    # mean images stay on the input intensity scale; eigen and dynamic
    # images have arbitrary-range floats and need the min-max rescale
    to_u8 = image.quantize_u8 if args.method == "mean" else image.rescale_to_u8
    for start, index, pooled in results:
        name = f"{stem}_w{start}_b{index}"
        storage.atomic_write_bytes(out_dir / f"{name}.ppm",
                                   write_ppm_bytes(to_u8(pooled)))
        if args.raw:
            storage.write_pooled_image_eepb(out_dir / f"{name}.eepb", pooled)
    print(f"wrote\t{len(results)}\timages\t{out_dir}")
    return 0


# -- report -------------------------------------------------------------------

def _parse_k_range(text: str | None, available: int) -> list[int]:
    if text is None:
        return list(range(1, available + 1))
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            ks = list(range(int(lo), int(hi) + 1))
        else:
            ks = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"bad --k-range {text!r}") from None
    if not ks or any(k < 1 or k > available for k in ks):
        raise UsageError(
            f"--k-range values must be within [1, {available}]")
    return ks


def _relative_mismatch(error: float, tail: float, total: float) -> float:
    floor = max(tail, 1e-12 * total)
    diff = abs(error - tail)
    if floor <= 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / floor


def _cmd_report(args) -> int:
    fitted = storage.read_basis(args.basis)
    if fitted.eigenvalues is None:
        raise ValueError(f"{args.basis}: basis has no eigenvalue spectrum; "
                         f"report needs a fitted eigen basis")
    if fitted.eigenvalues.size != fitted.length:
        raise ValueError(f"{args.basis}: expected {fitted.length} eigenvalues, "
                         f"found {fitted.eigenvalues.size}")
    entries = storage.read_manifest(args.manifest)
    sequences = _map_ordered(lambda p: _load_resampled(p, fitted.length),
                             entries, args.threads)
    ks = _parse_k_range(args.k_range, fitted.count)
    eigenvalues = fitted.eigenvalues
    total = math.fsum(eigenvalues)
    rows = []
    for k in ks:
        sub = fitted.truncate(k)
        error = math.fsum(reconstruction_error(s, sub) for s in sequences)
        tail = math.fsum(eigenvalues[k:])
        rows.append((k, error, tail, _relative_mismatch(error, tail, total)))
    print("k\terror\teigenvalue_tail\trelative_mismatch")
    for k, error, tail, mismatch in rows:
        print(f"{k}\t{storage.format_float(error)}\t"
              f"{storage.format_float(tail)}\t{storage.format_float(mismatch)}")
    if args.out:
        if args.format == "json":
            doc = [{"k": k, "error": error, "eigenvalue_tail": tail,
                    "relative_mismatch": mismatch}
                   for k, error, tail, mismatch in rows]
            storage.atomic_write_text(args.out, storage.dumps_json(doc) + "\n")
        elif args.format == "csv":
            lines = ["k,error,eigenvalue_tail,relative_mismatch"]
            lines += [",".join([str(k), storage.format_float(error),
                                storage.format_float(tail),
                                storage.format_float(mismatch)])
                      for k, error, tail, mismatch in rows]
            storage.atomic_write_text(args.out, "\n".join(lines) + "\n")
        else:
            raise UsageError("report output format must be csv or json")
    fig_path = _figure_path(args)
    if fig_path is not None:
        figures.save_error_figure([r[0] for r in rows], [r[1] for r in rows],
                                  [r[2] for r in rows], fig_path)
    worst = max(r[3] for r in rows)
    if worst > REL_MISMATCH_TOL:
        print(f"error: residual identity violated: relative mismatch "
              f"{storage.format_float(worst)} exceeds "
              f"{storage.format_float(REL_MISMATCH_TOL)}", file=sys.stderr)
        return 1
    return 0


# -- bench --------------------------------------------------------------------

def _cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise UsageError("no pooling methods given")
    for tag in methods:
        try:
            bench_mod.parse_method(tag)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        spec = bench_mod.SynthDatasetSpec(
            num_classes=args.classes, sequences_per_class=args.per_class,
            dim=args.dim, steps=args.steps, noise_sigma=args.noise,
            generator=args.generator, rng_seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dataset = bench_mod.generate(spec)
    report = bench_mod.evaluate(dataset, methods)
    sys.stdout.write(report.to_text())
    if args.out:
        storage.atomic_write_text(args.out, report.to_json())
    fig_path = _figure_path(args)
    if fig_path is not None:
        figures.save_bench_figure(report, fig_path)
    return 0


_HANDLERS = {
    "fit": _cmd_fit,
    "pool": _cmd_pool,
    "image": _cmd_image,
    "report": _cmd_report,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
