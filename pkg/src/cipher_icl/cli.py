"""Command-line entry point: corpus prep, training, evaluation, ablations.

    cipher-icl prep INPUT.txt [INPUT2.txt ...] --out corpus.bin
    cipher-icl train --corpus corpus.bin --preset desk --scheme mono --out runs/mono
    cipher-icl eval --baseline vig_naive --scheme vig --key-len 8 --out curve.csv
    cipher-icl eval --checkpoint runs/mono/final.ckpt --corpus corpus.bin --out m.csv
    cipher-icl ablate --grid batch=16,32,64,96 --corpus corpus.bin --out runs/ablate

Exit codes: 0 success, 1 runtime failure, 2 usage error. Every command is
deterministic given --seed. The CIPHER_ICL_CACHE environment variable
overrides the default cache directory used when --corpus/--out are omitted
by prep and train.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

# numpy's thread pools are sized at import time, so --threads must be applied
# before any submodule import pulls numpy in; keep heavy imports inside main().
_THREAD_ENV_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

USAGE_ERROR = 2
RUNTIME_ERROR = 1

PRESETS = ("desk", "paper")


class UsageError(Exception):
    pass


def default_cache_dir() -> Path:
    return Path(os.environ.get("CIPHER_ICL_CACHE", "cache"))


def _apply_threads(n: int | None) -> None:
    if n is None:
        return
    if n < 1:
        raise UsageError("--threads must be >= 1")
    for var in _THREAD_ENV_VARS:
        os.environ[var] = str(n)


def _parse_config_file(path: str, known: set[str]) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


_CONFIG_KEYS = {
    "scheme": str,
    "key_len": int,
    "key_range": str,
    "layers": int,
    "heads": int,
    "dim": int,
    "context": int,
    "batch": int,
    "steps": int,
    "lr": float,
    "wd": float,
    "seed": int,
    "tied_head": lambda s: s.lower() in ("1", "true", "yes"),
}


def _build_scheme(kind: str, key_len, key_range):
    from .prompting import Scheme

    if kind == "mono":
        if key_len is not None or key_range is not None:
            raise UsageError("--key-len/--key-range require --scheme vig or vig-var")
        return Scheme.mono()
    if kind == "vig":
        if key_len is None:
            raise UsageError("--scheme vig requires --key-len")
        return Scheme.vigenere(int(key_len))
    if kind == "vig-var":
        lo, hi = (4, 32) if key_range is None else key_range
        return Scheme.vigenere_variable(int(lo), int(hi))
    raise UsageError(f"unknown scheme {kind!r} (use mono, vig, or vig-var)")


def _parse_key_range(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("--key-range expects LO,HI")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise UsageError(f"bad --key-range: {exc}") from exc


def _resolve_train_config(args):
    """Preset, then config file, then command-line flags, in rising precedence."""
    from . import training

    base = training.paper_config() if args.preset == "paper" else training.desk_config()
    merged: dict = {}
    if args.config:
        raw = _parse_config_file(args.config, set(_CONFIG_KEYS))
        for key, text in raw.items():
            merged[key] = _CONFIG_KEYS[key](text)
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    if "key_range" in merged and isinstance(merged["key_range"], str):
        merged["key_range"] = _parse_key_range(merged["key_range"])

    kind = merged.pop("scheme", None)
    key_len = merged.pop("key_len", None)
    key_range = merged.pop("key_range", None)
    if kind is None:
        kind = "vig" if key_len is not None else "vig-var" if key_range is not None else "mono"
    scheme = _build_scheme(kind, key_len, key_range)
    rename = {"dim": "embed_dim", "context": "context_length", "batch": "batch_size", "wd": "weight_decay"}
    fields = {rename.get(k, k): v for k, v in merged.items()}
    try:
        return dataclasses.replace(base, scheme=scheme, **fields)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def _load_stream(path: str | None, needed_for: str):
    from . import corpus

    if path is None:
        path = default_cache_dir() / "corpus.bin"
    if not Path(path).exists():
        raise UsageError(f"{needed_for} needs a corpus cache; not found at {path}")
    return corpus.load_stream(path)


def _echo_config(cfg) -> str:
    return (
        f"config: scheme={cfg.scheme.kind}{'' if cfg.scheme.kind == 'mono' else ':' + cfg.scheme.key_len_label} "
        f"batch={cfg.batch_size} steps={cfg.steps} lr={cfg.lr} wd={cfg.weight_decay} "
        f"context={cfg.context_length} layers={cfg.layers} heads={cfg.heads} "
        f"dim={cfg.embed_dim} seed={cfg.seed}"
    )


def cmd_prep(args) -> int:
    from . import corpus
    from .ciphers import ALPHABET

    out = Path(args.out) if args.out else default_cache_dir() / "corpus.bin"
    stream = corpus.load_text_files(args.inputs)
    if len(stream) == 0:
        raise UsageError("no letters found in the input files")
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus.save_stream(stream, out)
    order = corpus.letter_frequency_order(stream)
    top5 = " ".join(
        f"{ALPHABET[a]}:{order.counts[a]}" for a in order.ranking[:5]
    )
    print(f"wrote {out}: {len(stream)} letters, split boundary {stream.split_boundary}")
    print(f"top letters: {top5}")
    return 0


def cmd_train(args) -> int:
    from . import training

    cfg = _resolve_train_config(args)
    print(_echo_config(cfg))
    if args.dry_run:
        return 0
    stream = _load_stream(args.corpus, "train")
    out_dir = Path(args.out) if args.out else None
    log_f = None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        log_f = open(out_dir / "train.log", "w")
    try:
        result = training.train(
            cfg,
            stream,
            out_dir=out_dir,
            log_file=log_f,
            resume_from=args.resume,
            verbose=not args.quiet,
        )
    except Exception as exc:
        if out_dir:
            print(
                f"error: {exc}\ntraining aborted; resumable checkpoint at "
                f"{out_dir / 'abort.ckpt'} (use --resume)",
                file=sys.stderr,
            )
            return RUNTIME_ERROR
        raise
    finally:
        if log_f:
            log_f.close()
    final = result.records[-1]
    print(f"done: final loss {final.loss:.6f}" + (f", checkpoint {result.checkpoint_path}" if result.checkpoint_path else ""))
    return 0


def cmd_eval(args) -> int:
    from . import evaluation, model as model_mod

    if (args.checkpoint is None) == (args.baseline is None):
        raise UsageError("exactly one of --checkpoint or --baseline is required")

    kind = args.scheme
    if kind is None:
        kind = "vig" if args.key_len is not None else "vig-var" if args.key_range is not None else "mono"
    scheme = _build_scheme(kind, args.key_len, args.key_range)
    decoder = args.baseline if args.baseline else "model"
    try:
        setting = evaluation.EvalSetting(
            scheme=scheme,
            dist=args.dist,
            decoder=decoder,
            n_prompts=args.n_prompts,
            max_examples=args.max_examples,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    params = config = None
    if args.checkpoint:
        params, config, _ = model_mod.load_checkpoint(args.checkpoint)

    stream = None
    if args.dist == "corpus" or decoder == "mono_freq":
        stream = _load_stream(args.corpus, f"--dist {args.dist} / {decoder}")

    try:
        curve = evaluation.accuracy_curve(
            setting, stream=stream, model_params=params, model_config=config
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    evaluation.write_curves_csv([(setting, curve)], args.out)
    print(f"wrote {args.out}: {setting.max_examples + 1} points over {setting.n_prompts} prompts")
    return 0


def _parse_grid(text: str) -> dict[str, list]:
    grid: dict[str, list] = {}
    for part in text.split(";"):
        if "=" not in part:
            raise UsageError(f"bad grid {part!r}; expected axis=v1,v2,...")
        axis, _, values = part.partition("=")
        axis = axis.strip()
        items = [v.strip() for v in values.split(",") if v.strip()]
        if not axis or not items:
            raise UsageError(f"bad grid {part!r}; expected axis=v1,v2,...")
        cast = float if axis == "lr" else int
        try:
            grid[axis] = [cast(v) for v in items]
        except ValueError as exc:
            raise UsageError(f"bad grid value in {part!r}: {exc}") from exc
    return grid


def cmd_ablate(args) -> int:
    from . import training

    grid = _parse_grid(args.grid)
    cfg = _resolve_train_config(args)
    stream = _load_stream(args.corpus, "ablate")
    try:
        runs = training.run_ablation(
            cfg, grid, stream, args.out, verbose=not args.quiet
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    failed = [r for r in runs if r.error]
    for run in runs:
        status = f"FAILED ({run.error})" if run.error else f"ok, log {run.log_path}"
        print(f"{run.name}: {status}")
    return RUNTIME_ERROR if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cipher-icl",
        description="Train and evaluate in-context cipher decryption at desk scale.",
    )
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS/OpenMP worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="preprocess text files into a letter-stream cache")
    p.add_argument("inputs", nargs="+", help="plain-text files, concatenated in order")
    p.add_argument("--out", help="cache file path (default: <cache dir>/corpus.bin)")
    p.set_defaults(func=cmd_prep)

    def add_train_flags(p):
        p.add_argument("--preset", choices=PRESETS, default="desk")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--scheme", choices=("mono", "vig", "vig-var"), default=None)
        p.add_argument("--key-len", dest="key_len", type=int, default=None)
        p.add_argument("--key-range", dest="key_range", type=_parse_key_range, default=None)
        p.add_argument("--layers", type=int, default=None)
        p.add_argument("--heads", type=int, default=None)
        p.add_argument("--dim", type=int, default=None)
        p.add_argument("--context", type=int, default=None)
        p.add_argument("--batch", type=int, default=None)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--lr", type=float, default=None)
        p.add_argument("--wd", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--corpus", help="corpus cache file")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("train", help="train a model on freshly sampled prompts")
    add_train_flags(p)
    p.add_argument("--out", help="output directory for checkpoints and train.log")
    p.add_argument("--resume", help="resume from a checkpoint with optimizer state")
    p.add_argument("--dry-run", action="store_true", help="echo the config and exit")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="write an accuracy-vs-examples CSV curve")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--checkpoint", help="model checkpoint to evaluate")
    group.add_argument("--baseline", choices=("mono_naive", "mono_freq", "vig_naive", "vig_freq", "vig_search"))
    p.add_argument("--scheme", choices=("mono", "vig", "vig-var"), default=None)
    p.add_argument("--key-len", dest="key_len", type=int, default=None)
    p.add_argument("--key-range", dest="key_range", type=_parse_key_range, default=None)
    p.add_argument("--dist", choices=("corpus", "uniform"), default="corpus")
    p.add_argument("--n-prompts", type=int, default=200)
    p.add_argument("--max-examples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corpus", help="corpus cache file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="train once per grid point (batch=... or context=...)")
    add_train_flags(p)
    p.add_argument("--grid", required=True, help="axis=v1,v2,... (axes: batch, context, steps, lr)")
    p.add_argument("--out", required=True, help="output directory tree")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_threads(args.threads)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
