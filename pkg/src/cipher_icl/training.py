"""Training loop: fresh random prompts every step, AdamW updates, logging.

Every batch item of every step gets its own counter-derived random substream
(master seed + (stream kind, step, item index)), so sampled data is
independent of batch assembly order and runs are reproducible. There is no
learning-rate schedule. A non-finite loss aborts the run rather than
continuing; aborts and I/O failures leave a resumable checkpoint behind when
a checkpoint directory is configured.

Log files are line-delimited:
    step=<int> loss=<float> val_loss=<float|-> ms=<float>
"""

from __future__ import annotations

import dataclasses
import itertools
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from . import model as model_mod
from . import prompting
from .corpus import LetterStream
from .model import ModelConfig, OptimizerState, Params
from .prompting import Scheme

_STREAM_INIT = 0
_STREAM_TRAIN = 1
_STREAM_VAL = 2


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; the run was aborted with diagnostics."""


@dataclass(frozen=True)
class TrainConfig:
    scheme: Scheme = field(default_factory=Scheme.mono)
    layers: int = 2
    heads: int = 4
    embed_dim: int = 64
    context_length: int = 128
    batch_size: int = 16
    steps: int = 2000
    lr: float = 1e-3
    weight_decay: float = 0.1
    seed: int = 0
    log_interval: int = 10
    val_interval: int = 500
    val_prompts: int = 32
    checkpoint_interval: int = 1000
    tied_head: bool = False

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.context_length < 4 or self.context_length % 2:
            raise ValueError("context length must be even and >= 4")
        for name in ("log_interval", "val_interval", "checkpoint_interval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def model_config(self) -> ModelConfig:
        return ModelConfig(
            layers=self.layers,
            heads=self.heads,
            embed_dim=self.embed_dim,
            context_length=self.context_length,
            tied_head=self.tied_head,
        )


def desk_config(**overrides) -> TrainConfig:
    """Small CPU-friendly preset: trains a usable substitution model in minutes."""
    return replace(TrainConfig(), **overrides)


def paper_config(**overrides) -> TrainConfig:
    """Full-size preset (12 layers, 8 heads, 256-dim, ~9.5M parameters)."""
    base = TrainConfig(
        layers=12,
        heads=8,
        embed_dim=256,
        context_length=256,
        batch_size=64,
        steps=20_000,
        val_interval=1000,
        checkpoint_interval=2000,
    )
    return replace(base, **overrides)


@dataclass(frozen=True)
class TrainLogRecord:
    step: int
    loss: float
    val_loss: float | None
    ms: float

    def format(self) -> str:
        val = "-" if self.val_loss is None else f"{self.val_loss:.6f}"
        return f"step={self.step} loss={self.loss:.6f} val_loss={val} ms={self.ms:.3f}"


@dataclass
class TrainResult:
    params: Params
    config: TrainConfig
    opt_state: OptimizerState
    records: list[TrainLogRecord]
    checkpoint_path: Path | None = None


def _prompt_rng(seed: int, kind: int, step: int, index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(kind, step, index))
    )


def _sample_batch(
    config: TrainConfig, stream: LetterStream, step: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list]:
    tokens, targets, masks, keys = [], [], [], []
    for i in range(config.batch_size):
        rng = _prompt_rng(config.seed, _STREAM_TRAIN, step, i)
        prompt = prompting.sample_training_prompt(
            config.scheme, stream, rng, config.context_length
        )
        item = prompting.build_training_item(prompt)
        tokens.append(item.tokens)
        targets.append(item.targets)
        masks.append(item.loss_mask)
        keys.append(prompt.key)
    return np.stack(tokens), np.stack(targets), np.stack(masks), keys


def validation_loss(
    params: Params,
    config: TrainConfig,
    stream: LetterStream,
    n_prompts: int,
    seed: int,
    step: int = 0,
) -> float:
    """Mean masked loss over fresh-key prompts from the validation split."""
    if n_prompts < 1:
        raise ValueError("n_prompts must be >= 1")
    tokens, targets, masks = [], [], []
    for i in range(n_prompts):
        rng = _prompt_rng(seed, _STREAM_VAL, step, i)
        prompt = prompting.sample_training_prompt(
            config.scheme, stream, rng, config.context_length, split="validation"
        )
        item = prompting.build_training_item(prompt)
        tokens.append(item.tokens)
        targets.append(item.targets)
        masks.append(item.loss_mask)
    logits = model_mod.forward(params, config.model_config, np.stack(tokens))
    return model_mod.masked_loss(logits, np.stack(targets), np.stack(masks))


def _save(params, config: TrainConfig, state, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    model_mod.save_checkpoint(params, config.model_config, state, path)


def train(
    config: TrainConfig,
    stream: LetterStream,
    out_dir: str | Path | None = None,
    log_file: IO[str] | None = None,
    resume_from: str | Path | None = None,
    verbose: bool = False,
) -> TrainResult:
    """Run config.steps optimizer steps over freshly sampled prompts.

    Writes periodic checkpoints and a final one under out_dir (if given),
    appends log lines to log_file, and returns the final parameters plus the
    collected log records. resume_from restarts from a saved checkpoint's
    optimizer step counter; the remaining steps sample exactly the prompts
    the uninterrupted run would have used.
    """
    if config.context_length // 2 > stream.split_boundary:
        raise ValueError("training split is smaller than one prompt message")
    if config.context_length // 2 > len(stream) - stream.split_boundary:
        raise ValueError("validation split is smaller than one prompt message")
    out_dir = Path(out_dir) if out_dir is not None else None

    if resume_from is not None:
        params, model_config, state = model_mod.load_checkpoint(resume_from)
        if model_config != config.model_config:
            raise ValueError("checkpoint architecture does not match config")
        if state is None:
            raise ValueError("checkpoint has no optimizer state; cannot resume")
        start_step = state.step + 1
    else:
        rng = _prompt_rng(config.seed, _STREAM_INIT, 0, 0)
        params = model_mod.init_params(config.model_config, rng)
        state = OptimizerState(lr=config.lr, weight_decay=config.weight_decay)
        start_step = 1

    records: list[TrainLogRecord] = []

    def emit(record: TrainLogRecord) -> None:
        records.append(record)
        if log_file is not None:
            log_file.write(record.format() + "\n")
            log_file.flush()
        if verbose:
            print(record.format(), flush=True)

    final_path = out_dir / "final.ckpt" if out_dir else None
    try:
        for step in range(start_step, config.steps + 1):
            t0 = time.perf_counter()
            tokens, targets, masks, _ = _sample_batch(config, stream, step)
            loss, grads = model_mod.backward(
                params, config.model_config, tokens, targets, masks
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss {loss} at step {step}; aborting"
                )
            model_mod.adamw_step(params, grads, state)
            ms = (time.perf_counter() - t0) * 1000.0

            if step % config.log_interval == 0 or step == config.steps:
                val = None
                if step % config.val_interval == 0 or step == config.steps:
                    val = validation_loss(
                        params, config, stream, config.val_prompts, config.seed, step
                    )
                emit(TrainLogRecord(step=step, loss=loss, val_loss=val, ms=ms))
            if out_dir and step % config.checkpoint_interval == 0 and step < config.steps:
                _save(params, config, state, out_dir / f"step_{step:06d}.ckpt")
    except Exception:
        if out_dir:
            _save(params, config, state, out_dir / "abort.ckpt")
        raise

    if final_path:
        _save(params, config, state, final_path)
    return TrainResult(
        params=params,
        config=config,
        opt_state=state,
        records=records,
        checkpoint_path=final_path,
    )


_GRID_FIELDS = {
    "batch": "batch_size",
    "context": "context_length",
    "steps": "steps",
    "lr": "lr",
}


@dataclass
class AblationRun:
    name: str
    config: TrainConfig
    log_path: Path | None = None
    checkpoint_path: Path | None = None
    error: str | None = None


def run_ablation(
    base: TrainConfig,
    grid: dict[str, Sequence],
    stream: LetterStream,
    out_dir: str | Path,
    verbose: bool = False,
) -> list[AblationRun]:
    """Train once per grid point; a failed run is recorded and the rest continue.

    Grid keys are short axis names ("batch", "context", "steps", "lr"); each
    run's artifacts are named by its grid coordinates, e.g. batch=16.log.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("ablation grid must be nonempty")
    for axis in grid:
        if axis not in _GRID_FIELDS:
            raise ValueError(f"unknown grid axis {axis!r} (use {sorted(_GRID_FIELDS)})")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    axes = sorted(grid)
    runs: list[AblationRun] = []
    for point in itertools.product(*(grid[a] for a in axes)):
        name = ",".join(f"{a}={v}" for a, v in zip(axes, point))
        run = AblationRun(name=name, config=base)
        try:
            cfg = replace(base, **{_GRID_FIELDS[a]: v for a, v in zip(axes, point)})
            run.config = cfg
            run_dir = out_dir / name
            run_dir.mkdir(parents=True, exist_ok=True)
            log_path = out_dir / f"{name}.log"
            with open(log_path, "w") as log_f:
                result = train(cfg, stream, out_dir=run_dir, log_file=log_f, verbose=verbose)
            run.log_path = log_path
            run.checkpoint_path = result.checkpoint_path
        except Exception as exc:  # record and continue with the other runs
            run.error = f"{type(exc).__name__}: {exc}"
        runs.append(run)
    return runs


def config_fields() -> set[str]:
    return {f.name for f in dataclasses.fields(TrainConfig)}
