"""Accuracy-vs-context-examples curves for the model and the baseline decoders.

For each evaluation prompt the decoder answers every prefix length j in
0..max_examples: after j worked (cipher, plain) pairs, predict the plaintext
of the (j+1)-th ciphertext letter. Abstentions count as incorrect. Model
decoders score all prefixes of a prompt in one forward pass (the logit at
token position 2j is the prediction for prefix j). Curves aggregate to
per-j accuracy with binomial standard errors and serialize to CSV.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import baselines, corpus, model as model_mod, prompting
from .baselines import (
    DEFAULT_CANDIDATES,
    MonoFreqDecoder,
    MonoNaiveDecoder,
    VigKnownFreqDecoder,
    VigKnownNaiveDecoder,
    VigSearchDecoder,
)
from .corpus import LetterStream
from .model import ModelConfig, Params
from .prompting import Prompt, Scheme

CSV_HEADER = "scheme,key_len,message_dist,decoder,examples,accuracy,n,stderr"

BASELINE_NAMES = ("mono_naive", "mono_freq", "vig_naive", "vig_freq", "vig_search")

_STREAM_EVAL = 3


@dataclass(frozen=True)
class EvalSetting:
    scheme: Scheme
    dist: str = "corpus"
    decoder: str = "mono_naive"
    n_prompts: int = 200
    max_examples: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.dist not in ("corpus", "uniform"):
            raise ValueError(f"dist must be 'corpus' or 'uniform', got {self.dist!r}")
        if self.decoder not in BASELINE_NAMES and self.decoder != "model":
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.n_prompts < 1 or self.max_examples < 0:
            raise ValueError("n_prompts must be >= 1 and max_examples >= 0")


@dataclass(frozen=True)
class EvalCurve:
    examples: np.ndarray
    accuracy: np.ndarray
    n: np.ndarray
    stderr: np.ndarray

    @classmethod
    def from_counts(cls, correct: np.ndarray, n_prompts: int) -> "EvalCurve":
        acc = correct / n_prompts
        stderr = np.sqrt(acc * (1.0 - acc) / n_prompts)
        return cls(
            examples=np.arange(correct.size),
            accuracy=acc,
            n=np.full(correct.size, n_prompts, dtype=np.int64),
            stderr=stderr,
        )


def model_predict(params: Params, config: ModelConfig, prefix: np.ndarray) -> int:
    """Argmax next-letter prediction at the end of an evaluation prefix."""
    prefix = np.asarray(prefix)
    if prefix.ndim != 1 or prefix.size % 2 == 0:
        raise ValueError("prefix must be 1-D and end at a ciphertext position")
    if prefix.size > config.context_length:
        raise ValueError("prefix longer than model context")
    logits = model_mod.forward(params, config, prefix)
    return int(np.argmax(logits[-1]))


def _sample_eval_prompt(
    setting: EvalSetting, stream: LetterStream | None, index: int
) -> Prompt:
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=setting.seed, spawn_key=(_STREAM_EVAL, index))
    )
    length = setting.max_examples + 1
    if setting.dist == "corpus":
        if stream is None:
            raise ValueError("corpus-distribution evaluation needs a letter stream")
        message = corpus.sample_message(stream, length, "validation", rng)
    else:
        message = corpus.sample_uniform_message(length, rng)
    return prompting.make_prompt(setting.scheme, message, rng)


def _make_decoder(setting: EvalSetting, order, candidates):
    name = setting.decoder
    if name == "mono_naive":
        return MonoNaiveDecoder()
    if name == "mono_freq":
        if order is None:
            raise ValueError("mono_freq needs a letter-frequency order")
        return MonoFreqDecoder(order.ranking)
    if name in ("vig_naive", "vig_freq"):
        if setting.scheme.key_length is None:
            raise ValueError(f"{name} assumes a fixed key length in the scheme")
        cls = VigKnownNaiveDecoder if name == "vig_naive" else VigKnownFreqDecoder
        return cls(setting.scheme.key_length)
    if name == "vig_search":
        return VigSearchDecoder(candidates)
    raise ValueError(f"unknown decoder {name!r}")


def _model_curve(
    setting: EvalSetting,
    stream: LetterStream | None,
    params: Params,
    config: ModelConfig,
    batch_size: int,
) -> np.ndarray:
    J = setting.max_examples
    if 2 * J + 1 > config.context_length:
        raise ValueError(
            f"max_examples {J} needs {2 * J + 1} tokens; "
            f"model context is {config.context_length}"
        )
    correct = np.zeros(J + 1, dtype=np.int64)
    for start in range(0, setting.n_prompts, batch_size):
        prompts = [
            _sample_eval_prompt(setting, stream, i)
            for i in range(start, min(start + batch_size, setting.n_prompts))
        ]
        seqs = np.stack(
            [prompting.interleave(p.ciphertext, p.plaintext)[: 2 * J + 1] for p in prompts]
        )
        logits = model_mod.forward(params, config, seqs)
        preds = np.argmax(logits[:, 0::2, :], axis=-1)  # (batch, J+1)
        truth = np.stack([p.plaintext for p in prompts])
        correct += (preds == truth).sum(axis=0)
    return correct


def accuracy_curve(
    setting: EvalSetting,
    stream: LetterStream | None = None,
    model_params: Params | None = None,
    model_config: ModelConfig | None = None,
    candidates: Sequence[int] = DEFAULT_CANDIDATES,
    batch_size: int = 64,
) -> EvalCurve:
    """Score one decoder on n_prompts fresh prompts at every prefix length."""
    if setting.decoder == "model":
        if model_params is None or model_config is None:
            raise ValueError("model evaluation needs parameters and a config")
        correct = _model_curve(setting, stream, model_params, model_config, batch_size)
        return EvalCurve.from_counts(correct, setting.n_prompts)

    order = None
    if setting.decoder == "mono_freq":
        if stream is None:
            raise ValueError("mono_freq needs a corpus stream for its letter ranking")
        order = corpus.letter_frequency_order(corpus.LetterStream(stream.train))
    J = setting.max_examples
    correct = np.zeros(J + 1, dtype=np.int64)
    for i in range(setting.n_prompts):
        prompt = _sample_eval_prompt(setting, stream, i)
        decoder = _make_decoder(setting, order, candidates)
        cipher, plain = prompt.ciphertext, prompt.plaintext
        for j in range(J + 1):
            if decoder.predict(int(cipher[j]), j) == int(plain[j]):
                correct[j] += 1
            decoder.observe(int(cipher[j]), int(plain[j]), j)
    return EvalCurve.from_counts(correct, setting.n_prompts)


def _setting_sort_key(setting: EvalSetting):
    return (setting.scheme.kind, setting.scheme.key_len_label, setting.dist, setting.decoder)


def format_curves_csv(curves: Sequence[tuple[EvalSetting, EvalCurve]]) -> str:
    """Deterministic CSV text: rows ordered by setting fields, then j ascending."""
    if not curves:
        raise ValueError("no curves to write")
    lines = [CSV_HEADER]
    for setting, curve in sorted(curves, key=lambda sc: _setting_sort_key(sc[0])):
        for j in range(curve.examples.size):
            lines.append(
                "{},{},{},{},{},{:.6f},{},{:.6f}".format(
                    setting.scheme.kind,
                    setting.scheme.key_len_label,
                    setting.dist,
                    setting.decoder,
                    int(curve.examples[j]),
                    float(curve.accuracy[j]),
                    int(curve.n[j]),
                    float(curve.stderr[j]),
                )
            )
    return "\n".join(lines) + "\n"


def write_curves_csv(
    curves: Sequence[tuple[EvalSetting, EvalCurve]], path: str | Path
) -> None:
    Path(path).write_text(format_curves_csv(curves))
