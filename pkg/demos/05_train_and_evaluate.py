#!/usr/bin/env python3
"""Train a small model on substitution prompts and compare it to the baselines.

A shortened run (600 steps) for demonstration; use the CLI with the desk or
paper preset for real runs. Takes a couple of minutes on a laptop CPU.

Run: python demos/05_train_and_evaluate.py
"""

from cipher_icl import corpus, training
from cipher_icl.evaluation import EvalSetting, accuracy_curve, write_curves_csv
from cipher_icl.prompting import Scheme

stream = corpus.build_stream([open("assets/corpus.txt", "rb").read()])

cfg = training.desk_config(steps=600, log_interval=100)
print(f"training {cfg.model_config.param_count():,} parameters for {cfg.steps} steps ...")
result = training.train(cfg, stream, verbose=True)

settings = dict(scheme=Scheme.mono(), dist="corpus", n_prompts=300, max_examples=60)
model_setting = EvalSetting(decoder="model", **settings)
curves = [
    (model_setting, accuracy_curve(model_setting, stream=stream,
                                   model_params=result.params,
                                   model_config=cfg.model_config)),
]
for name in ("mono_naive", "mono_freq"):
    s = EvalSetting(decoder=name, **settings)
    curves.append((s, accuracy_curve(s, stream=stream)))

print(f"\n{'j':>4} {'model':>8} {'naive':>8} {'freq':>8}")
for j in (0, 5, 10, 20, 40, 60):
    row = [c.accuracy[j] for _, c in curves]
    print(f"{j:>4} " + " ".join(f"{a:>8.3f}" for a in row))

write_curves_csv(curves, "demo_curves.csv")
print("\nwrote demo_curves.csv (plot it with the frontend: "
      "`node frontend/dist/cli.js curves --csv demo_curves.csv --out demo.svg`)")
