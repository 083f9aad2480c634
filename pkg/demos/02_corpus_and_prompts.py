#!/usr/bin/env python3
"""From raw text to training prompts: preprocessing, sampling, token layout.

Run: python demos/02_corpus_and_prompts.py
"""

import numpy as np

from cipher_icl import corpus, prompting
from cipher_icl.ciphers import letters_to_text
from cipher_icl.prompting import Scheme

rng = np.random.default_rng(1)

raw = "Cryptanalysis, 101: Frequency counts BEAT brute force (usually)."
clean = corpus.preprocess_text(raw)
print("raw:   ", raw)
print("clean: ", letters_to_text(clean))

text = open("assets/corpus.txt", "rb").read()
stream = corpus.build_stream([text], source="assets/corpus.txt")
print(f"\ncorpus: {len(stream):,} letters, train/validation boundary {stream.split_boundary:,}")
order = corpus.letter_frequency_order(stream)
print("letters by frequency:", order.as_text())

msg = corpus.sample_message(stream, 24, "train", rng)
print("\na 24-letter training window:", letters_to_text(msg))

prompt = prompting.make_prompt(Scheme.mono(), msg, rng)
item = prompting.build_training_item(prompt)
print("interleaved tokens (cipher, plain, cipher, plain, ...):")
print(" ", letters_to_text(item.tokens[:16]), "...")
print("loss mask selects the positions whose next token is plaintext:")
print(" ", "".join("^ " if m else ". " for m in item.loss_mask[:16]), "...")

prefix, answer = prompting.build_eval_prefix(prompt, 3)
print("\nevaluation prefix with 3 worked pairs:", letters_to_text(prefix))
print("the decoder must answer:", letters_to_text(np.array([answer])))
