#!/usr/bin/env python3
"""Keys, encryption, and round trips for both cipher schemes.

Run: python demos/01_cipher_basics.py
"""

import numpy as np

from cipher_icl import ciphers
from cipher_icl.ciphers import letters_to_text, text_to_letters

rng = np.random.default_rng(0)

print("== substitution cipher ==")
key = ciphers.sample_mono_key(rng)
print("key (image of a..z):", letters_to_text(key.table))
msg = text_to_letters("attackatdawn")
enc = ciphers.mono_encrypt(key, msg)
print("attackatdawn ->", letters_to_text(enc))
print("decrypts back:", letters_to_text(ciphers.mono_decrypt(key, enc)))

print()
print("== repeating-shift (Vigenere) cipher ==")
vkey = ciphers.sample_vigenere_key(rng, 5)
print("shifts:", vkey.shifts.tolist())
venc = ciphers.vigenere_encrypt(vkey, msg)
print("attackatdawn ->", letters_to_text(venc))
print("decrypts back:", letters_to_text(ciphers.vigenere_decrypt(vkey, venc)))

print()
print("== round trips never fail ==")
ok = 0
for _ in range(1000):
    m = rng.integers(0, 26, size=int(rng.integers(0, 50))).astype(np.uint8)
    k1 = ciphers.sample_mono_key(rng)
    k2 = ciphers.sample_vigenere_key(rng, int(rng.integers(1, 33)))
    ok += np.array_equal(ciphers.mono_decrypt(k1, ciphers.mono_encrypt(k1, m)), m)
    ok += np.array_equal(ciphers.vigenere_decrypt(k2, ciphers.vigenere_encrypt(k2, m)), m)
print(f"{ok}/2000 random (key, message) round trips exact")
