"""Train a small decoder-only transformer to in-context learn private-key
cipher decryption, and benchmark it against exact classical decoders."""

__version__ = "0.1.0"
