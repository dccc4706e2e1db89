"""Flat key = value files for frozen reference numbers."""

from __future__ import annotations


def save_golden(path, values: dict) -> None:
    """Write floats as ``key = repr(value)`` lines, sorted by key."""
    with open(path, "w") as fh:
        fh.write("# frozen reference values; regenerate only deliberately\n")
        for key in sorted(values):
            fh.write(f"{key} = {values[key]!r}\n")


def load_golden(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            if not _:
                raise ValueError(f"malformed golden line: {line!r}")
            out[key.strip()] = float(val.strip())
    return out
