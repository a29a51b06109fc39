"""Loading the binary benchmark files and their train/valid/test bundles.

Files are comma-separated lines of 0/1 tokens, one instance per line,
following the conventional `<name>.ts.data` / `<name>.valid.data` /
`<name>.test.data` layout.
"""

import os
from dataclasses import dataclass

import numpy as np

DATA_DIR_ENV = "SPNFOREST_DATA_DIR"

SPLIT_SUFFIXES = {"train": ".ts.data", "valid": ".valid.data", "test": ".test.data"}


@dataclass
class DatasetBundle:
    name: str
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray

    @property
    def n_vars(self):
        return self.train.shape[1]


def load_binary_csv(path):
    """Parse a CSV-of-bits file into a uint8 matrix; strict 0/1 tokens."""
    rows = []
    n_cols = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split(",")
            if n_cols is None:
                n_cols = len(tokens)
            elif len(tokens) != n_cols:
                raise ValueError(
                    f"{path}:{lineno}: expected {n_cols} columns, got {len(tokens)}"
                )
            for col, tok in enumerate(tokens):
                if tok not in ("0", "1"):
                    raise ValueError(
                        f"{path}:{lineno}: column {col}: non-binary token {tok!r}"
                    )
            rows.append([int(t) for t in tokens])
    if not rows:
        raise ValueError(f"{path}: file is empty")
    return np.array(rows, dtype=np.uint8)


def load_bundle(data_dir, name):
    """Load the three named splits, enforcing a shared column count."""
    splits = {}
    for split, suffix in SPLIT_SUFFIXES.items():
        path = os.path.join(data_dir, name + suffix)
        if not os.path.exists(path):
            raise FileNotFoundError(f"missing {split} split: {path}")
        splits[split] = load_binary_csv(path)
    n_cols = {s: m.shape[1] for s, m in splits.items()}
    if len(set(n_cols.values())) != 1:
        raise ValueError(f"{name}: column counts differ across splits: {n_cols}")
    return DatasetBundle(name=name, **splits)


def default_data_dir(cli_value=None):
    """Data directory resolution: CLI flag, then env var, then ./data."""
    if cli_value:
        return cli_value
    return os.environ.get(DATA_DIR_ENV, "data")
