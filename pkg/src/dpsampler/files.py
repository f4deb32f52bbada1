"""File formats for datasets, distributions, and obscuring schedules.

Datasets are accepted either as an observations CSV (one 1-based integer per
line, optional ``# k=<K>`` header) or as a JSON object ``{"k": K, "counts":
[...]}``. Distributions are JSON objects ``{"k": K, "probs": [...]}``.
Schedules round-trip through CSV with 17 significant digits, which is
lossless for doubles.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from .core import CategoricalDistribution, CountVector

# Loader renormalizes any drift below this and errors above it.
DIST_SUM_ERROR = 1e-9
# Drift beyond this is renormalized with a warning.
DIST_SUM_WARN = 1e-12


def _check_k(k_file: int, k: int | None, path) -> int:
    if k is not None and int(k) != int(k_file):
        raise ValueError(f"{path}: alphabet size {k_file} does not match requested k={k}")
    return int(k_file)


def load_observations_csv(path, k: int | None = None) -> CountVector:
    """Observations CSV: one integer per line, optional ``# k=<K>`` header."""
    path = Path(path)
    header_k = None
    values = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("k="):
                header_k = int(body[2:].strip())
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected an integer observation, got {line!r}")
    if not values:
        raise ValueError(f"{path}: no observations")
    if header_k is not None:
        k = _check_k(header_k, k, path)
    if k is None:
        k = max(values)
        if k < 2:
            raise ValueError(f"{path}: cannot infer an alphabet size >= 2; pass k explicitly")
    return CountVector.from_observations(values, k)


def load_counts_json(path, k: int | None = None) -> CountVector:
    """Counts JSON: object with integer ``k`` and length-k ``counts`` array."""
    path = Path(path)
    obj = json.loads(path.read_text())
    if not isinstance(obj, dict) or "k" not in obj or "counts" not in obj:
        raise ValueError(f"{path}: expected an object with 'k' and 'counts'")
    k_file = _check_k(obj["k"], k, path)
    return CountVector(k_file, np.asarray(obj["counts"]))


def load_counts(path, k: int | None = None) -> CountVector:
    """Load a dataset file, sniffing JSON counts vs observations CSV."""
    text = Path(path).read_text().lstrip()
    if text.startswith("{"):
        return load_counts_json(path, k)
    return load_observations_csv(path, k)


def save_counts_json(d: CountVector, path) -> None:
    Path(path).write_text(
        json.dumps({"k": d.k, "counts": [int(c) for c in d.counts]}) + "\n"
    )


def load_distribution(path, k: int | None = None) -> CategoricalDistribution:
    """Distribution JSON; renormalizes small drift, warns beyond 1e-12."""
    path = Path(path)
    obj = json.loads(path.read_text())
    if not isinstance(obj, dict) or "k" not in obj or "probs" not in obj:
        raise ValueError(f"{path}: expected an object with 'k' and 'probs'")
    k_file = _check_k(obj["k"], k, path)
    probs = np.asarray(obj["probs"], dtype=np.float64)
    if probs.shape != (k_file,):
        raise ValueError(f"{path}: expected {k_file} probabilities, got {probs.size}")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise ValueError(f"{path}: probabilities must be finite and non-negative")
    total = float(probs.sum())
    if abs(total - 1.0) > DIST_SUM_ERROR:
        raise ValueError(f"{path}: probabilities sum to {total!r}, beyond the {DIST_SUM_ERROR} loader tolerance")
    if abs(total - 1.0) > DIST_SUM_WARN:
        warnings.warn(f"{path}: probabilities sum to {total!r}; renormalizing", stacklevel=2)
    return CategoricalDistribution(k_file, probs / total)


def save_distribution(p: CategoricalDistribution, path) -> None:
    Path(path).write_text(
        json.dumps({"k": p.k, "probs": [float(x) for x in p.probs]}) + "\n"
    )


def save_schedule_csv(q: np.ndarray, path) -> None:
    """Write ``m,q_m`` rows with 17 significant digits (lossless round-trip)."""
    lines = ["m,q_m"]
    for m, value in enumerate(q):
        lines.append(f"{m},{float(value):.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_schedule_csv(path) -> np.ndarray:
    """Read a schedule CSV back into the q vector, validating the index column."""
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "m,q_m":
        raise ValueError(f"{path}: expected header 'm,q_m'")
    q = []
    for expected, line in enumerate(lines[1:]):
        m_str, _, q_str = line.partition(",")
        if int(m_str) != expected:
            raise ValueError(f"{path}: schedule rows must be contiguous from m=0")
        q.append(float(q_str))
    if not q:
        raise ValueError(f"{path}: empty schedule")
    return np.array(q, dtype=np.float64)
