"""Textual instance files: header (n, sigma, seed) followed by hex-encoded
row-major complex doubles for Y and, optionally, the truth vector.

Each complex entry is one line ``<re> <im>`` in C99 hexadecimal float
notation (``float.hex()``), which round-trips exactly, diffs cleanly, and
parses in any language with strtod-style hex support.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .model import NoiseMatrix, Observation, PhaseVector

MAGIC = "phasesync-instance 1"


def save_instance(path, obs: Observation, include_truth: bool = True) -> Path:
    path = Path(path)
    lines = [MAGIC, f"n {obs.n}", f"sigma {obs.sigma!r}", f"seed {obs.noise.seed}", "Y"]
    for val in obs.y.ravel():
        lines.append(f"{val.real.hex()} {val.imag.hex()}")
    if include_truth:
        lines.append("truth")
        for val in obs.truth.entries:
            lines.append(f"{val.real.hex()} {val.imag.hex()}")
    path.write_text("\n".join(lines) + "\n")
    return path


def _parse_complex(line: str) -> complex:
    re_hex, im_hex = line.split()
    return complex(float.fromhex(re_hex), float.fromhex(im_hex))


def load_instance(path) -> tuple[Observation, bool]:
    """Read an instance file; returns (observation, truth_embedded).

    Without an embedded truth the observation carries an all-ones
    placeholder truth (any unit-diagonal Hermitian Y decomposes exactly
    against any unimodular vector), and losses against the truth are not
    meaningful.
    """
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != MAGIC:
        raise ValueError("not a phasesync instance file")
    pos = 1
    header: dict[str, str] = {}
    while pos < len(text) and text[pos].strip() != "Y":
        key, val = text[pos].split(maxsplit=1)
        header[key] = val
        pos += 1
    if pos >= len(text):
        raise ValueError("instance file has no Y section")
    n = int(header["n"])
    sigma = float(header["sigma"])
    seed = int(header.get("seed", "0"))
    pos += 1
    if len(text) < pos + n * n:
        raise ValueError("instance file truncated in Y section")
    y = np.array([_parse_complex(text[pos + i]) for i in range(n * n)],
                 dtype=np.complex128).reshape(n, n)
    pos += n * n
    truth_embedded = pos < len(text) and text[pos].strip() == "truth"
    if truth_embedded:
        pos += 1
        if len(text) < pos + n:
            raise ValueError("instance file truncated in truth section")
        z = np.array([_parse_complex(text[pos + i]) for i in range(n)],
                     dtype=np.complex128)
        truth = PhaseVector(z)
    else:
        truth = PhaseVector(np.ones(n, dtype=np.complex128))
    if sigma > 0:
        w = (y - np.outer(truth.entries, truth.entries.conj())) / sigma
        np.fill_diagonal(w, 0.0)
        w = (w + w.conj().T) / 2.0
    else:
        w = np.zeros((n, n), dtype=np.complex128)
    noise = NoiseMatrix(w, seed=seed)
    obs = Observation(y=y, sigma=sigma, truth=truth, noise=noise)
    return obs, truth_embedded
