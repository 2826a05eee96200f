"""Synthetic example datasets shipped with the package.

Both files are regenerated bit-for-bit by :func:`write_fixtures`, which
lets the tests confirm the bundled copies were not edited by hand.
"""

from __future__ import annotations

import csv
import io
from importlib import resources
from pathlib import Path

import numpy as np

from . import core
from .core import GmolParams
from .regression import RegParams
from .simulate import simulate_censored_design

FIXTURE_SEED = 1234
LOMAX_TRUTH = GmolParams(1.0, 1.0, 2.0, 1.0)
LOMAX_N = 100
CENSORED_TRUTH = RegParams(0.5, 0.3, (0.6, 0.8), (0.2, 0.4))
CENSORED_N = 300
CENSORED_BOUND = 15.0

LOMAX_FILE = "lomax_sample.csv"
CENSORED_FILE = "censored_sample.csv"


def lomax_sample() -> np.ndarray:
    """100 Lomax(tau=2, beta=1) draws from seed 1234."""
    return core.sample(LOMAX_N, LOMAX_TRUTH, seed=FIXTURE_SEED)


def censored_sample():
    """300 censored GMOL regression observations with one covariate ``x1``."""
    rng = np.random.default_rng(FIXTURE_SEED)
    return simulate_censored_design(CENSORED_TRUTH, CENSORED_N, CENSORED_BOUND, rng)


def _render(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def fixture_texts() -> dict[str, str]:
    x = lomax_sample()
    d = censored_sample()
    return {
        LOMAX_FILE: _render(["time"], [[format(v, ".12g")] for v in x]),
        CENSORED_FILE: _render(
            ["time", "status", "x1"],
            [[format(t, ".12g"), int(s), format(v, ".12g")] for t, s, v in zip(d.x, d.delta, d.V[:, 1])],
        ),
    }


def write_fixtures(directory) -> list[Path]:
    directory = Path(directory)
    paths = []
    for name, text in fixture_texts().items():
        p = directory / name
        p.write_text(text, encoding="utf-8", newline="")
        paths.append(p)
    return paths


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture."""
    return Path(str(resources.files("gmol") / "data" / name))
