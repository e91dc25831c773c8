"""Dense CP tensor decomposition (ALS, TASD) and a seeded simulation harness."""

from __future__ import annotations

import csv
import io

from ._core import (
    NumericalError,
    csv_header,
    decompose,
    generate,
    loss_general,
    loss_matched,
    methods,
    read_cpdt,
    reconstruct,
    simulate,
    unfold,
    write_cpdt,
)

__all__ = [
    "NumericalError",
    "csv_header",
    "decompose",
    "generate",
    "loss_general",
    "loss_matched",
    "methods",
    "read_cpdt",
    "reconstruct",
    "simulate",
    "simulate_rows",
    "unfold",
    "write_cpdt",
]


def simulate_rows(config: str, alpha: bool = False, jobs: int | None = None) -> list[dict[str, str]]:
    """Run a sweep and return the report as a list of dicts keyed by CSV column."""
    return list(csv.DictReader(io.StringIO(simulate(config, alpha=alpha, jobs=jobs))))
