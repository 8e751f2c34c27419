"""Shared numerical tolerances.

The defaults can be overridden through the ``FINADAPT_TOL`` environment
variable, either as a single number (applied to feasibility and optimality)
or as comma separated ``key=value`` pairs, e.g.
``FINADAPT_TOL="feasibility=1e-8,integrality=1e-5"``.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-7
    optimality: float = 1e-7
    integrality: float = 1e-6
    # pivots with magnitude below this are treated as zero
    pivot: float = 1e-9
    # relative singular-value cutoff for affine rank
    rank: float = 1e-9
    # coefficient magnitude under which an affine term counts as zero
    zero: float = 1e-12
    # default tolerance of the cover-verification oracle
    verify: float = 1e-6


def tolerances_from_env(value: str | None = None) -> Tolerances:
    raw = os.environ.get("FINADAPT_TOL") if value is None else value
    if not raw:
        return Tolerances()
    raw = raw.strip()
    try:
        scalar = float(raw)
    except ValueError:
        pass
    else:
        return Tolerances(feasibility=scalar, optimality=scalar)
    fields = {f.name for f in dataclasses.fields(Tolerances)}
    updates = {}
    for item in raw.split(","):
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in fields:
            raise ValueError(f"unknown tolerance {key!r} in FINADAPT_TOL")
        updates[key] = float(val)
    return Tolerances(**updates)


DEFAULT_TOL = tolerances_from_env()
