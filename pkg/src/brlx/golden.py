"""Frozen fitted constants for the verification suites.

The JSON file under ``golden/`` is written by ``tools/refit_goldens.py``
and checked in; nothing inside the package ever writes it.  ``constant``
returns the frozen fit itself; ``ceiling`` multiplies in the recorded
headroom and is what suites asserting "stays under the frozen bound" use.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .errors import ConfigurationError


@lru_cache(maxsize=1)
def load() -> dict:
    text = resources.files("brlx").joinpath("golden/fitted_constants.json").read_text()
    return json.loads(text)


def constant(name: str) -> float:
    try:
        return float(load()["constants"][name])
    except KeyError as exc:
        raise ConfigurationError(f"no frozen constant named {name!r}") from exc


def ceiling(name: str) -> float:
    data = load()
    if name not in data["constants"]:
        raise ConfigurationError(f"no frozen constant named {name!r}")
    headroom = data.get("headroom", {}).get(name, data["default_headroom"])
    return float(data["constants"][name]) * float(headroom)
