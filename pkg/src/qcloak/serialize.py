"""Versioned structured-text (JSON) documents for media and potentials.

Floats are written with 17 significant digits so every double round-trips
exactly; key order is fixed, so identical inputs serialize to identical
bytes and solver runs are reproducible from saved artifacts.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from .errors import ConfigurationError
from .media import (
    AnisotropicRadialMedium,
    CorePotential,
    LayeredMedium,
    PotentialShell,
    RadialPotential,
    Shell,
)

SCHEMA_LAYERED = "qcloak.layered-medium/1"
SCHEMA_POTENTIAL = "qcloak.radial-potential/1"
SCHEMA_CLOAK = "qcloak.truncated-cloak/1"
SCHEMA_CORE = "qcloak.core-potential/1"


def _fmt(value) -> str:
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if isinstance(value, dict):
        items = ", ".join(f"{json.dumps(k)}: {_fmt(v)}"
                          for k, v in value.items())
        return "{" + items + "}"
    raise ConfigurationError(f"cannot serialize {type(value)!r}")


def dumps(doc: dict) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    return _fmt(doc) + "\n"


def to_document(obj) -> dict:
    if isinstance(obj, LayeredMedium):
        return {
            "schema": SCHEMA_LAYERED,
            "shells": [{"r_in": s.r_in, "r_out": s.r_out,
                        "sigma": s.sigma, "a": s.a} for s in obj.shells],
        }
    if isinstance(obj, RadialPotential):
        return {
            "schema": SCHEMA_POTENTIAL,
            "shells": [{"r_in": s.r_in, "r_out": s.r_out, "V": s.V}
                       for s in obj.shells],
            "core_W": (to_document(obj.core_W)
                       if obj.core_W is not None else None),
            "interface_sigmas": (list(obj.interface_sigmas)
                                 if obj.interface_sigmas is not None
                                 else None),
        }
    if isinstance(obj, AnisotropicRadialMedium):
        return {
            "schema": SCHEMA_CLOAK,
            "R_trunc": obj.R_trunc,
            "core_sigma": obj.core_sigma,
            "core_a": obj.core_a,
        }
    if isinstance(obj, CorePotential):
        return {
            "schema": SCHEMA_CORE,
            "steps": [[r, v] for r, v in obj.steps],
        }
    raise ConfigurationError(f"cannot serialize {type(obj)!r}")


def from_document(doc: dict):
    schema = doc.get("schema")
    if schema == SCHEMA_LAYERED:
        return LayeredMedium(tuple(
            Shell(s["r_in"], s["r_out"], s["sigma"], s["a"])
            for s in doc["shells"]))
    if schema == SCHEMA_POTENTIAL:
        core = doc.get("core_W")
        sig = doc.get("interface_sigmas")
        return RadialPotential(
            tuple(PotentialShell(s["r_in"], s["r_out"], s["V"])
                  for s in doc["shells"]),
            core_W=from_document(core) if core is not None else None,
            interface_sigmas=tuple(sig) if sig is not None else None)
    if schema == SCHEMA_CLOAK:
        return AnisotropicRadialMedium(doc["R_trunc"], doc["core_sigma"],
                                       doc["core_a"])
    if schema == SCHEMA_CORE:
        return CorePotential(tuple((r, v) for r, v in doc["steps"]))
    raise ConfigurationError(f"unknown document schema {schema!r}")


def save(obj, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(to_document(obj)), encoding="utf-8")


def load(path: Union[str, Path]):
    return from_document(json.loads(Path(path).read_text(encoding="utf-8")))
