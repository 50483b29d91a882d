"""TOML experiment configuration files.

A config has one ``[experiment]`` table mirroring ExperimentSpec fields plus
``[[experiment.operators]]`` array entries. Unknown keys are hard errors so
typos cannot silently change an experiment. The master seed may be omitted
only when the CSS_SEED environment variable provides a fallback.
"""

from __future__ import annotations

import dataclasses
import os
from pathlib import Path

import tomli

from .errors import ConfigError
from .experiments import ExperimentSpec, OperatorSpec

_SPEC_FIELDS = {f.name for f in dataclasses.fields(ExperimentSpec)}
_OP_FIELDS = {f.name for f in dataclasses.fields(OperatorSpec)}


def load_spec(path: str | Path, overrides: dict | None = None) -> ExperimentSpec:
    """Parse and validate a config file into an ExperimentSpec.

    ``overrides`` (typically CLI flags) replace scalar fields after parsing.
    """
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")

    unknown_top = set(doc) - {"experiment"}
    if unknown_top:
        raise ConfigError(f"{path}: unknown top-level keys {sorted(unknown_top)}")
    if "experiment" not in doc:
        raise ConfigError(f"{path}: missing [experiment] section")
    section = doc["experiment"]

    unknown = set(section) - _SPEC_FIELDS
    if unknown:
        raise ConfigError(f"{path}: unknown experiment keys {sorted(unknown)}")

    operators = []
    for i, op_doc in enumerate(section.get("operators", [])):
        bad = set(op_doc) - _OP_FIELDS
        if bad:
            raise ConfigError(f"{path}: operators[{i}] unknown keys {sorted(bad)}")
        try:
            operators.append(OperatorSpec(**op_doc))
        except TypeError as exc:
            raise ConfigError(f"{path}: operators[{i}]: {exc}")

    kwargs = dict(section)
    if operators:
        kwargs["operators"] = tuple(operators)
    elif "operators" in kwargs:
        raise ConfigError(f"{path}: operators list is empty")

    if overrides:
        kwargs.update({k: v for k, v in overrides.items() if v is not None})

    if "seed" not in kwargs or kwargs["seed"] is None:
        env_seed = os.environ.get("CSS_SEED")
        if env_seed is None:
            raise ConfigError(
                f"{path}: no seed given and CSS_SEED is not set; "
                "a master seed is mandatory for reproducibility"
            )
        try:
            kwargs["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"CSS_SEED={env_seed!r} is not an integer")

    try:
        spec = ExperimentSpec(**kwargs)
        spec.validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}")
    return spec
