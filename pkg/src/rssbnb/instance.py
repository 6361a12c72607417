"""Problem instances and their flat key-value (TOML) file format."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, fields
from functools import cached_property
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .demand import DEFAULT_EPSILON, DemandDistribution, truncated_pmf


class InstanceFormatError(ValueError):
    """Raised for a malformed instance file; the message names the field."""


@dataclass(frozen=True)
class Instance:
    """Single-item lot-sizing instance with review and ordering costs.

    ``demand_means[t-1]`` is the Poisson mean of period ``t``. ``v`` is the
    per-unit ordering cost and ``beta`` the fraction of unmet demand that is
    backordered (1 = full backlog, 0 = lost sales).
    """

    demand_means: tuple[float, ...]
    K: float
    W: float
    h: float
    b: float
    v: float = 0.0
    beta: float = 1.0
    I0: int = 0
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "demand_means", tuple(float(m) for m in self.demand_means))
        if not self.demand_means:
            raise ValueError("instance needs at least one period")
        for name in ("K", "W", "h", "b", "v"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta!r}")
        if int(self.I0) != self.I0:
            raise ValueError(f"I0 must be integer, got {self.I0!r}")
        object.__setattr__(self, "I0", int(self.I0))
        for m in self.demand_means:
            if not math.isfinite(m) or m < 0:
                raise ValueError(f"demand means must be finite and >= 0, got {m!r}")

    @property
    def T(self) -> int:
        return len(self.demand_means)

    @cached_property
    def demands(self) -> tuple[DemandDistribution, ...]:
        return tuple(truncated_pmf(m, self.epsilon) for m in self.demand_means)

    def replace(self, **changes) -> "Instance":
        kwargs = {f.name: getattr(self, f.name) for f in fields(self) if f.init}
        kwargs.update(changes)
        return Instance(**kwargs)


def toy_instance() -> Instance:
    """The three-period worked example: means 20, 30, 40; K=30, W=10, h=1, b=10."""
    return Instance(demand_means=(20, 30, 40), K=30, W=10, h=1, b=10)


_FLOAT_FIELDS = ("K", "W", "h", "b", "v", "beta", "epsilon")
_DEFAULTS = {"v": 0.0, "beta": 1.0, "I0": 0, "epsilon": DEFAULT_EPSILON}


def _fmt(x: float) -> str:
    return repr(float(x))


def dumps(instance: Instance) -> str:
    lines = [
        f"T = {instance.T}",
        "demand_means = [" + ", ".join(_fmt(m) for m in instance.demand_means) + "]",
    ]
    for name in ("K", "W", "h", "b", "v", "beta"):
        lines.append(f"{name} = {_fmt(getattr(instance, name))}")
    lines.append(f"I0 = {instance.I0}")
    lines.append(f"epsilon = {_fmt(instance.epsilon)}")
    return "\n".join(lines) + "\n"


def _number(doc: dict, name: str) -> float:
    value = doc[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(f"field {name!r}: expected a number, got {value!r}")
    return float(value)


def loads(text: str) -> Instance:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InstanceFormatError(f"cannot parse instance file: {exc}") from None
    known = {"T", "demand_means", "I0", *_FLOAT_FIELDS}
    for key in doc:
        if key not in known:
            raise InstanceFormatError(f"field {key!r}: unknown field")
    for name in ("T", "demand_means", "K", "W", "h", "b"):
        if name not in doc:
            raise InstanceFormatError(f"field {name!r}: missing")
    means = doc["demand_means"]
    if not isinstance(means, list) or not all(
        isinstance(m, (int, float)) and not isinstance(m, bool) for m in means
    ):
        raise InstanceFormatError(f"field 'demand_means': expected a list of numbers, got {means!r}")
    T = doc["T"]
    if isinstance(T, bool) or not isinstance(T, int) or T < 1:
        raise InstanceFormatError(f"field 'T': expected a positive integer, got {T!r}")
    if T != len(means):
        raise InstanceFormatError(f"field 'T': T = {T} but demand_means has {len(means)} entries")
    I0 = doc.get("I0", 0)
    if isinstance(I0, bool) or not isinstance(I0, int):
        raise InstanceFormatError(f"field 'I0': expected an integer, got {I0!r}")
    kwargs = {name: _number(doc, name) if name in doc else _DEFAULTS[name] for name in _FLOAT_FIELDS}
    try:
        return Instance(demand_means=tuple(float(m) for m in means), I0=I0, **kwargs)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None


def load(path: str | Path) -> Instance:
    return loads(Path(path).read_text())


def dump(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance))
