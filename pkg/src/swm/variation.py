"""Controllable environment factors as a flat, two-level named space.

Every factor ("leaf") has a dotted name `group.property`, a value domain and a
canonical default. Spaces support selector resolution (`all`, a group name, or
a leaf name), seeded uniform sampling with optional fixed overrides, and value
validation. Assignments serialize to a plain-text key=value document embedded
in dataset manifests and CLI output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def _as_tuple(value):
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(_as_tuple(v) for v in value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


@dataclass(frozen=True)
class Domain:
    """Value domain of a single variation leaf.

    kind is one of "box" (continuous, per-dimension low/high), "int_range"
    (inclusive integer bounds, optionally vector-valued), "categorical"
    (finite choices) or "fixed" (single admissible value).
    """

    kind: str
    low: tuple = ()
    high: tuple = ()
    choices: tuple = ()
    value: object = None
    size: int = 1

    @staticmethod
    def box(low, high):
        lo = tuple(float(v) for v in np.atleast_1d(low))
        hi = tuple(float(v) for v in np.atleast_1d(high))
        if len(lo) != len(hi):
            raise ValueError(f"box bounds length mismatch: {lo} vs {hi}")
        for a, b in zip(lo, hi):
            if a > b:
                raise ValueError(f"box requires low <= high per dimension, got {lo} > {hi}")
        return Domain(kind="box", low=lo, high=hi, size=len(lo))

    @staticmethod
    def int_range(low, high, size=1):
        if low > high:
            raise ValueError(f"int_range requires min <= max, got {low} > {high}")
        return Domain(kind="int_range", low=(int(low),), high=(int(high),), size=size)

    @staticmethod
    def rgb():
        """8-bit color triplet in [0, 255]^3."""
        return Domain.int_range(0, 255, size=3)

    @staticmethod
    def categorical(*choices):
        if len(choices) < 1:
            raise ValueError("categorical requires at least one choice")
        return Domain(kind="categorical", choices=tuple(choices))

    @staticmethod
    def fixed(value):
        return Domain(kind="fixed", value=_as_tuple(value))

    def contains(self, value) -> bool:
        value = _as_tuple(value)
        if self.kind == "box":
            vals = value if isinstance(value, tuple) else (value,)
            if len(vals) != self.size:
                return False
            return all(
                isinstance(v, (int, float)) and lo <= float(v) <= hi
                for v, lo, hi in zip(vals, self.low, self.high)
            )
        if self.kind == "int_range":
            vals = value if isinstance(value, tuple) else (value,)
            if len(vals) != self.size:
                return False
            return all(
                isinstance(v, int) and self.low[0] <= v <= self.high[0] for v in vals
            )
        if self.kind == "categorical":
            return value in self.choices
        return value == self.value

    def sample(self, rng: np.random.Generator):
        if self.kind == "box":
            draw = rng.uniform(self.low, self.high)
            return float(draw[0]) if self.size == 1 else tuple(float(v) for v in draw)
        if self.kind == "int_range":
            draw = rng.integers(self.low[0], self.high[0] + 1, size=self.size)
            return int(draw[0]) if self.size == 1 else tuple(int(v) for v in draw)
        if self.kind == "categorical":
            return self.choices[int(rng.integers(len(self.choices)))]
        return self.value

    def describe(self) -> str:
        if self.kind == "box":
            return f"box {self.low}..{self.high}"
        if self.kind == "int_range":
            return f"integers {self.low[0]}..{self.high[0]} (size {self.size})"
        if self.kind == "categorical":
            return f"one of {self.choices}"
        return f"fixed {self.value!r}"


@dataclass
class VariationRequest:
    """Parsed reset options: selectors to resample plus explicit fixed values."""

    selectors: tuple = ()
    fixed: dict = field(default_factory=dict)

    @staticmethod
    def from_options(options) -> "VariationRequest":
        if options is None:
            return VariationRequest()
        if isinstance(options, VariationRequest):
            return options
        unknown = set(options) - {"variation", "variation_values"}
        if unknown:
            raise ValueError(
                f"unknown options key(s) {sorted(unknown)}; "
                "valid keys are 'variation' and 'variation_values'"
            )
        selectors = options.get("variation", ())
        if isinstance(selectors, str):
            selectors = (selectors,)
        fixed = {k: _as_tuple(v) for k, v in (options.get("variation_values") or {}).items()}
        return VariationRequest(selectors=tuple(selectors), fixed=fixed)


class VariationSpace:
    """Registry of variation leaves with domains, defaults and current values."""

    def __init__(self):
        self._domains: dict[str, Domain] = {}
        self._defaults: dict[str, object] = {}
        self._values: dict[str, object] = {}

    def add(self, name: str, domain: Domain, default):
        parts = name.split(".")
        if len(parts) != 2 or not all(parts):
            raise ValueError(f"leaf name must have exactly two levels 'group.property', got {name!r}")
        if name in self._domains:
            raise ValueError(f"leaf {name!r} already registered")
        default = _as_tuple(default)
        if not domain.contains(default):
            raise ValueError(f"default {default!r} outside domain of {name!r} ({domain.describe()})")
        self._domains[name] = domain
        self._defaults[name] = default
        self._values[name] = default

    def __len__(self):
        return len(self._domains)

    def names(self) -> list[str]:
        return sorted(self._domains)

    def groups(self) -> list[str]:
        return sorted({n.split(".", 1)[0] for n in self._domains})

    def domain(self, name: str) -> Domain:
        return self._domains[name]

    @property
    def defaults(self) -> dict:
        return dict(self._defaults)

    @property
    def values(self) -> dict:
        return dict(self._values)

    def set_values(self, assignment: dict):
        violations = self.validate(assignment)
        if violations:
            raise ValueError("invalid assignment: " + "; ".join(violations))
        self._values = {k: _as_tuple(v) for k, v in assignment.items()}

    def resolve(self, selectors) -> set[str]:
        """Expand selectors (`all`, group names, leaf names) into leaf names."""
        groups = set(self.groups())
        out: set[str] = set()
        for sel in selectors:
            if sel == "all":
                out.update(self._domains)
            elif sel in self._domains:
                out.add(sel)
            elif sel in groups:
                out.update(n for n in self._domains if n.startswith(sel + "."))
            else:
                raise ValueError(
                    f"unknown variation selector {sel!r}; valid selectors are 'all', "
                    f"groups {self.groups()} or leaves {self.names()}"
                )
        return out

    def sample(self, selected, rng: np.random.Generator, fixed=None) -> dict:
        """Complete assignment: fixed values win, selected leaves are drawn
        uniformly, everything else takes its default.

        Draw order is the sorted leaf order, so identical rng state and inputs
        produce identical assignments.
        """
        fixed = {k: _as_tuple(v) for k, v in (fixed or {}).items()}
        for name in sorted(fixed):
            if name not in self._domains:
                raise ValueError(
                    f"fixed value for unknown leaf {name!r}; known leaves: {self.names()}"
                )
            if not self._domains[name].contains(fixed[name]):
                raise ValueError(
                    f"fixed value {fixed[name]!r} for {name!r} is outside its domain "
                    f"({self._domains[name].describe()})"
                )
        unknown = set(selected) - set(self._domains)
        if unknown:
            raise ValueError(f"selected unknown leaves {sorted(unknown)}")
        out = dict(self._defaults)
        for name in sorted(selected):
            if name not in fixed:
                out[name] = self._domains[name].sample(rng)
        out.update(fixed)
        return out

    def validate(self, assignment: dict) -> list[str]:
        """Violation messages for missing or out-of-domain leaves (empty = ok)."""
        violations = []
        for name in self.names():
            if name not in assignment:
                violations.append(f"{name}: missing")
            elif not self._domains[name].contains(assignment[name]):
                violations.append(
                    f"{name}: value {assignment[name]!r} outside domain ({self._domains[name].describe()})"
                )
        for name in sorted(set(assignment) - set(self._domains)):
            violations.append(f"{name}: not a registered leaf")
        return violations


def assignment_to_text(assignment: dict) -> str:
    """Serialize an assignment as sorted `name=json` lines."""
    lines = [f"{name}={json.dumps(assignment[name])}" for name in sorted(assignment)]
    return "\n".join(lines) + "\n"


def assignment_from_text(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        name, _, raw = line.partition("=")
        out[name] = _as_tuple(json.loads(raw))
    return out


def normalize_assignment(assignment: dict) -> dict:
    """Coerce JSON-decoded values (lists, numpy scalars) to canonical form."""
    return {k: _as_tuple(v) for k, v in assignment.items()}
