"""Spin systems with scalar couplings, and their JSON config format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SpinSystem:
    n: int
    labels: tuple = ()
    couplings: dict = field(default_factory=dict)  # (i, j) with i < j -> Hz
    offsets_hz: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a spin system needs at least one spin")
        labels = tuple(self.labels) or tuple(str(i) for i in range(1, self.n + 1))
        if len(labels) != self.n:
            raise ValueError(f"expected {self.n} labels, got {len(labels)}")
        offsets = tuple(float(x) for x in self.offsets_hz) or (0.0,) * self.n
        if len(offsets) != self.n:
            raise ValueError(f"expected {self.n} offsets, got {len(offsets)}")
        couplings = {}
        for (i, j), hz in self.couplings.items():
            if i == j:
                raise ValueError(f"self-coupling on spin {i}")
            for k in (i, j):
                if not 1 <= k <= self.n:
                    raise ValueError(f"coupling spin {k} out of range 1..{self.n}")
            key = (min(i, j), max(i, j))
            if key in couplings and couplings[key] != float(hz):
                raise ValueError(f"conflicting couplings for pair {key}")
            if not np.isfinite(hz):
                raise ValueError(f"non-finite coupling for pair {key}")
            couplings[key] = float(hz)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "offsets_hz", offsets)
        object.__setattr__(self, "couplings", couplings)

    def coupling(self, i: int, j: int) -> float:
        """J between spins ``i`` and ``j`` in Hz; zero when unlisted."""
        return self.couplings.get((min(i, j), max(i, j)), 0.0)

    def with_offsets(self, offsets_hz) -> "SpinSystem":
        return SpinSystem(self.n, self.labels, dict(self.couplings), tuple(offsets_hz))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "labels": list(self.labels),
            "couplings": [{"i": i, "j": j, "hz": hz} for (i, j), hz in sorted(self.couplings.items())],
            "offsets_hz": list(self.offsets_hz),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpinSystem":
        try:
            couplings = {(int(c["i"]), int(c["j"])): float(c["hz"]) for c in obj.get("couplings", [])}
            return cls(
                n=int(obj["n"]),
                labels=tuple(obj.get("labels", ())),
                couplings=couplings,
                offsets_hz=tuple(obj.get("offsets_hz", ())),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed spin-system config: {exc!r}") from exc


def load_system(path) -> SpinSystem:
    return SpinSystem.from_json(json.loads(Path(path).read_text()))


def alanine() -> SpinSystem:
    """The 13C-labelled alanine carbons: C' (spin 1), C-beta (2), C-alpha (3)."""
    text = resources.files("sepent").joinpath("data/alanine.json").read_text()
    return SpinSystem.from_json(json.loads(text))
