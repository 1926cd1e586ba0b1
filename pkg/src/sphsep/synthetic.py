"""
Synthetic vector fields with known source separation, and a brute-force
spectral reference for the separation.

Every field is a finite sum of tilde vector spherical harmonics. Terms of
kind 1 are internal-source, kind 2 external-source and kind 3 toroidal,
so the ground truth of the separation is known exactly.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .errors import DomainError
from .harmonics import HarmonicIndex, vsh_eval, vsh_table
from .quadrature import GridField

__all__ = [
    "SyntheticTerm",
    "SyntheticSpec",
    "SyntheticField",
    "OracleCoefficients",
    "make_field",
    "spectral_oracle",
    "relative_sup_errors",
    "PART_NAMES",
    "KIND_TO_PART",
]

PART_NAMES = ("internal", "external", "toroidal")
KIND_TO_PART = {1: "internal", 2: "external", 3: "toroidal"}


@dataclass(frozen=True)
class SyntheticTerm:
    i: int
    n: int
    k: int
    amplitude: float = 1.0

    def check(self):
        if self.i not in (1, 2, 3):
            raise DomainError(f"kind must be 1, 2 or 3, got {self.i}")
        HarmonicIndex(self.n, self.k).check(self.i)
        if not np.isfinite(self.amplitude):
            raise DomainError("amplitude must be finite")
        return self


@dataclass
class SyntheticSpec:
    terms: List[SyntheticTerm]
    radius: float = 1.0

    def __post_init__(self):
        self.terms = [t if isinstance(t, SyntheticTerm) else SyntheticTerm(*t) for t in self.terms]
        for t in self.terms:
            t.check()

    def to_dict(self):
        return {
            "radius": self.radius,
            "terms": [
                {"i": t.i, "n": t.n, "k": t.k, "amplitude": t.amplitude, "part": KIND_TO_PART[t.i]}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, d):
        terms = [SyntheticTerm(t["i"], t["n"], t["k"], t.get("amplitude", 1.0)) for t in d["terms"]]
        return cls(terms, d.get("radius", 1.0))


@dataclass
class SyntheticField:
    """A synthetic field and its exact internal/external/toroidal parts."""

    spec: SyntheticSpec
    field: GridField
    parts: Dict[str, GridField] = field(default_factory=dict)


def make_field(spec, grid):
    """Sample ``sum amplitude * y~^(i)_{n,k}`` at the grid nodes."""
    nodes = grid.nodes
    parts = {name: np.zeros((grid.size, 3)) for name in PART_NAMES}
    for t in spec.terms:
        parts[KIND_TO_PART[t.i]] += t.amplitude * vsh_eval(("tilde", t.i), t.n, t.k, nodes)
    total = sum(parts.values())
    return SyntheticField(
        spec,
        GridField(grid, total),
        {name: GridField(grid, v) for name, v in parts.items()},
    )


@dataclass
class OracleCoefficients:
    """Inner products of a field with the tilde vector harmonics."""

    lmax: int
    coefficients: Dict[Tuple[int, int, int], float]

    def __getitem__(self, key):
        return self.coefficients[key]

    def reconstruct(self, grid, kinds=(1, 2, 3)):
        keys, vecs = vsh_table(self.lmax, grid.nodes)
        c = np.array([self.coefficients[key] if key[0] in kinds else 0.0 for key in keys])
        return GridField(grid, np.tensordot(c, vecs, axes=1))

    def parts(self, grid):
        return {KIND_TO_PART[i]: self.reconstruct(grid, kinds=(i,)) for i in (1, 2, 3)}


def spectral_oracle(f, lmax):
    """Project ``f`` on every tilde vector harmonic of degree ``<= lmax``."""
    grid = f.grid
    if grid.degree < 2 * lmax:
        raise DomainError(
            f"grid is exact to degree {grid.degree}, projection to degree {lmax} needs {2 * lmax}"
        )
    keys, vecs = vsh_table(lmax, grid.nodes)
    wf = f.values * grid.node_weights[:, None]
    coeffs = np.einsum("hni,ni->h", vecs, wf)
    return OracleCoefficients(lmax, dict(zip(keys, coeffs.tolist())))


def relative_sup_errors(estimate, truth):
    """Per-part ``sup|estimate - truth| / sup|truth|``.

    Both arguments map part names to grid fields. A part whose truth is
    identically zero reports the absolute sup error instead.
    """
    out = {}
    for name, ref in truth.items():
        err = (estimate[name] - ref).sup()
        scale = ref.sup()
        out[name] = err / scale if scale > 0.0 else err
    return out
