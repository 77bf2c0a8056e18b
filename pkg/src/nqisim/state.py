"""Joint photon-atom Hilbert space: basis layouts, amplitude vectors, branching.

A photon mode is either a propagating mode ``(path, polarization)`` or a
terminal sink label recording a scattered photon.  The joint basis is the
product of photon modes with atom levels, flattened into one dense complex
amplitude vector.  All operations here are pure functions on immutable
values; states are never mutated in place.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .tolerances import NORM_TOL, RANK_TOL

PhotonMode = Union[tuple[str, str], str]

POLARIZATIONS = ("+", "-")


def _check_unique(kind: str, labels: Sequence[str]) -> None:
    seen = set()
    for label in labels:
        if label in seen:
            raise ValueError(f"duplicate {kind} label: {label!r}")
        seen.add(label)


@dataclass(frozen=True)
class BasisLayout:
    """Enumeration of joint (photon mode, atom level) basis states.

    Index convention: photon modes run lexicographically (paths x
    polarizations, then sinks), atom levels fastest, so
    ``index = photon_index * n_levels + level_index``.
    """

    paths: tuple[str, ...]
    sinks: tuple[str, ...]
    atom_levels: tuple[str, ...]
    polarizations: tuple[str, str] = POLARIZATIONS

    @cached_property
    def photon_modes(self) -> tuple[PhotonMode, ...]:
        propagating: list[PhotonMode] = [
            (p, pol) for p in self.paths for pol in self.polarizations
        ]
        return tuple(propagating) + tuple(self.sinks)

    @cached_property
    def _photon_index(self) -> dict[PhotonMode, int]:
        return {m: i for i, m in enumerate(self.photon_modes)}

    @cached_property
    def _level_index(self) -> dict[str, int]:
        return {lev: i for i, lev in enumerate(self.atom_levels)}

    @property
    def n_photon_modes(self) -> int:
        return len(self.paths) * 2 + len(self.sinks)

    @property
    def n_levels(self) -> int:
        return len(self.atom_levels)

    @property
    def dim(self) -> int:
        return self.n_photon_modes * self.n_levels

    def photon_index(self, mode: PhotonMode) -> int:
        try:
            return self._photon_index[mode]
        except KeyError:
            raise ValueError(f"unknown photon mode: {mode!r}") from None

    def level_index(self, level: str) -> int:
        try:
            return self._level_index[level]
        except KeyError:
            raise ValueError(f"unknown atom level: {level!r}") from None

    def index(self, mode: PhotonMode, level: str) -> int:
        return self.photon_index(mode) * self.n_levels + self.level_index(level)

    def has_path(self, path: str) -> bool:
        return path in self.paths

    def is_sink(self, mode: PhotonMode) -> bool:
        return isinstance(mode, str)


def make_layout(
    paths: Sequence[str], sinks: Sequence[str], atom_levels: Sequence[str]
) -> BasisLayout:
    """Build a layout with deterministic index assignment.

    Sinks may be empty; paths and atom levels must not be.
    """
    if not paths:
        raise ValueError("at least one path is required")
    if not atom_levels:
        raise ValueError("at least one atom level is required")
    _check_unique("path", paths)
    _check_unique("sink", sinks)
    _check_unique("atom level", atom_levels)
    return BasisLayout(tuple(paths), tuple(sinks), tuple(atom_levels))


@dataclass(frozen=True)
class JointState:
    """Dense complex amplitude vector over a BasisLayout (possibly sub-normalized)."""

    layout: BasisLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.layout.dim,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected ({self.layout.dim},)"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def matrix(self) -> np.ndarray:
        """Amplitudes as an (n_photon_modes, n_levels) view."""
        return self.amplitudes.reshape(
            self.layout.n_photon_modes, self.layout.n_levels
        )

    def amplitude(self, mode: PhotonMode, level: str) -> complex:
        return complex(self.amplitudes[self.layout.index(mode, level)])


@dataclass(frozen=True)
class Branch:
    """One component of a partitioned state, kept sub-normalized."""

    state: JointState
    probability: float
    label: str


def basis_state(layout: BasisLayout, mode: PhotonMode, level: str) -> JointState:
    amps = np.zeros(layout.dim, dtype=complex)
    amps[layout.index(mode, level)] = 1.0
    return JointState(layout, amps)


def superpose(terms: Iterable[tuple[complex, JointState]]) -> JointState:
    """Linear combination of states sharing one layout. No normalization."""
    terms = list(terms)
    if not terms:
        raise ValueError("superpose needs at least one term")
    layout = terms[0][1].layout
    amps = np.zeros(layout.dim, dtype=complex)
    for coeff, st in terms:
        if st.layout is not layout and st.layout != layout:
            raise ValueError("superpose: mixed layouts")
        amps += complex(coeff) * st.amplitudes
    return JointState(layout, amps)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for normalized state vectors (any sector)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    for name, v in (("a", a), ("b", b)):
        if abs(np.vdot(v, v).real - 1.0) > 1e-9:
            raise ValueError(f"fidelity: argument {name} is not normalized")
    f = abs(np.vdot(a, b)) ** 2
    return float(min(f, 1.0))


def condition_on_probe(
    state: JointState, probe: np.ndarray
) -> tuple[np.ndarray, float]:
    """Contract the photon index against a normalized probe vector.

    Returns the unnormalized atom-sector vector <probe|state> and its
    squared norm (the probability of finding the probe).
    """
    probe = np.asarray(probe, dtype=complex)
    if probe.shape != (state.layout.n_photon_modes,):
        raise ValueError(
            f"probe has shape {probe.shape}, expected ({state.layout.n_photon_modes},)"
        )
    if abs(np.vdot(probe, probe).real - 1.0) > 1e-9:
        raise ValueError("probe vector is not normalized")
    atom_vec = probe.conj() @ state.matrix()
    prob = float(np.vdot(atom_vec, atom_vec).real)
    return atom_vec, prob


def photon_probe(
    layout: BasisLayout, terms: Iterable[tuple[complex, PhotonMode]]
) -> np.ndarray:
    """Photon-sector vector from (coefficient, mode) terms."""
    probe = np.zeros(layout.n_photon_modes, dtype=complex)
    for coeff, mode in terms:
        probe[layout.photon_index(mode)] += complex(coeff)
    return probe


def partition_branches(
    state: JointState, classifier: Callable[[PhotonMode], str]
) -> list[Branch]:
    """Split a state by classifying each photon mode; probabilities add up
    to the total squared norm."""
    layout = state.layout
    groups: dict[str, list[int]] = {}
    for i, mode in enumerate(layout.photon_modes):
        groups.setdefault(classifier(mode), []).append(i)
    mat = state.matrix()
    branches = []
    for label in sorted(groups):
        part = np.zeros_like(mat)
        part[groups[label]] = mat[groups[label]]
        st = JointState(layout, part.reshape(-1))
        branches.append(Branch(st, st.norm2, label))
    return branches


def product_factors(
    state: JointState, tol: float = RANK_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Factor a (sub-normalized) state into photon (x) atom unit vectors.

    Raises if the photon-atom amplitude matrix has rank > 1 beyond tol.
    The product of the two factors times the state's norm reproduces the
    state up to a global phase absorbed into the photon factor.
    """
    mat = state.matrix()
    u, s, vh = np.linalg.svd(mat)
    if s.size > 1 and s[1] > tol:
        raise ValueError(
            f"state is not a photon-atom product (second singular value {s[1]:.3e})"
        )
    if s[0] == 0.0:
        raise ValueError("cannot factor the zero state")
    return u[:, 0].copy(), vh[0].copy()
