"""Linear maps for the optical and atomic components.

Phase conventions:

* Beam splitter: transmitted amplitude crosses to the partner path with
  real coefficient t; reflected amplitude stays on its path with
  coefficient i*r.  In the (path_a, path_b) basis the map is
  [[i r, t], [t, i r]], unitary for t^2 + r^2 = 1.
* Mirror: multiplies a path by i (two mirrors per interferometer arm
  contribute the -1 the stage traces require).
* Scattered photons never propagate again: every element acts as the
  identity on sink modes.

The public ``apply_*`` functions are pure (they return a new state); the
underscore in-place kernels are shared with the protocol runners, which
own their work buffers.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .state import BasisLayout, JointState
from .tolerances import NORM_TOL


@dataclass(frozen=True)
class BeamSplitter:
    t: float
    r: float
    path_a: str
    path_b: str

    def __post_init__(self):
        if self.t < 0 or self.r < 0:
            raise ValueError("beam splitter amplitudes must be non-negative")
        if abs(self.t**2 + self.r**2 - 1.0) > NORM_TOL:
            raise ValueError(
                f"beam splitter is not unitary: t^2 + r^2 = {self.t**2 + self.r**2}"
            )
        if self.path_a == self.path_b:
            raise ValueError("beam splitter needs two distinct paths")


@dataclass(frozen=True)
class Mirror:
    path: str


@dataclass(frozen=True, eq=False)
class PolRotator:
    path: str
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (2, 2):
            raise ValueError("polarization rotator must be a 2x2 matrix")
        if not np.allclose(u.conj().T @ u, np.eye(2), atol=NORM_TOL):
            raise ValueError("polarization rotator is not unitary")
        object.__setattr__(self, "u", u)

    def __eq__(self, other):
        return isinstance(other, PolRotator) and self.path == other.path and np.array_equal(self.u, other.u)

    def __hash__(self):
        return hash((self.path, self.u.tobytes()))


POL_FLIP = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class PhaseShift:
    path: str
    phi: float


@dataclass(frozen=True)
class AtomInteraction:
    """Absorption isometry on one path: (+, m+) -> S+ (x) g and (-, m-) -> S- (x) g.

    Levels in ``transparency_mask`` never interact.  Each interaction
    element owns its sink pair so that distinct scattering events stay
    orthogonal.
    """

    path: str
    transparency_mask: frozenset[str] = frozenset()
    sink_plus: str = "S+"
    sink_minus: str = "S-"
    plus_level: str = "m+"
    minus_level: str = "m-"
    ground_level: str = "g"

    def __post_init__(self):
        object.__setattr__(self, "transparency_mask", frozenset(self.transparency_mask))


@dataclass(frozen=True)
class Relabel:
    """Move (coherently merge) all amplitudes from one path onto another.

    An isometry when the destination is empty; with a populated
    destination it models same-mode interference of out-coupled beams.
    """

    src: str
    dst: str


Element = BeamSplitter | Mirror | PolRotator | PhaseShift | AtomInteraction | Relabel


def _path_rows(layout: BasisLayout, path: str) -> tuple[int, int]:
    if not layout.has_path(path):
        raise ValueError(f"path {path!r} is not in the layout")
    pol_plus, pol_minus = layout.polarizations
    return layout.photon_index((path, pol_plus)), layout.photon_index((path, pol_minus))


def _beam_splitter_inplace(mat: np.ndarray, layout: BasisLayout, bs: BeamSplitter) -> None:
    a0, a1 = _path_rows(layout, bs.path_a)
    b0, b1 = _path_rows(layout, bs.path_b)
    ir = 1j * bs.r
    for a, b in ((a0, b0), (a1, b1)):
        ina = mat[a].copy()
        mat[a] = ir * ina + bs.t * mat[b]
        mat[b] = bs.t * ina + ir * mat[b]


def _mirror_inplace(mat: np.ndarray, layout: BasisLayout, m: Mirror) -> None:
    r0, r1 = _path_rows(layout, m.path)
    mat[r0] *= 1j
    mat[r1] *= 1j


def _pol_rotator_inplace(mat: np.ndarray, layout: BasisLayout, rot: PolRotator) -> None:
    r0, r1 = _path_rows(layout, rot.path)
    block = rot.u @ np.vstack((mat[r0], mat[r1]))
    mat[r0] = block[0]
    mat[r1] = block[1]


def _phase_inplace(mat: np.ndarray, layout: BasisLayout, ps: PhaseShift) -> None:
    r0, r1 = _path_rows(layout, ps.path)
    phase = cmath.exp(1j * ps.phi)
    mat[r0] *= phase
    mat[r1] *= phase


def _atom_inplace(mat: np.ndarray, layout: BasisLayout, atom: AtomInteraction) -> None:
    r_plus, r_minus = _path_rows(layout, atom.path)
    for sink in (atom.sink_plus, atom.sink_minus):
        if sink not in layout.sinks:
            raise ValueError(f"sink {sink!r} is not in the layout")
    g = layout.level_index(atom.ground_level)
    transitions = (
        (r_plus, atom.plus_level, atom.sink_plus),
        (r_minus, atom.minus_level, atom.sink_minus),
    )
    for row, level, sink in transitions:
        if level in atom.transparency_mask:
            continue
        lev = layout.level_index(level)
        amp = mat[row, lev]
        if amp != 0.0:
            mat[layout.photon_index(sink), g] += amp
            mat[row, lev] = 0.0


def _relabel_inplace(mat: np.ndarray, layout: BasisLayout, rl: Relabel) -> None:
    s0, s1 = _path_rows(layout, rl.src)
    d0, d1 = _path_rows(layout, rl.dst)
    mat[d0] += mat[s0]
    mat[d1] += mat[s1]
    mat[s0] = 0.0
    mat[s1] = 0.0


_KERNELS = {
    BeamSplitter: _beam_splitter_inplace,
    Mirror: _mirror_inplace,
    PolRotator: _pol_rotator_inplace,
    PhaseShift: _phase_inplace,
    AtomInteraction: _atom_inplace,
    Relabel: _relabel_inplace,
}


def apply_element_inplace(mat: np.ndarray, layout: BasisLayout, element: Element) -> None:
    _KERNELS[type(element)](mat, layout, element)


def _applied(state: JointState, element: Element) -> JointState:
    amps = state.amplitudes.copy()
    mat = amps.reshape(state.layout.n_photon_modes, state.layout.n_levels)
    apply_element_inplace(mat, state.layout, element)
    return JointState(state.layout, amps)


def apply_beam_splitter(state: JointState, bs: BeamSplitter) -> JointState:
    return _applied(state, bs)


def apply_mirror(state: JointState, path: str) -> JointState:
    return _applied(state, Mirror(path))


def apply_pol_rotator(state: JointState, path: str, u: np.ndarray) -> JointState:
    return _applied(state, PolRotator(path, u))


def apply_phase(state: JointState, path: str, phi: float) -> JointState:
    return _applied(state, PhaseShift(path, phi))


def apply_atom(state: JointState, atom: AtomInteraction) -> JointState:
    return _applied(state, atom)


def apply_element(state: JointState, element: Element) -> JointState:
    return _applied(state, element)


def apply_sequence(state: JointState, elements) -> JointState:
    amps = state.amplitudes.copy()
    mat = amps.reshape(state.layout.n_photon_modes, state.layout.n_levels)
    for el in elements:
        apply_element_inplace(mat, state.layout, el)
    return JointState(state.layout, amps)


def sink_pair_labels(event: int, base_plus: str = "S+", base_minus: str = "S-") -> tuple[str, str]:
    """Sink labels for the event-th atom interaction; event 0 keeps the bare names."""
    if event == 0:
        return base_plus, base_minus
    return f"{base_plus}#{event + 1}", f"{base_minus}#{event + 1}"
