"""Dense state-vector simulation and the exact output-distribution oracles.

Two independent routes to the same answer live here on purpose: the
state-vector / Walsh-Hadamard route (`exact_output_distribution`) and the
imaginary-temperature partition-function route
(`ising_partition_probability`).  They share no code beyond the graph
structure, so agreement between them is evidence, not tautology.

Bit convention, used everywhere in this package: amplitudes are indexed
little-endian — bit ``j`` of the array index is qubit ``j``.  Outcome
strings read left to right in ascending vertex order, i.e. the leftmost
character belongs to the lowest vertex id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graphs import ANGLE_STEPS, GraphSpec, k_to_radians, radians_to_k

DEFAULT_QUBIT_CAP = 22

PAULI_LETTERS = ("X", "Y", "Z")

DEFAULT_PAULI_MIX: Mapping[str, float] = {"X": 1 / 3, "Y": 1 / 3, "Z": 1 / 3}

_SQRT_HALF = 1 / math.sqrt(2)


class QubitCapError(ValueError):
    """Instance exceeds the configured dense-simulation size."""


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise QubitCapError(f"instance needs {n} qubits, cap is {cap}")


@dataclass
class StateVector:
    """Mutable dense state on ``n`` qubits; amplitudes little-endian."""

    n: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.amps.shape != (2**self.n,):
            raise ValueError(
                f"amplitude array has shape {self.amps.shape}, "
                f"expected ({2**self.n},)"
            )
        if self.amps.dtype != np.complex128:
            self.amps = self.amps.astype(np.complex128)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())

    def _bit_view(self, q: int) -> np.ndarray:
        """View with axis 1 = qubit q: shape (high, 2, low)."""
        if not 0 <= q < self.n:
            raise IndexError(f"qubit {q} out of range for {self.n}-qubit state")
        return self.amps.reshape(2 ** (self.n - q - 1), 2, 2**q)


def prepare_qubit(kind: str, *params: float) -> StateVector:
    """Single-qubit preparations the sender is allowed to emit.

    ``plus_theta(theta)`` is the rotated plus state, ``dummy(d)`` a
    computational-basis state, and ``z_flipped_plus(theta, parity)`` the
    rotated plus state with a conditional Z — the form actually sent once
    the neighbouring dummy bits are folded in.  Angles must sit on the
    16-point grid.
    """
    if kind == "plus_theta":
        (theta,) = params
        k = radians_to_k(theta)
        amps = np.array(
            [_SQRT_HALF, _SQRT_HALF * np.exp(1j * k_to_radians(k))]
        )
    elif kind == "dummy":
        (d,) = params
        if d not in (0, 1):
            raise ValueError(f"dummy bit must be 0 or 1, got {d!r}")
        amps = np.zeros(2, dtype=np.complex128)
        amps[int(d)] = 1.0
    elif kind == "z_flipped_plus":
        theta, parity = params
        if parity not in (0, 1):
            raise ValueError(f"flip parity must be 0 or 1, got {parity!r}")
        k = radians_to_k(theta)
        phase = k_to_radians(k) + int(parity) * math.pi
        amps = np.array([_SQRT_HALF, _SQRT_HALF * np.exp(1j * phase)])
    else:
        raise ValueError(f"unknown preparation kind {kind!r}")
    return StateVector(n=1, amps=amps.astype(np.complex128))


def tensor(states: Sequence[StateVector], cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
    """Join single-qubit (or larger) registers; qubit 0 = first state."""
    total = sum(s.n for s in states)
    _check_cap(total, cap)
    amps = np.ones(1, dtype=np.complex128)
    for s in states:
        # kron puts its left factor in the high bits
        amps = np.kron(s.amps, amps)
    return StateVector(n=total, amps=amps)


def apply_cz(s: StateVector, i: int, j: int) -> StateVector:
    if i == j:
        raise ValueError("cZ needs two distinct qubits")
    if not (0 <= i < s.n and 0 <= j < s.n):
        raise IndexError(f"qubit pair ({i}, {j}) out of range")
    idx = np.arange(2**s.n)
    both = ((idx >> i) & (idx >> j) & 1).astype(bool)
    s.amps[both] *= -1
    return s


def apply_pauli(s: StateVector, q: int, letter: str) -> StateVector:
    v = s._bit_view(q)
    if letter == "I":
        return s
    if letter == "X":
        tmp = v[:, 0, :].copy()
        v[:, 0, :] = v[:, 1, :]
        v[:, 1, :] = tmp
    elif letter == "Y":
        tmp = v[:, 0, :].copy()
        v[:, 0, :] = -1j * v[:, 1, :]
        v[:, 1, :] = 1j * tmp
    elif letter == "Z":
        v[:, 1, :] *= -1
    else:
        raise ValueError(f"unknown Pauli letter {letter!r}")
    return s


def apply_phase(s: StateVector, q: int, angle: float) -> StateVector:
    """diag(1, e^{i*angle}) on qubit q."""
    v = s._bit_view(q)
    v[:, 1, :] *= np.exp(1j * angle)
    return s


def measure_xy(
    s: StateVector, q: int, delta: float, rng: np.random.Generator
) -> tuple[int, StateVector]:
    """Measure qubit q in the |±_delta⟩ basis; factor the qubit out.

    Implemented as the z-rotation by −delta followed by an X-basis readout.
    The surviving register keeps its little-endian labels with q removed,
    i.e. every qubit above q shifts down by one.
    """
    v = s._bit_view(q)
    rot = np.exp(-1j * delta)
    branch0 = (v[:, 0, :] + rot * v[:, 1, :]) * _SQRT_HALF
    branch1 = (v[:, 0, :] - rot * v[:, 1, :]) * _SQRT_HALF
    p0 = float(np.vdot(branch0, branch0).real)
    p1 = float(np.vdot(branch1, branch1).real)
    total = p0 + p1
    bit = 1 if rng.random() * total >= p0 else 0
    kept = branch1 if bit else branch0
    prob = p1 if bit else p0
    if prob <= 0:
        raise ArithmeticError(
            f"measured impossible outcome {bit} on qubit {q}"
        )
    amps = (kept / math.sqrt(prob)).reshape(-1)
    return bit, StateVector(n=s.n - 1, amps=amps)


@dataclass(frozen=True)
class NoiseModel:
    """Error-event probabilities and the Pauli mixture used on an event.

    ``eps_v`` hits each qubit once at preparation; ``eps_p`` hits each
    entangling gate and each measurement.  Zero rates reproduce the
    identity channel exactly — no RNG draws are consumed.
    """

    eps_v: float = 0.0
    eps_p: float = 0.0
    mix: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_PAULI_MIX)
    )

    def __post_init__(self) -> None:
        if not (0 <= self.eps_v < 1 and 0 <= self.eps_p < 1):
            raise ValueError("error probabilities must lie in [0, 1)")
        weights = list(self.mix.values())
        if any(w < 0 for w in weights):
            raise ValueError("Pauli mixture weights must be nonnegative")
        if abs(sum(weights) - 1) > 1e-9:
            raise ValueError("Pauli mixture weights must sum to 1")
        for letter in self.mix:
            if letter not in PAULI_LETTERS:
                raise ValueError(f"mixture letter {letter!r} not in X/Y/Z")

    def is_noiseless(self) -> bool:
        return self.eps_v == 0 and self.eps_p == 0


def apply_noise(
    s: StateVector,
    q: int,
    eps: float,
    mix: Mapping[str, float],
    rng: np.random.Generator,
) -> StateVector:
    """With probability eps, apply one Pauli drawn from ``mix`` to qubit q."""
    if not 0 <= eps < 1:
        raise ValueError(f"error probability {eps!r} outside [0, 1)")
    if eps == 0:
        return s
    if rng.random() >= eps:
        return s
    letters = list(mix.keys())
    weights = np.array([mix[p] for p in letters], dtype=float)
    letter = letters[rng.choice(len(letters), p=weights / weights.sum())]
    return apply_pauli(s, q, letter)


@dataclass(frozen=True)
class Distribution:
    """Probabilities over fixed-length outcome strings."""

    nbits: int
    probs: Mapping[str, float]

    def __post_init__(self) -> None:
        total = 0.0
        for key, p in self.probs.items():
            if len(key) != self.nbits or set(key) - {"0", "1"}:
                raise ValueError(f"malformed outcome string {key!r}")
            if p < -1e-12:
                raise ValueError(f"negative probability for {key!r}")
            total += p
        if abs(total - 1) > 1e-10:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def sample(self, count: int, rng: np.random.Generator) -> list[str]:
        keys = sorted(self.probs)
        weights = np.array([self.probs[k] for k in keys], dtype=float)
        weights = weights / weights.sum()
        picks = rng.choice(len(keys), size=count, p=weights)
        return [keys[i] for i in picks]


def tv_distance(p: Distribution, q: Distribution) -> float:
    if p.nbits != q.nbits:
        raise ValueError(
            f"distributions over different lengths: {p.nbits} vs {q.nbits}"
        )
    keys = set(p.probs) | set(q.probs)
    return 0.5 * sum(
        abs(p.probs.get(k, 0.0) - q.probs.get(k, 0.0)) for k in keys
    )


def empirical_distribution(samples: Sequence[str]) -> Distribution:
    if not samples:
        raise ValueError("no samples")
    counts: dict[str, int] = {}
    for s in samples:
        counts[s] = counts.get(s, 0) + 1
    total = len(samples)
    return Distribution(
        nbits=len(samples[0]),
        probs={k: v / total for k, v in counts.items()},
    )


def fwht_inplace(a: np.ndarray) -> None:
    """Unnormalized Walsh-Hadamard transform, kernel (−1)^{s·z}."""
    h = 1
    while h < a.size:
        view = a.reshape(-1, 2 * h)
        x = view[:, :h].copy()
        y = view[:, h:].copy()
        view[:, :h] = x + y
        view[:, h:] = x - y
        h *= 2


def _induced_components(g: GraphSpec) -> list[tuple[int, ...]]:
    """Connected components of the non-dummy induced subgraph, ids ascending."""
    adj: dict[int, list[int]] = {v: [] for v in g.non_dummy_ids()}
    for a, b in g.induced_edges():
        adj[a].append(b)
        adj[b].append(a)
    seen: set[int] = set()
    comps: list[tuple[int, ...]] = []
    for start in g.non_dummy_ids():
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        comps.append(tuple(sorted(comp)))
    return comps


def component_probabilities(
    vertices: Sequence[int],
    edges: Iterable[tuple[int, int]],
    angles: Mapping[int, float],
) -> np.ndarray:
    """Outcome probabilities for one connected graph-state component.

    The amplitude for outcome ``s`` is the Walsh-Hadamard transform, at
    index ``s``, of z ↦ (−1)^{#edges inside z} · e^{−i δ·z}, scaled by
    2^{−|V|}; index bit ``j`` belongs to ``vertices[j]``.
    """
    c = len(vertices)
    pos = {v: j for j, v in enumerate(vertices)}
    idx = np.arange(2**c)
    f = np.ones(2**c, dtype=np.complex128)
    for a, b in edges:
        both = ((idx >> pos[a]) & (idx >> pos[b]) & 1).astype(bool)
        f[both] *= -1
    for v in vertices:
        on = ((idx >> pos[v]) & 1).astype(bool)
        f[on] *= np.exp(-1j * angles[v])
    fwht_inplace(f)
    amps = f / 2**c
    return np.abs(amps) ** 2


def exact_probability_array(
    g: GraphSpec,
    angles: Mapping[int, float],
    cap: int = DEFAULT_QUBIT_CAP,
) -> np.ndarray:
    """Joint outcome probabilities, index bit ``j`` = j-th non-dummy vertex."""
    nd = g.non_dummy_ids()
    _check_cap(len(nd), cap)
    for v in nd:
        if v not in angles:
            raise ValueError(f"no measurement angle for vertex {v}")
    comps = _induced_components(g)
    induced = set(g.induced_edges())
    joint = np.ones(1, dtype=np.float64)
    order: list[int] = []
    for comp in comps:
        comp_edges = [e for e in induced if e[0] in comp and e[1] in comp]
        p = component_probabilities(comp, comp_edges, angles)
        # Little-endian outer product: the new component lands in the
        # high bits, previously placed vertices keep the low bits.
        joint = np.multiply.outer(p, joint).reshape(-1)
        order.extend(comp)
    n = len(nd)
    # Permute bit positions so bit j belongs to nd[j].
    axes_vertex = [order[n - 1 - a] for a in range(n)]  # axis -> vertex
    want_axis_vertex = [nd[n - 1 - a] for a in range(n)]
    perm = [axes_vertex.index(v) for v in want_axis_vertex]
    joint = joint.reshape((2,) * n).transpose(perm).reshape(-1)
    return joint


def bits_to_string(index: int, nbits: int) -> str:
    """Little-endian index to outcome string, lowest bit leftmost."""
    return "".join("1" if (index >> j) & 1 else "0" for j in range(nbits))


def string_to_bits(s: str) -> int:
    return sum(1 << j for j, ch in enumerate(s) if ch == "1")


def exact_output_distribution(
    g: GraphSpec,
    angles: Mapping[int, float],
    cap: int = DEFAULT_QUBIT_CAP,
) -> Distribution:
    """Exact outcome distribution of measuring the carved graph state.

    Non-dummy vertices are prepared as |+⟩, entangled along the induced
    edges, and each measured in the xy-plane at its angle.  No sampling is
    involved; probabilities come from full enumeration.
    """
    probs = exact_probability_array(g, angles, cap=cap)
    n = len(g.non_dummy_ids())
    return Distribution(
        nbits=n,
        probs={bits_to_string(i, n): float(p) for i, p in enumerate(probs)},
    )


@dataclass(frozen=True)
class IsingInstance:
    """Couplings and fields whose imaginary-temperature trace reproduces
    the sampler's outcome probabilities."""

    n: int
    edges: tuple[tuple[int, int], ...]
    couplings: tuple[float, ...]
    fields: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.couplings) != len(self.edges):
            raise ValueError("one coupling per edge required")
        if len(self.fields) != self.n:
            raise ValueError("one local field per vertex required")
        for a, b in self.edges:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge {(a, b)} out of range")

    @classmethod
    def from_carved_graph(
        cls, g: GraphSpec, angles: Mapping[int, float]
    ) -> "IsingInstance":
        """Map measurement angles to fields: J = π/4 on every surviving
        edge, B_i = π·deg(i)/4 − δ_i/2, vertices relabeled 0..N−1 in
        ascending id order."""
        nd = g.non_dummy_ids()
        pos = {v: i for i, v in enumerate(nd)}
        edges = tuple(
            (pos[a], pos[b]) for a, b in g.induced_edges()
        )
        fields = tuple(
            math.pi * g.induced_degree(v) / 4 - angles[v] / 2 for v in nd
        )
        return cls(
            n=len(nd),
            edges=edges,
            couplings=(math.pi / 4,) * len(edges),
            fields=fields,
        )


def ising_partition_probability(
    inst: IsingInstance,
    x: str | Sequence[int],
    cap: int = DEFAULT_QUBIT_CAP,
    chunk: int = 1 << 16,
) -> float:
    """|Tr e^{−i(H + (π/2)Σ x_i Z_i)}|² / 2^{2N} by explicit spin summation.

    H = −Σ J Z_iZ_j + Σ B_i Z_i is diagonal, so the trace is a sum of
    phases over all 2^N spin configurations s ∈ {±1}^N, evaluated here in
    chunks to bound memory.
    """
    _check_cap(inst.n, cap)
    bits = (
        [int(ch) for ch in x] if isinstance(x, str) else [int(b) for b in x]
    )
    if len(bits) != inst.n:
        raise ValueError(f"outcome has {len(bits)} bits, expected {inst.n}")
    shifted = np.array(inst.fields) + math.pi / 2 * np.array(bits)
    total = 0.0 + 0.0j
    for start in range(0, 2**inst.n, chunk):
        idx = np.arange(start, min(start + chunk, 2**inst.n))
        # spin s_i = +1 for index bit 0, -1 for bit 1
        spins = 1.0 - 2.0 * (
            (idx[:, None] >> np.arange(inst.n)[None, :]) & 1
        )
        energy = shifted @ spins.T
        for (a, b), j in zip(inst.edges, inst.couplings):
            energy -= j * spins[:, a] * spins[:, b]
        total += np.exp(-1j * energy).sum()
    return float(abs(total) ** 2 / 2 ** (2 * inst.n))
