"""End-to-end protocol execution: keys, encryption, rounds, verdicts.

A protocol run is 2κ+1 rounds — one computation round and κ trap rounds
per parity — executed in a secret random order against a prover that may
be honest, noisy, or actively deviating.  Rounds are simulated one of two
ways that must agree: a phase-table/Walsh-Hadamard fast path used when the
run is noiseless and deviations are Pauli (every acceptance experiment),
and a dense state-vector path that handles trajectory noise and arbitrary
joint unitary deviations under the qubit cap.

The deviation model places Pauli attacks between the prover's basis
rotations and the X readouts, which is where arbitrary deviations are
reduced to Pauli mixtures by the encryption twirl; on the fast path a Z or
Y letter is therefore exactly a raw-outcome bit flip.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .graphs import (
    ANGLE_STEPS,
    GraphSpec,
    bridge_corrections,
    carve_target,
    carve_trap_graph,
    k_to_radians,
    neighbor_dummy_parity,
)
from .simulator import (
    DEFAULT_QUBIT_CAP,
    Distribution,
    NoiseModel,
    StateVector,
    _check_cap,
    apply_cz,
    apply_noise,
    apply_pauli,
    apply_phase,
    bits_to_string,
    exact_probability_array,
    fwht_inplace,
    measure_xy,
    prepare_qubit,
    string_to_bits,
    tensor,
)

KIND_TARGET = "target"
KIND_EVEN = "even"
KIND_ODD = "odd"

_EXP16 = np.exp(-1j * np.arange(16) * math.pi / 8)


@dataclass(frozen=True)
class RoundLayout:
    """The 2κ+1 carvings of one protocol instance, in canonical order:
    the computation target first, then the κ even-parity trap graphs,
    then the κ odd-parity ones.  The secret permutation maps execution
    slots onto this list."""

    m: int
    n: int
    kappa: int
    graphs: tuple[GraphSpec, ...]
    kinds: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.kappa < 1:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")
        expected = (
            (KIND_TARGET,)
            + (KIND_EVEN,) * self.kappa
            + (KIND_ODD,) * self.kappa
        )
        if self.kinds != expected:
            raise ValueError(
                f"round kinds must be {expected}, got {self.kinds}"
            )
        if len(self.graphs) != 2 * self.kappa + 1:
            raise ValueError("need one graph per round")
        for g in self.graphs:
            if (g.m, g.n) != (self.m, self.n):
                raise ValueError("all rounds must share the lattice shape")

    @property
    def rounds(self) -> int:
        return 2 * self.kappa + 1

    @property
    def target(self) -> GraphSpec:
        return self.graphs[0]


def make_round_layout(m: int, n: int, kappa: int) -> RoundLayout:
    target = carve_target(m, n)
    even = carve_trap_graph(m, n, "even")
    odd = carve_trap_graph(m, n, "odd")
    if not even.trap_ids() or not odd.trap_ids():
        raise ValueError("carving leaves one parity without trap positions")
    return RoundLayout(
        m=m,
        n=n,
        kappa=kappa,
        graphs=(target,) + (even,) * kappa + (odd,) * kappa,
        kinds=(KIND_TARGET,) + (KIND_EVEN,) * kappa + (KIND_ODD,) * kappa,
    )


@dataclass(frozen=True)
class SecretKey:
    """Everything the verifier keeps private for one protocol run.

    All per-round tables are indexed by canonical graph position, not by
    execution slot; ``perm[slot]`` says which canonical graph runs in a
    slot.  ``theta_k`` covers non-dummy vertices; dummies get their decoy
    measurement angle directly in ``dummy_delta_k``.
    """

    perm: tuple[int, ...]
    theta_k: tuple[Mapping[int, int], ...]
    r: tuple[Mapping[int, int], ...]
    rprime: tuple[Mapping[int, int], ...]
    d: tuple[Mapping[int, int], ...]
    dummy_delta_k: tuple[Mapping[int, int], ...]

    @property
    def target_slot(self) -> int:
        return self.perm.index(0)


def keygen(layout: RoundLayout, rng: np.random.Generator) -> SecretKey:
    """Draw a fresh uniform key.  The draw order is fixed — permutation
    first, then per canonical round: θ, r, r′, dummy bits, dummy decoys —
    so a seeded generator reproduces the key exactly."""
    perm = tuple(int(i) for i in rng.permutation(layout.rounds))
    theta, r, rprime, d, decoy = [], [], [], [], []
    for g in layout.graphs:
        nd = g.non_dummy_ids()
        dm = g.dummy_ids()
        theta.append(
            dict(zip(nd, (int(x) for x in rng.integers(0, 16, size=len(nd)))))
        )
        size = g.m * g.n
        r.append(
            dict(enumerate(int(x) for x in rng.integers(0, 2, size=size)))
        )
        rprime.append(
            dict(enumerate(int(x) for x in rng.integers(0, 2, size=size)))
        )
        d.append(
            dict(zip(dm, (int(x) for x in rng.integers(0, 2, size=len(dm)))))
        )
        decoy.append(
            dict(zip(dm, (int(x) for x in rng.integers(0, 16, size=len(dm)))))
        )
    return SecretKey(
        perm=perm,
        theta_k=tuple(theta),
        r=tuple(r),
        rprime=tuple(rprime),
        d=tuple(d),
        dummy_delta_k=tuple(decoy),
    )


def encrypt_angles(
    key: SecretKey, layout: RoundLayout
) -> tuple[dict[int, int], ...]:
    """Measurement angles the prover is told, per canonical round.

    Non-dummy vertices carry δ = θ + (−1)^{r′}φ + rπ on the 16-point
    grid; dummy vertices get their pre-drawn decoy so the transcript
    looks the same everywhere.
    """
    out = []
    for gi, g in enumerate(layout.graphs):
        deltas: dict[int, int] = {}
        for v in range(g.m * g.n):
            if g.is_dummy(v):
                deltas[v] = key.dummy_delta_k[gi][v]
            else:
                sign = -1 if key.rprime[gi][v] else 1
                deltas[v] = (
                    key.theta_k[gi][v]
                    + sign * g.phi_k[v]
                    + 8 * key.r[gi][v]
                ) % ANGLE_STEPS
        out.append(deltas)
    return tuple(out)


@dataclass(frozen=True)
class AttackSpec:
    """A prover deviation: a Pauli mixture or one explicit unitary.

    ``pauli_terms`` is a weighted list; each term maps (slot, vertex) to
    a letter and one term is sampled per protocol run, so the same string
    spans all rounds of that run.  ``unitary`` acts jointly on every
    round's qubits (slot-major, little-endian) plus ``private_qubits``
    fresh |0⟩ ancillas on top, and is only simulable under the qubit cap.
    """

    pauli_terms: tuple[tuple[float, tuple[tuple[tuple[int, int], str], ...]], ...] | None = None
    unitary: np.ndarray | None = None
    private_qubits: int = 0

    def __post_init__(self) -> None:
        if self.pauli_terms is not None and self.unitary is not None:
            raise ValueError("attack is either Pauli terms or a unitary")
        if self.pauli_terms is not None:
            weights = [w for w, _ in self.pauli_terms]
            if any(w < 0 for w in weights):
                raise ValueError("attack weights must be nonnegative")
            if abs(sum(weights) - 1) > 1e-9:
                raise ValueError("attack weights must sum to 1")
            for _, letters in self.pauli_terms:
                for (_slot, _v), letter in letters:
                    if letter not in "IXYZ":
                        raise ValueError(f"bad Pauli letter {letter!r}")
        if self.unitary is not None:
            dim = self.unitary.shape[0]
            if self.unitary.shape != (dim, dim) or dim & (dim - 1):
                raise ValueError("unitary must be square with 2^q rows")
            if self.private_qubits < 0:
                raise ValueError("private register size must be >= 0")
            dev = np.linalg.norm(
                self.unitary.conj().T @ self.unitary - np.eye(dim)
            )
            if dev > 1e-10:
                raise ValueError(f"matrix is not unitary (deviation {dev:g})")

    @property
    def is_honest(self) -> bool:
        return self.pauli_terms is None and self.unitary is None


HONEST = AttackSpec()


def single_pauli_attack(
    letters: Mapping[tuple[int, int], str]
) -> AttackSpec:
    """Deterministic attack: one Pauli string with weight 1."""
    return AttackSpec(
        pauli_terms=((1.0, tuple(sorted(letters.items()))),)
    )


def _sample_letters(
    strategy: AttackSpec | None, rng: np.random.Generator
) -> dict[tuple[int, int], str]:
    if strategy is None or strategy.pauli_terms is None:
        return {}
    weights = np.array([w for w, _ in strategy.pauli_terms], dtype=float)
    idx = int(rng.choice(len(weights), p=weights / weights.sum()))
    return dict(strategy.pauli_terms[idx][1])


# ---------------------------------------------------------------------------
# Fast path: per-component phase tables


@dataclass(frozen=True)
class _ComponentPlan:
    vertices: tuple[int, ...]
    sign: np.ndarray      # (−1)^{#internal edges on}, length 2^c
    bits: np.ndarray      # (2^c, c) int8 bit matrix


@dataclass(frozen=True)
class _SimPlan:
    components: tuple[_ComponentPlan, ...]
    dummies: tuple[int, ...]


@lru_cache(maxsize=64)
def _sim_plan(g: GraphSpec, cap: int) -> _SimPlan:
    adj: dict[int, list[int]] = {v: [] for v in g.non_dummy_ids()}
    for a, b in g.induced_edges():
        adj[a].append(b)
        adj[b].append(a)
    seen: set[int] = set()
    comps = []
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
        comp = tuple(sorted(comp))
        c = len(comp)
        _check_cap(c, cap)
        pos = {v: j for j, v in enumerate(comp)}
        idx = np.arange(2**c)
        sign = np.ones(2**c, dtype=np.float64)
        for a, b in g.induced_edges():
            if a in pos and b in pos:
                both = ((idx >> pos[a]) & (idx >> pos[b]) & 1).astype(bool)
                sign[both] *= -1
        bits = ((idx[:, None] >> np.arange(c)[None, :]) & 1).astype(np.int8)
        comps.append(_ComponentPlan(vertices=comp, sign=sign, bits=bits))
    return _SimPlan(components=tuple(comps), dummies=g.dummy_ids())


def _fast_round_bits(
    g: GraphSpec,
    k_eff: Mapping[int, int],
    flip: Mapping[int, int],
    rng: np.random.Generator,
    cap: int,
) -> list[int]:
    """Sample raw outcomes of one noiseless round.

    ``k_eff[v]`` is the grid angle the round effectively measures at once
    the preparation phase is absorbed (δ − θ); ``flip`` marks vertices
    whose raw bit a deviation inverts.  Dummy outcomes are fair coins.
    """
    plan = _sim_plan(g, cap)
    raw = [0] * (g.m * g.n)
    for comp in plan.components:
        kvec = np.array([k_eff[v] for v in comp.vertices], dtype=np.int64)
        phases = _EXP16[(comp.bits @ kvec) % 16]
        f = comp.sign * phases
        fwht_inplace(f)
        probs = f.real**2 + f.imag**2
        cum = np.cumsum(probs)
        pick = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        for j, v in enumerate(comp.vertices):
            raw[v] = (pick >> j) & 1
    for v in plan.dummies:
        raw[v] = int(rng.integers(0, 2))
    for v, do_flip in flip.items():
        if do_flip:
            raw[v] ^= 1
    return raw


# ---------------------------------------------------------------------------
# Dense path


def _prep_states(
    g: GraphSpec,
    theta_k: Mapping[int, int],
    d_bits: Mapping[int, int],
) -> list[StateVector]:
    parity = neighbor_dummy_parity(g, [d_bits[u] for u in g.dummy_ids()])
    states = []
    for v in range(g.m * g.n):
        if g.is_dummy(v):
            states.append(prepare_qubit("dummy", d_bits[v]))
        else:
            states.append(
                prepare_qubit(
                    "z_flipped_plus", k_to_radians(theta_k[v]), parity[v]
                )
            )
    return states


def dense_round_state(
    g: GraphSpec,
    theta_k: Mapping[int, int],
    d_bits: Mapping[int, int],
    delta_k: Mapping[int, int],
    noise: NoiseModel,
    letters: Mapping[int, str],
    rng: np.random.Generator,
    cap: int = DEFAULT_QUBIT_CAP,
) -> StateVector:
    """Full-lattice state of one round, right before the X readouts.

    Preparation (with the sender's per-qubit noise), blanket entangling
    over every lattice edge (with per-gate noise on one random endpoint),
    basis rotations, then any Pauli deviation letters for this round.
    """
    size = g.m * g.n
    _check_cap(size, cap)
    state = tensor(_prep_states(g, theta_k, d_bits), cap=cap)
    for v in range(size):
        apply_noise(state, v, noise.eps_v, noise.mix, rng)
    for a, b in g.edges:
        apply_cz(state, a, b)
        if noise.eps_p > 0:
            victim = a if rng.random() < 0.5 else b
            apply_noise(state, victim, noise.eps_p, noise.mix, rng)
    for v in range(size):
        apply_phase(state, v, -k_to_radians(delta_k[v]))
    for v, letter in sorted(letters.items()):
        apply_pauli(state, v, letter)
    return state


def readout_all(
    state: StateVector,
    rng: np.random.Generator,
    eps_p: float = 0.0,
    mix: Mapping[str, float] | None = None,
    count: int | None = None,
) -> tuple[list[int], StateVector]:
    """X-measure qubits count−1..0 (highest first), with per-readout noise.

    Returns the outcome bits (indexed by original qubit position) and
    whatever register remains unmeasured above ``count``.
    """
    count = state.n if count is None else count
    bits = [0] * count
    for q in reversed(range(count)):
        if eps_p > 0:
            apply_noise(state, q, eps_p, mix or {}, rng)
        bit, state = measure_xy(state, q, 0.0, rng)
        bits[q] = bit
    return bits, state


def run_round(
    key: SecretKey,
    round_index: int,
    layout: RoundLayout,
    strategy: AttackSpec | None = None,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
    *,
    resolved_letters: Mapping[tuple[int, int], str] | None = None,
    all_deltas: Sequence[Mapping[int, int]] | None = None,
    cap: int = DEFAULT_QUBIT_CAP,
) -> list[int]:
    """Execute one slot and return every lattice cell's raw outcome.

    A noiseless round with at most Pauli deviations runs on the
    phase-table fast path; anything else takes the dense simulator.
    Standalone callers may pass a mixture AttackSpec (a term is sampled
    here); `run_protocol` pre-samples one term for the whole run and
    hands it down via ``resolved_letters``.
    """
    if rng is None:
        raise ValueError("an explicitly seeded generator is required")
    noise = noise or NoiseModel()
    if strategy is not None and strategy.unitary is not None:
        raise ValueError(
            "joint unitary deviations span rounds; use run_protocol"
        )
    if resolved_letters is None:
        resolved_letters = _sample_letters(strategy, rng)
    if all_deltas is None:
        all_deltas = encrypt_angles(key, layout)
    gi = key.perm[round_index]
    g = layout.graphs[gi]
    deltas = all_deltas[gi]
    letters = {
        v: letter
        for (slot, v), letter in resolved_letters.items()
        if slot == round_index
    }
    if noise.is_noiseless():
        k_eff = {
            v: (deltas[v] - key.theta_k[gi][v]) % ANGLE_STEPS
            for v in g.non_dummy_ids()
        }
        flip = {v: 1 for v, p in letters.items() if p in ("Z", "Y")}
        return _fast_round_bits(g, k_eff, flip, rng, cap)
    state = dense_round_state(
        g,
        key.theta_k[gi],
        key.d[gi],
        deltas,
        noise,
        letters,
        rng,
        cap=cap,
    )
    bits, _ = readout_all(state, rng, noise.eps_p, noise.mix)
    return bits


# ---------------------------------------------------------------------------
# Decryption and verdicts


def decrypt(
    key: SecretKey,
    layout: RoundLayout,
    raw_rounds: Sequence[Sequence[int]],
) -> tuple[tuple[int, ...], ...]:
    """Per-slot decrypted outcomes over non-dummy vertices (ascending).

    Each bit is unpadded by its own r and by r′ of its surviving
    neighbours; the computation round additionally gets the connector
    corrections.  Dummy outcomes never appear in the output.
    """
    if len(raw_rounds) != layout.rounds:
        raise ValueError(
            f"got {len(raw_rounds)} rounds of outcomes, "
            f"expected {layout.rounds}"
        )
    out = []
    for slot, raw in enumerate(raw_rounds):
        gi = key.perm[slot]
        g = layout.graphs[gi]
        if len(raw) != g.m * g.n:
            raise ValueError(f"slot {slot}: need one outcome per cell")
        padded = list(raw)
        for v in g.non_dummy_ids():
            x = raw[v] ^ key.r[gi][v]
            for u in g.neighbors(v):
                if not g.is_dummy(u):
                    x ^= key.rprime[gi][u]
            padded[v] = x
        if layout.kinds[gi] == KIND_TARGET:
            mask = bridge_corrections(g, padded)
            for v in g.non_dummy_ids():
                padded[v] ^= mask[v]
        out.append(tuple(padded[v] for v in g.non_dummy_ids()))
    return tuple(out)


@dataclass(frozen=True)
class RunRecord:
    """Transcript of one protocol run, verifier's view."""

    raw: tuple[tuple[int, ...], ...]
    decrypted: tuple[tuple[int, ...], ...]
    trap_passed: tuple[bool | None, ...]
    accept: bool
    target_output: str
    target_slot: int
    attack_letters: tuple[tuple[tuple[int, int], str], ...]
    op_counts: Mapping[str, int]

    def to_json_dict(self) -> dict:
        return {
            "raw": [list(rnd) for rnd in self.raw],
            "decrypted": [list(rnd) for rnd in self.decrypted],
            "trap_passed": list(self.trap_passed),
            "accept": self.accept,
            "target_output": self.target_output,
            "target_slot": self.target_slot,
            "attack_letters": [
                [slot, v, letter]
                for (slot, v), letter in self.attack_letters
            ],
            "op_counts": dict(self.op_counts),
        }


def _joint_raw_rounds(
    layout: RoundLayout,
    key: SecretKey,
    strategy: AttackSpec,
    noise: NoiseModel,
    rng: np.random.Generator,
    cap: int,
) -> list[list[int]]:
    """Simulate all rounds in one register and apply the joint unitary."""
    size = layout.m * layout.n
    total = layout.rounds * size + strategy.private_qubits
    _check_cap(total, cap)
    if strategy.unitary.shape[0] != 2**total:
        raise ValueError(
            f"unitary covers {int(math.log2(strategy.unitary.shape[0]))} "
            f"qubits, instance needs {total}"
        )
    deltas = encrypt_angles(key, layout)
    states = []
    for slot in range(layout.rounds):
        gi = key.perm[slot]
        states.extend(_prep_states(layout.graphs[gi], key.theta_k[gi], key.d[gi]))
    for _ in range(strategy.private_qubits):
        states.append(prepare_qubit("dummy", 0))
    state = tensor(states, cap=cap)
    for q in range(layout.rounds * size):
        apply_noise(state, q, noise.eps_v, noise.mix, rng)
    for slot in range(layout.rounds):
        gi = key.perm[slot]
        base = slot * size
        for a, b in layout.graphs[gi].edges:
            apply_cz(state, base + a, base + b)
            if noise.eps_p > 0:
                victim = a if rng.random() < 0.5 else b
                apply_noise(state, base + victim, noise.eps_p, noise.mix, rng)
        for v in range(size):
            apply_phase(state, base + v, -k_to_radians(deltas[gi][v]))
    state.amps = strategy.unitary @ state.amps
    bits, _ = readout_all(
        state, rng, noise.eps_p, noise.mix, count=layout.rounds * size
    )
    return [bits[s * size : (s + 1) * size] for s in range(layout.rounds)]


def _execute_run(
    layout: RoundLayout,
    key: SecretKey,
    strategy: AttackSpec | None,
    letters: Mapping[tuple[int, int], str],
    noise: NoiseModel,
    rng: np.random.Generator,
    cap: int,
) -> RunRecord:
    if strategy is not None and strategy.unitary is not None:
        raw_rounds = _joint_raw_rounds(layout, key, strategy, noise, rng, cap)
    else:
        deltas = encrypt_angles(key, layout)
        raw_rounds = [
            run_round(
                key,
                slot,
                layout,
                strategy=None,
                noise=noise,
                rng=rng,
                resolved_letters=letters,
                all_deltas=deltas,
                cap=cap,
            )
            for slot in range(layout.rounds)
        ]
    decrypted = decrypt(key, layout, raw_rounds)
    trap_passed: list[bool | None] = []
    accept = True
    for slot in range(layout.rounds):
        gi = key.perm[slot]
        if layout.kinds[gi] == KIND_TARGET:
            trap_passed.append(None)
        else:
            ok = all(b == 0 for b in decrypted[slot])
            trap_passed.append(ok)
            accept = accept and ok
    target_slot = key.target_slot
    size = layout.m * layout.n
    edges = len(layout.target.edges)
    return RunRecord(
        raw=tuple(tuple(r) for r in raw_rounds),
        decrypted=decrypted,
        trap_passed=tuple(trap_passed),
        accept=accept,
        target_output="".join(str(b) for b in decrypted[target_slot]),
        target_slot=target_slot,
        attack_letters=tuple(sorted(letters.items())),
        op_counts={
            "preparations": layout.rounds * size,
            "entangling": layout.rounds * edges,
            "measurements": layout.rounds * size,
        },
    )


def run_protocol(
    layout: RoundLayout,
    strategy: AttackSpec | None = None,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
    cap: int = DEFAULT_QUBIT_CAP,
) -> RunRecord:
    """One full verification run: keygen, encrypt, all rounds, decrypt.

    Accepts exactly when every trap round decodes to all zeros.
    """
    if rng is None:
        raise ValueError("an explicitly seeded generator is required")
    noise = noise or NoiseModel()
    key = keygen(layout, rng)
    letters = _sample_letters(strategy, rng)
    return _execute_run(layout, key, strategy, letters, noise, rng, cap)


@dataclass(frozen=True)
class SchemeVerdict:
    """Outcome of the M-repetition scheme."""

    accept: bool
    pass_fraction: float
    output: str
    m: int
    l: float

    def to_json_dict(self) -> dict:
        return {
            "accept": self.accept,
            "pass_fraction": self.pass_fraction,
            "output": self.output,
            "m": self.m,
            "l": self.l,
        }


def run_scheme(
    layout: RoundLayout,
    strategy: AttackSpec | None,
    noise: NoiseModel | None,
    m_repetitions: int,
    l_threshold: float,
    rng: np.random.Generator,
    cap: int = DEFAULT_QUBIT_CAP,
    record_sink: list[RunRecord] | None = None,
) -> SchemeVerdict:
    """M independent runs; accept when the pass fraction reaches l.

    Ties accept (the comparison is ≥).  Each repetition gets its own
    spawned generator stream, so results do not depend on scheduling; the
    published output is one repetition's computation string chosen
    uniformly.  Pass a list as ``record_sink`` to collect the
    per-repetition transcripts.
    """
    if m_repetitions < 1:
        raise ValueError("need at least one repetition")
    if not 0 <= l_threshold <= 1:
        raise ValueError("acceptance fraction must lie in [0, 1]")
    streams = rng.spawn(m_repetitions)
    passes = 0
    outputs = []
    for child in streams:
        rec = run_protocol(layout, strategy, noise, child, cap=cap)
        passes += int(rec.accept)
        outputs.append(rec.target_output)
        if record_sink is not None:
            record_sink.append(rec)
    fraction = passes / m_repetitions
    return SchemeVerdict(
        accept=fraction >= l_threshold,
        pass_fraction=fraction,
        output=outputs[int(rng.integers(m_repetitions))],
        m=m_repetitions,
        l=l_threshold,
    )


# ---------------------------------------------------------------------------
# Fidelity-gap estimation


def _correction_index_map(g: GraphSpec) -> np.ndarray:
    """Connector-correction involution as a permutation of outcome indices."""
    nd = g.non_dummy_ids()
    pos = {v: j for j, v in enumerate(nd)}
    n = len(nd)
    idx = np.arange(2**n)
    out = idx.copy()
    for b in g.bridge_ids():
        ends = [u for u in g.neighbors(b) if not g.is_dummy(u)]
        mask = (1 << pos[ends[0]]) | (1 << pos[ends[1]])
        hit = ((idx >> pos[b]) & 1).astype(bool)
        out[hit] ^= mask
    return out


def honest_target_distribution(
    g: GraphSpec, cap: int = DEFAULT_QUBIT_CAP
) -> Distribution:
    """What the decrypted computation string looks like for an honest run:
    the carved graph measured at its base angles, pushed through the
    connector corrections."""
    probs = exact_probability_array(g, g.base_angles(), cap=cap)
    corrected = np.zeros_like(probs)
    np.add.at(corrected, _correction_index_map(g), probs)
    n = len(g.non_dummy_ids())
    return Distribution(
        nbits=n,
        probs={
            bits_to_string(i, n): float(p) for i, p in enumerate(corrected)
        },
    )


@dataclass(frozen=True)
class GapEstimate:
    """Trap-pass and computation-escape estimates with standard errors.

    ``fc2`` is the twirl-picture escape frequency: the fraction of runs
    whose sampled deviation put no bit-flipping letter on the computation
    round.  ``fc2_distributional`` is the distribution-level squared
    fidelity of the decrypted output against the honest one — for
    flip-invariant targets it stays 1 even under flips, which is why the
    gap is defined against the escape form.
    """

    ft2: float
    fc2: float
    gap: float
    ft2_se: float
    fc2_se: float
    gap_se: float
    samples: int
    fc2_distributional: float | None = None


def _bhattacharyya_sq(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sqrt(p * q).sum() ** 2)


def estimate_fidelity_gap(
    layout: RoundLayout,
    strategy: AttackSpec | None,
    samples: int,
    rng: np.random.Generator,
    cap: int = DEFAULT_QUBIT_CAP,
    compute_distributional: bool = True,
) -> GapEstimate:
    """Monte Carlo over secret keys of trap passing vs computation escape.

    Noiseless runs with Pauli deviations only — the regime where the
    combinatorial bounds speak.  Per sampled key the run is simulated in
    full for the trap verdict; the escape indicator asks whether any Z/Y
    letter landed on a non-dummy cell of whichever slot held the
    computation round.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if strategy is not None and strategy.unitary is not None:
        raise ValueError("gap estimation is defined over Pauli mixtures")
    noise = NoiseModel()
    target = layout.target
    nd_target = set(target.non_dummy_ids())
    honest_probs = None
    corr_map = None
    pos = {v: j for j, v in enumerate(target.non_dummy_ids())}
    if compute_distributional:
        dist = honest_target_distribution(target, cap=cap)
        honest_probs = np.zeros(2 ** len(pos))
        for s, p in dist.probs.items():
            honest_probs[string_to_bits(s)] = p
        corr_map = _correction_index_map(target)
    passes = np.zeros(samples)
    escapes = np.zeros(samples)
    fids = np.zeros(samples) if compute_distributional else None
    fid_cache: dict[int, float] = {}
    for i in range(samples):
        key = keygen(layout, rng)
        letters = _sample_letters(strategy, rng)
        rec = _execute_run(layout, key, None, letters, noise, rng, cap)
        passes[i] = 1.0 if rec.accept else 0.0
        slot = key.target_slot
        hit = any(
            s == slot and v in nd_target and letter in ("Z", "Y")
            for (s, v), letter in letters.items()
        )
        escapes[i] = 0.0 if hit else 1.0
        if compute_distributional:
            flip = 0
            for (s, v), letter in letters.items():
                if s == slot and v in nd_target and letter in ("Z", "Y"):
                    flip |= 1 << pos[v]
            if flip not in fid_cache:
                # decrypted output = C(C(honest) xor flip): push the
                # honest distribution through that bijection
                moved = np.zeros_like(honest_probs)
                np.add.at(
                    moved, corr_map[corr_map ^ flip], honest_probs
                )
                fid_cache[flip] = _bhattacharyya_sq(honest_probs, moved)
            fids[i] = fid_cache[flip]
    ft2 = float(passes.mean())
    fc2 = float(escapes.mean())
    diffs = passes - escapes
    return GapEstimate(
        ft2=ft2,
        fc2=fc2,
        gap=ft2 - fc2,
        ft2_se=float(passes.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0,
        fc2_se=float(escapes.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0,
        gap_se=float(diffs.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0,
        samples=samples,
        fc2_distributional=float(fids.mean()) if compute_distributional else None,
    )
