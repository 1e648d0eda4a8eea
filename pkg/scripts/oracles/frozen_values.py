#!/usr/bin/env python3
"""Independent oracles for the constants frozen into the test suite.

Every value here is computed by a route that does NOT share code with the
library: exhaustive enumeration, closed forms derived by hand, or a dense
brute-force simulation written from scratch in this file. Run it and paste
the printed block into the tests when a constant changes.

Run: python scripts/oracles/frozen_values.py
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------------------
# Trap-overlap bound: 1 / C(2k+1, k)  (route independent from k!(k+1)!/(2k+1)!)
# ---------------------------------------------------------------------------
def delta_table(kmax: int = 8) -> dict[int, Fraction]:
    return {k: Fraction(1, math.comb(2 * k + 1, k)) for k in range(1, kmax + 1)}


# ---------------------------------------------------------------------------
# Exhaustive enumeration of trap layouts for kappa = 1.
#
# A layout assigns the 3 round slots one of {target, even-trap, odd-trap}.
# An attack is a list of (slot, parity) pairs: a flip at a position of that
# coordinate parity, chosen among positions that are non-dummy in the target.
# The flip is caught iff the slot holds the trap graph of the same parity.
# ---------------------------------------------------------------------------
def enumerate_pass_rate(attacked: list[tuple[int, str]]) -> Fraction:
    layouts = [p for p in itertools.permutations(["target", "even", "odd"])]
    passing = 0
    for lay in layouts:
        caught = any(lay[slot] == parity for slot, parity in attacked)
        if not caught:
            passing += 1
    return Fraction(passing, len(layouts))


def escape_rate_target_untouched(attacked: list[tuple[int, str]]) -> Fraction:
    """Fraction of layouts where no attacked slot holds the target."""
    layouts = [p for p in itertools.permutations(["target", "even", "odd"])]
    hits = sum(
        1
        for lay in layouts
        if all(lay[slot] != "target" for slot, _ in attacked)
    )
    return Fraction(hits, len(layouts))


# ---------------------------------------------------------------------------
# Closed-form combinatoric gap for one attack class, by hand:
#   F_t  = [l*C(2k+1-l, k-x) + (2k+1-l)*C(2k-l, k-x)] / [C(2k+1,k)*(k+1)]
#   Fc2  = (2k+1-l)/(2k+1)
# ---------------------------------------------------------------------------
def closed_form_gap(k: int, l: int, x: int) -> tuple[Fraction, Fraction, Fraction]:
    num = l * math.comb(2 * k + 1 - l, k - x) + (2 * k + 1 - l) * math.comb(
        2 * k - l, k - x
    )
    ft = Fraction(num, math.comb(2 * k + 1, k) * (k + 1))
    fc2 = Fraction(2 * k + 1 - l, 2 * k + 1)
    return ft, fc2, ft - fc2


# ---------------------------------------------------------------------------
# Repetition/threshold arithmetic examples, substituted by hand.
# ---------------------------------------------------------------------------
def scheme_examples() -> dict[str, float]:
    out: dict[str, float] = {}
    # N=9, kappa=1, eps_v = eps_p = 0.001, beta = 0.05
    N, k, ev, ep, beta = 9, 1, 0.001, 0.001, 0.05
    m_real = math.log(1 / beta) / (2 * k**2 * N**2 * (ev + ep) ** 2)
    out["thm1_m_real"] = m_real
    out["thm1_m"] = math.ceil(m_real)
    out["thm1_l"] = 1 - k * N * (2 * ev + 4 * ep)
    out["thm1_completeness"] = 1 - math.sqrt(N * (ev + 3 * ep))
    out["thm1_soundness"] = math.sqrt(k * N * (3 * ev + 5 * ep) + 1 / 3)
    # eps'' = 0.01, beta = 0.05, kappa = 2
    e2, beta2, k2 = 0.01, 0.05, 2
    m2_real = math.log(1 / beta2) / (2 * e2**2)
    out["thm2_m_real"] = m2_real
    out["thm2_m"] = math.ceil(m2_real)
    out["thm2_l"] = 1 - 2 * e2
    out["thm2_completeness"] = 1 - math.sqrt(e2)
    out["thm2_soundness"] = math.sqrt(3 * e2 + float(Fraction(1, 10)))
    # composition: a1=0.2, a2=0.1, b1=b2=0.9, N=10
    a1, a2, b1, b2, n10 = 0.2, 0.1, 0.9, 0.9, 10
    out["thm3_eps"] = (b1 + b2 - 1 - 2.0**-n10) * a1 * a2 / 2
    return out


# ---------------------------------------------------------------------------
# Fault-tolerance numbers (hand-substituted formulas).
# ---------------------------------------------------------------------------
def ft_examples() -> dict[str, float]:
    out: dict[str, float] = {}
    c = 0.134
    phen = c / (1 + c)
    phys = phen / 6
    out["phenomenological"] = phen
    out["physical"] = phys
    for frac, key in [(20, "m_at_20th"), (50, "m_at_50th"), (100, "m_at_100th")]:
        eps = phys / frac
        pc = (1 - (1 - 2 * (6 * eps)) ** 6) / 2
        out[key] = 1 / (1 - pc) ** 564
    return out


# ---------------------------------------------------------------------------
# Single-qubit xy measurement: P(0) on (|0>+e^{i a}|1>)/sqrt2 at angle d
# equals cos^2((a-d)/2).  A couple of spot values.
# ---------------------------------------------------------------------------
def measure_spots() -> dict[str, float]:
    return {
        "theta_pi8_delta_0": math.cos(math.pi / 16) ** 2,
        "theta_0_delta_pi2": math.cos(math.pi / 4) ** 2,
        "theta_pi_delta_0": math.cos(math.pi / 2) ** 2,
    }


# ---------------------------------------------------------------------------
# Dense from-scratch simulation of the smallest carving (3x3 lattice).
#
# Non-dummy vertices: chains u0,u1,u2 (row 0) and v0,v1,v2 (row 2), plus a
# connector w at (1,2). Edges: chain links and u2-w, w-v2. Measurement
# angles: u0=v0=0, u1=v1=pi/8, u2=v2=pi/2, w=pi/2. Qubit order
# (u0,u1,u2,w,v0,v1,v2) = lattice row-major; bit j of the index is qubit j
# (least significant first).
# ---------------------------------------------------------------------------
def smallest_carving_distribution() -> np.ndarray:
    names = ["u0", "u1", "u2", "w", "v0", "v1", "v2"]
    idx = {n: i for i, n in enumerate(names)}
    edges = [("u0", "u1"), ("u1", "u2"), ("u2", "w"), ("w", "v2"),
             ("v0", "v1"), ("v1", "v2")]
    delta = {"u0": 0.0, "u1": math.pi / 8, "u2": math.pi / 2,
             "w": math.pi / 2, "v0": 0.0, "v1": math.pi / 8, "v2": math.pi / 2}
    T = len(names)
    dim = 2**T
    bits = ((np.arange(dim)[:, None] >> np.arange(T)[None, :]) & 1).astype(np.int64)
    amp = np.full(dim, 2.0**(-T / 2), dtype=complex)
    for a, b in edges:
        amp *= np.where((bits[:, idx[a]] & bits[:, idx[b]]) == 1, -1.0, 1.0)
    phase = bits @ np.array([-delta[n] for n in names])
    amp = amp * np.exp(1j * phase)
    # Hadamard on every qubit: full Walsh transform by explicit matrix.
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    full = np.ones((1, 1), dtype=complex)
    for _ in range(T):
        full = np.kron(h, full)
    probs = np.abs(full @ amp) ** 2
    # Connector correction: outcome 1 at w flips u2 and v2.
    corrected = np.zeros_like(probs)
    for s in range(dim):
        t = s
        if (s >> idx["w"]) & 1:
            t ^= (1 << idx["u2"]) | (1 << idx["v2"])
        corrected[t] += probs[s]
    return corrected


def valid_classes(k: int) -> list[tuple[int, int]]:
    """All (l, x): 1 <= l <= 2k, x <= k, l-x <= k, x >= l-x, plus the
    distinguished all-rounds class (2k+1, k+1)."""
    out = []
    for l in range(1, 2 * k + 1):
        for x in range(0, l + 1):
            if x <= k and l - x <= k and x >= l - x:
                out.append((l, x))
    out.append((2 * k + 1, k + 1))
    return out


def sign_scan(kmax: int = 8) -> None:
    """Exact-rational sign of the closed-form gap over every valid class.

    The all-rounds class contributes the trap-overlap bound itself; every
    other class is evaluated through closed_form_gap.  Prints any class with
    l <= 2k whose gap is positive, and whether the overall max equals the
    closed-form trap-overlap bound.
    """
    for k in range(1, kmax + 1):
        delta = Fraction(1, math.comb(2 * k + 1, k))
        gaps: dict[tuple[int, int], Fraction] = {}
        for l, x in valid_classes(k):
            if l == 2 * k + 1:
                gaps[(l, x)] = delta
            else:
                gaps[(l, x)] = closed_form_gap(k, l, x)[2]
        positives = {c: g for c, g in gaps.items() if c[0] <= 2 * k and g > 0}
        print(
            f"k={k}: classes={len(gaps)}"
            f" max==delta: {max(gaps.values()) == delta}"
            f" positive(l<=2k): {positives or 'none'}"
        )


def kappa1_truth_table() -> None:
    """Exhaustive layout enumeration vs the closed forms, kappa = 1."""
    cases: dict[tuple[int, int], list[tuple[int, str]]] = {
        (1, 1): [(0, "even")],
        (2, 1): [(0, "even"), (1, "odd")],
        (3, 2): [(0, "even"), (1, "even"), (2, "odd")],
    }
    for (l, x), att in cases.items():
        pas = enumerate_pass_rate(att)
        esc = escape_rate_target_untouched(att)
        if l == 3:
            ft, fc2 = Fraction(1, 3), Fraction(0)
        else:
            ft, fc2, _ = closed_form_gap(1, l, x)
        print(
            f"(l={l},x={x}): enumerated pass={pas} escape={esc}"
            f" | closed-form ft={ft} fc2={fc2}"
            f" | true gap={pas - esc} closed-form gap={ft - fc2}"
        )
    fixed = [(0, "even"), (1, "even"), (2, "even")]
    print("same-parity cell in all 3 rounds: pass =",
          enumerate_pass_rate(fixed))


def main() -> None:
    print("# trap-overlap bound, route 1/C(2k+1,k)")
    for k, v in delta_table().items():
        print(f"delta[{k}] = {v}")

    print("\n# sign scan over all valid attack classes")
    sign_scan()

    print("\n# kappa=1 enumerated truth vs closed forms")
    kappa1_truth_table()

    print("\n# exhaustive kappa=1 pass rates")
    full_attack = [(0, "even"), (1, "even"), (2, "odd")]
    print("all-rounds (even,even,odd):", enumerate_pass_rate(full_attack))
    print("  escape(target untouched):",
          escape_rate_target_untouched(full_attack))
    one_round = [(0, "even")]
    print("single round (even):", enumerate_pass_rate(one_round))
    print("  escape:", escape_rate_target_untouched(one_round))
    two_round = [(0, "even"), (1, "odd")]
    print("two rounds (even,odd):", enumerate_pass_rate(two_round))
    print("  escape:", escape_rate_target_untouched(two_round))

    print("\n# closed-form gap spot values")
    for k, l, x in [(1, 1, 1), (1, 2, 1), (2, 2, 2), (2, 4, 2), (3, 3, 3)]:
        ft, fc2, gap = closed_form_gap(k, l, x)
        print(f"k={k} l={l} x={x}: ft={ft} fc2={fc2} gap={gap}")

    print("\n# scheme parameter examples")
    for key, val in scheme_examples().items():
        print(f"{key} = {val!r}")

    print("\n# fault-tolerance examples")
    for key, val in ft_examples().items():
        print(f"{key} = {val!r}")

    print("\n# single-qubit measurement spots")
    for key, val in measure_spots().items():
        print(f"{key} = {val!r}")

    print("\n# smallest carving, connector-corrected output distribution")
    p = smallest_carving_distribution()
    print("sum =", p.sum())
    print("p[0000000] =", p[0])
    print("support =", int(np.count_nonzero(p > 1e-15)))
    print("sum sqrt p =", np.sqrt(p).sum())
    est_tv = math.sqrt(2 / (math.pi * 1e5)) * np.sqrt(p).sum() / 2
    print("expected sampling TV at 1e5 ~", est_tv)
    print("max p =", p.max())


if __name__ == "__main__":
    main()
