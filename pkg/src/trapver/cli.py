"""Command-line front end: configuration, dispatch, artifacts, replay.

Option precedence is flags > environment (TRAPVER_*) > config file >
defaults.  Every emitted JSON document carries schema_version,
tool_version and the root seed; verification artifacts embed enough to be
re-executed bit-identically by `trapver replay`.

Exit codes: 0 scheme accept (or plain success), 2 scheme reject,
1 operational error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import __version__, bounds, ftcalc
from .graphs import GraphSpec, carve_target, carve_trap_graph, check_embedding
from .protocol import (
    AttackSpec,
    RunRecord,
    make_round_layout,
    run_scheme,
)
from .simulator import (
    DEFAULT_QUBIT_CAP,
    NoiseModel,
    exact_output_distribution,
    k_to_radians,
)

ARTIFACT_SCHEMA = 1
ENV_PREFIX = "TRAPVER_"

EXIT_ACCEPT = 0
EXIT_ERROR = 1
EXIT_REJECT = 2


class CliError(Exception):
    """Configuration or dispatch failure the user can act on."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise CliError(message)


@dataclass(frozen=True)
class SessionConfig:
    """One resolved invocation: subcommand plus merged options."""

    subcommand: str
    m: int | None = None
    n: int | None = None
    kappa: int | None = None
    eps_v: float = 0.0
    eps_p: float = 0.0
    scheme_m: int | None = None
    scheme_l: float | None = None
    auto_params: bool = False
    beta: float | None = None
    attack: str | None = None
    seed: int = 0
    out: str | None = None
    fmt: str = "json"
    extras: Mapping[str, object] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        doc = {
            "subcommand": self.subcommand,
            "m": self.m,
            "n": self.n,
            "kappa": self.kappa,
            "eps_v": self.eps_v,
            "eps_p": self.eps_p,
            "scheme_m": self.scheme_m,
            "scheme_l": self.scheme_l,
            "auto_params": self.auto_params,
            "beta": self.beta,
            "attack": self.attack,
            "seed": self.seed,
            "fmt": self.fmt,
            "extras": dict(self.extras),
        }
        return doc

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "SessionConfig":
        return cls(
            subcommand=doc["subcommand"],
            m=doc.get("m"),
            n=doc.get("n"),
            kappa=doc.get("kappa"),
            eps_v=doc.get("eps_v", 0.0),
            eps_p=doc.get("eps_p", 0.0),
            scheme_m=doc.get("scheme_m"),
            scheme_l=doc.get("scheme_l"),
            auto_params=doc.get("auto_params", False),
            beta=doc.get("beta"),
            attack=doc.get("attack"),
            seed=doc.get("seed", 0),
            out=None,
            fmt=doc.get("fmt", "json"),
            extras=doc.get("extras", {}),
        )


# name -> converter, for merging env/file values
_COMMON_FIELDS = {
    "m": int,
    "n": int,
    "kappa": int,
    "eps_v": float,
    "eps_p": float,
    "scheme_m": int,
    "scheme_l": float,
    "auto_params": None,  # bool, special-cased
    "beta": float,
    "attack": str,
    "seed": int,
    "out": str,
    "fmt": str,
}

_EXTRA_FIELDS = {
    "kind": str,
    "check_isomorphism": None,
    "graph": str,
    "angles": str,
    "exact": None,
    "samples": int,
    "verb": str,
    "n_qubits": int,
    "eps2": float,
    "alpha1": float,
    "alpha2": float,
    "beta1": float,
    "beta2": float,
    "eps": float,
    "fraction_of_threshold": float,
    "distance": int,
    "syndromes": int,
    "saw_prefactor": float,
    "poly_prefactor": float,
    "q": str,
    "q_prime": str,
    "basis": str,
    "trials": int,
    "artifact": str,
    "cap": int,
}

_BOOL_FIELDS = {"auto_params", "check_isomorphism", "exact"}


def _parse_bool(raw: object) -> bool:
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise CliError(f"cannot read {raw!r} as a boolean")


def _convert(name: str, raw: object) -> object:
    if name in _BOOL_FIELDS:
        return _parse_bool(raw)
    conv = _COMMON_FIELDS.get(name) or _EXTRA_FIELDS.get(name)
    if conv is None:
        raise CliError(f"unknown configuration key {name!r}")
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad value for {name}: {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="trapver",
        description=(
            "Trap-based verification of a nonadaptive sampler: carvings, "
            "protocol simulation, bound calculators, artifacts."
        ),
    )
    parser.add_argument("--config", help="JSON file with default options")
    sub = parser.add_subparsers(dest="subcommand")

    p = sub.add_parser("carve", help="emit a carved lattice layout")
    p.add_argument("--m", type=int, help="lattice columns")
    p.add_argument("--n", type=int, help="lattice rows")
    p.add_argument(
        "--kind",
        choices=["target", "trap-even", "trap-odd"],
        help="which carving to emit",
    )
    p.add_argument(
        "--check-isomorphism",
        action="store_const",
        const=True,
        default=None,
        help="validate the carving against the intended adjacency",
    )
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", dest="fmt", choices=["json"])

    p = sub.add_parser("simulate", help="exact distribution or samples")
    p.add_argument("--graph", help="layout JSON path")
    p.add_argument("--angles", help="JSON {vertex: grid steps}; default: layout angles")
    p.add_argument("--exact", action="store_const", const=True, default=None)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--out")
    p.add_argument("--format", dest="fmt", choices=["json", "csv"])

    p = sub.add_parser("verify", help="run the M-repetition scheme")
    p.add_argument("--kappa", type=int)
    p.add_argument("--m-rounds", dest="m", type=int, help="lattice columns")
    p.add_argument("--n-rounds", dest="n", type=int, help="lattice rows")
    p.add_argument("--eps-v", type=float)
    p.add_argument("--eps-p", type=float)
    p.add_argument("--attack", help="AttackSpec JSON path")
    p.add_argument("--scheme-M", dest="scheme_m", type=int)
    p.add_argument("--scheme-l", dest="scheme_l", type=float)
    p.add_argument(
        "--auto-params",
        action="store_const",
        const=True,
        default=None,
        help="derive (M, l) from the noise-rate bound calculator",
    )
    p.add_argument("--beta", type=float, help="confidence budget for --auto-params")
    p.add_argument("--seed", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--out")

    p = sub.add_parser("bounds", help="closed-form calculators")
    p.add_argument(
        "verb",
        choices=["delta-kappa", "attack-table", "thm1", "thm2", "thm3", "twirl"],
    )
    p.add_argument("--kappa", type=int)
    p.add_argument("--n-qubits", type=int)
    p.add_argument("--eps-v", type=float)
    p.add_argument("--eps-p", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--eps2", type=float)
    p.add_argument("--alpha1", type=float)
    p.add_argument("--alpha2", type=float)
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--n", dest="n_qubits_alias", type=int, help=argparse.SUPPRESS)
    p.add_argument("--q")
    p.add_argument("--q-prime")
    p.add_argument("--basis", choices=["full", "z_only"])
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", dest="fmt", choices=["json", "csv"])

    p = sub.add_parser("ft", help="fault-tolerance report")
    p.add_argument("--eps", type=float)
    p.add_argument("--fraction-of-threshold", type=float)
    p.add_argument("--distance", type=int)
    p.add_argument("--syndromes", type=int)
    p.add_argument("--saw-prefactor", type=float)
    p.add_argument("--poly-prefactor", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument(
        "--format",
        dest="fmt",
        choices=["json", "csv"],
        help="csv emits the overhead table instead of the report",
    )

    p = sub.add_parser("twirl-check", help="brute-force conjugation sums")
    p.add_argument("--n", dest="n", type=int)
    p.add_argument("--q")
    p.add_argument("--q-prime")
    p.add_argument("--basis", choices=["full", "z_only"])
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("replay", help="re-execute an artifact, assert verdict")
    p.add_argument("artifact")

    return parser


_DEFAULTS: dict[str, object] = {
    "eps_v": 0.0,
    "eps_p": 0.0,
    "auto_params": False,
    "seed": 0,
    "fmt": "json",
    # extras
    "kind": "target",
    "basis": "full",
    "trials": 20,
    "distance": 2,
    "syndromes": ftcalc.DEFAULT_SYNDROMES,
    "saw_prefactor": ftcalc.DEFAULT_SAW_PREFACTOR,
    "poly_prefactor": 1.0,
    "cap": DEFAULT_QUBIT_CAP,
}


def parse_config(
    argv: Sequence[str],
    env: Mapping[str, str] | None = None,
    config_path: str | None = None,
) -> SessionConfig:
    """Resolve one invocation; precedence flags > env > file > defaults."""
    env = env or {}
    if not argv:
        return SessionConfig(subcommand="help")
    ns = build_parser().parse_args(list(argv))
    if ns.subcommand is None:
        return SessionConfig(subcommand="help")
    flag_values = {
        k: v
        for k, v in vars(ns).items()
        if v is not None and k not in ("subcommand", "config", "n_qubits_alias")
    }
    if getattr(ns, "n_qubits_alias", None) is not None:
        flag_values.setdefault("n_qubits", ns.n_qubits_alias)

    merged: dict[str, object] = dict(_DEFAULTS)

    path = config_path or ns.config or env.get(ENV_PREFIX + "CONFIG")
    if path:
        try:
            with open(path) as fh:
                file_doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(file_doc, dict):
            raise CliError(f"config file {path} must hold a JSON object")
        for name, raw in file_doc.items():
            merged[name] = _convert(name, raw)

    for name in list(_COMMON_FIELDS) + list(_EXTRA_FIELDS):
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            merged[name] = _convert(name, env[env_key])

    for name, value in flag_values.items():
        merged[name] = value

    if merged.get("auto_params") and (
        merged.get("scheme_m") is not None or merged.get("scheme_l") is not None
    ):
        raise CliError(
            "--auto-params and explicit --scheme-M/--scheme-l are mutually "
            "exclusive"
        )

    common = {k: merged[k] for k in _COMMON_FIELDS if k in merged}
    extras = {k: merged[k] for k in _EXTRA_FIELDS if k in merged}
    return SessionConfig(subcommand=ns.subcommand, extras=extras, **common)


# ---------------------------------------------------------------------------
# Payload helpers


def _stamp(cfg: SessionConfig, payload: dict) -> dict:
    doc = {
        "schema_version": ARTIFACT_SCHEMA,
        "tool_version": __version__,
        "seed": cfg.seed,
    }
    doc.update(payload)
    return doc


def _emit(cfg: SessionConfig, doc: dict, csv_rows: list[list] | None = None) -> None:
    """Write the payload to --out (atomically) or stdout."""
    if cfg.extras.get("quiet"):
        return
    if cfg.fmt == "csv" and csv_rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        _atomic_write(cfg.out, text)
    else:
        sys.stdout.write(text)


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _require(cfg: SessionConfig, *names: str) -> list[object]:
    vals = []
    for name in names:
        v = getattr(cfg, name, None)
        if v is None:
            v = cfg.extras.get(name)
        if v is None:
            raise CliError(
                f"{cfg.subcommand}: missing required option --{name.replace('_', '-')}"
            )
        vals.append(v)
    return vals


def attack_spec_from_json(doc: Mapping) -> AttackSpec:
    """Deserialize an attack: Pauli mixture or explicit unitary."""
    if "pauli_terms" in doc:
        terms = []
        for term in doc["pauli_terms"]:
            letters = []
            for key, letter in term["letters"].items():
                slot_s, _, v_s = key.partition(":")
                letters.append(((int(slot_s), int(v_s)), str(letter)))
            terms.append((float(term["weight"]), tuple(sorted(letters))))
        return AttackSpec(pauli_terms=tuple(terms))
    if "unitary" in doc:
        rows = doc["unitary"]
        matrix = np.array(
            [[complex(c[0], c[1]) for c in row] for row in rows],
            dtype=np.complex128,
        )
        return AttackSpec(
            unitary=matrix, private_qubits=int(doc.get("private_qubits", 0))
        )
    raise CliError("attack JSON needs 'pauli_terms' or 'unitary'")


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_carve(cfg: SessionConfig) -> tuple[int, dict]:
    m, n, kind = _require(cfg, "m", "n", "kind")
    if kind == "target":
        g = carve_target(m, n)
    elif kind in ("trap-even", "trap-odd"):
        g = carve_trap_graph(m, n, kind.removeprefix("trap-"))
    else:
        raise CliError(f"unknown carve kind {kind!r}")
    if cfg.extras.get("check_isomorphism"):
        if kind == "target":
            check_embedding(g)
        else:
            target = carve_target(m, n)
            want = {
                v
                for v in target.non_dummy_ids()
                if target.parity(v) == (0 if kind == "trap-even" else 1)
            }
            if set(g.trap_ids()) != want:
                raise CliError("trap positions do not match the target carving")
    doc = g.to_json_dict()
    doc["tool_version"] = __version__
    doc["seed"] = cfg.seed
    _emit(cfg, doc)
    return EXIT_ACCEPT, doc


def _load_graph(path: str) -> GraphSpec:
    try:
        with open(path) as fh:
            return GraphSpec.from_json_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read layout {path}: {exc}") from exc


def _cmd_simulate(cfg: SessionConfig) -> tuple[int, dict]:
    (graph_path,) = _require(cfg, "graph")
    g = _load_graph(str(graph_path))
    angles_path = cfg.extras.get("angles")
    if angles_path:
        with open(str(angles_path)) as fh:
            raw = json.load(fh)
        angles = {int(k): k_to_radians(int(v)) for k, v in raw.items()}
    else:
        angles = g.base_angles()
    cap = int(cfg.extras.get("cap", DEFAULT_QUBIT_CAP))
    samples = cfg.extras.get("samples")
    exact = bool(cfg.extras.get("exact")) or samples is None
    dist = exact_output_distribution(g, angles, cap=cap)
    if exact:
        payload = _stamp(cfg, {"kind": "distribution", "probs": dict(sorted(dist.probs.items()))})
        rows = [["string", "probability"]] + [
            [s, repr(p)] for s, p in sorted(dist.probs.items())
        ]
        _emit(cfg, payload, rows)
        return EXIT_ACCEPT, payload
    drawn = dist.sample(int(samples), _rng(cfg.seed))
    counts: dict[str, int] = {}
    for s in drawn:
        counts[s] = counts.get(s, 0) + 1
    payload = _stamp(
        cfg,
        {"kind": "samples", "count": int(samples), "counts": dict(sorted(counts.items()))},
    )
    rows = [["string", "count"]] + [[s, c] for s, c in sorted(counts.items())]
    _emit(cfg, payload, rows)
    return EXIT_ACCEPT, payload


def _scheme_parameters(cfg: SessionConfig, n_qubits: int, kappa: int) -> tuple[int, float, dict]:
    if cfg.auto_params:
        if cfg.beta is None:
            raise CliError("--auto-params needs --beta")
        params = bounds.theorem1_params(
            n_qubits, kappa, cfg.eps_v, cfg.eps_p, cfg.beta
        )
        meta = {
            "derived": True,
            "beta": cfg.beta,
            "out_of_regime": params.out_of_regime,
            "completeness": list(params.completeness),
            "soundness": list(params.soundness),
        }
        return params.m, params.l, meta
    if cfg.scheme_m is None or cfg.scheme_l is None:
        raise CliError("verify needs --scheme-M and --scheme-l, or --auto-params")
    return cfg.scheme_m, cfg.scheme_l, {"derived": False}


def _cmd_verify(cfg: SessionConfig) -> tuple[int, dict]:
    m, n, kappa = _require(cfg, "m", "n", "kappa")
    layout = make_round_layout(int(m), int(n), int(kappa))
    noise = NoiseModel(eps_v=cfg.eps_v, eps_p=cfg.eps_p)
    # The parsed attack document is embedded in the artifact so replay
    # does not depend on the original file still existing.
    attack_doc = cfg.extras.get("attack_doc")
    if attack_doc is None and cfg.attack:
        try:
            with open(cfg.attack) as fh:
                attack_doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read attack file {cfg.attack}: {exc}") from exc
    strategy = attack_spec_from_json(attack_doc) if attack_doc else None
    n_qubits = len(layout.target.non_dummy_ids())
    scheme_m, scheme_l, meta = _scheme_parameters(cfg, n_qubits, int(kappa))
    cap = int(cfg.extras.get("cap", DEFAULT_QUBIT_CAP))
    records: list[RunRecord] = []
    started = time.time()
    verdict = run_scheme(
        layout,
        strategy,
        noise,
        scheme_m,
        scheme_l,
        _rng(cfg.seed),
        cap=cap,
        record_sink=records,
    )
    elapsed = time.time() - started
    snapshot = cfg.to_json_dict()
    if attack_doc is not None:
        snapshot["extras"] = {**snapshot["extras"], "attack_doc": attack_doc}
    artifact = _stamp(
        cfg,
        {
            "config": snapshot,
            "scheme": {"m": scheme_m, "l": scheme_l, **meta, "n_qubits": n_qubits},
            "records": [r.to_json_dict() for r in records],
            "verdict": verdict.to_json_dict(),
            "telemetry": {
                "wall_clock_s": elapsed,
                "finished_unix": time.time(),
                "op_counts": dict(records[0].op_counts) if records else {},
            },
        },
    )
    _emit(cfg, artifact)
    return (EXIT_ACCEPT if verdict.accept else EXIT_REJECT), artifact


def _twirl_payload(cfg: SessionConfig) -> dict:
    n = int(cfg.extras.get("n_qubits") or cfg.n or 1)
    q = str(cfg.extras.get("q") or "X" * n)
    qprime = str(cfg.extras.get("q_prime") or "Z" * n)
    basis = str(cfg.extras.get("basis", "full"))
    trials = int(cfg.extras.get("trials", 20))
    rng = _rng(cfg.seed)
    residuals = []
    for _ in range(trials):
        mat = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
        rho = mat @ mat.conj().T
        rho /= np.trace(rho).real
        residuals.append(bounds.twirl_check(n, q, qprime, rho, basis))
    return _stamp(
        cfg,
        {
            "n": n,
            "q": q,
            "q_prime": qprime,
            "basis": basis,
            "trials": trials,
            "max_residual": max(residuals),
        },
    )


def _fraction_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def _cmd_bounds(cfg: SessionConfig) -> tuple[int, dict]:
    verb = str(cfg.extras.get("verb"))
    if verb == "delta-kappa":
        (kappa,) = _require(cfg, "kappa")
        value = bounds.delta_kappa(int(kappa))
        payload = _stamp(
            cfg, {"kappa": kappa, "delta_kappa": _fraction_str(value)}
        )
        if not cfg.out:
            print(_fraction_str(value))
        else:
            _emit(cfg, payload)
        return EXIT_ACCEPT, payload
    if verb == "attack-table":
        (kappa,) = _require(cfg, "kappa")
        rows = [["kappa", "lam", "xi", "trap_term", "escape_bound", "gap"]]
        table = []
        for cls in bounds.valid_attack_classes(int(kappa)):
            ft, fc2, gap = bounds.attack_gap(cls)
            rows.append(
                [cls.kappa, cls.lam, cls.xi, _fraction_str(ft), _fraction_str(fc2), _fraction_str(gap)]
            )
            table.append(
                {
                    "kappa": cls.kappa,
                    "lam": cls.lam,
                    "xi": cls.xi,
                    "trap_term": _fraction_str(ft),
                    "escape_bound": _fraction_str(fc2),
                    "gap": _fraction_str(gap),
                }
            )
        payload = _stamp(cfg, {"classes": table})
        _emit(cfg, payload, rows)
        return EXIT_ACCEPT, payload
    if verb == "thm1":
        n_qubits, kappa, beta = _require(cfg, "n_qubits", "kappa", "beta")
        params = bounds.theorem1_params(
            int(n_qubits), int(kappa), cfg.eps_v, cfg.eps_p, float(beta)
        )
        payload = _stamp(cfg, {"params": _params_dict(params)})
        _emit(cfg, payload)
        return EXIT_ACCEPT, payload
    if verb == "thm2":
        eps2, kappa, beta = _require(cfg, "eps2", "kappa", "beta")
        params = bounds.theorem2_params(float(eps2), int(kappa), float(beta))
        payload = _stamp(cfg, {"params": _params_dict(params)})
        _emit(cfg, payload)
        return EXIT_ACCEPT, payload
    if verb == "thm3":
        alpha1, alpha2, beta1, beta2, n_qubits = _require(
            cfg, "alpha1", "alpha2", "beta1", "beta2", "n_qubits"
        )
        hb = bounds.theorem3_epsilon(
            float(alpha1), float(alpha2), float(beta1), float(beta2), int(n_qubits)
        )
        payload = _stamp(
            cfg, {"epsilon": hb.value, "feasible": hb.feasible}
        )
        _emit(cfg, payload)
        return EXIT_ACCEPT, payload
    if verb == "twirl":
        payload = _twirl_payload(cfg)
        _emit(cfg, payload)
        return EXIT_ACCEPT, payload
    raise CliError(f"unknown bounds verb {verb!r}")


def _params_dict(p: bounds.SchemeParams) -> dict:
    return {
        "m": p.m,
        "m_real": p.m_real,
        "l": p.l,
        "completeness": list(p.completeness),
        "soundness": list(p.soundness),
        "out_of_regime": p.out_of_regime,
        "raw": dict(p.raw),
    }


def _cmd_ft(cfg: SessionConfig) -> tuple[int, dict]:
    eps = cfg.extras.get("eps")
    fraction = cfg.extras.get("fraction_of_threshold")
    if (eps is None) == (fraction is None):
        raise CliError("ft needs exactly one of --eps / --fraction-of-threshold")
    if fraction is not None:
        eps = float(fraction) * ftcalc.physical_threshold()
    report = ftcalc.ft_report(
        ftcalc.FtConfig(
            distance=int(cfg.extras.get("distance", 2)),
            eps=float(eps),
            syndromes=int(cfg.extras.get("syndromes", ftcalc.DEFAULT_SYNDROMES)),
            saw_prefactor=float(
                cfg.extras.get("saw_prefactor", ftcalc.DEFAULT_SAW_PREFACTOR)
            ),
            poly_prefactor=float(cfg.extras.get("poly_prefactor", 1.0)),
        )
    )
    payload = _stamp(cfg, {"report": report.__dict__})
    rows = [["fraction", "eps", "p_c", "m_real", "m", "astronomical"]]
    for row in ftcalc.overhead_table():
        rows.append(
            [row.fraction, repr(row.eps), repr(row.p_c), repr(row.m_real), row.m, row.astronomical]
        )
    _emit(cfg, payload, rows)
    return EXIT_ACCEPT, payload


def _strip_telemetry(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != "telemetry"}


def _cmd_replay(cfg: SessionConfig) -> tuple[int, dict]:
    (path,) = _require(cfg, "artifact")
    try:
        with open(str(path)) as fh:
            artifact = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read artifact {path}: {exc}") from exc
    if artifact.get("schema_version") != ARTIFACT_SCHEMA:
        raise CliError(
            f"unsupported artifact schema {artifact.get('schema_version')!r}"
        )
    saved_cfg = SessionConfig.from_json_dict(artifact["config"])
    saved_cfg = replace(
        saved_cfg, out=None, extras={**saved_cfg.extras, "quiet": True}
    )
    code, fresh = execute(saved_cfg)
    if _strip_telemetry(fresh)["verdict"] != artifact["verdict"]:
        raise CliError(
            "replay mismatch: verdict differs from the stored artifact "
            "(nondeterminism or tampering)"
        )
    print(json.dumps(fresh["verdict"], indent=2, sort_keys=True))
    return code, fresh


_HANDLERS = {
    "carve": _cmd_carve,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "bounds": _cmd_bounds,
    "ft": _cmd_ft,
    "replay": _cmd_replay,
}


def execute(cfg: SessionConfig) -> tuple[int, dict]:
    """Dispatch one resolved configuration; returns (exit code, payload)."""
    if cfg.subcommand == "help":
        build_parser().print_help()
        return EXIT_ACCEPT, {}
    if cfg.subcommand == "twirl-check":
        payload = _twirl_payload(cfg)
        _emit(cfg, payload)
        return EXIT_ACCEPT, payload
    handler = _HANDLERS.get(cfg.subcommand)
    if handler is None:
        raise CliError(f"unknown subcommand {cfg.subcommand!r}")
    return handler(cfg)


def replay(path: str) -> int:
    """Re-execute an artifact's embedded config; error on any mismatch."""
    code, _ = _cmd_replay(
        SessionConfig(subcommand="replay", extras={"artifact": path})
    )
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv, env=os.environ)
        code, _ = execute(cfg)
        return code
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
