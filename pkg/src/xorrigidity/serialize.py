"""Versioned JSON encoding for games, strategies, certificates and bound reports.

All reals are written as shortest round-trip decimal strings (``repr``) so
that identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .errors import ShapeError
from .games import BinaryGame, GameMatrix
from .rigidity import BoundReport
from .sdp import SdpCertificate
from .strategies import Strategy
from .tensor import BipartiteState

SCHEMA_VERSION = 1


def fmt(x) -> str:
    x = float(x)
    return "0.0" if x == 0 else repr(x)


def parse_real(s) -> float:
    if isinstance(s, str) and "/" in s:
        return float(Fraction(s))
    return float(s)


def encode_label(label):
    return list(label) if isinstance(label, tuple) else label


def decode_label(label):
    return tuple(label) if isinstance(label, list) else label


def encode_complex_matrix(m: np.ndarray) -> list:
    return [[[fmt(z.real), fmt(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def decode_complex_matrix(rows, name: str = "matrix") -> np.ndarray:
    try:
        return np.array([[complex(parse_real(re), parse_real(im)) for re, im in row] for row in rows])
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"field {name!r} is not a matrix of [re, im] pairs") from exc


def encode_real_matrix(m: np.ndarray) -> list:
    return [[fmt(x) for x in row] for row in np.asarray(m, dtype=float)]


def _require(doc: dict, key: str, schema: str):
    if key not in doc:
        raise ShapeError(f"{schema} document is missing field {key!r}")
    return doc[key]


def _check_header(doc: dict, schema: str):
    if doc.get("schema") != schema:
        raise ShapeError(f"expected schema {schema!r}, got {doc.get('schema')!r}")
    if doc.get("version") != SCHEMA_VERSION:
        raise ShapeError(f"unsupported {schema} version {doc.get('version')!r}")


def game_to_dict(g: GameMatrix) -> dict:
    doc = {
        "schema": "game",
        "version": SCHEMA_VERSION,
        "kind": g.kind,
        "name": g.name,
        "alice_labels": [encode_label(x) for x in g.alice_labels],
        "bob_labels": [encode_label(x) for x in g.bob_labels],
        "entries": encode_real_matrix(g.entries),
        "signed_sum": fmt(g.signed_sum),
        "absolute_sum": fmt(g.absolute_sum),
    }
    if g.exact is not None:
        doc["entries_exact"] = [[str(x) for x in row] for row in g.exact]
    return doc


def binary_game_to_dict(b: BinaryGame, metadata: dict | None = None) -> dict:
    return {
        "schema": "game",
        "version": SCHEMA_VERSION,
        "kind": "BINARY_PREDICATE",
        "name": b.name,
        "alice_questions": [encode_label(x) for x in b.alice_questions],
        "bob_questions": [encode_label(x) for x in b.bob_questions],
        "distribution": [
            {"s": encode_label(s), "t": encode_label(t), "p": str(p)} for (s, t), p in b.distribution.items()
        ],
        "predicate_table": [
            {"s": encode_label(s), "t": encode_label(t), "wins": table}
            for (s, t), table in b.predicate_table().items()
        ],
        "metadata": metadata or {},
    }


def game_from_dict(doc: dict):
    _check_header(doc, "game")
    kind = _require(doc, "kind", "game")
    if kind == "XOR":
        exact = doc.get("entries_exact")
        exact = tuple(tuple(Fraction(x) for x in row) for row in exact) if exact else None
        return GameMatrix(
            [decode_label(x) for x in _require(doc, "alice_labels", "game")],
            [decode_label(x) for x in _require(doc, "bob_labels", "game")],
            np.array([[parse_real(x) for x in row] for row in _require(doc, "entries", "game")]),
            name=doc.get("name", "custom"),
            exact=exact,
        )
    if kind == "BINARY_PREDICATE":
        table = {
            (decode_label(e["s"]), decode_label(e["t"])): e["wins"]
            for e in _require(doc, "predicate_table", "game")
        }
        return BinaryGame(
            tuple(decode_label(x) for x in _require(doc, "alice_questions", "game")),
            tuple(decode_label(x) for x in _require(doc, "bob_questions", "game")),
            {(decode_label(e["s"]), decode_label(e["t"])): Fraction(e["p"]) for e in doc["distribution"]},
            lambda a, b, s, t: bool(table[(s, t)][a][b]),
            name=doc.get("name", "binary"),
        )
    raise ShapeError(f"unknown game kind {kind!r}")


def strategy_to_dict(s: Strategy) -> dict:
    return {
        "schema": "strategy",
        "version": SCHEMA_VERSION,
        "dim_a": s.dim_a,
        "dim_b": s.dim_b,
        "alice": [{"label": encode_label(k), "matrix": encode_complex_matrix(m)} for k, m in s.alice.items()],
        "bob": [{"label": encode_label(k), "matrix": encode_complex_matrix(m)} for k, m in s.bob.items()],
        "state": [[fmt(z.real), fmt(z.imag)] for z in s.state.amplitudes],
    }


def strategy_from_dict(doc: dict) -> Strategy:
    _check_header(doc, "strategy")
    da = int(_require(doc, "dim_a", "strategy"))
    db = int(_require(doc, "dim_b", "strategy"))
    amps = [complex(parse_real(re), parse_real(im)) for re, im in _require(doc, "state", "strategy")]
    state = BipartiteState(da, db, np.array(amps))
    alice = {decode_label(e["label"]): decode_complex_matrix(e["matrix"], "alice") for e in doc["alice"]}
    bob = {decode_label(e["label"]): decode_complex_matrix(e["matrix"], "bob") for e in doc["bob"]}
    return Strategy(alice, bob, state)


def certificate_to_dict(c: SdpCertificate) -> dict:
    return {
        "schema": "sdp-certificate",
        "version": SCHEMA_VERSION,
        "gsym": encode_real_matrix(c.gsym),
        "Z": encode_real_matrix(c.z),
        "y": [fmt(x) for x in c.y],
        "objective": fmt(c.objective),
        "bias": fmt(c.bias),
        "duality_gap": fmt(c.gap),
    }


def _meta_value(v):
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    if isinstance(v, (list, tuple)):
        return [_meta_value(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    return v


def report_to_dict(r: BoundReport) -> dict:
    return {
        "bound_id": r.bound_id,
        "n": r.n,
        "epsilon": fmt(r.epsilon),
        "residual": fmt(r.residual),
        "stated_bound": fmt(r.stated_bound),
        "slack": fmt(r.slack),
        "passed": r.passed,
        "seed": r.seed,
        "theta": None if r.theta is None else fmt(r.theta),
        "game": r.game,
        "metadata": {k: _meta_value(v) for k, v in sorted(r.metadata.items())},
    }


def report_from_dict(doc: dict) -> BoundReport:
    return BoundReport(
        doc["bound_id"], int(doc["n"]), parse_real(doc["epsilon"]), parse_real(doc["residual"]),
        parse_real(doc["stated_bound"]), seed=doc.get("seed"),
        theta=None if doc.get("theta") is None else parse_real(doc["theta"]),
        game=doc.get("game", "chsh"), metadata=doc.get("metadata", {}),
    )


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=False) + "\n"
