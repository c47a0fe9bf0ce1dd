"""JSON documents: schemas, loaders and canonical dumps."""
from __future__ import annotations

import json
import math
from fractions import Fraction

import jsonschema

from .diagrams import Module, ModuleMap, SetModule, VectModule, validate
from .fflinalg import is_prime
from .poset import FinitePoset, MonotoneMap, PosetError, build_poset
from .translate import TranslationFamily, WeightedPoset, as_weight, fmt_rational

RATIONAL = {"oneOf": [{"type": "integer"},
                      {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"}]}
WEIGHT = {"oneOf": [RATIONAL, {"type": "string", "enum": ["inf"]}]}
MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}

SCHEMAS: dict[str, dict] = {
    "poset": {
        "type": "object",
        "required": ["elements", "relations"],
        "properties": {
            "elements": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
            "relations": {"type": "array",
                          "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}},
        },
    },
}
SCHEMAS["module"] = {
    "type": "object",
    "required": ["poset"],
    "properties": {
        "poset": SCHEMAS["poset"],
        "field": {"type": "integer", "minimum": 2},
        "dims": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
        "maps": {"type": "object", "additionalProperties": MATRIX},
        "sizes": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
        "fns": {"type": "object",
                "additionalProperties": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
    },
    "oneOf": [{"required": ["dims"], "not": {"required": ["sizes"]}},
              {"required": ["sizes"], "not": {"required": ["dims"]}}],
}
SCHEMAS["map"] = {
    "type": "object",
    "required": ["source", "target", "image"],
    "properties": {
        "source": SCHEMAS["poset"],
        "target": SCHEMAS["poset"],
        "image": {"type": "object", "additionalProperties": {"type": "string"}},
    },
}
SCHEMAS["weights"] = {
    "type": "object",
    "required": ["poset", "weights"],
    "properties": {
        "poset": SCHEMAS["poset"],
        "weights": {"type": "array", "items": {"type": "array", "items": WEIGHT}},
    },
}
SCHEMAS["translation"] = {
    "type": "object",
    "required": ["ladder", "maps"],
    "properties": {
        "poset": SCHEMAS["poset"],
        "ladder": {"type": "array", "items": RATIONAL, "minItems": 1},
        "maps": {"type": "object",
                 "additionalProperties": {"type": "array",
                                          "items": {"oneOf": [{"type": "integer", "minimum": 0},
                                                              {"type": "string"}]}}},
        "weak": {"type": "boolean"},
    },
}
SCHEMAS["grid"] = {
    "type": "object",
    "required": ["n", "delta", "window"],
    "properties": {
        "n": {"type": "integer", "minimum": 1, "maximum": 3},
        "delta": RATIONAL,
        "window": {"type": "array",
                   "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}},
    },
}
SCHEMAS["gridopen"] = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}
SCHEMAS["rectopen"] = {
    "type": "array",
    "items": {"type": "array",
              "items": {"type": "array", "items": RATIONAL, "minItems": 2, "maxItems": 2}},
}
SCHEMAS["reeb"] = {
    "type": "object",
    "required": ["vertices", "edges"],
    "properties": {
        "vertices": {"type": "array",
                     "items": {"type": "object", "required": ["id", "value"],
                               "properties": {"id": {"type": "string"}, "value": RATIONAL}}},
        "edges": {"type": "array",
                  "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}},
    },
}
SCHEMAS["distance"] = {
    "type": "object",
    "required": ["epsilon", "mode"],
    "properties": {
        "epsilon": {"oneOf": [RATIONAL, {"type": "string", "enum": ["inf", "indeterminate"]}]},
        "mode": {"type": "string", "enum": ["weak", "standard"]},
        "certificate": {"type": ["object", "null"]},
    },
}


class DocumentError(ValueError):
    """The document does not match its schema or cannot be read."""


def check_schema(doc, kind: str) -> None:
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise DocumentError(f"{kind} document: {exc.message}") from None


def detect_kind(doc) -> str:
    if isinstance(doc, list):
        if doc and isinstance(doc[0], list) and doc[0] and isinstance(doc[0][0], list):
            return "rectopen"
        return "gridopen"
    if not isinstance(doc, dict):
        raise DocumentError("unrecognised document")
    if "elements" in doc:
        return "poset"
    if "image" in doc:
        return "map"
    if "weights" in doc:
        return "weights"
    if "ladder" in doc:
        return "translation"
    if "window" in doc:
        return "grid"
    if "vertices" in doc:
        return "reeb"
    if "poset" in doc:
        return "module"
    if "epsilon" in doc:
        return "distance"
    raise DocumentError("unrecognised document")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
def poset_from_doc(doc: dict) -> FinitePoset:
    check_schema(doc, "poset")
    return build_poset(doc["elements"], [(a, b) for a, b in doc["relations"] if a != b])


def poset_to_doc(P: FinitePoset) -> dict:
    return {"elements": list(P.labels), "relations": [[P.labels[a], P.labels[b]] for a, b in P.hasse]}


def same_poset(P: FinitePoset, Q: FinitePoset) -> bool:
    if sorted(P.labels) != sorted(Q.labels):
        return False
    idx = [Q.index(lab) for lab in P.labels]
    return all(P.leq(a, b) == Q.leq(idx[a], idx[b]) for a in range(len(P)) for b in range(len(P)))


def _on(poset: FinitePoset | None, doc_poset: FinitePoset) -> FinitePoset:
    if poset is None:
        return doc_poset
    if not same_poset(poset, doc_poset):
        raise PosetError("module poset does not match the poset it is used with")
    return poset


def module_from_doc(doc: dict, poset: FinitePoset | None = None, check: bool = True) -> Module:
    check_schema(doc, "module")
    P = _on(poset, poset_from_doc(doc["poset"]))

    def edge(key: str) -> tuple[int, int]:
        lo, sep, hi = key.partition("|")
        if not sep:
            raise DocumentError(f"map key {key!r} is not of the form lo|hi")
        return P.index(lo), P.index(hi)

    if "dims" in doc:
        p = int(doc.get("field", 2))
        if not is_prime(p):
            raise DocumentError("field must be a prime")
        dims = [int(doc["dims"].get(lab, 0)) for lab in P.labels]
        maps = {edge(k): v for k, v in doc.get("maps", {}).items()}
        M = VectModule(P, dims, maps, p, check=check)
    else:
        sizes = [int(doc["sizes"].get(lab, 0)) for lab in P.labels]
        fns = {edge(k): v for k, v in doc.get("fns", {}).items()}
        M = SetModule(P, sizes, fns, check=check)
    if check:
        report = validate(M)
        if not report.ok:
            raise ValueError(f"module does not commute: {report.message}")
    return M


def module_to_doc(M: Module) -> dict:
    P = M.poset
    doc: dict = {"poset": poset_to_doc(P)}
    if isinstance(M, VectModule) or hasattr(M.category, "p"):
        doc["field"] = M.category.p
        doc["dims"] = {P.labels[i]: d for i, d in enumerate(M.objs)}
        doc["maps"] = {f"{P.labels[a]}|{P.labels[b]}": M.edge[(a, b)].tolist()
                       for a, b in P.hasse if M.objs[a] and M.objs[b]}
    else:
        doc["sizes"] = {P.labels[i]: d for i, d in enumerate(M.objs)}
        doc["fns"] = {f"{P.labels[a]}|{P.labels[b]}": list(M.edge[(a, b)])
                      for a, b in P.hasse if M.objs[a]}
    return doc


def morphism_to_json(m):
    return m.tolist() if hasattr(m, "tolist") else list(m)


def module_map_to_doc(alpha: ModuleMap) -> dict:
    P = alpha.source.poset
    return {P.labels[i]: morphism_to_json(c) for i, c in enumerate(alpha.components)}


def map_from_doc(doc: dict) -> MonotoneMap:
    check_schema(doc, "map")
    P, Q = poset_from_doc(doc["source"]), poset_from_doc(doc["target"])
    missing = [lab for lab in P.labels if lab not in doc["image"]]
    if missing:
        raise DocumentError(f"map has no image for {missing}")
    return MonotoneMap(P, Q, [Q.index(doc["image"][lab]) for lab in P.labels])


def map_to_doc(f: MonotoneMap) -> dict:
    return {"source": poset_to_doc(f.source), "target": poset_to_doc(f.target),
            "image": {f.source.labels[p]: f.target.labels[q] for p, q in enumerate(f.image)}}


def weights_from_doc(doc: dict) -> WeightedPoset:
    check_schema(doc, "weights")
    P = poset_from_doc(doc["poset"])
    return WeightedPoset(P, [[as_weight(str(x)) for x in row] for row in doc["weights"]])


def weights_to_doc(wP: WeightedPoset) -> dict:
    return {"poset": poset_to_doc(wP.poset),
            "weights": [[fmt_rational(x) if not (isinstance(x, float) and math.isinf(x)) else "inf"
                         for x in row] for row in wP.w]}


def translation_from_doc(doc: dict, poset: FinitePoset | None = None) -> TranslationFamily:
    check_schema(doc, "translation")
    if "poset" in doc:
        P = _on(poset, poset_from_doc(doc["poset"]))
    elif poset is not None:
        P = poset
    else:
        raise DocumentError("translation family needs a poset")

    def element(x):
        return int(x) if isinstance(x, int) else P.index(x)

    maps = {Fraction(str(k)): [element(x) for x in v] for k, v in doc["maps"].items()}
    ladder = [Fraction(str(x)) for x in doc["ladder"]]
    return TranslationFamily(P, ladder, maps, weak=bool(doc.get("weak", False)))


def translation_to_doc(T: TranslationFamily) -> dict:
    return {"poset": poset_to_doc(T.poset), "ladder": [fmt_rational(e) for e in T.ladder],
            "maps": {fmt_rational(e): list(T.maps[e]) for e in T.ladder}}


def load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc.msg}") from None
