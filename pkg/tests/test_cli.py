from __future__ import annotations

import json

import numpy as np
import pytest

from helpers import REEB_EDGES, REEB_VALUES, zigzag_modules
from relint import documents as docs
from relint.cli import run
from relint.generate import chain_shift, random_family, random_module
from relint.grid import build_grid, grid_to_json
from relint.poset import MonotoneMap, chain
from relint.reeb import ReebSpace
from relint.translate import fmt_rational

ZIGZAG = {"elements": ["a", "b", "c"], "relations": [["b", "a"], ["b", "c"]]}


def example_c():
    return {"poset": ZIGZAG, "dims": {"a": 1, "b": 1, "c": 1}, "maps": {"b|a": [[0]], "b|c": [[0]]}}


@pytest.fixture
def put(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)
    return write


def call(capsys, *argv):
    try:
        code = run([str(a) for a in argv])
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_colimit_of_disconnected_pushout(capsys, put):
    code, out, _ = call(capsys, "colimit", put("c.json", example_c()))
    assert code == 0 and json.loads(out)["dim"] == 2
    code, out, _ = call(capsys, "limit", put("c.json", example_c()))
    assert json.loads(out)["dim"] == 1


def test_cycle_is_invalid(capsys, put):
    cyc = {"elements": ["x", "y"], "relations": [["x", "y"], ["y", "x"]]}
    code, _, err = call(capsys, "check", put("p.json", cyc))
    assert code == 1 and json.loads(err)["error"] == "CycleError"


def test_non_commuting_module_is_invalid(capsys, put):
    diamond = {"elements": list("bxyt"), "relations": [["b", "x"], ["b", "y"], ["x", "t"], ["y", "t"]]}
    M = {"poset": diamond, "dims": dict.fromkeys("bxyt", 1),
         "maps": {"b|x": [[1]], "b|y": [[1]], "x|t": [[1]], "y|t": [[0]]}}
    code, _, err = call(capsys, "check", put("m.json", M))
    assert code == 1 and "commute" in err


@pytest.mark.parametrize("kind, bad", [
    ("poset", {"elements": "abc", "relations": []}),
    ("module", {"poset": ZIGZAG, "dims": {"a": -1}}),
    ("map", {"source": ZIGZAG, "target": ZIGZAG}),
    ("weights", {"poset": ZIGZAG, "weights": [["x"]]}),
    ("translation", {"ladder": [], "maps": {}}),
    ("grid", {"n": 5, "delta": 1, "window": [[0, 2]]}),
    ("gridopen", [[0.5]]),
    ("rectopen", [[["a", 1]]]),
    ("reeb", {"vertices": [{"id": "a"}], "edges": []}),
    ("distance", {"epsilon": "soon", "mode": "weak"}),
])
def test_schema_rejections(capsys, put, kind, bad):
    code, _, err = call(capsys, "check", "--kind", kind, put("bad.json", bad))
    assert code == 3 and json.loads(err)["error"] == "DocumentError"


def test_schema_dump(capsys):
    code, out, _ = call(capsys, "--schema", "module")
    assert code == 0 and json.loads(out) == docs.SCHEMAS["module"]


def test_io_errors(capsys, put, tmp_path):
    assert call(capsys, "colimit", tmp_path / "missing.json")[0] == 3
    assert call(capsys, "colimit", put("junk.json", "{not json"))[0] == 3
    assert call(capsys, "frobnicate")[0] == 3


def test_identical_modules_are_at_distance_zero_relative(capsys, put):
    T = chain_shift(4)
    P = chain(2, "p")
    f = MonotoneMap(P, T.poset, [1, 2])
    M = random_module(P, np.random.default_rng(4))
    mfile = put("m.json", docs.module_to_doc(M))
    code, out, _ = call(capsys, "distance", mfile, mfile, "--relative", put("f.json", docs.map_to_doc(f)),
                        "--translation", put("t.json", docs.translation_to_doc(T)))
    assert code == 0 and json.loads(out)["epsilon"] == "0/1"


def indeterminate_pair(put):
    P = {"elements": ["x", "y"], "relations": [["x", "y"]]}
    M = {"poset": P, "dims": {"x": 0, "y": 1}}
    T = {"poset": P, "ladder": [0], "maps": {"0": ["x", "y"]}}
    return put("m.json", M), put("t.json", T)


def test_cap_gives_indeterminate(capsys, put):
    mfile, tfile = indeterminate_pair(put)
    code, out, _ = call(capsys, "--cap", 1, "distance", mfile, mfile, "--translation", tfile)
    assert code == 2 and json.loads(out)["epsilon"] == "indeterminate"


def test_output_is_deterministic_across_threads(capsys, put):
    rng = np.random.default_rng(11)
    T = random_family(rng, 5)
    M, N = random_module(T.poset, rng), random_module(T.poset, rng)
    args = [put("m.json", docs.module_to_doc(M)), put("n.json", docs.module_to_doc(N)),
            "--translation", put("t.json", docs.translation_to_doc(T))]
    first = call(capsys, "distance", *args)
    assert call(capsys, "distance", *args) == first
    assert call(capsys, "--threads", 4, "distance", *args) == first


def test_output_file(capsys, put, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = call(capsys, "-o", target, "colimit", put("c.json", example_c()))
    assert code == 0 and out == "" and json.loads(target.read_text())["dim"] == 2


def test_kan_commands(capsys, put):
    _, _, _, ex_c = zigzag_modules()
    point = {"elements": ["*"], "relations": []}
    to_point = {"source": ZIGZAG, "target": point, "image": dict.fromkeys("abc", "*")}
    fmap = put("f.json", to_point)
    code, out, _ = call(capsys, "pushforward", put("c.json", example_c()), "--map", fmap)
    assert code == 0 and json.loads(out)["dims"] == {"*": 2}
    code, out, _ = call(capsys, "pushforward", "--open-supports", put("c.json", example_c()), "--map", fmap)
    assert json.loads(out)["dims"] == {"*": 1}
    code, out, _ = call(capsys, "pullback", put("pt.json", {"poset": point, "dims": {"*": 2}}), "--map", fmap)
    assert json.loads(out)["dims"] == {"a": 2, "b": 2, "c": 2}
    include = {"source": {"elements": ["b"], "relations": []}, "target": ZIGZAG, "image": {"b": "b"}}
    code, out, _ = call(capsys, "pixelize", put("c.json", example_c()), "--map", put("i.json", include))
    doc = json.loads(out)
    assert code == 0 and doc["mode"] == "lower" and doc["module"]["dims"] == {"a": 1, "b": 1, "c": 1}
    assert ex_c.objs == (1, 1, 1)


def test_weighted_shift_command(capsys, put):
    # b sits below a and c; climbing either cover costs 1
    w = {"poset": ZIGZAG, "weights": [[0, 0, 1], [1, 0, 1], [1, 0, 0]]}
    code, out, _ = call(capsys, "shift", put("c.json", example_c()), "--weights", put("w.json", w),
                        "--epsilon", "1")
    assert code == 0 and json.loads(out)["dims"] == {"a": 2, "b": 2, "c": 2}
    assert call(capsys, "shift", put("c.json", example_c()), "--epsilon", "1")[0] == 1


def test_grid_commands(capsys, put):
    g = put("g.json", grid_to_json(build_grid(2, 1, [[0, 12], [0, 12]])))
    code, out, _ = call(capsys, "grid", "build", g)
    assert json.loads(out)["by_dimension"] == {"0": 49, "1": 84, "2": 36}
    code, out, _ = call(capsys, "grid", "weight", g, "--from", "1,1", "--to", "0,0")
    assert json.loads(out) == {"weight": "1/1"}
    code, out, _ = call(capsys, "grid", "tflat", g, "--open", put("u.json", [[6, 6]]), "--epsilon", "3/2")
    assert code == 0 and json.loads(out)["snapped"] == "1/1"
    code, out, _ = call(capsys, "grid", "approx-witness", g, "--rect", put("r.json", [[["3/2", 3], [2, "9/2"]]]))
    doc = json.loads(out)
    assert code == 0 and doc["contains"] and doc["within_delta"]
    assert call(capsys, "grid", "approx-witness", g, "--rect", put("r.json", [[[0, 3], [2, 4]]]))[0] == 1


def test_reeb_commands(capsys, put):
    R = ReebSpace(REEB_VALUES, REEB_EDGES)
    rfile = put("r.json", R.to_json())
    code, out, _ = call(capsys, "reeb", "pixelize", rfile)
    assert code == 0 and json.loads(out)["agrees_on_grid"]
    code, out, _ = call(capsys, "reeb", "slice", rfile)
    assert json.loads(out)["cycle_rank"] == 1
    code, out, _ = call(capsys, "reeb", "slice", "--dot", rfile)
    assert out.startswith("graph")
    code, out, _ = call(capsys, "reeb", "distance", rfile, "--other", rfile)
    assert code == 0 and json.loads(out)["epsilon"] == "0/1"
    code, out, _ = call(capsys, "reeb", "cosheaf", rfile)
    assert all(item["components"] >= 0 for item in json.loads(out)["intervals"])


def test_distortion_report_command(capsys, put):
    P = chain(3, "n")
    T = chain_shift(5)
    f = MonotoneMap(P, T.poset, [0, 2, 4])
    M = random_module(T.poset, np.random.default_rng(6))
    mfile = put("m.json", docs.module_to_doc(M))
    code, out, _ = call(capsys, "report", "distortion", mfile, mfile, "--map", put("f.json", docs.map_to_doc(f)),
                        "--translation", put("t.json", docs.translation_to_doc(T)))
    assert code == 0 and json.loads(out)["holds"] is True


def test_documents_round_trip():
    for M in zigzag_modules()[1:]:
        again = docs.module_from_doc(json.loads(docs.dumps(docs.module_to_doc(M))))
        assert again.objs == M.objs and all((again.edge[e].a == M.edge[e].a).all() for e in M.poset.hasse)
    T = random_family(np.random.default_rng(2), 4)
    back = docs.translation_from_doc(docs.translation_to_doc(T))
    assert back.ladder == T.ladder and back.maps == T.maps
    assert fmt_rational(back.ladder[-1]) == docs.translation_to_doc(T)["ladder"][-1]
