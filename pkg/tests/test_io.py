import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inhomsat.io import (FormatError, kernel_from_dict, kernel_to_dict, load_kernel, read_dimacs,
                         read_edge_list, read_instance, resolve_kernel, save_kernel, write_dimacs,
                         write_edge_list)
from inhomsat.kernel import BlockKernel, InvalidKernelError, implication_digraphon
from inhomsat.sampler import Digraph, Formula, Stream, sample_digraph, sample_formula

from helpers import random_formula, random_kernel

TWO_TYPES = {
    "types": [{"label": "a", "weight": 0.25}, {"label": "b", "weight": 0.75}],
    "entries": [
        {"from": ["a", "+"], "to": ["b", "-"], "value": 2.0},
        {"from": ["b", "-"], "to": ["b", "-"], "value": 1.5},
    ],
}


def test_kernel_from_dict_fills_mirror():
    W = kernel_from_dict(TWO_TYPES)
    assert W.space.labels == ("a", "b")
    assert W.values[0, 3] == W.values[3, 0] == 2.0
    assert W.values[3, 3] == 1.5
    assert W.values.sum() == 5.5


def test_kernel_dict_round_trip():
    W = kernel_from_dict(TWO_TYPES)
    assert kernel_from_dict(kernel_to_dict(W)).equals(W)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_kernel_file_round_trip(tmp_path_factory, seed):
    W = random_kernel(np.random.default_rng(seed))
    path = tmp_path_factory.mktemp("k") / "kernel.json"
    save_kernel(W, path)
    V = load_kernel(path)
    assert np.array_equal(V.values, W.values)
    assert np.array_equal(V.space.weights, W.space.weights)


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d.update(extra=1), "Additional properties"),
    (lambda d: d["types"][0].update(color="red"), "Additional properties"),
    (lambda d: d["entries"][0].update(to=["b", "x"]), "is not one of"),
    (lambda d: d["entries"][0].update(value="2"), "is not of type"),
    (lambda d: d.pop("types"), "'types' is a required property"),
    (lambda d: d["entries"][0].update({"from": ["a"]}), "too short"),
])
def test_schema_rejections(mutate, message):
    doc = json.loads(json.dumps(TWO_TYPES))
    mutate(doc)
    with pytest.raises(FormatError, match=message):
        kernel_from_dict(doc)


def test_comment_field_allowed():
    doc = dict(TWO_TYPES, comment="two-type example")
    assert kernel_from_dict(doc).equals(kernel_from_dict(TWO_TYPES))


def test_semantic_rejections():
    doc = json.loads(json.dumps(TWO_TYPES))
    doc["entries"].append({"from": ["b", "-"], "to": ["a", "+"], "value": 3.0})
    with pytest.raises(FormatError, match="conflicting"):
        kernel_from_dict(doc)
    doc = json.loads(json.dumps(TWO_TYPES))
    doc["entries"][0]["from"] = ["zzz", "+"]
    with pytest.raises(FormatError, match="entry 0"):
        kernel_from_dict(doc)
    doc = json.loads(json.dumps(TWO_TYPES))
    doc["types"][1]["weight"] = 0.5
    with pytest.raises(InvalidKernelError):
        kernel_from_dict(doc)
    doc = json.loads(json.dumps(TWO_TYPES))
    doc["entries"][0]["value"] = -1
    with pytest.raises(InvalidKernelError):
        kernel_from_dict(doc)
    doc = json.loads(json.dumps(TWO_TYPES))
    doc["types"][1]["label"] = "a"
    with pytest.raises(FormatError, match="duplicate"):
        kernel_from_dict(doc)


def test_mirror_given_twice_consistently_is_fine():
    doc = json.loads(json.dumps(TWO_TYPES))
    doc["entries"].append({"from": ["b", "-"], "to": ["a", "+"], "value": 2.0})
    assert kernel_from_dict(doc).equals(kernel_from_dict(TWO_TYPES))


def test_load_kernel_bad_json(tmp_path):
    p = tmp_path / "k.json"
    p.write_text("{not json")
    with pytest.raises(FormatError, match="not valid JSON"):
        load_kernel(p)


def test_resolve_kernel_shorthands(tmp_path):
    assert resolve_kernel("const:2.5").equals(BlockKernel.constant(2.5))
    assert resolve_kernel("abc:2,0,2").equals(BlockKernel.from_abc(2, 0, 2))
    with pytest.raises(FormatError):
        resolve_kernel("abc:1,2")
    p = tmp_path / "k.json"
    p.write_text(json.dumps(TWO_TYPES))
    assert resolve_kernel(str(p)).equals(kernel_from_dict(TWO_TYPES))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 30), st.integers(0, 60))
def test_dimacs_round_trip(seed, n, m):
    f = random_formula(np.random.default_rng(seed), n, m)
    buf = io.StringIO()
    write_dimacs(f, buf)
    buf.seek(0)
    assert read_dimacs(buf) == f


def test_dimacs_provenance_comment():
    f = sample_formula(30, BlockKernel.constant(1.0), Stream(4, 9))
    buf = io.StringIO()
    write_dimacs(f, buf)
    text = buf.getvalue()
    assert text.startswith(f"c seed=4 trial=9 kernel={BlockKernel.constant(1.0).digest()} model=twosat\n")
    g = read_dimacs(io.StringIO(text))
    assert g == f and g.provenance["seed"] == "4" and g.provenance["model"] == "twosat"


@pytest.mark.parametrize("text, message", [
    ("1 2 0\n", "before"),
    ("p cnf 2 1\n1 2 -1 0\n", "only 2-CNF"),
    ("p cnf 2 1\n1 3 0\n", "out of range"),
    ("p cnf 2 1\n1 -1 0\n", "repeats a variable"),
    ("p cnf 2 1\n1 2\n", "not terminated"),
    ("p cnf 2 1\n1 x 0\n", "not an integer"),
    ("p cnf 2 1\n1 2 0\n-1 2 0\n", "announces 1"),
    ("p sat 2 1\n", "expected"),
    ("", "missing"),
])
def test_dimacs_rejections(text, message):
    with pytest.raises(FormatError, match=message):
        read_dimacs(io.StringIO(text))


def test_dimacs_multiline_clauses_and_comments():
    f = read_dimacs(io.StringIO("c hello\np cnf 3 2\n1\n-2 0 2 3\n0\n%\n"))
    assert f.clauses == {(0, 3), (2, 4)}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_edge_list_round_trip(seed, n):
    dg, _ = sample_digraph(n, implication_digraphon(random_kernel(np.random.default_rng(seed))), Stream(seed))
    buf = io.StringIO()
    write_edge_list(dg, buf)
    buf.seek(0)
    assert read_edge_list(buf) == dg


@pytest.mark.parametrize("text, message", [
    ("p digraph 2 1\n1 2 3\n", "expected"),
    ("p digraph 2 1\n1 0\n", "out of range"),
    ("p digraph 2 1\n1 -1\n", "one variable"),
    ("p digraph 2 1\n1 2\n2 1\n", "announces 1"),
])
def test_edge_list_rejections(text, message):
    with pytest.raises(FormatError, match=message):
        read_edge_list(io.StringIO(text))


def test_read_instance_dispatch(tmp_path):
    f = Formula.from_dimacs_clauses(2, [(1, -2)])
    p = tmp_path / "f.cnf"
    with open(p, "w") as fh:
        write_dimacs(f, fh)
    assert read_instance(p) == f
    d = Digraph(2, frozenset({(0, 3)}))
    q = tmp_path / "g.txt"
    with open(q, "w") as fh:
        write_edge_list(d, fh)
    assert read_instance(q) == d
    r = tmp_path / "bad.txt"
    r.write_text("p weird 1 1\n")
    with pytest.raises(FormatError, match="unknown"):
        read_instance(r)
