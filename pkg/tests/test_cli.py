import io
import json
from pathlib import Path

import pytest

from recsolve.cli import EXIT_OK, EXIT_UNSOLVED, EXIT_USAGE, run
from recsolve.parser import parse
from recsolve.verify import iterate_oracle

CORPUS = Path(__file__).parent / "data" / "regression.txt"
KEYS = {"classification", "status", "domain", "assumptions", "verification"}


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def check_schema(doc):
    assert KEYS <= set(doc)
    assert doc["status"] in ("exact", "bounds", "unsolved")
    if doc["status"] == "exact":
        assert isinstance(doc["closed_form"], str)
    if doc["status"] == "bounds":
        assert isinstance(doc["lower"], str) and isinstance(doc["upper"], str)
    assert isinstance(doc["assumptions"], list)
    v = doc["verification"]
    assert isinstance(v["checked_up_to"], int) and isinstance(v["ok"], bool)


def test_closed_form_printed():
    code, out, _ = call("solve", "x(n)=5*x(n-1)-6*x(n-2)+n^2", "--init", "x(0)=0;x(1)=1", "--verify", "50")
    assert code == EXIT_OK
    assert "x(n) = -12*2^n + n^2/2 + 7*n/2 + 9*3^n/2 + 15/2" in out
    assert "checked up to 50" in out


def test_strassen_json_bounds():
    code, out, _ = call("solve", "x(n)=7*x(n/2)+(9/2)*n^2", "--init", "x(1)=1", "--mode", "bounds", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    check_schema(doc)
    assert doc["status"] == "bounds" and doc["verification"]["ok"]


def test_unsolved_exit():
    code, out, _ = call("solve", "x(n)=x(n-1)^2+1")
    assert code == EXIT_UNSOLVED
    assert "NotPowerProduct" in out


def test_parse_error_diagnostic():
    code, out, err = call("solve", "x(n)=x(n-1)+*2")
    assert code == EXIT_USAGE and out == ""
    assert "^" in err


@pytest.mark.parametrize("argv", [["solve", "x(n)=x(n-1)", "--root-width", "abc"], ["solve", "x(n)=x(n-1)", "--root-width", "-1/2"], ["frobnicate"]])
def test_usage_errors(argv):
    assert call(*argv)[0] == EXIT_USAGE


def test_condition_for_foreign_unknown():
    code, _, err = call("solve", "x(n)=x(n-1)+1", "--init", "y(0)=1")
    assert code == EXIT_USAGE and "y" in err


def test_table_matches_oracle():
    code, out, _ = call("solve", "x(n)=x(n-1)+x(n-2)", "--init", "x(0)=0;x(1)=1", "--table", "10")
    assert code == EXIT_OK
    rows = out.split("n,value\n")[1].split()
    want = iterate_oracle(parse("x(n)=x(n-1)+x(n-2)"), {(0,): 0, (1,): 1}, 10)
    assert rows == [f"{n},{v}" for n, v in enumerate(want)]


def test_table_json_rational_values():
    code, out, _ = call("solve", "x(n)=x(n-1)/2+1", "--init", "x(0)=0", "--table", "3", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["table"] == [[0, "0"], [1, "1"], [2, "3/2"], [3, "7/4"]]


def test_table_divide_and_conquer():
    code, out, _ = call("solve", "x(n)=2*x(n/2)+n-1", "--init", "x(1)=0", "--table", "10", "--format", "json")
    assert json.loads(out)["table"] == [[1, "0"], [2, "1"], [4, "5"], [8, "17"]]


def test_table_needs_conditions():
    assert call("solve", "x(n)=2*x(n-1)", "--table", "5")[0] == EXIT_USAGE


def test_batch_lines():
    code, out, _ = call("batch", str(CORPUS))
    docs = [json.loads(line) for line in out.splitlines()]
    assert [d["stanza"] for d in docs] == list(range(1, len(docs) + 1))
    for d in docs:
        check_schema(d)
    assert docs[4]["closed_form"] == "a*m + 9"
    assert code == EXIT_UNSOLVED  # one stanza is deliberately unsolvable


def test_batch_parse_error(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("x(n) = x(n-1) +\n\nx(n) = 2*x(n-1)\nx(0) = 1\n")
    code, out, err = call("batch", str(f))
    docs = [json.loads(line) for line in out.splitlines()]
    assert docs[0]["status"] == "error" and docs[1]["closed_form"] == "2^n"
    assert code == EXIT_USAGE and "stanza 1" in err


def test_missing_batch_file(tmp_path):
    assert call("batch", str(tmp_path / "nope.txt"))[0] == EXIT_USAGE


def test_deterministic_output():
    first = call("batch", str(CORPUS))
    second = call("batch", str(CORPUS))
    assert first == second
