"""Smoke test for the pytrih extension.

Build first, then run with the library on the path:

    cargo build --release -p trih-py
    cp target/release/libpytrih.so python/pytrih.so
    python3 python/smoke_test.py
"""

import json
import pathlib
import sys

HERE = pathlib.Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

import pytrih  # noqa: E402

DATA = HERE.parent / "data"


def diag(table, d):
    return [table[(p, p)] for p in range(d + 1)]


def main():
    p2 = pytrih.FanCycle.load(DATA / "p2.json")
    assert p2.rank == 2
    ih = p2.ih()
    assert diag(ih, 2) == [1, 1, 1], ih
    assert all(v == 0 for (p, q), v in ih.items() if p != q)

    line = pytrih.FanCycle(1, [[1], [-1]], [[0], [1]], [1, 1])
    again = pytrih.FanCycle.from_json(line.to_json())
    assert again.digest == line.digest

    square = line.product(line)
    assert diag(square.chow(), 2) == [1, 2, 1]
    assert square.ih() == pytrih.FanCycle.load(DATA / "p1xp1.json").ih()

    report = line.verify(kunneth=line)
    assert report.passed, report.render()
    assert json.loads(report.to_json())["command"] == "verify"

    planes = pytrih.FanCycle.load(DATA / "two_planes.json")
    h = planes.hcoh()
    assert h[(0, 0)] != h[(2, 2)], h

    bad = pytrih.FanCycle.load(DATA / "invalid" / "unbalanced_line.json")
    assert not bad.check().passed
    try:
        bad.ih()
    except ValueError as e:
        assert "balancing" in str(e)
    else:
        raise AssertionError("unbalanced cycle produced a table")

    try:
        pytrih.FanCycle.from_json("{ nope")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed JSON accepted")

    print("pytrih smoke test: ok")


if __name__ == "__main__":
    main()
