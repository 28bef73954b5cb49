"""Smoke test for the chainsat_py extension.

Build it first, either with `maturin develop -m crates/py/Cargo.toml` or
`cargo build --release -p chainsat-py --features extension-module` and put
the resulting library on PYTHONPATH as chainsat_py.so.
"""

import itertools
import json

import chainsat_py as cs


def check_assignment(dimacs, bits):
    clauses = [
        [int(x) for x in line.split()[:-1]]
        for line in dimacs.splitlines()
        if line and line[0] not in "cp"
    ]
    value = lambda lit: (bits[abs(lit) - 1] == "1") == (lit > 0)
    return all(any(value(l) for l in c) for c in clauses)


def main():
    rows = cs.bounds()
    assert [round(c, 5) for _, c, _ in rows] == [1.32793, 1.49857, 1.59946, 1.66646], rows

    table = cs.chain_table()
    assert len(table) == 38 and table[0][:3] == (1, "*", "3/7")

    assert cs.generate(3, 20, 85, 42) == cs.generate(3, 20, 85, 42)

    agree = 0
    for k, seed in itertools.product((3, 4), range(40)):
        n = 8 + seed % 4
        text = cs.generate(k, n, int((4.26 if k == 3 else 9.9) * n), seed)
        report = json.loads(cs.solve(text))
        assert report["schema"] == 1
        want = cs.brute_force(text)
        if (report["verdict"] == "SAT") == (want is not None):
            agree += 1
        if report["verdict"] == "SAT":
            assert check_assignment(text, report["assignment"])
    assert agree == 80, agree

    unsat = "p cnf 2 4\n1 2 0\n1 -2 0\n-1 2 0\n-1 -2 0\n"
    for mode in ("full", "br", "dls"):
        assert json.loads(cs.solve(unsat, mode=mode))["verdict"] == "UNSAT"

    try:
        cs.solve("p cnf 1 1\n1 x 0\n")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error not raised")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
