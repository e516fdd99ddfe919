"""Smoke test for the qfa extension module.

Build and install first, e.g. `maturin build -m crates/python/Cargo.toml`
followed by `pip install` of the wheel, then run `python python/smoke_test.py`.
"""

import json
import math

import qfa

HALF = json.dumps({
    "model": "pfa", "alphabet": "a", "states": ["s", "t"], "accepting": ["t"],
    "transitions": {"a": [["1/2", "1/2"], ["1/2", "1/2"]]},
})
STICKY = json.dumps({
    "model": "pfa", "alphabet": "a", "states": ["s", "t"], "accepting": ["t"],
    "transitions": {"a": [[0.5, 0], [0.5, 1]]},
})


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    m = qfa.modp_2state(5, 1)
    assert m.model == "mcqfa" and m.alphabet == "a"
    for j in range(12):
        assert close(m.accept_prob("a" * j), math.cos(2 * math.pi * j / 5) ** 2)

    log, mults = qfa.modp_logstate(31, 0.25, seed=7)
    assert len(mults) == 16
    assert max(log.accept_prob("a" * j) for j in range(1, 31)) <= 0.25

    half = qfa.Automaton.parse(HALF)
    sticky = qfa.Automaton.parse(STICKY)
    assert half.exact_value("aa") == "1/2"
    assert sticky.exact_value("aa") == "3/4"
    same = qfa.equiv(half, qfa.Automaton.parse(half.to_json()), exact=True)
    assert same["equal"] and same["exact"]
    diff = qfa.equiv(half, sticky, exact=True)
    assert not diff["equal"] and diff["witness"] == "aa", diff

    eq15 = qfa.eq_15kwqfa()
    assert close(eq15.accept_prob("ab"), 1.0, 1e-10)
    assert close(eq15.accept_prob("aab"), 0.5, 1e-10)
    rows = json.loads(eq15.run(["ab", "aab"]))["rows"]
    assert [r["decision"] for r in rows] == ["member", "nonmember"]

    prof = qfa.exact_2qcfa("eq", "ab")
    assert prof["accept"] == 1.0
    assert qfa.exact_2qcfa("pal", "ab")["reject"] > 0
    eq = qfa.eq_2qcfa(2)
    assert close(eq.accept_prob("ab", trials=500), 1.0)
    loop = qfa.loop_semantics(0.5, 0.5)
    assert close(loop["accept"], 1 / 3) and close(loop["expected_iterations"], 4 / 3)

    assert "pal-2qcfa" in qfa.demos()
    report = json.loads(qfa.demo("pal-2qcfa", words=["aba"]))
    assert report["rows"][0]["quantum_reject"] == 0.0

    for bad in ('{"model": "pushdown"}', STICKY.replace("0.5, 0]", "0.4, 0]")):
        try:
            qfa.Automaton.parse(bad)
        except ValueError as e:
            assert "pushdown" in str(e) or "column 0" in str(e), e
        else:
            raise AssertionError("malformed file accepted")

    print("qfa smoke test passed")


if __name__ == "__main__":
    main()
