"""Model language, HOA and result-table round trips."""
import numpy as np
import pytest

from ctsched.bruteforce import random_buchi, random_ctmdp
from ctsched.formats import (BenchRow, HoaError, HoaSource, ModelError,
                             ModelSource, emit_hoa, emit_result_table,
                             parse_hoa, parse_model, serialize_model)
from ctsched.model import exit_rate


# ---------------------------------------------------------------------------
# model language

def test_parse_simple_model():
    m = parse_model("""
        ctmdp
        const double r = 2.5;
        module demo
          z : [0..1] init 0;
          [go] z=0 -> r : (z'=1);
          [back] z=1 -> 1 : (z'=0);
        endmodule
        label "up" = z=1;
    """)
    assert m.state_names == ("z=0", "z=1")
    assert m.action_names == ("go", "back")
    assert exit_rate(m, 0, 0) == 2.5
    assert m.ap == ("up",)
    assert m.labels[0] == frozenset()
    assert m.labels[1] == frozenset({0})


def test_racing_commands_with_same_action_add_rates():
    m = parse_model("""
        ctmdp
        module race
          z : [0..1] init 0;
          [go] z=0 -> 1 : (z'=1);
          [go] z=0 -> 2 : (z'=1);
          [go] z=1 -> 1 : (z'=1);
        endmodule
    """)
    assert exit_rate(m, 0, 0) == 3.0


def test_only_reachable_valuations_become_states():
    m = parse_model("""
        ctmdp
        module sparse
          z : [0..9] init 3;
          [a] z=3 -> 1 : (z'=7);
          [a] z=7 -> 1 : (z'=3);
        endmodule
    """)
    assert m.num_states == 2
    assert m.state_names == ("z=3", "z=7")
    assert m.initial == 0


def test_multi_variable_states_and_conjunction_guards():
    m = parse_model("""
        ctmdp
        module pair
          x : [0..1] init 0;
          y : [0..1] init 0;
          [a] x=0 & y=0 -> 1 : (x'=1) & (y'=1);
          [a] x=1 & y=1 -> 1 : (x'=0) & (y'=0);
        endmodule
    """)
    assert m.state_names == ("x=0,y=0", "x=1,y=1")


def test_const_arithmetic_and_comments():
    m = parse_model("""
        ctmdp
        # rates come from constants
        const double base = 2;
        const double lam = base * 3; // 6
        module c
          z : [0..1] init 0;
          [a] z=0 -> lam : (z'=1);
          [a] z=1 -> lam / 2 : (z'=0);
        endmodule
    """)
    assert exit_rate(m, 0, 0) == 6.0
    assert exit_rate(m, 1, 0) == 3.0


def test_syntax_error_reports_position():
    with pytest.raises(ModelError) as err:
        parse_model(ModelSource("ctmdp\nmodule m\n  z : [0..1 init 0;\n"
                                "endmodule\n"))
    assert err.value.line == 3


def test_semantic_errors():
    with pytest.raises(ModelError):
        parse_model("ctmdp\nmodule m\n z : [0..1] init 0;\n"
                    "[a] z=0 -> 1 : (z'=5);\nendmodule\n")  # out of range
    with pytest.raises(ModelError):
        parse_model("ctmdp\nmodule m\n z : [0..1] init 0;\n"
                    "[a] z=0 -> -1 : (z'=1);\nendmodule\n")  # negative rate
    with pytest.raises(ModelError):
        parse_model("ctmdp\nlabel \"x\" = true;\n")  # no module


def _reachable(m):
    seen = {m.initial}
    frontier = [m.initial]
    while frontier:
        s = frontier.pop()
        for a in m.enabled(s):
            for t in m.successors(s, a)[0]:
                if int(t) not in seen:
                    seen.add(int(t))
                    frontier.append(int(t))
    return seen


def test_serialize_round_trip():
    # state and action ids get renumbered in exploration order, so the
    # comparison goes through the emitted names
    rng = np.random.default_rng(5)
    for _ in range(5):
        m = random_ctmdp(rng, num_states=5, ap=("g",))
        m2 = parse_model(serialize_model(m))
        reach = _reachable(m)
        assert m2.num_states == len(reach)
        assert m2.ap == m.ap
        sid = {name: i for i, name in enumerate(m2.state_names)}
        for s in reach:
            s2 = sid[f"s={s}"]
            assert m2.labels[s2] == m.labels[s]
            for a in m.enabled(s):
                succ, rates = m.successors(s, a)
                a2 = m2.action_names.index(m.action_names[a])
                succ2, rates2 = m2.successors(s2, a2)
                got = {m2.state_names[int(t)]: float(r)
                       for t, r in zip(succ2, rates2)}
                want = {f"s={int(t)}": float(r) for t, r in zip(succ, rates)}
                assert set(got) == set(want)
                for k in want:
                    assert got[k] == pytest.approx(want[k], rel=1e-12)


# ---------------------------------------------------------------------------
# HOA

def test_parse_hoa_subset():
    a = parse_hoa(HoaSource("""HOA: v1
States: 2
Start: 0
AP: 1 "g"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[!0] 0
[0] 1
State: 1 {0}
[t] 1
--END--
"""))
    assert a.num_states == 2
    assert a.initial == 0
    assert a.ap == ("g",)
    assert a.accepting == frozenset({1})


def test_hoa_rejects_non_buchi_acceptance():
    text = ("HOA: v1\nStates: 1\nStart: 0\nAP: 0\n"
            "Acceptance: 2 Inf(0) & Fin(1)\n--BODY--\nState: 0\n[t] 0\n--END--\n")
    with pytest.raises(HoaError):
        parse_hoa(text)


def test_hoa_rejects_dangling_state_and_missing_end():
    with pytest.raises(HoaError):
        parse_hoa("HOA: v1\nStates: 1\nStart: 0\nAP: 0\n"
                  "Acceptance: 1 Inf(0)\n--BODY--\nState: 0\n[t] 3\n--END--\n")
    with pytest.raises(HoaError):
        parse_hoa("HOA: v1\nStates: 1\nStart: 0\nAP: 0\n"
                  "Acceptance: 1 Inf(0)\n--BODY--\nState: 0\n[t] 0\n")


def test_hoa_guard_parser_errors():
    base = ("HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"g\"\n"
            "Acceptance: 1 Inf(0)\n--BODY--\nState: 0\n[{}] 0\n--END--\n")
    with pytest.raises(HoaError):
        parse_hoa(base.format("0 &"))
    with pytest.raises(HoaError):
        parse_hoa(base.format("(0"))
    with pytest.raises(HoaError):
        parse_hoa(base.format("5"))  # AP index out of range


def test_hoa_round_trip():
    rng = np.random.default_rng(9)
    for _ in range(10):
        a = random_buchi(rng, num_states=4)
        b = parse_hoa(emit_hoa(a, name="rt"))
        assert b.num_states == a.num_states
        assert b.initial == a.initial
        assert b.ap == a.ap
        assert b.accepting == a.accepting
        # same transition function on every letter
        from ctsched.automata import step
        for q in range(a.num_states):
            for k in range(1 << len(a.ap)):
                letter = frozenset(i for i in range(len(a.ap)) if k >> i & 1)
                assert step(a, q, letter) == step(b, q, letter)


# ---------------------------------------------------------------------------
# tables

def test_result_table_csv_and_alignment():
    rows = [BenchRow(name="riskreward", states=4, prod=8, sat_prob=1.0,
                     est_sat=1.0, time_sat=7.25, exp_prob=0.9,
                     est_exp=0.8999, time_exp=30.125)]
    csv_text = emit_result_table(rows, fmt="csv")
    lines = csv_text.strip().split("\n")
    assert lines[0].startswith("Name,states,prod.,Sat. Prob.")
    assert lines[1].split(",")[:4] == ["riskreward", "4", "8", "1"]
    table = emit_result_table(rows, fmt="table")
    assert "riskreward" in table and "0.8999" in table
    with pytest.raises(ValueError):
        emit_result_table(rows, fmt="json")


def test_result_table_blank_cells_for_missing():
    row = BenchRow(name="m", states=2, prod=2, sat_prob=0.5)
    cells = row.cells()
    assert cells[3] == "0.5"
    assert cells[6] == "" and cells[8] == ""
