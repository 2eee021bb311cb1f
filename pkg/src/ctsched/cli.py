"""Command-line interface.

Subcommands: ``learn`` (train and grade a schedule), ``check`` (exact values,
optimal or for a given schedule), ``simulate`` (trajectory dump), ``product``
(dump the product model), ``bench`` (run the bundled models and emit the
result table).

Exit codes: 0 success, 2 parse error, 3 validation error, 4 numeric
non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import data as bundled
from .automata import BuchiAutomaton
from .check import (CheckResult, ConvergenceError, esem_of, esem_optimal,
                    psem_of, psem_optimal)
from .formats import (BenchRow, HoaError, HoaSource, ModelError, ModelSource,
                      emit_result_table, parse_hoa, parse_model,
                      serialize_model)
from .learn import Hyperparams, OnTheFlyProductEnv, learn_exp, learn_sat
from .model import Ctmdp, CtmdpError, validate
from .product import ProductCtmdp, Schedule, build_product
from .rewards import ExpRewardCfg, exp_reward
from .simulate import RngHandle

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4


class CliError(Exception):
    def __init__(self, msg: str, code: int):
        super().__init__(msg)
        self.code = code


def _load_model(path: str) -> Ctmdp:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}", EXIT_VALIDATION)
    try:
        m = parse_model(ModelSource(text, origin=path))
    except ModelError as exc:
        raise CliError(f"{path}:{exc}", EXIT_PARSE)
    problems = validate(m)
    if problems:
        raise CliError(f"{path}: " + "; ".join(problems), EXIT_VALIDATION)
    return m


def _load_automaton(path: str) -> BuchiAutomaton:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}", EXIT_VALIDATION)
    try:
        return parse_hoa(HoaSource(text, origin=path))
    except HoaError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE)


def _build(args) -> Tuple[Ctmdp, BuchiAutomaton, ProductCtmdp]:
    m = _load_model(args.model)
    a = _load_automaton(args.automaton)
    try:
        p = build_product(m, a)
    except CtmdpError as exc:
        raise CliError(str(exc), EXIT_VALIDATION)
    return m, a, p


# ---------------------------------------------------------------------------
# Schedule files: CSV with columns s,q,action,qnext (ids for s/q/qnext,
# action by name)

def write_schedule(p: ProductCtmdp, schedule: Schedule, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["s", "q", "action", "qnext"])
    base = p.model if p.model is not None else p.ctmdp
    for (s, q), (act, q2) in sorted(schedule.items()):
        if s is None or act is None:
            continue
        w.writerow([s, q, base.action_names[act], q2])


def read_schedule(p: ProductCtmdp, path: str) -> Schedule:
    base = p.model if p.model is not None else p.ctmdp
    action_ids = {name: i for i, name in enumerate(base.action_names)}
    known = set(p.pairs)
    out: Schedule = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}", EXIT_VALIDATION)
    if not rows or rows[0] != ["s", "q", "action", "qnext"]:
        raise CliError(f"{path}: expected header s,q,action,qnext", EXIT_PARSE)
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            s, q, act_name, q2 = int(row[0]), int(row[1]), row[2], int(row[3])
        except (ValueError, IndexError):
            raise CliError(f"{path}:{ln}: malformed schedule row", EXIT_PARSE)
        if (s, q) not in known:
            raise CliError(f"{path}:{ln}: unknown product state ({s},{q})",
                           EXIT_VALIDATION)
        if act_name not in action_ids:
            raise CliError(f"{path}:{ln}: unknown action '{act_name}'",
                           EXIT_VALIDATION)
        out[(s, q)] = (action_ids[act_name], q2)
    return out


def _hyperparams(args) -> Hyperparams:
    try:
        return Hyperparams(gamma=args.gamma, beta=args.beta,
                           epsilon=args.epsilon, zeta=args.zeta,
                           ep_len=args.ep_len, ep_n=args.episodes,
                           tol=args.tol)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION)


# ---------------------------------------------------------------------------
# Subcommands

def cmd_learn(args) -> int:
    m, a, p = _build(args)
    hp = _hyperparams(args)
    sat = args.objective == "sat"
    exact = psem_optimal(p) if sat else esem_optimal(p)
    values: List[float] = []
    times: List[float] = []
    best_schedule: Optional[Schedule] = None
    best_value = -1.0
    for i in range(args.runs):
        t0 = time.perf_counter()
        result = (learn_sat if sat else learn_exp)(m, a, hp,
                                                   seed=args.seed + i)
        graded = (psem_of if sat else esem_of)(p, result.schedule)
        times.append(time.perf_counter() - t0)
        values.append(graded.value)
        if graded.value > best_value:
            best_value, best_schedule = graded.value, result.schedule
    est = float(np.mean(values))
    elapsed = float(np.mean(times))
    name = args.model.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    row = BenchRow(name=name, states=m.num_states, prod=p.num_states,
                   sat_prob=exact.value if sat else None,
                   est_sat=est if sat else None,
                   time_sat=elapsed if sat else None,
                   exp_prob=None if sat else exact.value,
                   est_exp=None if sat else est,
                   time_exp=None if sat else elapsed)
    sys.stdout.write(emit_result_table([row], fmt=args.format))
    if args.schedule_out and best_schedule is not None:
        with open(args.schedule_out, "w", encoding="utf-8") as fh:
            write_schedule(p, best_schedule, fh)
    return 0


def _values_csv(p: ProductCtmdp, result: CheckResult, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["state", "s", "q", "value"])
    for i, (s, q) in enumerate(p.pairs):
        w.writerow([p.ctmdp.state_names[i],
                    "" if s is None else s,
                    "" if q is None else q,
                    f"{result.values[i]:.9g}"])


def cmd_check(args) -> int:
    m, a, p = _build(args)
    sat = args.objective == "sat"
    try:
        if args.schedule:
            schedule = read_schedule(p, args.schedule)
            result = (psem_of if sat else esem_of)(p, schedule)
        else:
            result = (psem_optimal if sat else esem_optimal)(p)
    except ConvergenceError as exc:
        raise CliError(str(exc), EXIT_NUMERIC)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            _values_csv(p, result, fh)
    else:
        buf = io.StringIO()
        _values_csv(p, result, buf)
        sys.stdout.write(buf.getvalue())
    label = "PSem" if sat else "ESem"
    sys.stdout.write(f"# {label}(initial) = {result.value:.9g}\n")
    if args.schedule_out and result.schedule is not None:
        with open(args.schedule_out, "w", encoding="utf-8") as fh:
            write_schedule(p, result.schedule, fh)
    return 0


def cmd_simulate(args) -> int:
    m, a, p = _build(args)
    if args.schedule:
        schedule = read_schedule(p, args.schedule)
    else:
        schedule = {pair: None for pair in p.pairs}
    env = OnTheFlyProductEnv(m, a)
    rng = RngHandle(args.seed, "trajectory")
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["step", "state", "action", "next", "dwell", "reward"])
        s = env.reset()

        def name(pair):
            ms, q = pair
            if ms is None:
                return "(dead)"
            return f"({m.state_names[ms]},q{q})"

        def aname(action):
            act, q2 = action
            if act is None:
                return "(stuck)"
            return f"{m.action_names[act]}>q{q2}"

        for step in range(args.steps):
            choice = schedule.get(s)
            actions = env.actions(s)
            action = choice if choice in actions else actions[0]
            s2, dwell = env.sample(s, action, rng)
            r = exp_reward(ExpRewardCfg(), env.is_accepting(s), dwell)
            w.writerow([step, name(s), aname(action), name(s2),
                        f"{dwell:.9g}", f"{r:.9g}"])
            s = s2
    finally:
        if args.out:
            out.close()
    return 0


def cmd_product(args) -> int:
    m, a, p = _build(args)
    name = args.model.rsplit("/", 1)[-1].rsplit(".", 1)[0] + "_product"
    text = serialize_model(p.ctmdp, name=name)
    lines = [text.rstrip("\n")]
    lines.append(f"# states: {p.num_states}")
    lines.append("# accepting: " +
                 " ".join(p.ctmdp.state_names[i] for i in sorted(p.accepting)))
    body = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return 0


def cmd_bench(args) -> int:
    hp_sat = _hyperparams(args)
    hp_exp = _hyperparams(args)
    rows = []
    for model_name, aut_name in bundled.BENCH_PAIRS:
        m = bundled.load_model(model_name)
        a = bundled.load_automaton(aut_name)
        p = build_product(m, a)
        exact_sat = psem_optimal(p)
        exact_exp = esem_optimal(p)
        sat_vals, sat_times, exp_vals, exp_times = [], [], [], []
        for i in range(args.runs):
            t0 = time.perf_counter()
            res = learn_sat(m, a, hp_sat, seed=args.seed + i)
            sat_vals.append(psem_of(p, res.schedule).value)
            sat_times.append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            res = learn_exp(m, a, hp_exp, seed=args.seed + i)
            exp_vals.append(esem_of(p, res.schedule).value)
            exp_times.append(time.perf_counter() - t0)
        rows.append(BenchRow(name=model_name, states=m.num_states,
                             prod=p.num_states,
                             sat_prob=exact_sat.value,
                             est_sat=float(np.mean(sat_vals)),
                             time_sat=float(np.mean(sat_times)),
                             exp_prob=exact_exp.value,
                             est_exp=float(np.mean(exp_vals)),
                             time_exp=float(np.mean(exp_times))))
    sys.stdout.write(emit_result_table(rows, fmt=args.format))
    return 0


# ---------------------------------------------------------------------------
# Argument parsing

def _add_io_flags(sp, automaton_required=True):
    sp.add_argument("--model", required=True, help="path to a .ctmdp file")
    sp.add_argument("--automaton", required=automaton_required,
                    help="path to a .hoa objective")


def _add_hyper_flags(sp):
    sp.add_argument("--zeta", type=float, default=0.99)
    sp.add_argument("--episodes", type=int, default=20000)
    sp.add_argument("--ep-len", dest="ep_len", type=int, default=300)
    sp.add_argument("--beta", type=float, default=0.01)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--gamma", type=float, default=None,
                    help="per-step discount; default depends on the objective")
    sp.add_argument("--tol", type=float, default=0.01)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ctsched",
        description="Learn and verify CTMDP schedules for omega-regular "
                    "objectives.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("learn", help="train a schedule and grade it exactly")
    _add_io_flags(sp)
    sp.add_argument("--objective", choices=("sat", "exp"), default="sat")
    _add_hyper_flags(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--schedule-out", dest="schedule_out")
    sp.add_argument("--format", choices=("csv", "table"), default="csv")
    sp.set_defaults(func=cmd_learn)

    sp = sub.add_parser("check", help="exact values, optimal or for a schedule")
    _add_io_flags(sp)
    sp.add_argument("--objective", choices=("sat", "exp"), default="sat")
    sp.add_argument("--schedule", help="schedule CSV to evaluate")
    sp.add_argument("--out", help="write per-state values CSV here")
    sp.add_argument("--schedule-out", dest="schedule_out")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("simulate", help="dump a product trajectory as CSV")
    _add_io_flags(sp)
    sp.add_argument("--schedule", help="schedule CSV to follow")
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("product", help="dump the product model")
    _add_io_flags(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_product)

    sp = sub.add_parser("bench", help="run the bundled models")
    _add_hyper_flags(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--runs", type=int, default=3)
    sp.add_argument("--format", choices=("csv", "table"), default="csv")
    sp.set_defaults(func=cmd_bench)

    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    except CtmdpError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
