"""Exact analysis of the Mars surveillance model.

Builds the product of the four-zone rover model with the objective "visit a
reward zone infinitely often while never touching the crevasse", then asks
the checker for both semantics: the maximal probability of satisfying the
objective, and the maximal long-run fraction of time spent in reward zones.

Run:  python3 demos/01_exact_checking.py
"""
from ctsched import build_product, esem_optimal, psem_optimal, project_schedule
from ctsched.data import load_automaton, load_model


def main():
    m = load_model("mars")
    a = load_automaton("fig1")
    p = build_product(m, a)
    print(f"model: {m.num_states} states, product: {p.num_states} states, "
          f"{len(p.accepting)} accepting\n")

    sat = psem_optimal(p)
    print("satisfaction semantics (probability of acceptance):")
    for i, name in enumerate(p.ctmdp.state_names):
        print(f"  {name:12s} {sat.values[i]:.6g}")
    proj = project_schedule(p, sat.schedule)
    print("optimal schedule on (zone, memory) pairs:")
    for (s, q), act in sorted(proj.items()):
        print(f"  zone {m.state_names[s]}, q{q} -> {m.action_names[act]}")
    print(f"value at the initial state: {sat.value:.6g}")
    print("note: the risky action b is never taken, the a-c cycle already "
          "wins with probability 1\n")

    exp = esem_optimal(p)
    print("expectation semantics (long-run fraction of accepting time):")
    act, _ = exp.schedule[(m.initial, a.initial)]
    print(f"  value at the initial state: {exp.value:.6g}")
    print(f"  first action: {m.action_names[act]} "
          "(the race toward the reward zone pays off on average, even "
          "though it can strand the rover in the crevasse)")


if __name__ == "__main__":
    main()
