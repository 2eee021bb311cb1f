"""Nondeterministic Buchi automata over sets of atomic propositions.

Letters are frozensets of AP indices (the bitset view of 2^AP).  Edge guards
are boolean formulas over AP indices, evaluated against a letter.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Sequence, Tuple, Union

Letter = FrozenSet[int]


class Guard:
    """Boolean formula over AP indices."""

    def eval(self, letter: Letter) -> bool:
        raise NotImplementedError

    def aps(self) -> FrozenSet[int]:
        raise NotImplementedError


@dataclass(frozen=True)
class GTrue(Guard):
    def eval(self, letter):
        return True

    def aps(self):
        return frozenset()

    def __str__(self):
        return "t"


@dataclass(frozen=True)
class GFalse(Guard):
    def eval(self, letter):
        return False

    def aps(self):
        return frozenset()

    def __str__(self):
        return "f"


@dataclass(frozen=True)
class GAp(Guard):
    index: int

    def eval(self, letter):
        return self.index in letter

    def aps(self):
        return frozenset({self.index})

    def __str__(self):
        return str(self.index)


@dataclass(frozen=True)
class GNot(Guard):
    arg: Guard

    def eval(self, letter):
        return not self.arg.eval(letter)

    def aps(self):
        return self.arg.aps()

    def __str__(self):
        if isinstance(self.arg, (GAnd, GOr)):
            return f"!({self.arg})"
        return f"!{self.arg}"


@dataclass(frozen=True)
class GAnd(Guard):
    args: Tuple[Guard, ...]

    def eval(self, letter):
        return all(g.eval(letter) for g in self.args)

    def aps(self):
        return frozenset().union(*(g.aps() for g in self.args))

    def __str__(self):
        return " & ".join(f"({g})" if isinstance(g, GOr) else str(g)
                          for g in self.args)


@dataclass(frozen=True)
class GOr(Guard):
    args: Tuple[Guard, ...]

    def eval(self, letter):
        return any(g.eval(letter) for g in self.args)

    def aps(self):
        return frozenset().union(*(g.aps() for g in self.args))

    def __str__(self):
        return " | ".join(str(g) for g in self.args)


@dataclass(frozen=True)
class Edge:
    guard: Guard
    target: int


@dataclass
class MonitorState:
    """Tracks one automaton run along a trajectory.

    ``accepting_hit`` reports whether the state entered by the last step was
    accepting.
    """

    current: int
    accepting_hit: bool = False

    def advance(self, a: "BuchiAutomaton", letter: "Letter", choice: int):
        """Move to ``choice``, which must be a valid successor for ``letter``."""
        if choice not in step(a, self.current, letter):
            raise ValueError(
                f"state {choice} is not a successor of {self.current}")
        self.current = choice
        self.accepting_hit = choice in a.accepting


@dataclass(frozen=True)
class BuchiAutomaton:
    """States 0..n-1, AP names, guarded edges, state-based acceptance."""

    num_states: int
    initial: int
    ap: Tuple[str, ...]
    edges: Tuple[Tuple[Edge, ...], ...]  # edges[q] = outgoing edges of q
    accepting: FrozenSet[int]

    def __post_init__(self):
        if len(self.edges) != self.num_states:
            raise ValueError("edge table size does not match state count")
        for q in self.accepting:
            if not (0 <= q < self.num_states):
                raise ValueError(f"accepting state {q} out of range")

    def is_deterministic(self) -> bool:
        for q in range(self.num_states):
            for k in range(1 << len(self.ap)):
                letter = frozenset(i for i in range(len(self.ap)) if k >> i & 1)
                if len(step(self, q, letter)) > 1:
                    return False
        return True


def step(a: BuchiAutomaton, q: int, letter: Letter) -> FrozenSet[int]:
    """delta(q, letter); empty set means the run prefix is rejected."""
    if not (0 <= q < a.num_states):
        raise ValueError(f"state {q} out of range")
    return frozenset(e.target for e in a.edges[q] if e.guard.eval(letter))


def extended_step(a: BuchiAutomaton, qs: Iterable[int],
                  word: Sequence[Letter]) -> FrozenSet[int]:
    """delta-hat: apply ``step`` letter by letter to a state set."""
    current = frozenset(qs)
    for letter in word:
        current = frozenset().union(*(step(a, q, letter) for q in current)) \
            if current else frozenset()
    return current


def letter_from_names(a: BuchiAutomaton, names: Iterable[str]) -> Letter:
    index = {name: i for i, name in enumerate(a.ap)}
    return frozenset(index[n] for n in names)
