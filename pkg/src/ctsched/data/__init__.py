"""Bundled desk-scale models and objective automata."""
from importlib import resources

from ..automata import BuchiAutomaton
from ..formats import HoaSource, ModelSource, parse_hoa, parse_model
from ..model import Ctmdp

MODELS = ("riskreward", "mars", "mec_demo", "uniform_demo", "polling2")
AUTOMATA = ("fig1", "riskreward", "polling")

# which objective automaton pairs with which model in the bench command
BENCH_PAIRS = (("riskreward", "riskreward"), ("mars", "fig1"),
               ("polling2", "polling"))


def _read(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text()


def load_model(name: str) -> Ctmdp:
    return parse_model(ModelSource(_read(f"{name}.ctmdp"), origin=name))


def load_automaton(name: str) -> BuchiAutomaton:
    return parse_hoa(HoaSource(_read(f"{name}.hoa"), origin=name))
