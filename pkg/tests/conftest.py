"""Shared fixtures: bundled models and their objective products."""
import pytest

from ctsched.data import load_automaton, load_model
from ctsched.product import build_product


@pytest.fixture(scope="session")
def riskreward():
    m = load_model("riskreward")
    a = load_automaton("riskreward")
    return m, a, build_product(m, a)


@pytest.fixture(scope="session")
def mars():
    m = load_model("mars")
    a = load_automaton("fig1")
    return m, a, build_product(m, a)


@pytest.fixture(scope="session")
def polling():
    m = load_model("polling2")
    a = load_automaton("polling")
    return m, a, build_product(m, a)
