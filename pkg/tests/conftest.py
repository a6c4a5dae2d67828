import random

import pytest
from hypothesis import strategies as st

from formlab import Chart, DifferentialForm
from formlab.forms import random_form, random_polynomial
from formlab.scalar import (Builtin, Opaque, Power, Product, Sum, Symbol, const, normalize)

VARS = ("x", "y", "z")

leaves = st.one_of(
    st.integers(-4, 4).map(const),
    st.sampled_from(VARS).map(Symbol),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: Sum(t)),
        st.tuples(children, children).map(lambda t: Product(t)),
        st.tuples(children, st.integers(0, 3)).map(lambda t: Power(t[0], const(t[1]))),
        st.tuples(children, st.sampled_from(VARS)).map(
            lambda t: Product((t[0], Power(Symbol(t[1]), const(-1))))),
        st.tuples(st.sampled_from(("sin", "cos", "exp")), children).map(lambda t: Builtin(*t)),
        children.map(lambda c: Opaque("f", 0, c)),
    )


# raw (unnormalized) trees of bounded size
raw_exprs = st.recursive(leaves, _extend, max_leaves=10)
exprs = raw_exprs.map(normalize)


@st.composite
def poly_forms(draw, dims=(2, 3, 4), degree=None, max_degree=2):
    n = draw(st.sampled_from(dims))
    chart = Chart(["x", "y", "z", "w"][:n])
    p = draw(st.integers(0, n)) if degree is None else degree
    seed = draw(st.integers(0, 2**32 - 1))
    return random_form(random.Random(seed), chart, min(p, n), max_degree=max_degree)


@pytest.fixture
def rng():
    return random.Random(1234)


__all__ = ["exprs", "raw_exprs", "poly_forms", "random_polynomial", "DifferentialForm"]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
