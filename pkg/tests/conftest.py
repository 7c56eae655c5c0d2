import json
from fractions import Fraction

import pytest

import nestedteam
from nestedteam.model import load_model


def _dist(prefix, probs):
    return [{"label": f"{prefix}{i}", "prob": str(Fraction(p))} for i, p in enumerate(probs)]


def make_doc(T=0, nx=1, na1=1, na2=1, ny1=1, ny2=1, w=(1,), v1=(1,), v2=(1,), x0=None,
             f=None, h1=None, h2=None, c=None):
    """A model document over index labels.

    ``f(t,x,u1,u2,w)``, ``h1/h2(t,x,v)`` and ``c(t,x,u1,u2)`` default to
    identity-style deterministic maps and zero cost.
    """
    x0 = x0 or [Fraction(1, nx)] * nx
    f = f or (lambda t, x, a, b, n: x)
    h1 = h1 or (lambda t, x, v: min(x, ny1 - 1))
    h2 = h2 or (lambda t, x, v: min(x, ny2 - 1))
    c = c or (lambda t, x, a, b: 0)
    return {
        "horizon": T,
        "states": [f"x{i}" for i in range(nx)],
        "actions1": [f"a{i}" for i in range(na1)],
        "actions2": [f"b{i}" for i in range(na2)],
        "obs1": [f"y{i}" for i in range(ny1)],
        "obs2": [f"z{i}" for i in range(ny2)],
        "w": [_dist("w", w) for _ in range(T)],
        "v1": [_dist("v", v1) for _ in range(T + 1)],
        "v2": [_dist("n", v2) for _ in range(T + 1)],
        "x0": _dist("x", x0),
        "transition": [
            {"t": t, "x": f"x{x}", "u1": f"a{a}", "u2": f"b{b}", "w": f"w{n}", "next": f"x{f(t, x, a, b, n)}"}
            for t in range(T) for x in range(nx) for a in range(na1) for b in range(na2) for n in range(len(w))
        ],
        "obs_fn1": [{"t": t, "x": f"x{x}", "v": f"v{v}", "y": f"y{h1(t, x, v)}"}
                    for t in range(T + 1) for x in range(nx) for v in range(len(v1))],
        "obs_fn2": [{"t": t, "x": f"x{x}", "v": f"n{v}", "y": f"z{h2(t, x, v)}"}
                    for t in range(T + 1) for x in range(nx) for v in range(len(v2))],
        "cost": [{"t": t, "x": f"x{x}", "u1": f"a{a}", "u2": f"b{b}", "value": str(Fraction(c(t, x, a, b)))}
                 for t in range(T + 1) for x in range(nx) for a in range(na1) for b in range(na2)],
    }


def make_model(**kw):
    return load_model(json.dumps(make_doc(**kw)))


@pytest.fixture
def desk():
    return nestedteam.desk_team()


@pytest.fixture
def desk_text():
    from importlib import resources

    return resources.files("nestedteam").joinpath("data/desk_team.json").read_text(encoding="utf-8")
