"""Finite two-agent team problems with nested information.

A :class:`TeamModel` is given in functional form: a state transition
``x' = f_t(x, u1, u2, w)``, observations ``y^k = h^k_t(x, v^k)``, a stage cost
``c_t(x, u1, u2)`` and independent primitive distributions for ``x_0``,
``w_t`` and ``v^k_t``.  Time runs ``t = 0..T`` and both agents act at every
step, including ``T``.

Labels are opaque strings.  Internally every space is indexed densely per
time step and all tables are keyed by those indices; probabilities and costs
are :class:`fractions.Fraction` throughout.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .errors import ParseError, ValidationError

__all__ = [
    "Distribution",
    "TeamModel",
    "Violation",
    "fingerprint",
    "fmt_rational",
    "load_model",
    "load_model_file",
    "observation_kernel",
    "parse_rational",
    "serialize_model",
    "validate_model",
]

DOCUMENT_KEYS = (
    "horizon", "states", "actions1", "actions2", "obs1", "obs2",
    "w", "v1", "v2", "x0", "transition", "obs_fn1", "obs_fn2", "cost",
)


def parse_rational(value) -> Fraction:
    """Read an exact rational from ``"p/q"``, an integer, or an integer string.

    Floats are refused so that no binary rounding sneaks into the model.
    """
    if isinstance(value, bool):
        raise ParseError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {value!r}") from exc
    if isinstance(value, Fraction):
        return value
    raise ParseError(f"not a rational: {value!r}")


def fmt_rational(value: Fraction) -> str:
    """Always ``p/q``, including integers (``3/1``)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Distribution:
    labels: tuple[str, ...]
    probs: tuple[Fraction, ...]

    def __len__(self):
        return len(self.labels)

    def items(self):
        return zip(range(len(self.labels)), self.probs)

    def support(self):
        """(index, probability) pairs with positive probability."""
        return [(i, p) for i, p in enumerate(self.probs) if p > 0]


@dataclass(frozen=True)
class Violation:
    field: str
    index: Any
    rule: str
    detail: str = ""

    def __str__(self):
        where = self.field if self.index is None else f"{self.field}[{self.index}]"
        text = f"{where}: {self.rule}"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass(frozen=True)
class TeamModel:
    """A finite team problem.

    Per-time sequences have length ``horizon + 1`` except ``w`` and
    ``transition`` (length ``horizon``).  ``transition[t]`` maps
    ``(x, u1, u2, w) -> x'``, ``obs_fn1[t]``/``obs_fn2[t]`` map
    ``(x, v) -> y`` and ``cost[t]`` maps ``(x, u1, u2) -> Fraction``.
    """

    horizon: int
    states: tuple[tuple[str, ...], ...]
    actions1: tuple[tuple[str, ...], ...]
    actions2: tuple[tuple[str, ...], ...]
    obs1: tuple[tuple[str, ...], ...]
    obs2: tuple[tuple[str, ...], ...]
    w: tuple[Distribution, ...]
    v1: tuple[Distribution, ...]
    v2: tuple[Distribution, ...]
    x0: tuple[Fraction, ...]
    transition: tuple[dict, ...]
    obs_fn1: tuple[dict, ...]
    obs_fn2: tuple[dict, ...]
    cost: tuple[dict, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    __hash__ = object.__hash__

    def actions(self, agent: int, t: int):
        return (self.actions1 if agent == 1 else self.actions2)[t]

    def observations(self, agent: int, t: int):
        return (self.obs1 if agent == 1 else self.obs2)[t]

    def noise(self, agent: int, t: int) -> Distribution:
        return (self.v1 if agent == 1 else self.v2)[t]

    def obs_fn(self, agent: int, t: int) -> dict:
        return (self.obs_fn1 if agent == 1 else self.obs_fn2)[t]

    def index(self, space: str, t: int, label: str) -> int:
        """Dense index of ``label`` in one of the per-t spaces."""
        labels = getattr(self, space)[t]
        try:
            return labels.index(label)
        except ValueError:
            raise KeyError(f"unknown {space} label {label!r} at t={t}") from None

    def max_cost(self, t: int) -> Fraction:
        return max(self.cost[t].values())


# --------------------------------------------------------------------------
# validation


def _check_space(name, seq, length, out):
    if len(seq) != length:
        out.append(Violation(name, None, "length mismatch", f"expected {length} time steps, got {len(seq)}"))
        return False
    ok = True
    for t, labels in enumerate(seq):
        if len(labels) == 0:
            out.append(Violation(name, t, "empty space"))
            ok = False
        elif len(set(labels)) != len(labels):
            out.append(Violation(name, t, "duplicate label"))
            ok = False
    return ok


def _check_distribution(name, index, probs, out):
    if len(probs) == 0:
        out.append(Violation(name, index, "empty space"))
        return
    if any(p < 0 for p in probs):
        out.append(Violation(name, index, "negative probability"))
    elif sum(probs, Fraction(0)) != 1:
        out.append(Violation(name, index, "distribution not normalized", f"sums to {fmt_rational(sum(probs, Fraction(0)))}"))


def _check_table(name, t, table, domain, codomain_size, rule, out, nonneg=False):
    keys = set(table)
    missing = [k for k in domain if k not in keys]
    if missing:
        out.append(Violation(name, t, rule, f"missing {missing[0]}, {len(missing)} entries absent"))
    extra = keys.difference(domain)
    if extra:
        out.append(Violation(name, t, "entry outside domain", f"{sorted(extra)[0]}"))
    for k, value in table.items():
        if codomain_size is not None:
            if not (isinstance(value, int) and 0 <= value < codomain_size):
                out.append(Violation(name, t, "value out of range", f"{k} -> {value!r}"))
                break
        elif nonneg and value < 0:
            out.append(Violation(name, t, "negative cost", f"{k} -> {value}"))
            break


def validate_model(m: TeamModel) -> list[Violation]:
    """Return every violated invariant of ``m`` (empty when valid)."""
    out: list[Violation] = []
    T = m.horizon
    if not isinstance(T, int) or T < 0:
        return [Violation("horizon", None, "horizon must be a nonnegative integer")]
    n = T + 1
    spaces_ok = all([
        _check_space("states", m.states, n, out),
        _check_space("actions1", m.actions1, n, out),
        _check_space("actions2", m.actions2, n, out),
        _check_space("obs1", m.obs1, n, out),
        _check_space("obs2", m.obs2, n, out),
    ])
    dist_ok = True
    for name, seq, length in (("w", m.w, T), ("v1", m.v1, n), ("v2", m.v2, n)):
        if len(seq) != length:
            out.append(Violation(name, None, "length mismatch", f"expected {length} time steps, got {len(seq)}"))
            dist_ok = False
            continue
        for t, d in enumerate(seq):
            if len(d.labels) != len(d.probs):
                out.append(Violation(name, t, "length mismatch", "labels and probabilities differ"))
                dist_ok = False
            else:
                _check_distribution(name, t, d.probs, out)
    if not spaces_ok:
        return out
    if len(m.x0) != len(m.states[0]):
        out.append(Violation("x0", None, "length mismatch", "x0 must cover states at t=0"))
    else:
        _check_distribution("x0", None, m.x0, out)
    for name, seq, length in (("transition", m.transition, T), ("obs_fn1", m.obs_fn1, n),
                              ("obs_fn2", m.obs_fn2, n), ("cost", m.cost, n)):
        if len(seq) != length:
            out.append(Violation(name, None, "length mismatch", f"expected {length} time steps, got {len(seq)}"))
            dist_ok = False
    if not dist_ok:
        return out
    for t in range(T):
        dom = list(itertools.product(range(len(m.states[t])), range(len(m.actions1[t])),
                                     range(len(m.actions2[t])), range(len(m.w[t]))))
        _check_table("transition", t, m.transition[t], dom, len(m.states[t + 1]),
                     "transition table not total", out)
    for t in range(n):
        for agent in (1, 2):
            dom = list(itertools.product(range(len(m.states[t])), range(len(m.noise(agent, t)))))
            _check_table(f"obs_fn{agent}", t, m.obs_fn(agent, t), dom, len(m.observations(agent, t)),
                         "observation table not total", out)
        dom = list(itertools.product(range(len(m.states[t])), range(len(m.actions1[t])),
                                     range(len(m.actions2[t]))))
        _check_table("cost", t, m.cost[t], dom, None, "cost table not total", out, nonneg=True)
    return out


# --------------------------------------------------------------------------
# derived kernels


def observation_kernel(m: TeamModel, agent: int, t: int) -> tuple[tuple[Fraction, ...], ...]:
    """``P(y | x)`` for agent ``agent`` at time ``t``, as rows indexed ``[x][y]``.

    Obtained by pushing the noise distribution through ``h^k_t``.
    """
    if agent not in (1, 2):
        raise ValueError(f"agent must be 1 or 2, got {agent}")
    if not 0 <= t <= m.horizon:
        raise ValueError(f"time {t} outside 0..{m.horizon}")
    key = ("obs", agent, t)
    cached = m._cache.get(key)
    if cached is not None:
        return cached
    h = m.obs_fn(agent, t)
    noise = m.noise(agent, t)
    n_y = len(m.observations(agent, t))
    rows = []
    for x in range(len(m.states[t])):
        row = [Fraction(0)] * n_y
        for v, pv in noise.items():
            row[h[x, v]] += pv
        rows.append(tuple(row))
    kernel = tuple(rows)
    m._cache[key] = kernel
    return kernel


# --------------------------------------------------------------------------
# document I/O


def _parse_space(doc, key, T):
    raw = doc[key]
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"{key}: expected a nonempty list")
    if all(isinstance(s, str) for s in raw):
        return tuple(tuple(raw) for _ in range(T + 1))
    if all(isinstance(s, list) and all(isinstance(x, str) for x in s) for s in raw):
        if len(raw) != T + 1:
            raise ParseError(f"{key}: per-time lists must have length {T + 1}")
        return tuple(tuple(s) for s in raw)
    raise ParseError(f"{key}: expected a list of strings or a list of string lists")


def _parse_dist(entries, where):
    if not isinstance(entries, list):
        raise ParseError(f"{where}: expected a list of {{label, prob}} objects")
    labels, probs = [], []
    for e in entries:
        if not isinstance(e, dict) or set(e) != {"label", "prob"}:
            raise ParseError(f"{where}: entries need exactly the keys label and prob")
        labels.append(str(e["label"]))
        probs.append(parse_rational(e["prob"]))
    return Distribution(tuple(labels), tuple(probs))


def _parse_dist_seq(doc, key, length):
    raw = doc[key]
    if not isinstance(raw, list):
        raise ParseError(f"{key}: expected a list")
    if raw and all(isinstance(e, dict) for e in raw):
        # one distribution shared by every time step
        d = _parse_dist(raw, key)
        return tuple(d for _ in range(length))
    if len(raw) != length:
        raise ParseError(f"{key}: expected {length} per-time distributions, got {len(raw)}")
    return tuple(_parse_dist(e, f"{key}[{t}]") for t, e in enumerate(raw))


class _Labels:
    """Label -> index lookups that record unknown labels as violations."""

    def __init__(self, spaces):
        self.maps = {name: [{lab: i for i, lab in enumerate(labels)} for labels in seq]
                     for name, seq in spaces.items()}
        self.violations: list[Violation] = []

    def __call__(self, space, t, label, where):
        try:
            return self.maps[space][t][label]
        except (KeyError, IndexError, TypeError):
            self.violations.append(Violation(where, t, "unknown label", f"{space} {label!r}"))
            return None


def _entries(doc, key, fields):
    raw = doc[key]
    if not isinstance(raw, list):
        raise ParseError(f"{key}: expected a list of objects")
    for e in raw:
        if not isinstance(e, dict) or set(e) != set(fields):
            raise ParseError(f"{key}: entries need exactly the keys {', '.join(fields)}")
        if not isinstance(e["t"], int) or isinstance(e["t"], bool):
            raise ParseError(f"{key}: t must be an integer")
        yield e


def load_model(source: str) -> TeamModel:
    """Parse and validate a model document (JSON text)."""
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    unknown = sorted(set(doc) - set(DOCUMENT_KEYS))
    if unknown:
        raise ParseError(f"unknown keys: {', '.join(unknown)}")
    missing = [k for k in DOCUMENT_KEYS if k not in doc]
    if missing:
        raise ParseError(f"missing keys: {', '.join(missing)}")
    T = doc["horizon"]
    if not isinstance(T, int) or isinstance(T, bool) or T < 0:
        raise ParseError("horizon must be a nonnegative integer")

    spaces = {k: _parse_space(doc, k, T) for k in ("states", "actions1", "actions2", "obs1", "obs2")}
    w = _parse_dist_seq(doc, "w", T)
    v1 = _parse_dist_seq(doc, "v1", T + 1)
    v2 = _parse_dist_seq(doc, "v2", T + 1)
    x0 = _parse_dist(doc["x0"], "x0")
    spaces["w"] = tuple(d.labels for d in w)
    spaces["v1"] = tuple(d.labels for d in v1)
    spaces["v2"] = tuple(d.labels for d in v2)
    lookup = _Labels(spaces)

    x0_probs = [Fraction(0)] * len(spaces["states"][0])
    for lab, p in zip(x0.labels, x0.probs):
        i = lookup("states", 0, lab, "x0")
        if i is not None:
            x0_probs[i] += p

    def in_range(key, t, limit):
        if not 0 <= t < limit:
            lookup.violations.append(Violation(key, t, "time out of range"))
            return False
        return True

    transition = [dict() for _ in range(T)]
    for e in _entries(doc, "transition", ("t", "x", "u1", "u2", "w", "next")):
        t = e["t"]
        if not in_range("transition", t, T):
            continue
        k = (lookup("states", t, e["x"], "transition"), lookup("actions1", t, e["u1"], "transition"),
             lookup("actions2", t, e["u2"], "transition"), lookup("w", t, e["w"], "transition"))
        nxt = lookup("states", t + 1, e["next"], "transition")
        if None in k or nxt is None:
            continue
        if k in transition[t]:
            raise ParseError(f"transition: duplicate entry at t={t} for {e}")
        transition[t][k] = nxt

    obs_fns = []
    for agent in (1, 2):
        key = f"obs_fn{agent}"
        tables = [dict() for _ in range(T + 1)]
        for e in _entries(doc, key, ("t", "x", "v", "y")):
            t = e["t"]
            if not in_range(key, t, T + 1):
                continue
            k = (lookup("states", t, e["x"], key), lookup(f"v{agent}", t, e["v"], key))
            y = lookup(f"obs{agent}", t, e["y"], key)
            if None in k or y is None:
                continue
            if k in tables[t]:
                raise ParseError(f"{key}: duplicate entry at t={t} for {e}")
            tables[t][k] = y
        obs_fns.append(tuple(tables))

    cost = [dict() for _ in range(T + 1)]
    for e in _entries(doc, "cost", ("t", "x", "u1", "u2", "value")):
        t = e["t"]
        if not in_range("cost", t, T + 1):
            continue
        k = (lookup("states", t, e["x"], "cost"), lookup("actions1", t, e["u1"], "cost"),
             lookup("actions2", t, e["u2"], "cost"))
        if None in k:
            continue
        if k in cost[t]:
            raise ParseError(f"cost: duplicate entry at t={t} for {e}")
        cost[t][k] = parse_rational(e["value"])

    if lookup.violations:
        raise ValidationError(lookup.violations)

    m = TeamModel(
        horizon=T,
        states=spaces["states"], actions1=spaces["actions1"], actions2=spaces["actions2"],
        obs1=spaces["obs1"], obs2=spaces["obs2"],
        w=w, v1=v1, v2=v2, x0=tuple(x0_probs),
        transition=tuple(transition), obs_fn1=obs_fns[0], obs_fn2=obs_fns[1], cost=tuple(cost),
    )
    violations = validate_model(m)
    if violations:
        raise ValidationError(violations)
    return m


def load_model_file(path) -> TeamModel:
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read())


def _space_doc(seq):
    if all(s == seq[0] for s in seq):
        return list(seq[0])
    return [list(s) for s in seq]


def _dist_doc(d: Distribution):
    return [{"label": lab, "prob": fmt_rational(p)} for lab, p in zip(d.labels, d.probs)]


def serialize_model(m: TeamModel) -> str:
    """Canonical JSON document for ``m``; ``load_model`` inverts it."""
    T = m.horizon
    doc = {
        "horizon": T,
        "states": _space_doc(m.states),
        "actions1": _space_doc(m.actions1),
        "actions2": _space_doc(m.actions2),
        "obs1": _space_doc(m.obs1),
        "obs2": _space_doc(m.obs2),
        "w": [_dist_doc(d) for d in m.w],
        "v1": [_dist_doc(d) for d in m.v1],
        "v2": [_dist_doc(d) for d in m.v2],
        "x0": [{"label": lab, "prob": fmt_rational(p)} for lab, p in zip(m.states[0], m.x0)],
        "transition": [
            {"t": t, "x": m.states[t][x], "u1": m.actions1[t][a], "u2": m.actions2[t][b],
             "w": m.w[t].labels[w], "next": m.states[t + 1][m.transition[t][x, a, b, w]]}
            for t in range(T) for (x, a, b, w) in sorted(m.transition[t])
        ],
        "obs_fn1": [
            {"t": t, "x": m.states[t][x], "v": m.v1[t].labels[v], "y": m.obs1[t][m.obs_fn1[t][x, v]]}
            for t in range(T + 1) for (x, v) in sorted(m.obs_fn1[t])
        ],
        "obs_fn2": [
            {"t": t, "x": m.states[t][x], "v": m.v2[t].labels[v], "y": m.obs2[t][m.obs_fn2[t][x, v]]}
            for t in range(T + 1) for (x, v) in sorted(m.obs_fn2[t])
        ],
        "cost": [
            {"t": t, "x": m.states[t][x], "u1": m.actions1[t][a], "u2": m.actions2[t][b],
             "value": fmt_rational(m.cost[t][x, a, b])}
            for t in range(T + 1) for (x, a, b) in sorted(m.cost[t])
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def fingerprint(m: TeamModel) -> str:
    """Content hash of the canonical model document."""
    return "sha256:" + hashlib.sha256(serialize_model(m).encode("utf-8")).hexdigest()
