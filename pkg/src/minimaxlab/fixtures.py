"""Registry of example games with hand-derived gradients and Hessians."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .envelope import SmoothGameOracle, _stack, quadratic_oracle
from .quadratic_games import QuadraticGame


class UnknownFixture(KeyError):
    pass


@dataclass(frozen=True)
class Fixture:
    id: str
    oracle: SmoothGameOracle
    point: np.ndarray
    description: str
    game: QuadraticGame | None = None
    notes: dict = field(default_factory=dict)


def _o1(label, f, gx, gy, hxx, hxy, hyy):
    """1+1 dimensional oracle from scalar expressions in x, y."""
    return SmoothGameOracle(
        n=1, m=1,
        f=lambda x, y: f(x[..., 0], y[..., 0]),
        grad_x=lambda x, y: _stack(gx(x[..., 0], y[..., 0])),
        grad_y=lambda x, y: _stack(gy(x[..., 0], y[..., 0])),
        hess_xx=lambda x, y: np.array([[hxx(float(x[0]), float(y[0]))]]),
        hess_xy=lambda x, y: np.array([[hxy(float(x[0]), float(y[0]))]]),
        hess_yy=lambda x, y: np.array([[hyy(float(x[0]), float(y[0]))]]),
        label=label,
    )


def _counter_jin() -> SmoothGameOracle:
    def f(x, y):
        x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
        s = y1 + y2
        return -x2 ** 2 + x2 * y2 ** 3 - s ** 2 + 2 * x1 * s

    def gx(x, y):
        x2, y1, y2 = x[..., 1], y[..., 0], y[..., 1]
        s = y1 + y2
        return _stack(2 * s, -2 * x2 + y2 ** 3)

    def gy(x, y):
        x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
        s = y1 + y2
        return _stack(-2 * s + 2 * x1, 3 * x2 * y2 ** 2 - 2 * s + 2 * x1)

    return SmoothGameOracle(
        n=2, m=2, f=f, grad_x=gx, grad_y=gy,
        hess_xx=lambda x, y: np.array([[0.0, 0.0], [0.0, -2.0]]),
        hess_xy=lambda x, y: np.array([[2.0, 2.0], [0.0, 3 * y[1] ** 2]]),
        hess_yy=lambda x, y: np.array([[-2.0, -2.0], [-2.0, 6 * x[1] * y[1] - 2.0]]),
        label="counter_jin",
    )


def _quad(id_, A, B, C, desc) -> Fixture:
    A = np.atleast_2d(A)
    game = QuadraticGame.homogeneous(A, B, C)
    return Fixture(id_, quadratic_oracle(game, id_), np.zeros(game.n + game.m), desc, game)


def _build() -> dict[str, Fixture]:
    fx: dict[str, Fixture] = {}

    def add(fixture):
        fx[fixture.id] = fixture

    add(Fixture("rem_critical", _o1(
        "rem_critical",
        lambda x, y: -x ** 2 + x * y ** 3,
        lambda x, y: -2 * x + y ** 3,
        lambda x, y: 3 * x * y ** 2,
        lambda x, y: -2.0, lambda x, y: 3 * y ** 2, lambda x, y: 6 * x * y,
    ), np.zeros(2), "-x^2 + x y^3: envelope slope eps^3 in both directions"))

    add(Fixture("counter_jin", _counter_jin(), np.zeros(4),
                "-x2^2 + x2 y2^3 - (y1 + y2)^2 + 2 x1 (y1 + y2): critical directions have t2 = 0"))

    add(Fixture("rem_higher_order", _o1(
        "rem_higher_order",
        lambda x, y: -x ** 2 - y ** 4 + 4 * x * y ** 2,
        lambda x, y: -2 * x + 4 * y ** 2,
        lambda x, y: -4 * y ** 3 + 8 * x * y,
        lambda x, y: -2.0, lambda x, y: 8 * y, lambda x, y: -12 * y ** 2 + 8 * x,
    ), np.zeros(2), "-x^2 - y^4 + 4 x y^2: every direction critical, second-order term 6"))

    add(Fixture("kawa_suff", _o1(
        "kawa_suff",
        lambda x, y: x * y ** 3 - y ** 6,
        lambda x, y: y ** 3,
        lambda x, y: 3 * x * y ** 2 - 6 * y ** 5,
        lambda x, y: 0.0, lambda x, y: 3 * y ** 2, lambda x, y: 6 * x * y - 30 * y ** 4,
    ), np.zeros(2), "x y^3 - y^6: local minimax at the origin"))

    add(Fixture("stronger_suff_cond", _o1(
        "stronger_suff_cond",
        lambda x, y: x * y ** 2 + x ** 2,
        lambda x, y: y ** 2 + 2 * x,
        lambda x, y: 2 * x * y,
        lambda x, y: 2.0, lambda x, y: 2 * y, lambda x, y: 2 * x,
    ), np.zeros(2), "x y^2 + x^2: local minimax at the origin"))

    add(Fixture("lrp_eps0", _o1(
        "lrp_eps0",
        lambda x, y: x * y ** 3 - x ** 2 / (1 + y ** 2),
        lambda x, y: y ** 3 - 2 * x / (1 + y ** 2),
        lambda x, y: 3 * x * y ** 2 + 2 * x ** 2 * y / (1 + y ** 2) ** 2,
        lambda x, y: -2 / (1 + y ** 2),
        lambda x, y: 3 * y ** 2 + 4 * x * y / (1 + y ** 2) ** 2,
        lambda x, y: 6 * x * y + 2 * x ** 2 * (1 - 3 * y ** 2) / (1 + y ** 2) ** 3,
    ), np.zeros(2), "x y^3 - x^2/(1+y^2): robust point only with a zero radius on the y-side",
        notes={"x_radius": lambda e: 0.5 * e ** 3}))

    add(Fixture("glbstatl", _o1(
        "glbstatl",
        lambda x, y: x ** 3 * y,
        lambda x, y: 3 * x ** 2 * y,
        lambda x, y: x ** 3 + 0 * y,
        lambda x, y: 6 * x * y, lambda x, y: 3 * x ** 2, lambda x, y: 0.0,
    ), np.array([0.0, 1.0]), "x^3 y at (0, 1): the envelope decreases for x < 0"))

    add(Fixture("nc", _o1(
        "nc",
        lambda x, y: x ** 4 / 4 - x ** 2 / 2 + x * y,
        lambda x, y: x ** 3 - x + y,
        lambda x, y: x + 0 * y,
        lambda x, y: 3 * x ** 2 - 1, lambda x, y: 1.0, lambda x, y: 0.0,
    ), np.zeros(2), "x^4/4 - x^2/2 + x y: global minimax value 0, maximin value -1/4"))

    add(Fixture("stationary_global_no_local", _o1(
        "stationary_global_no_local",
        lambda x, y: -y ** 4 / 4 + y ** 2 / 2 - x * y,
        lambda x, y: -y + 0 * x,
        lambda x, y: -y ** 3 + y - x,
        lambda x, y: 0.0, lambda x, y: -1.0, lambda x, y: 1 - 3 * y ** 2,
    ), np.zeros(2), "-y^4/4 + y^2/2 - x y: stationary, not local minimax"))

    add(Fixture("local_non_global", _o1(
        "local_non_global",
        lambda x, y: x ** 3 - x - y ** 2,
        lambda x, y: 3 * x ** 2 - 1 + 0 * y,
        lambda x, y: -2 * y + 0 * x,
        lambda x, y: 6 * x, lambda x, y: 0.0, lambda x, y: -2.0,
    ), np.array([1 / np.sqrt(3), 0.0]), "x^3 - x - y^2: local but not global minimax"))

    add(_quad("glp", -2.0, 2.0, 1.0, "-x^2 + x y + y^2: robust point, neither minimax nor maximin"))
    add(_quad("onedq", -2.0, -2.0, 2.0, "-x^2 - y^2 + 2 x y: global minimax only"))
    add(_quad("bilinear", 0.0, 0.0, 1.0, "x y: unique saddle at the origin"))
    add(_quad("no_local_saddle", -2.0, 0.0, 1.0, "-x^2 + x y: minimax but not a local saddle"))
    add(_quad("failure_lrp", np.diag([-2.0, 0.0]), np.diag([0.0, 2.0]), np.eye(2),
              "-x1^2 + x1 y1 + x2 y2 + y2^2: robust point unreachable by OGD"))
    add(_quad("separable", -2.0, 2.0, 0.0, "-x^2 + y^2: stationary but no robust point"))
    return fx


REGISTRY: dict[str, Fixture] = _build()


def get(fixture_id: str) -> Fixture:
    try:
        return REGISTRY[fixture_id]
    except KeyError:
        raise UnknownFixture(fixture_id) from None
