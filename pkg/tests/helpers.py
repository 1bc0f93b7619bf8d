"""Reference data and independent oracles shared by the test modules."""

import functools
import math
import random

import numpy as np

from r5curve import expr, load_fixture
from r5curve.linalg import norm, quad_product
from r5curve.tracer import TraceConfig, trace, trace_around

SQ2 = math.sqrt(2.0)
SQ6 = math.sqrt(6.0)
SQ91 = math.sqrt(91.0)

# worked example, printed values
EX_POINT = np.array([0.5, 0.5, SQ2 / 2, 1.0, 0.5])
EX_NORMALS = np.array([
    [1 / SQ6, 1 / SQ6, 0, 0, -math.sqrt(2 / 3)],
    [-1 / (2 * SQ2), -1 / (2 * SQ2), -0.5, 1 / SQ2, 0],
    [-2 / 3, 0, 0, 1 / 3, -2 / 3],
    [0, 1, 0, 0, 0],
])
EX_TANGENT = np.array([-2 / SQ91, 0, -5 * math.sqrt(2 / 91), -6 / SQ91, -1 / SQ91])
# non-vanishing first fundamental coefficients of all four surfaces
EX_FIRST_FORMS = [
    {(1, 1): 0.5, (2, 2): 1.0, (3, 3): 2.25, (4, 4): 1.0, (1, 2): 0.5, (2, 3): -0.5, (3, 4): -1.0},
    {(1, 1): 0.5, (2, 2): 1.25, (3, 3): 2.0, (4, 4): 0.25, (2, 4): 0.25},
    {(1, 1): 1.25, (2, 2): 0.75, (3, 3): 1.5, (4, 4): 0.5, (1, 2): 0.25, (1, 4): 0.5, (2, 3): -0.5},
    {(1, 1): 0.25, (2, 2): 1.0, (3, 3): 1.0, (4, 4): 0.25},
]
EX_UPRIME = np.array([
    [-0.628971, 0.838628, -0.209657, -0.838628],
    [0.209657, -0.419314, -0.628971, 0.628971],
    [0.209657, -0.419314, -0.628971, -1.25794],
    [0.419314, -0.741249, -0.628971, -0.209651],
])
# kn^3 printed as 0.117216 is inconsistent with the printed h^3 and u'^3;
# 0.351648 is what the second fundamental form actually gives
KN_EXPECTED = np.array([-0.879304, 0.139867, 0.351648, -0.0879121])
EX_KAPPA = [1.25679, 1.68888, 7.07463, -1.55521]


def full_matrix(coeffs):
    G = np.zeros((4, 4))
    for (i, j), v in coeffs.items():
        G[i - 1, j - 1] = G[j - 1, i - 1] = v
    return G


# --- shared traces -----------------------------------------------------------

# the worked-example curve folds about 0.39 behind p (one surface wraps at
# u4 = 0), so the 2001-point oracle trace is taken off-centre
EX_BACK, EX_FORWARD = 300, 1700


@functools.lru_cache(maxsize=None)
def example_trace(h=1e-3):
    sc = load_fixture("worked_example")
    return trace_around(sc.surfaces, sc.start(), TraceConfig(h=h), EX_BACK, EX_FORWARD)


@functools.lru_cache(maxsize=None)
def circle_loop(h=1e-3):
    sc = load_fixture("circle")
    return trace(sc.surfaces, sc.start(), TraceConfig(h=h, steps=round(2 * math.pi / h)))


# --- random expressions ------------------------------------------------------


def random_expression(rng: random.Random, depth=3) -> str:
    """Random component expression that is smooth and finite on [-1, 1]^4."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.75:
            return f"u{rng.randint(1, 4)}"
        return f"{rng.uniform(0.5, 3.0):.3f}"
    a = random_expression(rng, depth - 1)
    b = random_expression(rng, depth - 1)
    forms = [
        "({a})+({b})",
        "({a})-({b})",
        "({a})*({b})",
        "sin({a})",
        "cos({a})",
        "exp(sin({a}))",
        "sqrt(1+({a})^2)",
        "({a})/(2+cos({b}))",
        "ln(2+sin({a}))",
        "({a})^3",
        "tan(sin({a})/2)",
        "(2+sin({a}))^(cos({b}))",
        "-({a})",
    ]
    return rng.choice(forms).format(a=a, b=b)


def central_difference(f, p, k, h=1e-5):
    p = np.array(p, dtype=float)
    e = np.zeros(4)
    e[k - 1] = h
    return (f(p + e) - f(p - e)) / (2 * h)


def diff_vs_fd_case(rng: random.Random):
    """One differentiation check: returns (text, point, k, symbolic, fd)."""
    text = random_expression(rng)
    node = expr.parse(text)
    p = [rng.uniform(-1, 1) for _ in range(4)]
    k = rng.randint(1, 4)
    sym = expr.evaluate(expr.differentiate(node, k), p)
    fd = central_difference(lambda q: expr.evaluate(node, q), p, k)
    return text, p, k, sym, fd


def diff_fd_agrees(sym, fd, rel=1e-5):
    return abs(sym - fd) <= rel * max(1.0, abs(sym))


# --- ruled helix: the direct curve oracle ------------------------------------

HELIX_SPEED = math.sqrt(6.0)  # |gamma'(theta)|


def helix_derivative(theta, k):
    """k-th theta-derivative of gamma(theta) = (cos, sin, cos 2., sin 2., theta)."""
    ph = k * math.pi / 2
    last = theta if k == 0 else (1.0 if k == 1 else 0.0)
    return np.array([
        math.cos(theta + ph),
        math.sin(theta + ph),
        2**k * math.cos(2 * theta + ph),
        2**k * math.sin(2 * theta + ph),
        last,
    ])


def helix_frenet(theta):
    """Frenet frame and curvatures straight from the curve's derivatives.

    Arc-length derivatives are theta-derivatives divided by |gamma'|^k since
    the speed is constant; the frame uses quadruple products of them.
    """
    a = [helix_derivative(theta, k) / HELIX_SPEED**k for k in range(1, 6)]
    a1, a2, a3, a4, a5 = a
    t = a1 / norm(a1)
    n = a2 / norm(a2)
    w = quad_product(a1, a2, a3, a4)
    b3 = w / norm(w)
    w = quad_product(b3, a1, a2, a3)
    b2 = w / norm(w)
    w = quad_product(b2, b3, a1, a2)
    b1 = w / norm(w)
    k1 = norm(a2)
    k2 = (a3 @ b1) / k1
    k3 = (a4 @ b2) / (k1 * k2)
    k4 = (a5 @ b3) / (k1 * k2 * k3)
    return (t, n, b1, b2, b3), (k1, k2, k3, k4)


def helix_curvatures_qr(theta):
    """Second, quad-product-free route: the R factor of [a1..a5] holds the
    running products of curvatures on its diagonal."""
    A = np.column_stack([helix_derivative(theta, k) / HELIX_SPEED**k for k in range(1, 6)])
    _, R = np.linalg.qr(A)
    d = np.abs(np.diag(R))
    return d[1], d[2] / d[1], d[3] / d[2], d[4] / d[3]


# --- acceptance bookkeeping --------------------------------------------------

ACCEPTANCE = {}  # criterion number -> report line


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    return line
