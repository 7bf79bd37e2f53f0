#!/usr/bin/env python3
"""Generate include/emacfem/detail/quadrature_tables.hpp.

Triangle rules for degree >= 3 are Stroud conical products (Gauss-Jacobi in
the collapsed direction, Gauss-Legendre along the fiber). Nodes are polished
with mpmath at 60 digits and printed with 17 significant digits.
"""
import sys

import mpmath as mp
import numpy as np
from scipy.special import roots_jacobi, roots_legendre

mp.mp.dps = 60


def jacobi(n, a, b, x):
    # Three-term recurrence; stays well-defined at exact roots.
    p0, p1 = mp.mpf(1), (a - b) / mp.mpf(2) + (a + b + 2) * x / 2
    if n == 0:
        return p0
    for k in range(2, n + 1):
        c = 2 * k + a + b
        a1 = 2 * k * (k + a + b) * (c - 2)
        a2 = (c - 1) * (a * a - b * b)
        a3 = (c - 2) * (c - 1) * c
        a4 = 2 * (k + a - 1) * (k + b - 1) * c
        p0, p1 = p1, ((a2 + a3 * x) * p1 - a4 * p0) / a1
    return p1


def polish_jacobi(n, alpha, beta, guess):
    # Roots of P_n^(alpha,beta) on [-1,1]; weights from the Christoffel formula
    # via the moment system so nothing depends on scipy's accuracy.
    nodes = [mp.findroot(lambda x: jacobi(n, alpha, beta, x), mp.mpf(g)) for g in guess]
    moments = [mp.quad(lambda x: (1 - x) ** alpha * (1 + x) ** beta * x ** k, [-1, 1]) for k in range(n)]
    vander = mp.matrix([[x ** k for x in nodes] for k in range(n)])
    weights = mp.lu_solve(vander, mp.matrix(moments))
    return nodes, [weights[i] for i in range(n)]


def legendre_01(n):
    g, _ = roots_legendre(n)
    x, w = polish_jacobi(n, 0, 0, g)
    return [(xi + 1) / 2 for xi in x], [wi / 2 for wi in w]


def conical(n):
    # int_T f = int_0^1 int_0^1 f(s, t(1-s)) (1-s) dt ds, s from Gauss-Jacobi(1,0).
    g, _ = roots_jacobi(n, 1, 0)
    xs, ws = polish_jacobi(n, 1, 0, g)
    s = [(x + 1) / 2 for x in xs]
    sw = [w / 4 for w in ws]
    t, tw = legendre_01(n)
    pts = []
    for si, swi in zip(s, sw):
        for ti, twi in zip(t, tw):
            pts.append((si, ti * (1 - si), swi * twi))
    return pts


def fmt(v):
    return "{:.17g}".format(float(v))


def main(path):
    out = []
    out.append("// Generated by tools/gen_quadrature.py; do not edit by hand.")
    out.append("#pragma once\n")
    out.append("#include <array>\n")
    out.append("namespace emacfem::detail {\n")
    out.append("struct TableNode {\n  double xi;\n  double eta;\n  double weight;\n};\n")
    out.append("struct LineNode {\n  double s;\n  double weight;\n};\n")
    for n in range(2, 7):
        pts = conical(n)
        out.append(f"inline constexpr std::array<TableNode, {len(pts)}> kConical{n}{{{{")
        for xi, eta, w in pts:
            out.append(f"    {{{fmt(xi)}, {fmt(eta)}, {fmt(w)}}},")
        out.append("}};\n")
    for n in range(1, 7):
        x, w = legendre_01(n)
        out.append(f"inline constexpr std::array<LineNode, {n}> kGauss{n}{{{{")
        for xi, wi in zip(x, w):
            out.append(f"    {{{fmt(xi)}, {fmt(wi)}}},")
        out.append("}};\n")
    out.append("}  // namespace emacfem::detail")
    with open(path, "w") as f:
        f.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "include/emacfem/detail/quadrature_tables.hpp")
