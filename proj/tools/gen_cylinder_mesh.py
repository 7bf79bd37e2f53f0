#!/usr/bin/env python3
"""Generate the TRIMESH file for the channel-with-cylinder benchmark.

Channel (0, 2.2) x (0, 0.41), cylinder of radius 0.05 centered at
(0.2, 0.2). Boundary points are fixed (the cylinder as a regular polygon),
interior points are relaxed with the Persson-Strang spring method against a
size function that grows linearly away from the cylinder, and the final
Delaunay triangulation is written with tags wall / inflow / outflow /
obstacle.

    tools/gen_cylinder_mesh.py data/cylinder_coarse.trimesh
"""
import argparse
import sys

import numpy as np
from scipy.spatial import Delaunay

L, H = 2.2, 0.41
CX, CY, R = 0.2, 0.2, 0.05


def dist_circle(p):
    return np.hypot(p[:, 0] - CX, p[:, 1] - CY) - R


def signed_distance(p):
    # Negative inside the fluid domain.
    d_rect = -np.minimum.reduce([p[:, 0], L - p[:, 0], p[:, 1], H - p[:, 1]])
    return np.maximum(d_rect, -dist_circle(p))


def sizing(p, h_min, h_max, grade):
    return np.minimum(h_min + grade * np.maximum(dist_circle(p), 0.0), h_max)


def boundary_points(n_circle, h_min, h_max, grade):
    t = 2 * np.pi * np.arange(n_circle) / n_circle
    circle = np.column_stack([CX + R * np.cos(t), CY + R * np.sin(t)])

    def walk(a, b):
        # Points from a to b (excluding b) equidistributing the integral of 1/h.
        a, b = np.asarray(a, float), np.asarray(b, float)
        t = np.linspace(0.0, 1.0, 2001)
        h = sizing(a + np.outer(t, b - a), h_min, h_max, grade)
        density = np.linalg.norm(b - a) / h
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(t))])
        n = max(1, int(round(cum[-1])))
        ts = np.interp(np.linspace(0.0, cum[-1], n, endpoint=False), cum, t)
        return a + np.outer(ts, b - a)

    corners = [(0, 0), (L, 0), (L, H), (0, H)]
    rect = np.vstack([walk(corners[i], corners[(i + 1) % 4]) for i in range(4)])
    return rect, circle


def relax(fixed, h_min, h_max, grade, iters, rng):
    # Initial interior points: jittered grid thinned by the size function.
    step = h_min
    xs, ys = np.meshgrid(np.arange(step / 2, L, step), np.arange(step / 2, H, step * np.sqrt(3) / 2))
    xs[1::2] += step / 2
    p = np.column_stack([xs.ravel(), ys.ravel()])
    h = sizing(p, h_min, h_max, grade)
    p = p[(signed_distance(p) < -0.5 * h) & (rng.random(len(p)) < (h_min / h) ** 2)]
    nf = len(fixed)
    pts = np.vstack([fixed, p])

    for _ in range(iters):
        tri = Delaunay(pts).simplices
        cen = pts[tri].mean(axis=1)
        tri = tri[signed_distance(cen) < 0]
        bars = np.unique(np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1), axis=0)
        vec = pts[bars[:, 0]] - pts[bars[:, 1]]
        length = np.hypot(vec[:, 0], vec[:, 1])
        hb = sizing((pts[bars[:, 0]] + pts[bars[:, 1]]) / 2, h_min, h_max, grade)
        l0 = hb * 1.2 * np.sqrt((length**2).sum() / (hb**2).sum())
        force = np.maximum(l0 - length, 0) / length
        fvec = force[:, None] * vec
        move = np.zeros_like(pts)
        np.add.at(move, bars[:, 0], fvec)
        np.add.at(move, bars[:, 1], -fvec)
        move[:nf] = 0
        pts = pts + 0.2 * move
        # Keep interior points off the boundary.
        interior = pts[nf:]
        hi = sizing(interior, h_min, h_max, grade)
        bad = signed_distance(interior) > -0.4 * hi
        interior = interior[~bad]
        pts = np.vstack([fixed, interior])
    return pts


def triangulate(pts):
    tri = Delaunay(pts).simplices
    tri = tri[signed_distance(pts[tri].mean(axis=1)) < 0]
    a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    area2 = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    tri[area2 < 0] = tri[area2 < 0][:, [0, 2, 1]]
    used = np.unique(tri)
    remap = -np.ones(len(pts), dtype=int)
    remap[used] = np.arange(len(used))
    return pts[used], remap[tri]


def boundary_edges(pts, tri):
    edges = np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    key = np.sort(edges, axis=1)
    _, inv, count = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    out = []
    for (a, b) in edges[count[inv.ravel()] == 1]:
        pa, pb = pts[a], pts[b]
        if pa[0] == 0 and pb[0] == 0:
            tag = "inflow"
        elif pa[0] == L and pb[0] == L:
            tag = "outflow"
        elif (pa[1] == 0 and pb[1] == 0) or (pa[1] == H and pb[1] == H):
            tag = "wall"
        elif abs(np.hypot(*(pa - (CX, CY))) - R) < 1e-12 and abs(np.hypot(*(pb - (CX, CY))) - R) < 1e-12:
            tag = "obstacle"
        else:
            sys.exit(f"boundary edge {pa} - {pb} lies on no boundary part")
        out.append((a, b, tag))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("out")
    ap.add_argument("--n-circle", type=int, default=96, help="polygon vertices on the cylinder")
    ap.add_argument("--h-max", type=float, default=0.0175)
    ap.add_argument("--grade", type=float, default=0.12, help="size growth per unit distance from the cylinder")
    ap.add_argument("--iters", type=int, default=80)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    h_min = 2 * np.pi * R / args.n_circle
    rng = np.random.default_rng(args.seed)
    rect, circle = boundary_points(args.n_circle, h_min, args.h_max, args.grade)
    pts = relax(np.vstack([rect, circle]), h_min, args.h_max, args.grade, args.iters, rng)
    pts, tri = triangulate(pts)
    bnd = boundary_edges(pts, tri)

    n_edges = len(np.unique(np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1), axis=0))
    a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    ang = []
    for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
        e1, e2 = v - u, w - u
        cosang = (e1 * e2).sum(1) / np.hypot(*e1.T) / np.hypot(*e2.T)
        ang.append(np.degrees(np.arccos(np.clip(cosang, -1, 1))))
    tags = {t: sum(1 for e in bnd if e[2] == t) for t in ("wall", "inflow", "outflow", "obstacle")}
    print(f"{len(pts)} vertices, {len(tri)} cells, {2 * (len(pts) + n_edges)} velocity dofs, "
          f"min angle {np.min(ang):.1f} deg, boundary {tags}", file=sys.stderr)

    with open(args.out, "w") as f:
        f.write(f"# channel with cylinder, generated by tools/gen_cylinder_mesh.py "
                f"--n-circle {args.n_circle} --h-max {args.h_max} --grade {args.grade} "
                f"--iters {args.iters} --seed {args.seed}\n")
        f.write(f"trimesh 2\n{len(pts)} {len(tri)} {len(bnd)}\n")
        for x, y in pts:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        for t in tri:
            f.write(f"{t[0]} {t[1]} {t[2]}\n")
        for a_, b_, tag in bnd:
            f.write(f"{a_} {b_} {tag}\n")


if __name__ == "__main__":
    main()
