"""Numba kernels for the sequential sweeps.

Lexicographic Gauss-Seidel updates cannot be vectorized without changing
the iterate sequence, so the inner loops live here. The residual formulas
mirror operators.py association-for-association so defects computed in the
kernels agree bitwise with the vectorized residuals.

side convention: +1 clamps from below (w >= obstacle), -1 from above.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def psor_sweep_1d(w, phi, src, h2, omega):
    """One lexicographic projected SOR sweep for p=2; returns sup update."""
    sup = 0.0
    for i in range(1, w.shape[0] - 1):
        target = 0.5 * (w[i - 1] + w[i + 1]) - 0.5 * src[i] * h2
        new = w[i] + omega * (target - w[i])
        if new < phi[i]:
            new = phi[i]
        d = abs(new - w[i])
        if d > sup:
            sup = d
        w[i] = new
    return sup


@njit(cache=True)
def psor_sweep_2d(w, phi, src, h2, omega):
    n = w.shape[0]
    sup = 0.0
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            s = w[i - 1, j] + w[i + 1, j] + w[i, j - 1] + w[i, j + 1]
            target = 0.25 * s - 0.25 * src[i, j] * h2
            new = w[i, j] + omega * (target - w[i, j])
            if new < phi[i, j]:
                new = phi[i, j]
            d = abs(new - w[i, j])
            if d > sup:
                sup = d
            w[i, j] = new
    return sup


@njit(cache=True)
def defect_p2_1d(w, phi, src, h2):
    """Sup-norm and signed worst of min(residual, gap) over interior nodes."""
    worst = 0.0
    signed = 0.0
    node = -1
    for i in range(1, w.shape[0] - 1):
        c = w[i]
        core = (w[i + 1] - c) - (c - w[i - 1])
        res = (-core) / h2 + src[i]
        gap = c - phi[i]
        d = res if res < gap else gap
        a = abs(d)
        if a > worst:
            worst = a
            signed = d
            node = i
    return worst, signed, node


@njit(cache=True)
def defect_p2_2d(w, phi, src, h2):
    n = w.shape[0]
    worst = 0.0
    signed = 0.0
    node = -1
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            c = w[i, j]
            core = ((w[i + 1, j] - c) - (c - w[i - 1, j])) + (
                (w[i, j + 1] - c) - (c - w[i, j - 1])
            )
            res = (-core) / h2 + src[i, j]
            gap = c - phi[i, j]
            d = res if res < gap else gap
            a = abs(d)
            if a > worst:
                worst = a
                signed = d
                node = i * n + j
    return worst, signed, node


@njit(cache=True)
def psor_solve_1d(w, phi, src, h2, omega, tol, max_sweeps):
    sweeps = 0
    worst, signed, node = defect_p2_1d(w, phi, src, h2)
    while worst > tol and sweeps < max_sweeps:
        psor_sweep_1d(w, phi, src, h2, omega)
        sweeps += 1
        worst, signed, node = defect_p2_1d(w, phi, src, h2)
    return sweeps, worst, signed, node


@njit(cache=True)
def psor_solve_2d(w, phi, src, h2, omega, tol, max_sweeps):
    sweeps = 0
    worst, signed, node = defect_p2_2d(w, phi, src, h2)
    while worst > tol and sweeps < max_sweeps:
        psor_sweep_2d(w, phi, src, h2, omega)
        sweeps += 1
        worst, signed, node = defect_p2_2d(w, phi, src, h2)
    return sweeps, worst, signed, node


@njit(cache=True)
def visc_sweep_1d(w, obst, src, h2, alpha, beta, damping, side):
    """One Gauss-Seidel sweep of the local solver with nodewise clamping."""
    denom = 2.0 * beta + 2.0 * alpha
    sup = 0.0
    for i in range(1, w.shape[0] - 1):
        a = w[i - 1]
        b = w[i + 1]
        mx = a if a > b else b
        mn = a if a < b else b
        target = (beta * (a + b) + alpha * (mx + mn) - src[i] * h2) / denom
        new = w[i] + damping * (target - w[i])
        if side > 0:
            if new < obst[i]:
                new = obst[i]
        else:
            if new > obst[i]:
                new = obst[i]
        d = abs(new - w[i])
        if d > sup:
            sup = d
        w[i] = new
    return sup


@njit(cache=True)
def visc_sweep_2d(w, obst, src, h2, alpha, beta, damping, side):
    n = w.shape[0]
    denom = 4.0 * beta + 2.0 * alpha
    sup = 0.0
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            s = w[i - 1, j] + w[i + 1, j] + w[i, j - 1] + w[i, j + 1]
            mx = w[i - 1, j]
            mn = w[i - 1, j]
            for di in range(-1, 2):
                for dj in range(-1, 2):
                    if di == 0 and dj == 0:
                        continue
                    v = w[i + di, j + dj]
                    if v > mx:
                        mx = v
                    if v < mn:
                        mn = v
            target = (beta * s + alpha * (mx + mn) - src[i, j] * h2) / denom
            new = w[i, j] + damping * (target - w[i, j])
            if side > 0:
                if new < obst[i, j]:
                    new = obst[i, j]
            else:
                if new > obst[i, j]:
                    new = obst[i, j]
            d = abs(new - w[i, j])
            if d > sup:
                sup = d
            w[i, j] = new
    return sup


@njit(cache=True)
def visc_defect_1d(w, obst, src, h2, alpha, beta, side):
    worst = 0.0
    signed = 0.0
    node = -1
    for i in range(1, w.shape[0] - 1):
        c = w[i]
        a = w[i - 1]
        b = w[i + 1]
        mx = a if a > b else b
        mn = a if a < b else b
        lap = ((b - c) - (c - a)) / h2
        infl = ((mx - c) + (mn - c)) / h2
        res = -(beta * lap) - (alpha * infl) + src[i]
        if side > 0:
            gap = c - obst[i]
            d = res if res < gap else gap
        else:
            neg = c - obst[i]
            d = res if res > neg else neg
        av = abs(d)
        if av > worst:
            worst = av
            signed = d
            node = i
    return worst, signed, node


@njit(cache=True)
def visc_defect_2d(w, obst, src, h2, alpha, beta, side):
    n = w.shape[0]
    worst = 0.0
    signed = 0.0
    node = -1
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            c = w[i, j]
            mx = w[i - 1, j]
            mn = w[i - 1, j]
            for di in range(-1, 2):
                for dj in range(-1, 2):
                    if di == 0 and dj == 0:
                        continue
                    v = w[i + di, j + dj]
                    if v > mx:
                        mx = v
                    if v < mn:
                        mn = v
            core = ((w[i + 1, j] - c) - (c - w[i - 1, j])) + (
                (w[i, j + 1] - c) - (c - w[i, j - 1])
            )
            lap = core / h2
            infl = ((mx - c) + (mn - c)) / h2
            res = -(beta * lap) - (alpha * infl) + src[i, j]
            if side > 0:
                gap = c - obst[i, j]
                d = res if res < gap else gap
            else:
                neg = c - obst[i, j]
                d = res if res > neg else neg
            av = abs(d)
            if av > worst:
                worst = av
                signed = d
                node = i * n + j
    return worst, signed, node


@njit(cache=True)
def visc_solve_1d(w, obst, src, h2, alpha, beta, damping, side, tol, max_sweeps):
    sweeps = 0
    sup = tol + 1.0
    worst, signed, node = visc_defect_1d(w, obst, src, h2, alpha, beta, side)
    while (sup >= tol or worst > tol) and sweeps < max_sweeps:
        sup = visc_sweep_1d(w, obst, src, h2, alpha, beta, damping, side)
        sweeps += 1
        worst, signed, node = visc_defect_1d(w, obst, src, h2, alpha, beta, side)
    return sweeps, worst, signed, node, sup


@njit(cache=True)
def visc_solve_2d(w, obst, src, h2, alpha, beta, damping, side, tol, max_sweeps):
    sweeps = 0
    sup = tol + 1.0
    worst, signed, node = visc_defect_2d(w, obst, src, h2, alpha, beta, side)
    while (sup >= tol or worst > tol) and sweeps < max_sweeps:
        sup = visc_sweep_2d(w, obst, src, h2, alpha, beta, damping, side)
        sweeps += 1
        worst, signed, node = visc_defect_2d(w, obst, src, h2, alpha, beta, side)
    return sweeps, worst, signed, node, sup


def warmup():
    """Compile all kernels on tiny arrays (cache-backed, cheap after first run)."""
    w1 = np.zeros(5)
    p1 = np.full(5, -1.0e9)
    s1 = np.zeros(5)
    psor_solve_1d(w1.copy(), p1, s1, 0.0625, 1.5, 1e-12, 50)
    psor_sweep_1d(w1.copy(), p1, s1, 0.0625, 1.5)
    visc_solve_1d(w1.copy(), p1, s1, 0.0625, 0.5, 0.5, 1.0, 1, 1e-12, 50)
    w2 = np.zeros((5, 5))
    p2 = np.full((5, 5), -1.0e9)
    s2 = np.zeros((5, 5))
    psor_solve_2d(w2.copy(), p2, s2, 0.0625, 1.5, 1e-12, 50)
    psor_sweep_2d(w2.copy(), p2, s2, 0.0625, 1.5)
    visc_solve_2d(w2.copy(), p2, s2, 0.0625, 0.5, 0.5, 1.0, 1, 1e-12, 50)
