"""Classical single-layer kinetic Saint-Venant scheme with hydrostatic reconstruction.

Test-only reference written cell by cell in plain Python. Half-fluxes are
integrated in ``s = xi - u`` with the antiderivatives of ``s^k sqrt(R^2 - s^2)``
(``R^2 = 2 g h``), so the code shares nothing with the package's moment
routines beyond the physics.
"""

from __future__ import annotations

import math


def _prims(s, r):
    # antiderivatives of s^k sqrt(r^2 - s^2), k = 0, 1, 2, at s clipped to [-r, r]
    s = min(max(s, -r), r)
    root = math.sqrt(max(r * r - s * s, 0.0))
    asin = math.asin(max(-1.0, min(1.0, s / r)))
    p0 = 0.5 * (s * root + r * r * asin)
    p1 = -(root**3) / 3.0
    p2 = (s * (2.0 * s * s - r * r) * root + r**4 * asin) / 8.0
    return p0, p1, p2


def half_flux(h, u, g, positive):
    """``(int xi M, int xi^2 M)`` over ``xi > 0`` (``positive``) or ``xi < 0``."""
    if h <= 0.0:
        return 0.0, 0.0
    r = math.sqrt(2.0 * g * h)
    lo, hi = (-u, r) if positive else (-r, -u)
    if lo >= hi:
        return 0.0, 0.0
    a0, a1, a2 = _prims(lo, r)
    b0, b1, b2 = _prims(hi, r)
    i0, i1, i2 = b0 - a0, b1 - a1, b2 - a2
    scale = 1.0 / (g * math.pi)
    fh = scale * (u * i0 + i1)
    fq = scale * (u * u * i0 + 2.0 * u * i1 + i2)
    if positive:
        return max(fh, 0.0), max(fq, 0.0)
    return min(fh, 0.0), max(fq, 0.0)


class ClassicalSV:
    """State ``(h, q)`` as Python lists on a uniform grid; ``boundary`` is periodic or reflective."""

    def __init__(self, h, q, z, dx, g=9.81, beta=0.9, dry_tol=1e-10, boundary="reflective"):
        self.h = [float(v) for v in h]
        self.q = [float(v) for v in q]
        self.z = [float(v) for v in z]
        self.dx = float(dx)
        self.g, self.beta, self.dry_tol = g, beta, dry_tol
        self.boundary = boundary
        self.time = 0.0

    def _u(self, k):
        return self.q[k] / self.h[k] if self.h[k] > self.dry_tol else 0.0

    def dt(self):
        best = math.inf
        for k in range(len(self.h)):
            u = abs(self._u(k))
            a = math.sqrt(2.0 * self.g * self.h[k])
            if u + a > 0:
                best = min(best, 0.5 * self.dx / (u + a), self.dx / (u + 2.0 * a))
        return self.beta * best

    def _cell(self, k):
        n = len(self.h)
        if 0 <= k < n:
            return self.h[k], self._u(k), self.z[k]
        if self.boundary == "periodic":
            k %= n
            return self.h[k], self._u(k), self.z[k]
        k = 0 if k < 0 else n - 1
        return self.h[k], -self._u(k), self.z[k]

    def _edge(self, k):
        # edge between cells k and k + 1: mass flux and momentum flux seen from each side
        hl, ul, zl = self._cell(k)
        hr, ur, zr = self._cell(k + 1)
        zs = max(zl, zr)
        hls = max(hl + zl - zs, 0.0)
        hrs = max(hr + zr - zs, 0.0)
        fh_p, fq_p = half_flux(hls, ul, self.g, True)
        fh_m, fq_m = half_flux(hrs, ur, self.g, False)
        fh, fq = fh_p + fh_m, fq_p + fq_m
        left = fq + 0.5 * self.g * (hl * hl - hls * hls)
        right = fq + 0.5 * self.g * (hr * hr - hrs * hrs)
        return fh, left, right

    def step(self):
        dt = self.dt()
        n = len(self.h)
        edges = [self._edge(k) for k in range(-1, n)]
        sigma = dt / self.dx
        h_new, q_new = [], []
        for i in range(n):
            fh_l, _, fq_from_left = edges[i]
            fh_r, fq_to_right, _ = edges[i + 1]
            hi = self.h[i] - sigma * (fh_r - fh_l)
            qi = self.q[i] - sigma * (fq_to_right - fq_from_left)
            h_new.append(hi)
            q_new.append(qi if hi > self.dry_tol else 0.0)
        self.h, self.q = h_new, q_new
        self.time += dt
        return dt
