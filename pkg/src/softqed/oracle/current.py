"""Classical current of a closed polygonal loop and the mass-shell pairing.

J_mu(L, k) = integral over L of dx_mu exp(i k.x), with the Minkowski product
k.x = k0 x0 - k.x.  The pairing integrates over the forward photon mass shell,
d^4k/(2pi)^4 2pi theta(k0) delta(k^2) -> omega d omega dOmega / (2 (2pi)^3).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import QuadratureError

METRIC = np.array([1.0, -1.0, -1.0, -1.0])


def mdot(a, b):
    """Minkowski product over the last axis."""
    return np.sum(np.asarray(a) * np.asarray(b) * METRIC, axis=-1)


@dataclass
class LoopPolygon:
    vertices: tuple

    def __post_init__(self):
        self.vertices = tuple(np.asarray(v, dtype=float) for v in self.vertices)

    def segments(self):
        vs = self.vertices
        return [(vs[i], vs[(i + 1) % len(vs)] - vs[i]) for i in range(len(vs))]

    def closure(self):
        return sum(w for _, w in self.segments())


def _segment_factor(kw, small=1e-8):
    """(e^{i kw} - 1)/(i kw) with its series near kw = 0."""
    kw = np.asarray(kw, dtype=float)
    out = np.empty(kw.shape, dtype=complex)
    tiny = np.abs(kw) < small
    z = 1j * kw[~tiny]
    out[~tiny] = np.expm1(z) / z
    zt = 1j * kw[tiny]
    out[tiny] = 1 + zt / 2 + zt * zt / 6
    return out


def loop_current(L: LoopPolygon, k):
    """J_mu (contravariant components) for one momentum or an (..., 4) array."""
    k = np.asarray(k, dtype=float)
    J = np.zeros(k.shape, dtype=complex)
    for a, w in L.segments():
        ka = mdot(k, a)
        kw = mdot(k, w)
        f = np.exp(1j * ka) * _segment_factor(kw)
        J = J + f[..., None] * w
    return J


def _sphere_rule(n_theta, n_phi):
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    phi = (np.arange(n_phi) + 0.5) * 2 * math.pi / n_phi
    ct, ph = np.meshgrid(x, phi, indexing="ij")
    st = np.sqrt(1 - ct ** 2)
    dirs = np.stack([np.ones_like(ct), st * np.cos(ph), st * np.sin(ph), ct], axis=-1)
    weights = np.outer(wx, np.full(n_phi, 2 * math.pi / n_phi))
    return dirs.reshape(-1, 4), weights.reshape(-1)


def regulated_pairing(a_fn, b_fn, r_min, r_max, n_radial=160, n_theta=48, n_phi=64,
                      divergent=False):
    """<a.b> over the forward mass shell with r_min <= k0 <= r_max.

    The first slot is complex conjugated, so regulated_pairing(J, J) is the
    <J*.J> of the classical current.  a_fn, b_fn map an (N, 4) array of
    light-like momenta to (N, 4) contravariant components.  ``divergent``
    marks integrands known to diverge at small k0, for which r_min = 0 is
    refused.
    """
    if r_min < 0 or r_max <= r_min:
        raise ValueError("need 0 <= r_min < r_max")
    if r_min == 0:
        if divergent:
            raise QuadratureError("r_min = 0 requested for an infrared-divergent pairing")
        r_min = 1e-12 * r_max
    x, wx = np.polynomial.legendre.leggauss(n_radial)
    lo, hi = math.log(r_min), math.log(r_max)
    lw = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    omega = np.exp(lw)
    wr = 0.5 * (hi - lo) * wx * omega * omega   # omega d omega = omega^2 d log omega
    dirs, wa = _sphere_rule(n_theta, n_phi)
    total = 0j
    for om, w in zip(omega, wr):
        ks = om * dirs
        a = np.asarray(a_fn(ks), dtype=complex)
        b = np.asarray(b_fn(ks), dtype=complex)
        integrand = -mdot(np.conj(a), b)
        total += w * np.sum(wa * integrand)
    return total / (2 * (2 * math.pi) ** 3)


def current_pairing(L: LoopPolygon, r_min, r_max, **kw):
    fn = lambda ks: loop_current(L, ks)
    return regulated_pairing(fn, fn, r_min, r_max, divergent=True, **kw)


def log_slope_scan(L: LoopPolygon, r_mins, r_max, **kw):
    """Fitted slope of <J*.J> against log(1/r_min), with the raw values."""
    vals = [current_pairing(L, r, r_max, **kw).real for r in r_mins]
    slope = float(np.polyfit(np.log(1 / np.asarray(r_mins)), vals, 1)[0])
    return slope, vals
