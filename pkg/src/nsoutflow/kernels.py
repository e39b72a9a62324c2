"""Numba fast path for the 2-D semi-discrete right-hand side.

Mirrors the numpy reference in solver.py stencil-for-stencil (same edge
weights, same upwind fallbacks); an equality test pins the two paths
together. Strict IEEE arithmetic (no fastmath), deterministic with the
parallel row loop because every node is written exactly once.
"""

import numpy as np
from numba import njit, prange

from .geometry import _EDGE

# one-sided y1 edge rows shared with the numpy operators
_E1 = _EDGE[(1, 2)][0].copy()  # first derivative, 4 nodes (3rd order)
_E2 = _EDGE[(2, 2)][0].copy()  # second derivative, 4 nodes (2nd order)


@njit(cache=True, inline="always")
def _d1x(f, i, j, n1, h, e1):
    if i == 0:
        return (e1[0] * f[0, j] + e1[1] * f[1, j] + e1[2] * f[2, j] + e1[3] * f[3, j]) / h
    if i == n1 - 1:
        return -(
            e1[0] * f[n1 - 1, j]
            + e1[1] * f[n1 - 2, j]
            + e1[2] * f[n1 - 3, j]
            + e1[3] * f[n1 - 4, j]
        ) / h
    return (f[i + 1, j] - f[i - 1, j]) / (2.0 * h)


@njit(cache=True, inline="always")
def _d2x(f, i, j, n1, h, e2):
    if i == 0:
        return (e2[0] * f[0, j] + e2[1] * f[1, j] + e2[2] * f[2, j] + e2[3] * f[3, j]) / (h * h)
    if i == n1 - 1:
        return (
            e2[0] * f[n1 - 1, j]
            + e2[1] * f[n1 - 2, j]
            + e2[2] * f[n1 - 3, j]
            + e2[3] * f[n1 - 4, j]
        ) / (h * h)
    return (f[i + 1, j] - 2.0 * f[i, j] + f[i - 1, j]) / (h * h)


@njit(cache=True, inline="always")
def _up1(f, a, i, j, n1, h, scheme):
    if scheme == 1:
        if a > 0.0:
            if i == 0:
                return (f[1, j] - f[0, j]) / h
            return (f[i, j] - f[i - 1, j]) / h
        if i == n1 - 1:
            return (f[n1 - 1, j] - f[n1 - 2, j]) / h
        return (f[i + 1, j] - f[i, j]) / h
    if a > 0.0:
        if i >= 2:
            return (3.0 * f[i, j] - 4.0 * f[i - 1, j] + f[i - 2, j]) / (2.0 * h)
        if i == 1:
            return (f[2, j] - f[0, j]) / (2.0 * h)
        return (-3.0 * f[0, j] + 4.0 * f[1, j] - f[2, j]) / (2.0 * h)
    if i <= n1 - 3:
        return (-3.0 * f[i, j] + 4.0 * f[i + 1, j] - f[i + 2, j]) / (2.0 * h)
    if i == n1 - 2:
        return (f[n1 - 1, j] - f[n1 - 3, j]) / (2.0 * h)
    return (3.0 * f[n1 - 1, j] - 4.0 * f[n1 - 2, j] + f[n1 - 3, j]) / (2.0 * h)


@njit(cache=True, inline="always")
def _up2(f, a, i, j, jm, jp, jm2, jp2, h, scheme):
    if scheme == 1:
        if a > 0.0:
            return (f[i, j] - f[i, jm]) / h
        return (f[i, jp] - f[i, j]) / h
    if a > 0.0:
        return (3.0 * f[i, j] - 4.0 * f[i, jm] + f[i, jm2]) / (2.0 * h)
    return (-3.0 * f[i, j] + 4.0 * f[i, jp] - f[i, jp2]) / (2.0 * h)


@njit(cache=True, parallel=True)
def _stage_a(rho, u1, u2, theta, R, h1, e1, t_d1u1, t_d1u2, t_d1th, t_d1p, t_p):
    n1, n2 = rho.shape
    for i in prange(n1):
        for j in range(n2):
            t_p[i, j] = R * rho[i, j] * theta[i, j]
    for i in prange(n1):
        for j in range(n2):
            t_d1u1[i, j] = _d1x(u1, i, j, n1, h1, e1)
            t_d1u2[i, j] = _d1x(u2, i, j, n1, h1, e1)
            t_d1th[i, j] = _d1x(theta, i, j, n1, h1, e1)
            t_d1p[i, j] = _d1x(t_p, i, j, n1, h1, e1)


@njit(cache=True, parallel=True)
def _stage_b(
    rho,
    u1,
    u2,
    theta,
    mp,
    mpp,
    h1,
    h2,
    R,
    c_v,
    mu,
    lam,
    kappa,
    scheme,
    e1,
    e2,
    t_d1u1,
    t_d1u2,
    t_d1th,
    t_d1p,
    t_p,
    out_rho,
    out_u1,
    out_u2,
    out_th,
):
    n1, n2 = rho.shape
    mulam = mu + lam
    for i in prange(n1):
        for j in range(n2):
            jp = j + 1 if j + 1 < n2 else 0
            jm = j - 1 if j > 0 else n2 - 1
            jp2 = jp + 1 if jp + 1 < n2 else 0
            jm2 = jm - 1 if jm > 0 else n2 - 1
            mpj = mp[j]
            mppj = mpp[j]

            a1 = u1[i, j] - mpj * u2[i, j]
            a2 = u2[i, j]

            # plain grid first derivatives at this node
            d1u1 = t_d1u1[i, j]
            d1u2 = t_d1u2[i, j]
            d1th = t_d1th[i, j]
            d1p = t_d1p[i, j]
            d2u1p = (u1[i, jp] - u1[i, jm]) / (2.0 * h2)
            d2u2p = (u2[i, jp] - u2[i, jm]) / (2.0 * h2)
            d2thp = (theta[i, jp] - theta[i, jm]) / (2.0 * h2)
            d2pp = (t_p[i, jp] - t_p[i, jm]) / (2.0 * h2)

            # mapped first derivatives
            g2u1 = d2u1p - mpj * d1u1
            g2u2 = d2u2p - mpj * d1u2
            divu = d1u1 + g2u2

            # convection
            conv_rho = a1 * _up1(rho, a1, i, j, n1, h1, scheme) + a2 * _up2(
                rho, a2, i, j, jm, jp, jm2, jp2, h2, scheme
            )
            conv_u1 = a1 * _up1(u1, a1, i, j, n1, h1, scheme) + a2 * _up2(
                u1, a2, i, j, jm, jp, jm2, jp2, h2, scheme
            )
            conv_u2 = a1 * _up1(u2, a1, i, j, n1, h1, scheme) + a2 * _up2(
                u2, a2, i, j, jm, jp, jm2, jp2, h2, scheme
            )
            conv_th = a1 * _up1(theta, a1, i, j, n1, h1, scheme) + a2 * _up2(
                theta, a2, i, j, jm, jp, jm2, jp2, h2, scheme
            )

            out_rho[i, j] = -(conv_rho + rho[i, j] * divu)

            # second derivatives and cross terms
            d11u1 = _d2x(u1, i, j, n1, h1, e2)
            d11u2 = _d2x(u2, i, j, n1, h1, e2)
            d11th = _d2x(theta, i, j, n1, h1, e2)
            d22u1 = (u1[i, jp] - 2.0 * u1[i, j] + u1[i, jm]) / (h2 * h2)
            d22u2 = (u2[i, jp] - 2.0 * u2[i, j] + u2[i, jm]) / (h2 * h2)
            d22th = (theta[i, jp] - 2.0 * theta[i, j] + theta[i, jm]) / (h2 * h2)
            d12u1 = (t_d1u1[i, jp] - t_d1u1[i, jm]) / (2.0 * h2)
            d12u2 = (t_d1u2[i, jp] - t_d1u2[i, jm]) / (2.0 * h2)
            d12th = (t_d1th[i, jp] - t_d1th[i, jm]) / (2.0 * h2)

            one_mp2 = 1.0 + mpj * mpj
            lap_u1 = one_mp2 * d11u1 - 2.0 * mpj * d12u1 + d22u1 - mppj * d1u1
            lap_u2 = one_mp2 * d11u2 - 2.0 * mpj * d12u2 + d22u2 - mppj * d1u2
            lap_th = one_mp2 * d11th - 2.0 * mpj * d12th + d22th - mppj * d1th

            gp1 = d1p
            gp2 = d2pp - mpj * d1p
            gd1 = d11u1 + d12u2 - mpj * d11u2
            gd2 = (d12u1 + d22u2 - mppj * d1u2 - mpj * d12u2) - mpj * gd1

            rr = rho[i, j]
            out_u1[i, j] = -conv_u1 + (-gp1 + mu * lap_u1 + mulam * gd1) / rr
            out_u2[i, j] = -conv_u2 + (-gp2 + mu * lap_u2 + mulam * gd2) / rr

            d12sym = 0.5 * (g2u1 + d1u2)
            strain_sq = d1u1 * d1u1 + 2.0 * d12sym * d12sym + g2u2 * g2u2
            out_th[i, j] = -conv_th + (
                -t_p[i, j] * divu + kappa * lap_th + 2.0 * mu * strain_sq + lam * divu * divu
            ) / (c_v * rr)


def rhs_2d(state, problem):
    """Drop-in replacement for the numpy 2-D rhs."""
    g = state.grid
    gas = problem.gas
    ws = getattr(problem, "_workspace", None)
    if ws is None or ws[0].shape != g.node_shape:
        ws = tuple(np.empty(g.node_shape) for _ in range(9))
        problem._workspace = ws
    t_d1u1, t_d1u2, t_d1th, t_d1p, t_p, o_rho, o_u1, o_u2, o_th = ws
    scheme = 1 if problem.scheme == "upwind1" else 2
    _stage_a(state.rho, state.u[0], state.u[1], state.theta, gas.R, g.h1, _E1,
             t_d1u1, t_d1u2, t_d1th, t_d1p, t_p)
    _stage_b(
        state.rho, state.u[0], state.u[1], state.theta,
        g.mp, g.mpp, g.h1, g.h2,
        gas.R, gas.c_v, gas.mu, gas.lam, gas.kappa,
        scheme, _E1, _E2,
        t_d1u1, t_d1u2, t_d1th, t_d1p, t_p,
        o_rho, o_u1, o_u2, o_th,
    )
    return o_rho.copy(), np.stack([o_u1, o_u2]), o_th.copy()
