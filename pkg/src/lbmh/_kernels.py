"""Fused numba kernels for the batched experiment path.

These duplicate the arithmetic of proposal.propose / engine._rho_terms for the
preset families that dominate the scans, trading numpy's many large
temporaries for single-pass loops.  The numpy implementations remain the
reference; the test suite pins kernel output against them.  All kernels are
single-threaded (bit-reproducible reductions) and release the GIL so grid
points can run on a thread pool.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_LOG2 = 0.6931471805599453


@njit(cache=True, nogil=True)
def _softplus(t):
    return np.log1p(np.exp(-abs(t))) + max(t, 0.0)


@njit(cache=True, nogil=True)
def _b_gamma(t, h, l):
    # log((e^{h t} + e^{l t})/2), h = 1/2 + gamma, l = 1/2 - gamma
    a = h * t
    b = l * t
    if b > a:
        a, b = b, a
    return a + np.log1p(np.exp(b - a)) - _LOG2


@njit(cache=True, nogil=True)
def propose_barker(x, gx, z, u, s, y):
    m, n = x.shape
    for i in range(m):
        for j in range(n):
            step = s[j] * z[i, j]
            p = 1.0 / (1.0 + np.exp(-gx[i, j] * step))
            y[i, j] = x[i, j] + (step if u[i, j] < p else -step)


@njit(cache=True, nogil=True)
def propose_mala(x, gx, z, s, y):
    m, n = x.shape
    for i in range(m):
        for j in range(n):
            y[i, j] = x[i, j] + 0.5 * s[j] * s[j] * gx[i, j] + s[j] * z[i, j]


@njit(cache=True, nogil=True)
def propose_gamma_gauss(x, gx, u, z, s, gamma, y):
    m, n = x.shape
    for i in range(m):
        for j in range(n):
            ss = s[j] * s[j]
            p_plus = 1.0 / (1.0 + np.exp(-gamma * ss * gx[i, j] * gx[i, j]))
            bx = 1.0 if u[i, j] < p_plus else -1.0
            y[i, j] = x[i, j] + (0.5 + bx * gamma) * ss * gx[i, j] + s[j] * z[i, j]


@njit(cache=True, nogil=True)
def propose_three_point(x, gx, u, s, root, p0, h, l, y):
    # atoms -root, 0, +root with base probabilities p0, 1-2*p0, p0,
    # reweighted by g(e^{c z_k}); uses b(-t) = b(t) - t to evaluate b once
    m, n = x.shape
    for i in range(m):
        for j in range(n):
            c = gx[i, j] * s[j]
            b_plus = _b_gamma(c * root, h, l)
            b_minus = b_plus - c * root
            peak = max(max(b_plus, b_minus), 0.0)
            w_minus = p0 * np.exp(b_minus - peak)
            w_zero = (1.0 - 2.0 * p0) * np.exp(-peak)
            w_plus = p0 * np.exp(b_plus - peak)
            pick = u[i, j] * (w_minus + w_zero + w_plus)
            if pick < w_minus:
                y[i, j] = x[i, j] - s[j] * root
            elif pick < w_minus + w_zero:
                y[i, j] = x[i, j]
            else:
                y[i, j] = x[i, j] + s[j] * root


@njit(cache=True, nogil=True)
def terms_barker(x, y, gx, gy, out):
    # b(t) = log2 + t - softplus(t); normalizer is identically 1
    m, n = x.shape
    for i in range(m):
        acc = 0.0
        for j in range(n):
            d = y[i, j] - x[i, j]
            t1 = -gy[i, j] * d
            t2 = gx[i, j] * d
            acc += (t1 - t2) - _softplus(t1) + _softplus(t2)
        out[i] = acc


@njit(cache=True, nogil=True)
def terms_mala(x, y, gx, gy, s, out):
    # b(t) = t/2, log Z(c) = c^2/8
    m, n = x.shape
    for i in range(m):
        acc = 0.0
        for j in range(n):
            d = y[i, j] - x[i, j]
            cx = gx[i, j] * s[j]
            cy = gy[i, j] * s[j]
            acc += -0.5 * d * (gy[i, j] + gx[i, j]) + 0.125 * (cx * cx - cy * cy)
        out[i] = acc


@njit(cache=True, nogil=True)
def terms_gamma_gauss(x, y, gx, gy, s, gamma, out):
    h = 0.5 + gamma
    l = 0.5 - gamma
    m, n = x.shape
    for i in range(m):
        acc = 0.0
        for j in range(n):
            d = y[i, j] - x[i, j]
            acc += _b_gamma(-gy[i, j] * d, h, l) - _b_gamma(gx[i, j] * d, h, l)
            cx = gx[i, j] * s[j]
            cy = gy[i, j] * s[j]
            # log Z(c) = logaddexp((h c)^2/2, (l c)^2/2) - log2
            ax = 0.5 * h * h * cx * cx
            bx = 0.5 * l * l * cx * cx
            ay = 0.5 * h * h * cy * cy
            by = 0.5 * l * l * cy * cy
            acc += ax + np.log1p(np.exp(bx - ax)) - ay - np.log1p(np.exp(by - ay))
        out[i] = acc


# Fully fused product-target kernels: factor code 0 = gaussian phi = -v^2/2,
# 1 = hyperbolic phi = -sqrt(d2 + v^2).  They draw nothing; sampled noise and
# uniforms come in as arrays so the RNG stream stays a numpy Generator.


@njit(cache=True, nogil=True)
def _phi(kind, d2, v):
    if kind == 0:
        return -0.5 * v * v
    return -np.sqrt(d2 + v * v)


@njit(cache=True, nogil=True)
def _dphi(kind, d2, v):
    if kind == 0:
        return -v
    return -v / np.sqrt(d2 + v * v)


@njit(cache=True, nogil=True)
def rho_rwm_product(x, z, s, kind, d2, y, out):
    m, n = x.shape
    for i in range(m):
        acc = 0.0
        for j in range(n):
            yv = x[i, j] + s[j] * z[i, j]
            y[i, j] = yv
            acc += _phi(kind, d2, yv) - _phi(kind, d2, x[i, j])
        out[i] = acc


@njit(cache=True, nogil=True)
def rho_barker_product(x, z, u, s, kind, d2, y, out):
    m, n = x.shape
    for i in range(m):
        acc = 0.0
        for j in range(n):
            xv = x[i, j]
            gx = _dphi(kind, d2, xv)
            step = s[j] * z[i, j]
            p = 1.0 / (1.0 + np.exp(-gx * step))
            d = step if u[i, j] < p else -step
            yv = xv + d
            y[i, j] = yv
            gy = _dphi(kind, d2, yv)
            t1 = -gy * d
            t2 = gx * d
            acc += _phi(kind, d2, yv) - _phi(kind, d2, xv)
            acc += (t1 - t2) - _softplus(t1) + _softplus(t2)
        out[i] = acc


@njit(cache=True, nogil=True)
def rho_mala_product(x, z, s, kind, d2, y, out):
    m, n = x.shape
    for i in range(m):
        acc = 0.0
        for j in range(n):
            xv = x[i, j]
            gx = _dphi(kind, d2, xv)
            sj = s[j]
            yv = xv + 0.5 * sj * sj * gx + sj * z[i, j]
            y[i, j] = yv
            gy = _dphi(kind, d2, yv)
            d = yv - xv
            cx = gx * sj
            cy = gy * sj
            acc += _phi(kind, d2, yv) - _phi(kind, d2, xv)
            acc += -0.5 * d * (gy + gx) + 0.125 * (cx * cx - cy * cy)
        out[i] = acc


@njit(cache=True, nogil=True)
def rho_gamma_product(x, u, z, s, gamma, kind, d2, y, out):
    h = 0.5 + gamma
    l = 0.5 - gamma
    m, n = x.shape
    for i in range(m):
        acc = 0.0
        for j in range(n):
            xv = x[i, j]
            gx = _dphi(kind, d2, xv)
            sj = s[j]
            ss = sj * sj
            p_plus = 1.0 / (1.0 + np.exp(-gamma * ss * gx * gx))
            bx = 1.0 if u[i, j] < p_plus else -1.0
            yv = xv + (0.5 + bx * gamma) * ss * gx + sj * z[i, j]
            y[i, j] = yv
            gy = _dphi(kind, d2, yv)
            d = yv - xv
            acc += _phi(kind, d2, yv) - _phi(kind, d2, xv)
            acc += _b_gamma(-gy * d, h, l) - _b_gamma(gx * d, h, l)
            cx = gx * sj
            cy = gy * sj
            ax = 0.5 * h * h * cx * cx
            bx2 = 0.5 * l * l * cx * cx
            ay = 0.5 * h * h * cy * cy
            by = 0.5 * l * l * cy * cy
            acc += ax + np.log1p(np.exp(bx2 - ax)) - ay - np.log1p(np.exp(by - ay))
        out[i] = acc


@njit(cache=True, nogil=True)
def rho_three_point_product(x, u, s, root, p0, gamma, kind, d2, y, out):
    h = 0.5 + gamma
    l = 0.5 - gamma
    lp_edge = np.log(p0)
    lp_mid = np.log(1.0 - 2.0 * p0)
    m, n = x.shape
    for i in range(m):
        acc = 0.0
        for j in range(n):
            xv = x[i, j]
            gx = _dphi(kind, d2, xv)
            sj = s[j]
            c = gx * sj
            b_plus = _b_gamma(c * root, h, l)
            b_minus = b_plus - c * root
            peak = max(max(b_plus, b_minus), 0.0)
            w_minus = p0 * np.exp(b_minus - peak)
            w_zero = (1.0 - 2.0 * p0) * np.exp(-peak)
            w_plus = p0 * np.exp(b_plus - peak)
            pick = u[i, j] * (w_minus + w_zero + w_plus)
            if pick < w_minus:
                d = -sj * root
            elif pick < w_minus + w_zero:
                d = 0.0
            else:
                d = sj * root
            yv = xv + d
            y[i, j] = yv
            gy = _dphi(kind, d2, yv)
            acc += _phi(kind, d2, yv) - _phi(kind, d2, xv)
            acc += _b_gamma(-gy * d, h, l) - _b_gamma(gx * d, h, l)
            acc += _logz_three_point(gx * sj * root, lp_edge, lp_mid, h, l)
            acc -= _logz_three_point(gy * sj * root, lp_edge, lp_mid, h, l)
        out[i] = acc


@njit(cache=True, nogil=True)
def _logz_three_point(cr, lp_edge, lp_mid, h, l):
    # log( p e^{b(cr)} + p e^{b(-cr)} + (1-2p) ), using b(-t) = b(t) - t
    b_plus = _b_gamma(cr, h, l) + lp_edge
    b_minus = b_plus - cr
    peak = max(max(b_plus, b_minus), lp_mid)
    tot = np.exp(b_plus - peak) + np.exp(b_minus - peak) + np.exp(lp_mid - peak)
    return peak + np.log(tot)


@njit(cache=True, nogil=True)
def terms_three_point(x, y, gx, gy, s, root, p0, h, l, out):
    lp_edge = np.log(p0)
    lp_mid = np.log(1.0 - 2.0 * p0)
    m, n = x.shape
    for i in range(m):
        acc = 0.0
        for j in range(n):
            d = y[i, j] - x[i, j]
            acc += _b_gamma(-gy[i, j] * d, h, l) - _b_gamma(gx[i, j] * d, h, l)
            acc += _logz_three_point(gx[i, j] * s[j] * root, lp_edge, lp_mid, h, l)
            acc -= _logz_three_point(gy[i, j] * s[j] * root, lp_edge, lp_mid, h, l)
        out[i] = acc
