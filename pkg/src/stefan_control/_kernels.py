"""Compiled inner loops of the forward solver.

Everything here operates on plain float64 arrays so the functions can
be jitted with numba; when numba is unavailable the same code runs as
pure Python (slowly but identically).  The mollified enthalpy is
evaluated from the flat table pack produced by SmoothedBeta.tables():

    knots, anchor_right, anchor_left0, slopes, jump_pos, jump_size,
    n_moll, kernel_const, panel_edges, m0_cum, m1_cum, gl_nodes, gl_weights

Scalar row equations alpha*v + s*bn(v) = r are solved by Newton guarded
with a sign-change bracket grown geometrically from the start value;
monotonicity of the left side (alpha + s*slope_lo > 0) makes bisection
on the bracket a convergence certificate.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def deco(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return deco

# status codes reported per batch member by _advance_step
OK = 0
NONCONTRACTING = 1
MAX_SWEEPS = 2
BRACKET_FAIL = 3


@njit(cache=True)
def _moments_scalar(s, edges, m0c, m1c, glx, glw, const):
    """Kernel moments M0(s), M1(s) via cumulative table + local panel."""
    if s <= -1.0:
        return 0.0, 0.0
    if s >= 1.0:
        return m0c[-1], m1c[-1]
    npan = len(edges) - 1
    width = 2.0 / npan
    idx = int((s + 1.0) / width)
    if idx < 0:
        idx = 0
    elif idx > npan - 1:
        idx = npan - 1
    base = edges[idx]
    mid = 0.5 * (base + s)
    half = 0.5 * (s - base)
    acc0 = 0.0
    acc1 = 0.0
    for q in range(len(glx)):
        pt = mid + half * glx[q]
        r2 = 1.0 - pt * pt
        if r2 > 0.0:
            w1 = const * np.exp(-1.0 / r2)
            acc0 += glw[q] * w1
            acc1 += glw[q] * w1 * pt
    return m0c[idx] + acc0 * half, m1c[idx] + acc1 * half


@njit(cache=True)
def _bn_scalar(v, knots, anchr, anchl0, slopes, jpos, jsz, nmoll, const,
               edges, m0c, m1c, glx, glw):
    K = len(knots)
    acc = 0.0
    for p in range(K + 1):
        y_lo = knots[p - 1] if p >= 1 else -np.inf
        y_hi = knots[p] if p < K else np.inf
        s_lo = nmoll * (v - y_hi)
        if s_lo < -1.0:
            s_lo = -1.0
        s_hi = nmoll * (v - y_lo)
        if s_hi > 1.0:
            s_hi = 1.0
        if s_hi <= s_lo:
            continue
        if p == 0:
            ay = knots[0]
            av = anchl0
        else:
            ay = knots[p - 1]
            av = anchr[p - 1]
        sl = slopes[p]
        m0a, m1a = _moments_scalar(s_lo, edges, m0c, m1c, glx, glw, const)
        m0b, m1b = _moments_scalar(s_hi, edges, m0c, m1c, glx, glw, const)
        acc += (av + sl * (v - ay)) * (m0b - m0a) - (sl / nmoll) * (m1b - m1a)
    return acc


@njit(cache=True)
def _bnp_scalar(v, knots, anchr, anchl0, slopes, jpos, jsz, nmoll, const,
                edges, m0c, m1c, glx, glw):
    K = len(knots)
    acc = 0.0
    for p in range(K + 1):
        y_lo = knots[p - 1] if p >= 1 else -np.inf
        y_hi = knots[p] if p < K else np.inf
        s_lo = nmoll * (v - y_hi)
        if s_lo < -1.0:
            s_lo = -1.0
        s_hi = nmoll * (v - y_lo)
        if s_hi > 1.0:
            s_hi = 1.0
        if s_hi <= s_lo:
            continue
        m0a, _ = _moments_scalar(s_lo, edges, m0c, m1c, glx, glw, const)
        m0b, _ = _moments_scalar(s_hi, edges, m0c, m1c, glx, glw, const)
        acc += slopes[p] * (m0b - m0a)
    for j in range(len(jpos)):
        d = nmoll * (v - jpos[j])
        r2 = 1.0 - d * d
        if r2 > 0.0:
            acc += jsz[j] * nmoll * const * np.exp(-1.0 / r2)
    return acc


@njit(cache=True)
def _solve_row(alpha, s, r, x0, knots, anchr, anchl0, slopes, jpos, jsz,
               nmoll, const, edges, m0c, m1c, glx, glw, tolfac):
    """Root of alpha*v + s*bn(v) = r, warm-started at x0.

    Returns (root, evaluation count); root is NaN if no sign-change
    bracket is found within 200 geometric expansions.
    """
    tol = tolfac * max(1.0, abs(r))
    x = x0
    f = alpha * x + s * _bn_scalar(x, knots, anchr, anchl0, slopes, jpos, jsz,
                                   nmoll, const, edges, m0c, m1c, glx, glw) - r
    it = 1
    if abs(f) <= tol:
        return x, it
    # grow a sign-change bracket geometrically from x0 +- 1
    if f < 0.0:
        lo = x
        w = 1.0
        hi = x0 + w
        fhi = alpha * hi + s * _bn_scalar(hi, knots, anchr, anchl0, slopes, jpos,
                                          jsz, nmoll, const, edges, m0c, m1c,
                                          glx, glw) - r
        it += 1
        count = 0
        while fhi < 0.0:
            lo = hi
            w *= 2.0
            count += 1
            if count > 200:
                return np.nan, it
            hi = x0 + w
            fhi = alpha * hi + s * _bn_scalar(hi, knots, anchr, anchl0, slopes,
                                              jpos, jsz, nmoll, const, edges,
                                              m0c, m1c, glx, glw) - r
            it += 1
        x = hi
        f = fhi
    else:
        hi = x
        w = 1.0
        lo = x0 - w
        flo = alpha * lo + s * _bn_scalar(lo, knots, anchr, anchl0, slopes, jpos,
                                          jsz, nmoll, const, edges, m0c, m1c,
                                          glx, glw) - r
        it += 1
        count = 0
        while flo > 0.0:
            hi = lo
            w *= 2.0
            count += 1
            if count > 200:
                return np.nan, it
            lo = x0 - w
            flo = alpha * lo + s * _bn_scalar(lo, knots, anchr, anchl0, slopes,
                                              jpos, jsz, nmoll, const, edges,
                                              m0c, m1c, glx, glw) - r
            it += 1
        x = lo
        f = flo
    # guarded Newton: steps leaving the bracket fall back to bisection
    for _ in range(300):
        d = alpha + s * _bnp_scalar(x, knots, anchr, anchl0, slopes, jpos, jsz,
                                    nmoll, const, edges, m0c, m1c, glx, glw)
        xn = x - f / d
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        x = xn
        f = alpha * x + s * _bn_scalar(x, knots, anchr, anchl0, slopes, jpos,
                                       jsz, nmoll, const, edges, m0c, m1c,
                                       glx, glw) - r
        it += 1
        if abs(f) <= tol:
            return x, it
        if f < 0.0:
            lo = x
        else:
            hi = x
        if hi - lo <= 4e-16 * (abs(lo) + abs(hi) + 1.0):
            return x, it  # bracket exhausted at machine precision
    return x, it


@njit(cache=True)
def _system_residual(v, bnprev, gk, pk, a_k, b_k, c_k, f_k, h, tau,
                     knots, anchr, anchl0, slopes, jpos, jsz, nmoll, const,
                     edges, m0c, m1c, glx, glw):
    """Max absolute residual of the nonlinear step system at v."""
    m = len(v) - 1
    s = h * h / tau
    worst = 0.0
    for i in range(m):
        bni = _bn_scalar(v[i], knots, anchr, anchl0, slopes, jpos, jsz, nmoll,
                         const, edges, m0c, m1c, glx, glw)
        if i == 0:
            alpha = a_k[0] - h * b_k[0] + h * h * c_k[0]
            res = alpha * v[0] + s * bni - a_k[0] * v[1] \
                - (s * bnprev[0] + h * h * f_k[0] - h * gk)
        else:
            alpha = a_k[i - 1] + a_k[i] - h * b_k[i] + h * h * c_k[i]
            res = s * bni + (-a_k[i - 1] + h * b_k[i - 1]) * v[i - 1] \
                + alpha * v[i] - a_k[i] * v[i + 1] - (s * bnprev[i] + h * h * f_k[i])
        if abs(res) > worst:
            worst = abs(res)
    res = (-a_k[m - 1] + h * b_k[m - 1]) * v[m - 1] + a_k[m - 1] * v[m] - h * pk
    if abs(res) > worst:
        worst = abs(res)
    return worst


@njit(cache=True)
def _advance_step(vprev, vstart, gk, pk, a_k, b_k, c_k, f_k, h, tau,
                  fp_tol, residual_tol, max_sweeps, patience,
                  knots, anchr, anchl0, slopes, jpos, jsz, nmoll, const,
                  edges, m0c, m1c, glx, glw, ahist, record):
    """Advance one time slab for a batch of right-hand sides.

    vprev[b] is the previous time row (enters the equations), vstart[b]
    the sweep initialization.  Returns the new rows plus per-member
    sweep counts, status codes, final system residuals, scalar-solve
    evaluation totals and final sup-changes.
    """
    B, mp1 = vprev.shape
    m = mp1 - 1
    s = h * h / tau
    vcur = vstart.copy()
    vnxt = np.empty(mp1)
    bnprev = np.empty((B, m))
    for b in range(B):
        for i in range(m):
            bnprev[b, i] = _bn_scalar(vprev[b, i], knots, anchr, anchl0, slopes,
                                      jpos, jsz, nmoll, const, edges, m0c, m1c,
                                      glx, glw)
    sweeps = np.zeros(B, dtype=np.int64)
    status = np.zeros(B, dtype=np.int64)
    resid = np.full(B, np.nan)
    iters = np.zeros(B, dtype=np.int64)
    achange = np.full(B, np.nan)
    done = np.zeros(B, dtype=np.uint8)
    aprev = np.full(B, -1.0)
    badcount = np.zeros(B, dtype=np.int64)

    for N in range(1, max_sweeps + 1):
        all_done = True
        for b in range(B):
            if done[b]:
                continue
            all_done = False
            A = 0.0
            for i in range(m):
                if i == 0:
                    alpha = a_k[0] - h * b_k[0] + h * h * c_k[0]
                    r = a_k[0] * vcur[b, 1] + s * bnprev[b, 0] \
                        + h * h * f_k[0] - h * gk[b]
                else:
                    alpha = a_k[i - 1] + a_k[i] - h * b_k[i] + h * h * c_k[i]
                    r = (a_k[i - 1] - h * b_k[i - 1]) * vcur[b, i - 1] \
                        + a_k[i] * vcur[b, i + 1] + s * bnprev[b, i] \
                        + h * h * f_k[i]
                x, nev = _solve_row(alpha, s, r, vcur[b, i], knots, anchr,
                                    anchl0, slopes, jpos, jsz, nmoll, const,
                                    edges, m0c, m1c, glx, glw, 1e-13)
                iters[b] += nev
                if np.isnan(x):
                    done[b] = 1
                    status[b] = BRACKET_FAIL
                    break
                vnxt[i] = x
                d = abs(x - vcur[b, i])
                if d > A:
                    A = d
            if done[b] and status[b] == BRACKET_FAIL:
                continue
            vm = (h * pk + (a_k[m - 1] - h * b_k[m - 1]) * vnxt[m - 1]) / a_k[m - 1]
            vnxt[m] = vm
            d = abs(vm - vcur[b, m])
            if d > A:
                A = d
            for i in range(mp1):
                vcur[b, i] = vnxt[i]
            sweeps[b] = N
            achange[b] = A
            if record:
                ahist[b, N - 1] = A
            # contraction monitor: ratio >= 1 for `patience` sweeps aborts
            if aprev[b] > 0.0:
                if A >= aprev[b]:
                    badcount[b] += 1
                    if badcount[b] >= patience:
                        done[b] = 1
                        status[b] = NONCONTRACTING
                        continue
                else:
                    badcount[b] = 0
            aprev[b] = A
            if A <= fp_tol[b]:
                res = _system_residual(vcur[b], bnprev[b], gk[b], pk, a_k, b_k,
                                       c_k, f_k, h, tau, knots, anchr, anchl0,
                                       slopes, jpos, jsz, nmoll, const, edges,
                                       m0c, m1c, glx, glw)
                resid[b] = res
                if res <= residual_tol:
                    done[b] = 1
                elif A <= 1e-3 * fp_tol[b]:
                    # stationary but residual stuck above tolerance
                    done[b] = 1
                    status[b] = MAX_SWEEPS
        if all_done:
            break
    for b in range(B):
        if not done[b]:
            status[b] = MAX_SWEEPS
            resid[b] = _system_residual(vcur[b], bnprev[b], gk[b], pk, a_k, b_k,
                                        c_k, f_k, h, tau, knots, anchr, anchl0,
                                        slopes, jpos, jsz, nmoll, const, edges,
                                        m0c, m1c, glx, glw)
    return vcur, sweeps, status, resid, iters, achange
