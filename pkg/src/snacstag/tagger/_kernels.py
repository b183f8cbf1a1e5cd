"""Chain-CRF inner loops: emissions, forward-backward, Viterbi, gradient scatter.

Each kernel has a numba-compiled version and a pure-numpy version with the
same signature. The numba path is used when numba imports and the
``SNACSTAG_DISABLE_NUMBA`` environment variable is unset or "0".
Disallowed transitions are encoded as ``-inf`` in the transition arrays.
"""

from __future__ import annotations

import os

import numpy as np

NEG_INF = -np.inf
SCALED_RANGE = 300.0


# --- numpy reference path ----------------------------------------------------

def _logsumexp(a, axis):
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def emissions_np(W, ids, vals, offsets):
    T = offsets.shape[0] - 1
    out = np.zeros((T, W.shape[0]))
    for t in range(T):
        a, b = offsets[t], offsets[t + 1]
        out[t] = W[:, ids[a:b]] @ vals[a:b]
    return out


def forward_backward_np(emit, trans, start, end):
    T, L = emit.shape
    alpha = np.empty((T, L))
    beta = np.empty((T, L))
    alpha[0] = start + emit[0]
    for t in range(1, T):
        alpha[t] = _logsumexp(alpha[t - 1][:, None] + trans, axis=0) + emit[t]
    beta[T - 1] = end
    for t in range(T - 2, -1, -1):
        beta[t] = _logsumexp(trans + (emit[t + 1] + beta[t + 1])[None, :], axis=1)
    log_z = float(_logsumexp(alpha[T - 1] + end, axis=0))
    with np.errstate(invalid="ignore"):
        marg = np.exp(alpha + beta - log_z)
    marg = np.nan_to_num(marg, nan=0.0)
    pair = np.zeros((L, L))
    for t in range(1, T):
        with np.errstate(invalid="ignore"):
            p = np.exp(alpha[t - 1][:, None] + trans + (emit[t] + beta[t])[None, :] - log_z)
        pair += np.nan_to_num(p, nan=0.0)
    return log_z, marg, pair


def viterbi_np(emit, trans, start, end):
    T, L = emit.shape
    score = start + emit[0]
    back = np.zeros((T, L), dtype=np.int64)
    for t in range(1, T):
        cand = score[:, None] + trans
        back[t] = np.argmax(cand, axis=0)
        score = cand[back[t], np.arange(L)] + emit[t]
    final = score + end
    path = np.empty(T, dtype=np.int64)
    path[T - 1] = int(np.argmax(final))
    best = float(final[path[T - 1]])
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, best


def scatter_grad_np(dW, ids, vals, offsets, coef):
    T = offsets.shape[0] - 1
    for t in range(T):
        a, b = offsets[t], offsets[t + 1]
        dW[:, ids[a:b]] += np.outer(coef[t], vals[a:b])


# --- numba path --------------------------------------------------------------

def _build_numba():
    from numba import njit

    @njit(cache=True)
    def _lse(v):
        m = NEG_INF
        for x in v:
            if x > m:
                m = x
        if m == NEG_INF:
            return m
        acc = 0.0
        for x in v:
            acc += np.exp(x - m)
        return m + np.log(acc)

    @njit(cache=True)
    def emissions(W, ids, vals, offsets):
        T = offsets.shape[0] - 1
        L = W.shape[0]
        out = np.zeros((T, L))
        for t in range(T):
            for k in range(offsets[t], offsets[t + 1]):
                f = ids[k]
                v = vals[k]
                for y in range(L):
                    out[t, y] += W[y, f] * v
        return out

    @njit(cache=True)
    def _forward_backward_log(emit, trans, start, end):
        T, L = emit.shape
        alpha = np.empty((T, L))
        beta = np.empty((T, L))
        for y in range(L):
            alpha[0, y] = start[y] + emit[0, y]
        buf = np.empty(L)
        for t in range(1, T):
            for j in range(L):
                for i in range(L):
                    buf[i] = alpha[t - 1, i] + trans[i, j]
                alpha[t, j] = _lse(buf) + emit[t, j]
        for y in range(L):
            beta[T - 1, y] = end[y]
        for t in range(T - 2, -1, -1):
            for j in range(L):
                buf[j] = emit[t + 1, j] + beta[t + 1, j]
            for i in range(L):
                beta[t, i] = _lse(trans[i] + buf)
        log_z = _lse(alpha[T - 1] + end)
        marg = np.zeros((T, L))
        for t in range(T):
            for y in range(L):
                s = alpha[t, y] + beta[t, y]
                if s != NEG_INF:
                    marg[t, y] = np.exp(s - log_z)
        pair = np.zeros((L, L))
        for t in range(1, T):
            for i in range(L):
                a = alpha[t - 1, i]
                if a == NEG_INF:
                    continue
                for j in range(L):
                    s = a + trans[i, j] + emit[t, j] + beta[t, j]
                    if s != NEG_INF:
                        pair[i, j] += np.exp(s - log_z)
        return log_z, marg, pair

    @njit(cache=True)
    def _max_finite(v):
        m = NEG_INF
        for x in v.ravel():
            if x > m:
                m = x
        return 0.0 if m == NEG_INF else m

    @njit(cache=True)
    def _span(v):
        lo, hi = np.inf, NEG_INF
        for x in v.ravel():
            if x != NEG_INF:
                lo = min(lo, x)
                hi = max(hi, x)
        return 0.0 if hi == NEG_INF else hi - lo

    @njit(cache=True)
    def forward_backward(emit, trans, start, end):
        # scaled recursion in probability space; exp only once per cell
        T, L = emit.shape
        # beyond this range single factors can underflow; stay in log space
        wide = _span(trans) > SCALED_RANGE or _span(start) > SCALED_RANGE \
            or _span(end) > SCALED_RANGE
        for t in range(T):
            wide = wide or _span(emit[t]) > SCALED_RANGE
        if wide:
            return _forward_backward_log(emit, trans, start, end)
        t_off = _max_finite(trans)
        et = np.exp(trans - t_off)
        ee = np.empty((T, L))
        e_off = np.empty(T)
        for t in range(T):
            e_off[t] = _max_finite(emit[t])
            for y in range(L):
                ee[t, y] = np.exp(emit[t, y] - e_off[t])
        s_off = _max_finite(start)
        n_off = _max_finite(end)
        es = np.exp(start - s_off)
        en = np.exp(end - n_off)
        alpha = np.empty((T, L))
        scale = np.empty(T)
        for y in range(L):
            alpha[0, y] = es[y] * ee[0, y]
        log_z = s_off + e_off[0]
        for t in range(T):
            if t:
                for j in range(L):
                    acc = 0.0
                    for i in range(L):
                        acc += alpha[t - 1, i] * et[i, j]
                    alpha[t, j] = acc * ee[t, j]
                log_z += t_off + e_off[t]
            c = alpha[t].sum()
            if not (c > 0.0 and c < np.inf):
                return _forward_backward_log(emit, trans, start, end)
            scale[t] = c
            alpha[t] /= c
            log_z += np.log(c)
        z_end = 0.0
        for y in range(L):
            z_end += alpha[T - 1, y] * en[y]
        if not (z_end > 0.0 and z_end < np.inf):
            return _forward_backward_log(emit, trans, start, end)
        log_z += np.log(z_end) + n_off
        beta = np.empty((T, L))
        for y in range(L):
            beta[T - 1, y] = en[y] / z_end
        tmp = np.empty(L)
        for t in range(T - 2, -1, -1):
            for j in range(L):
                tmp[j] = ee[t + 1, j] * beta[t + 1, j]
            for i in range(L):
                acc = 0.0
                for j in range(L):
                    acc += et[i, j] * tmp[j]
                beta[t, i] = acc / scale[t + 1]
        marg = alpha * beta
        pair = np.zeros((L, L))
        for t in range(1, T):
            for j in range(L):
                tmp[j] = ee[t, j] * beta[t, j] / scale[t]
            for i in range(L):
                a = alpha[t - 1, i]
                for j in range(L):
                    pair[i, j] += a * et[i, j] * tmp[j]
        return log_z, marg, pair

    @njit(cache=True)
    def viterbi(emit, trans, start, end):
        T, L = emit.shape
        score = np.empty(L)
        new = np.empty(L)
        back = np.zeros((T, L), dtype=np.int64)
        for y in range(L):
            score[y] = start[y] + emit[0, y]
        for t in range(1, T):
            for j in range(L):
                best = NEG_INF
                arg = 0
                for i in range(L):
                    s = score[i] + trans[i, j]
                    if s > best:
                        best = s
                        arg = i
                back[t, j] = arg
                new[j] = best + emit[t, j]
            score[:] = new
        best = NEG_INF
        arg = 0
        for y in range(L):
            s = score[y] + end[y]
            if s > best:
                best = s
                arg = y
        path = np.empty(T, dtype=np.int64)
        path[T - 1] = arg
        for t in range(T - 1, 0, -1):
            path[t - 1] = back[t, path[t]]
        return path, best

    @njit(cache=True)
    def scatter_grad(dW, ids, vals, offsets, coef):
        T = offsets.shape[0] - 1
        L = dW.shape[0]
        for t in range(T):
            for k in range(offsets[t], offsets[t + 1]):
                f = ids[k]
                v = vals[k]
                for y in range(L):
                    dW[y, f] += coef[t, y] * v

    return emissions, forward_backward, viterbi, scatter_grad


def numba_requested() -> bool:
    return os.environ.get("SNACSTAG_DISABLE_NUMBA", "0") in ("", "0")


HAS_NUMBA = False
if numba_requested():
    try:
        (emissions_nb, forward_backward_nb, viterbi_nb, scatter_grad_nb) = _build_numba()
        HAS_NUMBA = True
    except ImportError:
        pass

if HAS_NUMBA:
    emissions = emissions_nb
    forward_backward = forward_backward_nb
    viterbi = viterbi_nb
    scatter_grad = scatter_grad_nb
else:
    emissions = emissions_np
    forward_backward = forward_backward_np
    viterbi = viterbi_np
    scatter_grad = scatter_grad_np
