"""Compiled recursions for exponential smoothing and ARMA residuals."""

import numpy as np
from numba import njit


@njit(cache=True)
def ses_filter(y, alpha):
    level = y[0]
    sse = 0.0
    for t in range(1, y.shape[0]):
        err = y[t] - level
        sse += err * err
        level += alpha * err
    return sse, level


@njit(cache=True)
def ses_grid_sse(y, alphas):
    out = np.empty(alphas.shape[0])
    for i in range(alphas.shape[0]):
        out[i] = ses_filter(y, alphas[i])[0]
    return out


@njit(cache=True)
def holt_filter(y, alpha, beta):
    level = y[0]
    trend = y[1] - y[0]
    sse = 0.0
    for t in range(1, y.shape[0]):
        fc = level + trend
        err = y[t] - fc
        sse += err * err
        new_level = alpha * y[t] + (1.0 - alpha) * fc
        trend = beta * (new_level - level) + (1.0 - beta) * trend
        level = new_level
    return sse, level, trend


@njit(cache=True)
def holt_grid_sse(y, alphas, betas):
    out = np.empty((alphas.shape[0], betas.shape[0]))
    for i in range(alphas.shape[0]):
        for j in range(betas.shape[0]):
            out[i, j] = holt_filter(y, alphas[i], betas[j])[0]
    return out


@njit(cache=True)
def hw_init(y, m):
    mean1 = 0.0
    mean2 = 0.0
    for j in range(m):
        mean1 += y[j]
        mean2 += y[m + j]
    mean1 /= m
    mean2 /= m
    trend = (mean2 - mean1) / m
    centre = (m - 1) / 2.0
    level = mean1 + trend * centre
    seasonal = np.empty(m)
    for j in range(m):
        seasonal[j] = y[j] - (mean1 + trend * (j - centre))
    return level, trend, seasonal


@njit(cache=True)
def hw_filter(y, m, alpha, beta, gamma):
    level, trend, seasonal = hw_init(y, m)
    sse = 0.0
    for t in range(m, y.shape[0]):
        ph = t % m
        s_old = seasonal[ph]
        fc = level + trend + s_old
        err = y[t] - fc
        sse += err * err
        new_level = alpha * (y[t] - s_old) + (1.0 - alpha) * (level + trend)
        trend = beta * (new_level - level) + (1.0 - beta) * trend
        seasonal[ph] = gamma * (y[t] - new_level) + (1.0 - gamma) * s_old
        level = new_level
    return sse, level, trend, seasonal


@njit(cache=True)
def hw_grid_sse(y, m, alphas, betas, gammas):
    out = np.empty((alphas.shape[0], betas.shape[0], gammas.shape[0]))
    for i in range(alphas.shape[0]):
        for j in range(betas.shape[0]):
            for k in range(gammas.shape[0]):
                out[i, j, k] = hw_filter(y, m, alphas[i], betas[j], gammas[k])[0]
    return out


@njit(cache=True)
def arma_residuals(x, phi, theta):
    """Conditional residuals of a zero-mean ARMA, conditioning on the first p values."""
    n = x.shape[0]
    p = phi.shape[0]
    q = theta.shape[0]
    e = np.zeros(n)
    for t in range(p, n):
        acc = x[t]
        for i in range(p):
            acc -= phi[i] * x[t - 1 - i]
        for j in range(q):
            if t - 1 - j >= p:
                acc -= theta[j] * e[t - 1 - j]
        e[t] = acc
    return e


@njit(cache=True)
def arma_css(x, phi, theta):
    e = arma_residuals(x, phi, theta)
    total = 0.0
    for t in range(phi.shape[0], x.shape[0]):
        total += e[t] * e[t]
    return total


@njit(cache=True)
def _css_objective(x, params, p, scale):
    val = arma_css(x, params[:p], params[p:]) / scale
    return val if np.isfinite(val) else 1e300


@njit(cache=True)
def _sort_simplex(sim, fsim):
    order = np.argsort(fsim, kind="mergesort")
    return sim[order].copy(), fsim[order].copy()


@njit(cache=True)
def arma_css_nelder_mead(x, start, p, scale, maxiter, xatol, fatol):
    """Nelder-Mead on the scaled CSS, following scipy's non-adaptive scheme.

    Returns (best params, best objective value).
    """
    rho, chi, psi, sigma = 1.0, 2.0, 0.5, 0.5
    dim = start.shape[0]
    sim = np.empty((dim + 1, dim))
    sim[0] = start
    for k in range(dim):
        y = start.copy()
        if y[k] != 0.0:
            y[k] = 1.05 * y[k]
        else:
            y[k] = 0.00025
        sim[k + 1] = y
    fsim = np.empty(dim + 1)
    for k in range(dim + 1):
        fsim[k] = _css_objective(x, sim[k], p, scale)
    sim, fsim = _sort_simplex(sim, fsim)
    it = 1
    while it < maxiter:
        if (np.max(np.abs(sim[1:] - sim[0])) <= xatol
                and np.max(np.abs(fsim[0] - fsim[1:])) <= fatol):
            break
        xbar = np.zeros(dim)
        for k in range(dim):
            xbar += sim[k]
        xbar /= dim
        xr = (1 + rho) * xbar - rho * sim[-1]
        fxr = _css_objective(x, xr, p, scale)
        shrink = False
        if fxr < fsim[0]:
            xe = (1 + rho * chi) * xbar - rho * chi * sim[-1]
            fxe = _css_objective(x, xe, p, scale)
            if fxe < fxr:
                sim[-1] = xe
                fsim[-1] = fxe
            else:
                sim[-1] = xr
                fsim[-1] = fxr
        elif fxr < fsim[-2]:
            sim[-1] = xr
            fsim[-1] = fxr
        elif fxr < fsim[-1]:
            xc = (1 + psi * rho) * xbar - psi * rho * sim[-1]
            fxc = _css_objective(x, xc, p, scale)
            if fxc <= fxr:
                sim[-1] = xc
                fsim[-1] = fxc
            else:
                shrink = True
        else:
            xcc = (1 - psi) * xbar + psi * sim[-1]
            fxcc = _css_objective(x, xcc, p, scale)
            if fxcc < fsim[-1]:
                sim[-1] = xcc
                fsim[-1] = fxcc
            else:
                shrink = True
        if shrink:
            for j in range(1, dim + 1):
                sim[j] = sim[0] + sigma * (sim[j] - sim[0])
                fsim[j] = _css_objective(x, sim[j], p, scale)
        sim, fsim = _sort_simplex(sim, fsim)
        it += 1
    return sim[0].copy(), fsim[0]


@njit(cache=True)
def _hw_sse_lanes(y, m, alpha, beta, gammas, bound, level0, trend0, season0, sse):
    """HW SSE for every gamma at once, written into ``sse``.

    The lanes are independent filters advanced in lockstep, which hides the
    latency of each one's serial recurrence. The sweep stops early once every
    lane has passed ``bound``; stopped lanes then hold partial sums above it.
    """
    ng = gammas.shape[0]
    level = np.full(ng, level0)
    trend = np.full(ng, trend0)
    seasonal = np.empty((m, ng))
    for ph in range(m):
        seasonal[ph, :] = season0[ph]
    sse[:] = 0.0
    ph = 0
    for t in range(m, y.shape[0]):
        yt = y[t]
        for k in range(ng):
            s_old = seasonal[ph, k]
            err = yt - (level[k] + trend[k] + s_old)
            sse[k] += err * err
            new_level = alpha * (yt - s_old) + (1.0 - alpha) * (level[k] + trend[k])
            trend[k] = beta * (new_level - level[k]) + (1.0 - beta) * trend[k]
            seasonal[ph, k] = gammas[k] * (yt - new_level) + (1.0 - gammas[k]) * s_old
            level[k] = new_level
        ph += 1
        if ph == m:
            ph = 0
            if np.min(sse) > bound:
                return


@njit(cache=True)
def hw_grid_argmin(y, m, alphas, betas, gammas):
    """First (C-order) minimiser of the HW grid SSE, pruning hopeless rows.

    Partial sums never decrease, so a row of gamma lanes whose running SSEs
    all pass the incumbent cannot hold the minimiser.
    """
    level0, trend0, season0 = hw_init(y, m)
    ng = gammas.shape[0]
    sse = np.empty(ng)
    best = np.inf
    bi, bj, bk = 0, 0, 0
    for i in range(alphas.shape[0]):
        for j in range(betas.shape[0]):
            _hw_sse_lanes(y, m, alphas[i], betas[j], gammas, best, level0, trend0, season0, sse)
            for k in range(ng):
                if sse[k] < best:
                    best = sse[k]
                    bi, bj, bk = i, j, k
    return bi, bj, bk


@njit(cache=True)
def _holt_sse_bounded(y, alpha, beta, bound):
    level = y[0]
    trend = y[1] - y[0]
    sse = 0.0
    for t in range(1, y.shape[0]):
        fc = level + trend
        err = y[t] - fc
        sse += err * err
        if sse >= bound:
            return sse
        new_level = alpha * y[t] + (1.0 - alpha) * fc
        trend = beta * (new_level - level) + (1.0 - beta) * trend
        level = new_level
    return sse


@njit(cache=True)
def holt_grid_argmin(y, alphas, betas):
    best = np.inf
    bi, bj = 0, 0
    for i in range(alphas.shape[0]):
        for j in range(betas.shape[0]):
            sse = _holt_sse_bounded(y, alphas[i], betas[j], best)
            if sse < best:
                best = sse
                bi, bj = i, j
    return bi, bj
