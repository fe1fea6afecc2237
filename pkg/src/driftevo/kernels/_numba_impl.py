"""numba kernels.  Loop-based twins of ``_numpy_impl``; outputs are ordered
identically so both backends drive the same trajectories."""
import numpy as np
from numba import njit


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def _ldexp1(e):
    # 2.0**e for small integer e, exact in float64
    return 2.0 ** e


@njit(cache=True)
def conj_perf_batch(fpos, fneg, rpos, rneg):
    k = rpos.shape[0]
    out = np.empty(k)
    lf = _popcount(fpos) + _popcount(fneg)
    for i in range(k):
        p = rpos[i]
        m = rneg[i]
        lr = _popcount(p) + _popcount(m)
        base = 1.0 - _ldexp1(1 - lf) - _ldexp1(1 - lr)
        if (m & fpos) | (p & fneg):
            out[i] = base
        else:
            mutual = _popcount(p & fpos) + _popcount(m & fneg)
            out[i] = base + _ldexp1(2 - (lf + lr - mutual))
    return out


@njit(cache=True)
def conj_agreement(fpos, fneg, rpos, rneg, xbits):
    k = rpos.shape[0]
    s = xbits.shape[0]
    fval = np.empty(s, dtype=np.bool_)
    for t in range(s):
        x = xbits[t]
        fval[t] = ((x & fpos) == fpos) and ((x & fneg) == 0)
    out = np.empty(k)
    for i in range(k):
        p = rpos[i]
        m = rneg[i]
        agree = 0
        for t in range(s):
            x = xbits[t]
            rv = ((x & p) == p) and ((x & m) == 0)
            if rv == fval[t]:
                agree += 1
        out[i] = (2.0 * agree - s) / s
    return out


@njit(cache=True)
def _split(mask, n):
    size = _popcount(mask)
    inside = np.empty(size, dtype=np.int64)
    outside = np.empty(n - size, dtype=np.int64)
    a = 0
    b = 0
    for j in range(n):
        if (mask >> j) & 1:
            inside[a] = j
            a += 1
        else:
            outside[b] = j
            b += 1
    return inside, outside


@njit(cache=True)
def monotone_neighbors(pos, n, q):
    inside, outside = _split(pos, n)
    size = inside.shape[0]
    free = outside.shape[0]
    total = 1
    if size < q:
        total += free
    if size > 0:
        total += size + size * free
    out = np.empty(total, dtype=np.int64)
    out[0] = pos
    c = 1
    one = np.int64(1)
    if size < q:
        for b in range(free):
            out[c] = pos | (one << outside[b])
            c += 1
    if size > 0:
        for a in range(size):
            out[c] = pos & ~(one << inside[a])
            c += 1
        for a in range(size):
            dropped = pos & ~(one << inside[a])
            for b in range(free):
                out[c] = dropped | (one << outside[b])
                c += 1
    return out


@njit(cache=True)
def general_neighbors(pos, neg, n, q):
    inside, outside = _split(pos | neg, n)
    size = inside.shape[0]
    free = outside.shape[0]
    total = 1
    if size < q:
        total += 2 * free
    if size > 0:
        total += size + 2 * size * free + (2 ** size - 1)
    P = np.empty(total, dtype=np.int64)
    N = np.empty(total, dtype=np.int64)
    P[0] = pos
    N[0] = neg
    c = 1
    one = np.int64(1)
    if size < q:
        for b in range(free):
            bit = one << outside[b]
            P[c] = pos | bit
            N[c] = neg
            P[c + 1] = pos
            N[c + 1] = neg | bit
            c += 2
    if size > 0:
        for a in range(size):
            bit = one << inside[a]
            P[c] = pos & ~bit
            N[c] = neg & ~bit
            c += 1
        for a in range(size):
            dp = pos & ~(one << inside[a])
            dn = neg & ~(one << inside[a])
            for b in range(free):
                bit = one << outside[b]
                P[c] = dp | bit
                N[c] = dn
                P[c + 1] = dp
                N[c + 1] = dn | bit
                c += 2
        for sub in range(1, 2 ** size):
            flip = np.int64(0)
            for t in range(size):
                if (sub >> t) & 1:
                    flip |= one << inside[t]
            P[c] = pos ^ flip
            N[c] = neg ^ flip
            c += 1
    return P, N


DEPENDENT_TOL = 1e-6


@njit(cache=True)
def rotation_neighbors(r, gauss, angle):
    n = r.shape[0]
    basis = np.empty((n, n))
    basis[0] = r
    g = np.empty(n)
    coef = np.empty(n)
    for i in range(n - 1):
        start = 0.0
        for d in range(n):
            g[d] = gauss[i, d]
            start += g[d] * g[d]
        start = np.sqrt(start)
        for _ in range(2):
            # classical projection against all previous rows, as in the numpy path
            for j in range(i + 1):
                acc = 0.0
                for d in range(n):
                    acc += basis[j, d] * g[d]
                coef[j] = acc
            for j in range(i + 1):
                for d in range(n):
                    g[d] -= coef[j] * basis[j, d]
        nrm = 0.0
        for d in range(n):
            nrm += g[d] * g[d]
        nrm = np.sqrt(nrm)
        if not nrm > DEPENDENT_TOL * start:
            return np.empty((0, n))
        for d in range(n):
            basis[i + 1, d] = g[d] / nrm
    c = np.cos(angle)
    s = np.sin(angle)
    out = np.empty((2 * n - 1, n))
    out[0] = r
    for i in range(1, n):
        for sgn in range(2):
            row = 2 * i - 1 + sgn
            sign = 1.0 if sgn == 0 else -1.0
            nrm = 0.0
            for d in range(n):
                v = c * r[d] + sign * s * basis[i, d]
                out[row, d] = v
                nrm += v * v
            nrm = np.sqrt(nrm)
            for d in range(n):
                out[row, d] /= nrm
    return out


@njit(cache=True)
def componentwise_neighbors(r, step, count):
    n = r.shape[0]
    cap = 1 + n + 2 * n * count
    out = np.empty((cap, n))
    out[0] = r
    c = 1
    for i in range(n):
        if r[i] != 0.0:
            out[c] = r
            out[c, i] = -r[i]
            c += 1
    v = np.empty(n)
    for i in range(n):
        for j in range(1, count + 1):
            for sgn in range(2):
                amount = step * j if sgn == 0 else -(step * j)
                nrm = 0.0
                for d in range(n):
                    v[d] = r[d]
                v[i] += amount
                for d in range(n):
                    nrm += v[d] * v[d]
                if nrm <= 0.0:
                    continue
                nrm = np.sqrt(nrm)
                same = True
                for d in range(n):
                    v[d] /= nrm
                    if v[d] != r[d]:
                        same = False
                if same:
                    continue
                out[c] = v
                c += 1
    return out[:c].copy()


@njit(cache=True)
def spherical_perf_batch(f, R):
    # angle = 2 atan2(|f - r|, |f + r|) keeps full precision near 0 and pi,
    # where arccos of the dot product loses half the digits
    k = R.shape[0]
    out = np.empty(k)
    for i in range(k):
        dm = 0.0
        dp = 0.0
        for d in range(f.shape[0]):
            a = f[d] - R[i, d]
            b = f[d] + R[i, d]
            dm += a * a
            dp += b * b
        out[i] = 1.0 - 4.0 * np.arctan2(np.sqrt(dm), np.sqrt(dp)) / np.pi
    return out


@njit(cache=True)
def halfspace_agreement(f, R, X):
    s = X.shape[0]
    n = X.shape[1]
    k = R.shape[0]
    fval = np.empty(s)
    for t in range(s):
        acc = 0.0
        for d in range(n):
            acc += X[t, d] * f[d]
        fval[t] = 1.0 if acc >= 0.0 else -1.0
    out = np.empty(k)
    for i in range(k):
        tot = 0.0
        for t in range(s):
            acc = 0.0
            for d in range(n):
                acc += X[t, d] * R[i, d]
            tot += fval[t] if acc >= 0.0 else -fval[t]
        out[i] = tot / s
    return out
