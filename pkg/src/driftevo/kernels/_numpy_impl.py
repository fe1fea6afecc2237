"""Vectorised numpy kernels (fallback path).

Every function here has a loop-based twin in ``_numba_impl`` with the same
signature and the same output ordering.
"""
import numpy as np


def _popcount(x):
    return np.bitwise_count(np.asarray(x, dtype=np.int64)).astype(np.int64)


def _bits(mask, n):
    return np.array([j for j in range(n) if (int(mask) >> j) & 1], dtype=np.int64)


# --------------------------------------------------------------------------
# conjunctions (bitmask encoded: bit j-1 set <=> literal j / -j present)
# --------------------------------------------------------------------------

def conj_perf_batch(fpos, fneg, rpos, rneg):
    rpos = np.asarray(rpos, dtype=np.int64)
    rneg = np.asarray(rneg, dtype=np.int64)
    lf = int(_popcount(fpos)) + int(_popcount(fneg))
    lr = _popcount(rpos) + _popcount(rneg)
    mutual = _popcount(rpos & fpos) + _popcount(rneg & fneg)
    clash = ((rneg & fpos) | (rpos & fneg)) != 0
    base = 1.0 - np.ldexp(1.0, 1 - lf) - np.ldexp(1.0, 1 - lr)
    both_true = np.ldexp(1.0, 2 - (lf + lr - mutual))
    return np.where(clash, base, base + both_true)


def conj_agreement(fpos, fneg, rpos, rneg, xbits):
    rpos = np.asarray(rpos, dtype=np.int64)[:, None]
    rneg = np.asarray(rneg, dtype=np.int64)[:, None]
    x = np.asarray(xbits, dtype=np.int64)[None, :]
    fval = (((x & fpos) == fpos) & ((x & fneg) == 0))[0]
    rval = ((x & rpos) == rpos) & ((x & rneg) == 0)
    agree = rval == fval[None, :]
    return (2.0 * agree.sum(axis=1) - x.shape[1]) / x.shape[1]


def monotone_neighbors(pos, n, q):
    pos = int(pos)
    inside = _bits(pos, n)
    outside = np.array([j for j in range(n) if not (pos >> j) & 1], dtype=np.int64)
    size = len(inside)
    parts = [np.array([pos], dtype=np.int64)]
    if size < q:
        parts.append(pos | (np.int64(1) << outside))
    if size > 0:
        parts.append(pos & ~(np.int64(1) << inside))
        dropped = pos & ~(np.int64(1) << inside)
        parts.append((dropped[:, None] | (np.int64(1) << outside)[None, :]).ravel())
    return np.concatenate(parts)


def general_neighbors(pos, neg, n, q):
    pos, neg = int(pos), int(neg)
    occupied = pos | neg
    inside = _bits(occupied, n)
    outside = np.array([j for j in range(n) if not (occupied >> j) & 1], dtype=np.int64)
    size = len(inside)
    out_bits = np.int64(1) << outside
    in_bits = np.int64(1) << inside
    zeros_out = np.zeros(len(outside), dtype=np.int64)
    P = [np.array([pos], dtype=np.int64)]
    N = [np.array([neg], dtype=np.int64)]
    if size < q:
        # positive then negated literal, per free variable
        P.append(np.stack([pos | out_bits, np.full(len(outside), pos)], axis=1).ravel())
        N.append(np.stack([np.full(len(outside), neg), neg | out_bits], axis=1).ravel())
    if size > 0:
        P.append(pos & ~in_bits)
        N.append(neg & ~in_bits)
        dp = (pos & ~in_bits)[:, None] + zeros_out[None, :]
        dn = (neg & ~in_bits)[:, None] + zeros_out[None, :]
        sp = np.stack([dp | out_bits[None, :], dp], axis=2).ravel()
        sn = np.stack([dn, dn | out_bits[None, :]], axis=2).ravel()
        P.append(sp)
        N.append(sn)
        subsets = np.arange(1, 2 ** size, dtype=np.int64)
        flip = np.zeros(len(subsets), dtype=np.int64)
        for t, b in enumerate(in_bits):
            flip |= np.where((subsets >> t) & 1, b, 0)
        P.append(pos ^ flip)
        N.append(neg ^ flip)
    return np.concatenate(P), np.concatenate(N)


# --------------------------------------------------------------------------
# hyperplanes
# --------------------------------------------------------------------------

DEPENDENT_TOL = 1e-6


def rotation_neighbors(r, gauss, angle):
    r = np.asarray(r, dtype=np.float64)
    n = r.shape[0]
    basis = np.empty((n, n))
    basis[0] = r
    for i in range(n - 1):
        g = gauss[i].astype(np.float64)
        start = np.sqrt(g @ g)
        for _ in range(2):
            g = g - basis[: i + 1].T @ (basis[: i + 1] @ g)
        nrm = np.sqrt(g @ g)
        if not nrm > DEPENDENT_TOL * start:
            # nearly dependent draw: the caller redraws
            return np.empty((0, n))
        basis[i + 1] = g / nrm
    c, s = np.cos(angle), np.sin(angle)
    out = np.empty((2 * n - 1, n))
    out[0] = r
    out[1::2] = c * r + s * basis[1:]
    out[2::2] = c * r - s * basis[1:]
    out[1:] /= np.sqrt(np.einsum("ij,ij->i", out[1:], out[1:]))[:, None]
    return out


def componentwise_neighbors(r, step, count):
    r = np.asarray(r, dtype=np.float64)
    n = r.shape[0]
    rows = [r[None, :]]
    flips = np.repeat(r[None, :], n, axis=0)
    idx = np.arange(n)
    flips[idx, idx] = -r
    rows.append(flips[r != 0.0])
    amounts = step * np.arange(1, count + 1)
    signed = np.stack([amounts, -amounts], axis=1).ravel()
    shifts = np.repeat(r[None, :], n * len(signed), axis=0)
    which = np.repeat(idx, len(signed))
    shifts[np.arange(len(which)), which] += np.tile(signed, n)
    norms = np.sqrt(np.einsum("ij,ij->i", shifts, shifts))
    keep = norms > 0.0
    shifts = shifts[keep] / norms[keep, None]
    shifts = shifts[~np.all(shifts == r[None, :], axis=1)]
    rows.append(shifts)
    return np.concatenate(rows, axis=0)


def spherical_perf_batch(f, R):
    # angle = 2 atan2(|f - r|, |f + r|), stable near 0 and pi
    R = np.asarray(R, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    dm = np.sqrt(np.einsum("ij,ij->i", f - R, f - R))
    dp = np.sqrt(np.einsum("ij,ij->i", f + R, f + R))
    return 1.0 - 4.0 * np.arctan2(dm, dp) / np.pi


def halfspace_agreement(f, R, X):
    fval = np.where(X @ f >= 0.0, 1.0, -1.0)
    rval = np.where(X @ np.asarray(R).T >= 0.0, 1.0, -1.0)
    return (fval @ rval) / X.shape[0]
