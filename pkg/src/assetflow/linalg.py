"""Dense nonsymmetric eigenvalues: balancing, Householder reduction to upper
Hessenberg form, then Francis double-shift QR on the Hessenberg matrix.

Eigenvalues only; no vectors are accumulated.
"""
import numpy as np

from .errors import NoConvergence

_RADIX = 2.0


def balance(a):
    """Diagonal similarity scaling (powers of two) that equalises row and
    column norms. Returns a new matrix; eigenvalues are unchanged."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    sqrdx = _RADIX * _RADIX
    done = False
    while not done:
        done = True
        for i in range(n):
            r = np.abs(a[i]).sum() - abs(a[i, i])
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / _RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= _RADIX
                c *= sqrdx
            g = r * _RADIX
            while c > g:
                f /= _RADIX
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg(a):
    """Upper Hessenberg matrix orthogonally similar to ``a`` (Householder)."""
    h = np.array(a, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def hessenberg_eigenvalues(h, max_iter=60):
    """Eigenvalues of an upper Hessenberg matrix by the Francis double-shift
    QR iteration with deflation and exceptional shifts (EISPACK ``hqr``)."""
    a = np.array(h, dtype=float)
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = np.abs(np.triu(a, -1)).sum()
    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            # look for a single small subdiagonal element
            l = nn
            while l > 0:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) + s == s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = np.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + np.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = z
                    wi[nn] = -z
                nn -= 2
                break
            if its == max_iter:
                raise NoConvergence(f"QR iteration did not converge after {max_iter} sweeps")
            if its and its % 10 == 0:
                t += x
                idx = np.arange(nn + 1)
                a[idx, idx] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            # two consecutive small subdiagonal elements
            m = nn - 2
            while True:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            # double-shift QR sweep on rows/columns l..nn
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k + 1 != nn else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = np.copysign(np.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                last = k + 1 == nn
                cols = slice(k, nn + 1)
                pr = a[k, cols] + q * a[k + 1, cols]
                if not last:
                    pr += r * a[k + 2, cols]
                    a[k + 2, cols] -= pr * z
                a[k + 1, cols] -= pr * y
                a[k, cols] -= pr * x
                rows = slice(l, min(nn, k + 3) + 1)
                pc = x * a[rows, k] + y * a[rows, k + 1]
                if not last:
                    pc += z * a[rows, k + 2]
                    a[rows, k + 2] -= pc * r
                a[rows, k + 1] -= pc * q
                a[rows, k] -= pc
    return wr + 1j * wi


def eigenvalues(matrix):
    """All eigenvalues of a dense real square matrix, sorted by descending
    real part (ties broken by descending imaginary part)."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("eigenvalues needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    if n == 1:
        return np.array([complex(a[0, 0])])
    lam = hessenberg_eigenvalues(hessenberg(balance(a)))
    order = np.lexsort((-lam.imag, -lam.real))
    return lam[order]


def max_real_part(lam):
    return float(np.max(np.real(lam)))
