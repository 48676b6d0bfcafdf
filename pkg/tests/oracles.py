"""Reference computations that share no code with the package under test."""
import math

import mpmath


def full_pivot_solve(A, b):
    """Gaussian elimination with full (row and column) pivoting on Python floats."""
    n = len(b)
    M = [[float(A[i][j]) for j in range(n)] + [float(b[i])] for i in range(n)]
    perm = list(range(n))
    for k in range(n):
        best, bi, bj = -1.0, k, k
        for i in range(k, n):
            for j in range(k, n):
                if abs(M[i][j]) > best:
                    best, bi, bj = abs(M[i][j]), i, j
        if best == 0.0:
            raise ZeroDivisionError("singular system")
        M[k], M[bi] = M[bi], M[k]
        for row in M:
            row[k], row[bj] = row[bj], row[k]
        perm[k], perm[bj] = perm[bj], perm[k]
        for i in range(k + 1, n):
            f = M[i][k] / M[k][k]
            for j in range(k, n + 1):
                M[i][j] -= f * M[k][j]
    z = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = M[i][n] - sum(M[i][j] * z[j] for j in range(i + 1, n))
        z[i] = s / M[i][i]
    x = [0.0] * n
    for k in range(n):
        x[perm[k]] = z[k]
    return x


def lm_step_oracle(J, r, lam, mode):
    """Form (lam*D + J'J) and J'r with explicit loops, then eliminate."""
    rows, cols = len(J), len(J[0])
    A = [[sum(J[i][p] * J[i][q] for i in range(rows)) for q in range(cols)] for p in range(cols)]
    g = [sum(J[i][p] * r[i] for i in range(rows)) for p in range(cols)]
    for p in range(cols):
        d = 1.0 if mode == "identity" else (A[p][p] if A[p][p] != 0.0 else 1.0)
        A[p][p] += lam * d
    return full_pivot_solve(A, g)


def _act(name, z):
    if name == "sigmoid":
        return 1 / (1 + mpmath.exp(-z))
    if name == "tanh":
        return mpmath.tanh(z)
    return z


def mp_forward(layer_sizes, hidden, output, beta, x):
    """MLP forward pass in mpmath; beta is laid out per layer as W (row-major) then b."""
    a = [mpmath.mpf(v) for v in x]
    pos = 0
    n_layers = len(layer_sizes) - 1
    for l in range(n_layers):
        fan_in, fan_out = layer_sizes[l], layer_sizes[l + 1]
        W = beta[pos:pos + fan_in * fan_out]
        pos += fan_in * fan_out
        b = beta[pos:pos + fan_out]
        pos += fan_out
        act = output if l == n_layers - 1 else hidden
        a = [_act(act, sum(W[j * fan_in + k] * a[k] for k in range(fan_in)) + b[j])
             for j in range(fan_out)]
    return a


def fd_jacobian(layer_sizes, hidden, output, beta, X, step=1e-6, dps=40):
    """Central-difference d f / d beta, rows sample-major, evaluated at high precision."""
    with mpmath.workdps(dps):
        base = [mpmath.mpf(float(v)) for v in beta]
        h = mpmath.mpf(step)
        rows = []
        for x in X:
            cols = []
            for p in range(len(base)):
                plus, minus = list(base), list(base)
                plus[p] += h
                minus[p] -= h
                fp = mp_forward(layer_sizes, hidden, output, plus, x)
                fm = mp_forward(layer_sizes, hidden, output, minus, x)
                cols.append([(u - v) / (2 * h) for u, v in zip(fp, fm)])
            m = len(cols[0])
            for k in range(m):
                rows.append([float(cols[p][k]) for p in range(len(base))])
        return rows


def max_rel_error(analytic, reference, floor=1e-8):
    """Largest relative deviation; entries below ``floor`` are compared absolutely."""
    worst = 0.0
    for ra, rr in zip(analytic, reference):
        for a, r in zip(ra, rr):
            scale = max(abs(a), abs(r))
            err = abs(a - r) if scale < floor else abs(a - r) / scale
            worst = max(worst, err)
    return worst


def rel_error(x, ref):
    num = math.sqrt(sum((a - b) ** 2 for a, b in zip(x, ref)))
    den = math.sqrt(sum(b * b for b in ref))
    return num / den if den else num
