"""Line-by-line transcription of the RMED main routine and its m(t) subroutines.

Deliberately independent of ``rmed.stats`` and ``rmed.policies``: full K x K
count matrices, its own KL, monolithic loops. Only the outcome stream (one
uniform per draw, self-duels included) is shared with the production code.
Arms are 0-indexed internally; the returned trace is 1-indexed.
"""
import math


def _kl_half(p):
    d = 0.0
    if p > 0.0:
        d += p * math.log(p / 0.5)
    if p < 1.0:
        d += (1.0 - p) * math.log((1.0 - p) / 0.5)
    return d if d > 0.0 else 0.0


def _loglog(x):
    return math.log(math.log(max(x, math.exp(math.e))))


def reference_trace(mu, horizon, rng, variant="RMED1", f_k=0.0, alpha=None):
    K = len(mu)
    N = [[0] * K for _ in range(K)]
    Nbeat = [[0] * K for _ in range(K)]
    trace = []
    t = 1

    def muhat(i, j):
        if i == j or N[i][j] == 0:
            return 0.5
        return Nbeat[i][j] / N[i][j]

    def I(i):
        total = 0.0
        for j in range(K):
            if j != i and muhat(i, j) <= 0.5:
                total += N[i][j] * _kl_half(muhat(i, j))
        return total

    def istar_and_value():
        vals = [I(i) for i in range(K)]
        best = min(vals)
        return vals.index(best), best, vals

    def draw(l, m):
        nonlocal t
        u = rng.random()
        if l != m:
            if u < mu[l][m]:
                Nbeat[l][m] += 1
            else:
                Nbeat[m][l] += 1
            N[l][m] += 1
            N[m][l] += 1
        trace.append((l + 1, m + 1))
        t += 1

    def alg2(l):
        istar = istar_and_value()[0]
        O = [j for j in range(K) if j != l and muhat(l, j) <= 0.5]
        if istar in O or not O:
            return istar
        others = [j for j in range(K) if j != l]
        return min(others, key=lambda j: (muhat(l, j), j))

    def bhat(i):
        istar = istar_and_value()[0]
        best, best_val = None, math.inf
        for j in range(K):
            if j == i:
                continue
            p = muhat(i, j)
            dplus = _kl_half(p) if p < 0.5 else 0.0
            val = (max(muhat(istar, i) - 0.5, 0.0) + max(muhat(istar, j) - 0.5, 0.0)) / dplus if dplus > 0 else math.inf
            if best is None or val < best_val:
                best, best_val = j, val
        return best

    def alg3(l):
        b = bhat(l)
        istar = istar_and_value()[0]
        O = [j for j in range(K) if j != l and muhat(l, j) <= 0.5]
        if b in O and N[l][istar] >= N[l][b] / _loglog(t):
            return b
        return alg2(l)

    # initial phase, L = 1
    for i in range(K):
        for j in range(i + 1, K):
            if t <= horizon:
                draw(i, j)
    LC, LR, LN = list(range(K)), set(range(K)), []
    while t <= horizon:
        if variant == "RMED2":
            for i in range(K):
                for j in range(i + 1, K):
                    while t <= horizon and N[i][j] < alpha * _loglog(t):
                        draw(i, j)
        for l in sorted(LC):
            if t > horizon:
                break
            m = alg2(l) if variant == "RMED1" else alg3(l)
            t_draw = t
            draw(l, m)
            LR.discard(l)
            _, best, vals = istar_and_value()
            for j in range(K):
                if j not in LR and vals[j] - best <= math.log(t_draw) + f_k and j not in LN:
                    LN.append(j)
        LC, LR, LN = list(LN), set(LN), []
    return trace
