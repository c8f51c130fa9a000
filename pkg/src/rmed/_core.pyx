# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulation kernel.

Mirrors ``stats.DuelStats``, ``policies.RmedPolicy``/``RucbPolicy`` and
``simulator._run_python`` operation for operation so that both paths produce
bit-identical traces. Build with -ffp-contract=off and without -ffast-math.
"""
from libc.math cimport log, sqrt, INFINITY
from libc.stdlib cimport malloc, calloc, free
from libc.stdint cimport uint64_t, int64_t

cdef enum:
    K_RMED1 = 0
    K_RMED2 = 1
    K_RMED2FH = 2
    K_RUCB = 3

cdef enum:
    PH_INITIAL = 0
    PH_FORCED = 1
    PH_MAIN = 2


# ------------------------------------------------------------------ rng

cdef struct Rng:
    uint64_t s0
    uint64_t s1
    uint64_t s2
    uint64_t s3


cdef inline uint64_t rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t rng_next(Rng* r) noexcept nogil:
    cdef uint64_t result = rotl(r.s1 * 5, 7) * 9
    cdef uint64_t t = r.s1 << 17
    r.s2 ^= r.s0
    r.s3 ^= r.s1
    r.s1 ^= r.s2
    r.s0 ^= r.s3
    r.s2 ^= t
    r.s3 = rotl(r.s3, 45)
    return result


cdef inline double rng_random(Rng* r) noexcept nogil:
    return <double>(rng_next(r) >> 11) * (1.0 / 9007199254740992.0)


cdef inline int rng_below(Rng* r, int n) noexcept nogil:
    return <int>(rng_random(r) * n)


def xoshiro_outputs(uint64_t s0, uint64_t s1, uint64_t s2, uint64_t s3, int count):
    """First ``count`` raw outputs from the given state (for cross-checks)."""
    cdef Rng r
    r.s0 = s0; r.s1 = s1; r.s2 = s2; r.s3 = s3
    return [rng_next(&r) for _ in range(count)]


# ------------------------------------------------------------------ stats

cdef inline double kl(double p, double q) noexcept nogil:
    cdef double d = 0.0
    if p > 0.0:
        d += p * log(p / q)
    if p < 1.0:
        d += (1.0 - p) * log((1.0 - p) / (1.0 - q))
    return d if d > 0.0 else 0.0


cdef struct Stats:
    int k
    int npairs
    int* pid        # k*k, -1 on the diagonal
    int* pi         # lexicographic pair list
    int* pj
    int64_t* n
    int64_t* wl     # wins of the lower-indexed arm
    double* wdiv    # n * d(min(wl, n - wl)/n, 1/2)
    double* divs    # scratch: I_i
    int istar
    double istar_val


cdef inline int64_t st_count(Stats* s, int i, int j) noexcept nogil:
    if i == j:
        return 0
    return s.n[s.pid[i * s.k + j]]


cdef inline int64_t st_wins(Stats* s, int i, int j) noexcept nogil:
    cdef int p
    if i == j:
        return 0
    p = s.pid[i * s.k + j]
    return s.wl[p] if i < j else s.n[p] - s.wl[p]


cdef inline double st_mean(Stats* s, int i, int j) noexcept nogil:
    cdef int64_t n = st_count(s, i, j)
    if n == 0:
        return 0.5
    return <double>st_wins(s, i, j) / <double>n


cdef inline bint st_is_opp(Stats* s, int i, int j) noexcept nogil:
    return 2 * st_wins(s, i, j) <= st_count(s, i, j)


cdef inline void st_record(Stats* s, int i, int j, int winner) noexcept nogil:
    cdef int p = s.pid[i * s.k + j]
    cdef int64_t n = s.n[p] + 1
    cdef int64_t a
    s.n[p] = n
    if winner == (i if i < j else j):
        s.wl[p] += 1
    a = s.wl[p]
    if n - a < a:
        a = n - a
    s.wdiv[p] = <double>n * kl(<double>a / <double>n, 0.5)


cdef void st_snapshot(Stats* s) noexcept nogil:
    cdef int i, j
    cdef double acc
    for i in range(s.k):
        acc = 0.0
        for j in range(s.k):
            if j != i and st_is_opp(s, i, j):
                acc += s.wdiv[s.pid[i * s.k + j]]
        s.divs[i] = acc
    s.istar = 0
    s.istar_val = s.divs[0]
    for i in range(1, s.k):
        if s.divs[i] < s.istar_val:
            s.istar = i
            s.istar_val = s.divs[i]


cdef bint st_beats_all(Stats* s, int w) noexcept nogil:
    cdef int j
    for j in range(s.k):
        if j != w and not (2 * st_wins(s, w, j) > st_count(s, w, j)):
            return False
    return True


# ------------------------------------------------------------------ RMED

cdef struct Rmed:
    int kind
    double f_k
    double alpha
    double fh_scale
    double e_e
    bint paper_sign
    int phase
    int64_t init_pos
    int64_t init_total
    int* cur
    int ncur
    int cursor
    char* in_lr
    char* in_ln
    char* scratch
    int forced_pos
    int* bhat
    int pending


cdef inline double loglog(double x, double e_e) noexcept nogil:
    if not (x > e_e):
        x = e_e
    return log(log(x))


cdef inline double gap_est(Stats* s, int a, int j, bint paper_sign) noexcept nogil:
    cdef double mean = st_mean(s, a, j)
    cdef double x
    if paper_sign:
        return 0.5 - mean
    x = mean - 0.5
    return x if x > 0.0 else 0.0


cdef int est_best(Stats* s, int i, int istar, bint paper_sign) noexcept nogil:
    cdef double gap_i = gap_est(s, istar, i, paper_sign)
    cdef int best = -1
    cdef double best_cost = INFINITY
    cdef double mean, dplus, cost
    cdef int j
    for j in range(s.k):
        if j == i:
            continue
        mean = st_mean(s, i, j)
        dplus = kl(mean, 0.5) if mean < 0.5 else 0.0
        if dplus > 0.0:
            cost = (gap_i + gap_est(s, istar, j, paper_sign)) / dplus
        else:
            cost = INFINITY
        if best < 0 or cost < best_cost:
            best = j
            best_cost = cost
    return best


cdef int rmed1_target(Stats* s, int l) noexcept nogil:
    cdef int istar = s.istar
    cdef bint any_opp = False
    cdef int j, best
    cdef double mean, best_mean
    for j in range(s.k):
        if j != l and st_is_opp(s, l, j):
            any_opp = True
            break
    if not any_opp or (istar != l and st_is_opp(s, l, istar)):
        return istar
    best = -1
    best_mean = INFINITY
    for j in range(s.k):
        if j == l:
            continue
        mean = st_mean(s, l, j)
        if mean < best_mean:
            best = j
            best_mean = mean
    return best


cdef int rmed2_target(Stats* s, Rmed* r, int l, int64_t t) noexcept nogil:
    cdef int b
    cdef double scale
    if r.kind == K_RMED2:
        b = est_best(s, l, s.istar, r.paper_sign)
        scale = loglog(<double>t, r.e_e)
    else:
        b = r.bhat[l]
        scale = r.fh_scale
    if b != l and st_is_opp(s, l, b) and (
        <double>st_count(s, l, s.istar) >= <double>st_count(s, l, b) / scale
    ):
        return b
    return rmed1_target(s, l)


cdef int rmed_start_loop(Rmed* r, Stats* s, char* flags) noexcept nogil:
    cdef int i
    r.ncur = 0
    for i in range(s.k):
        r.scratch[i] = flags[i]
    for i in range(s.k):
        if r.scratch[i]:
            r.cur[r.ncur] = i
            r.ncur += 1
            r.in_lr[i] = 1
        else:
            r.in_lr[i] = 0
        r.in_ln[i] = 0
    if r.ncur == 0:
        return -1
    r.cursor = 0
    if r.kind == K_RMED2:
        r.phase = PH_FORCED
        r.forced_pos = 0
    else:
        r.phase = PH_MAIN
    return 0


cdef int rmed_select(Rmed* r, Stats* s, int64_t t, int* out_l, int* out_m) noexcept nogil:
    cdef int p, i, l
    cdef double thr
    if r.phase == PH_INITIAL:
        if r.init_pos < r.init_total:
            p = <int>(r.init_pos % s.npairs)
            r.init_pos += 1
            out_l[0] = s.pi[p]
            out_m[0] = s.pj[p]
            return 0
        if r.kind == K_RMED2FH:
            st_snapshot(s)
            for i in range(s.k):
                r.bhat[i] = est_best(s, i, s.istar, r.paper_sign)
        for i in range(s.k):
            r.in_ln[i] = 1
        if rmed_start_loop(r, s, r.in_ln) != 0:
            return -1
    if r.phase == PH_FORCED:
        thr = r.alpha * loglog(<double>t, r.e_e)
        while r.forced_pos < s.npairs:
            p = r.forced_pos
            if <double>s.n[p] < thr:
                out_l[0] = s.pi[p]
                out_m[0] = s.pj[p]
                return 0
            r.forced_pos += 1
        r.phase = PH_MAIN
    if r.ncur == 0 or r.cursor >= r.ncur:
        return -1
    l = r.cur[r.cursor]
    st_snapshot(s)
    out_l[0] = l
    if r.kind == K_RMED1:
        out_m[0] = rmed1_target(s, l)
    else:
        out_m[0] = rmed2_target(s, r, l, t)
    r.pending = l
    return 0


cdef int rmed_update(Rmed* r, Stats* s, int64_t t) noexcept nogil:
    cdef int l = r.pending
    cdef int j
    cdef double bound
    if l < 0:
        return 0
    r.pending = -1
    r.in_lr[l] = 0
    st_snapshot(s)
    bound = log(<double>t) + r.f_k
    for j in range(s.k):
        if r.in_lr[j] or r.in_ln[j]:
            continue
        if s.divs[j] - s.istar_val <= bound:
            r.in_ln[j] = 1
    r.cursor += 1
    if r.cursor == r.ncur:
        return rmed_start_loop(r, s, r.in_ln)
    return 0


# ------------------------------------------------------------------ RUCB

cdef void rucb_select(Stats* s, Rng* rng, double alpha, int64_t t, double* u,
                      int* cands, int* ties, int* out_l, int* out_m) noexcept nogil:
    cdef int k = s.k
    cdef int i, j, l, nc, nt
    cdef int64_t n
    cdef double x, best
    cdef bint ok, allow_self
    for i in range(k):
        for j in range(k):
            if i == j:
                x = 0.5
            else:
                n = st_count(s, i, j)
                if n == 0:
                    x = 1.0
                else:
                    x = st_mean(s, i, j) + sqrt(alpha * log(<double>t) / <double>n)
                    if not (x < 1.0):
                        x = 1.0
            u[i * k + j] = x
    nc = 0
    for i in range(k):
        ok = True
        for j in range(k):
            if not (u[i * k + j] >= 0.5):
                ok = False
                break
        if ok:
            cands[nc] = i
            nc += 1
    if nc == 0:
        l = rng_below(rng, k)
    elif nc == 1:
        l = cands[0]
    else:
        l = cands[rng_below(rng, nc)]
    allow_self = nc == 1 and cands[0] == l
    best = -INFINITY
    nt = 0
    for j in range(k):
        if j == l and not allow_self:
            continue
        x = u[j * k + l]
        if x > best:
            best = x
            ties[0] = j
            nt = 1
        elif x == best:
            ties[nt] = j
            nt += 1
    out_l[0] = l
    out_m[0] = ties[0] if nt == 1 else ties[rng_below(rng, nt)]


# ------------------------------------------------------------------ driver

def simulate(int k, const double[::1] mu, const double[::1] inc, int winner,
             int64_t horizon, const uint64_t[::1] state, const int64_t[::1] grid,
             double[::1] out, int64_t[::1] counts, double e_e,
             int kind, double f_k, double alpha, int init_repeats,
             double fh_scale, bint paper_sign):
    """Run one simulation; fills ``out`` (regret at ``grid``) and ``counts`` (K*K,
    diagonal = self-duels) and returns the number of rounds outside the event
    that the winner empirically beats every arm."""
    cdef Stats s
    cdef Rmed r
    cdef Rng rng
    cdef int i, j, p, l, m, err = 0
    cdef int64_t t, uc = 0
    cdef int gi = 0
    cdef int ngrid = grid.shape[0]
    cdef double total = 0.0, comp = 0.0, x, sm, uvar
    cdef double* u = NULL
    cdef int* cands = NULL
    cdef int* ties = NULL
    cdef int64_t* selfd = NULL
    cdef const double* mup = &mu[0]
    cdef const double* incp = &inc[0]
    cdef const int64_t* gridp = &grid[0]
    cdef double* outp = &out[0]

    if mu.shape[0] != k * k or inc.shape[0] != k * k or counts.shape[0] != k * k:
        raise ValueError("array sizes do not match k")
    if out.shape[0] != ngrid:
        raise ValueError("output buffer does not match the checkpoint grid")

    rng.s0 = state[0]; rng.s1 = state[1]; rng.s2 = state[2]; rng.s3 = state[3]
    s.k = k
    s.npairs = k * (k - 1) // 2
    s.pid = <int*>malloc(k * k * sizeof(int))
    s.pi = <int*>malloc(s.npairs * sizeof(int))
    s.pj = <int*>malloc(s.npairs * sizeof(int))
    s.n = <int64_t*>calloc(s.npairs, sizeof(int64_t))
    s.wl = <int64_t*>calloc(s.npairs, sizeof(int64_t))
    s.wdiv = <double*>calloc(s.npairs, sizeof(double))
    s.divs = <double*>calloc(k, sizeof(double))
    r.cur = <int*>malloc(k * sizeof(int))
    r.in_lr = <char*>calloc(k, 1)
    r.in_ln = <char*>calloc(k, 1)
    r.scratch = <char*>calloc(k, 1)
    r.bhat = <int*>calloc(k, sizeof(int))
    u = <double*>malloc(k * k * sizeof(double))
    cands = <int*>malloc(k * sizeof(int))
    ties = <int*>malloc(k * sizeof(int))
    selfd = <int64_t*>calloc(k, sizeof(int64_t))
    try:
        if (s.pid == NULL or s.pi == NULL or s.pj == NULL or s.n == NULL or s.wl == NULL
                or s.wdiv == NULL or s.divs == NULL or r.cur == NULL or r.in_lr == NULL
                or r.in_ln == NULL or r.scratch == NULL or r.bhat == NULL or u == NULL
                or cands == NULL or ties == NULL or selfd == NULL):
            raise MemoryError()
        p = 0
        for i in range(k):
            s.pid[i * k + i] = -1
            for j in range(i + 1, k):
                s.pid[i * k + j] = p
                s.pid[j * k + i] = p
                s.pi[p] = i
                s.pj[p] = j
                p += 1
        r.kind = kind
        r.f_k = f_k
        r.alpha = alpha
        r.fh_scale = fh_scale
        r.e_e = e_e
        r.paper_sign = paper_sign
        r.phase = PH_INITIAL
        r.init_pos = 0
        r.init_total = <int64_t>init_repeats * s.npairs
        r.ncur = 0
        r.cursor = 0
        r.forced_pos = 0
        r.pending = -1

        with nogil:
            t = 1
            while t <= horizon:
                if not st_beats_all(&s, winner):
                    uc += 1
                if kind == K_RUCB:
                    rucb_select(&s, &rng, alpha, t, u, cands, ties, &l, &m)
                else:
                    err = rmed_select(&r, &s, t, &l, &m)
                    if err != 0:
                        break
                uvar = rng_random(&rng)
                if l == m:
                    selfd[l] += 1
                else:
                    st_record(&s, l, m, l if uvar < mup[l * k + m] else m)
                x = incp[l * k + m]
                sm = total + x
                if (total if total >= 0 else -total) >= (x if x >= 0 else -x):
                    comp += (total - sm) + x
                else:
                    comp += (x - sm) + total
                total = sm
                if kind != K_RUCB:
                    err = rmed_update(&r, &s, t)
                    if err != 0:
                        break
                if gi < ngrid and t == gridp[gi]:
                    outp[gi] = total + comp
                    gi += 1
                t += 1
        if err != 0:
            raise RuntimeError(f"RMED state corrupted at round {t}: empty loop")
        for i in range(k):
            counts[i * k + i] = selfd[i]
            for j in range(i + 1, k):
                counts[i * k + j] = s.n[s.pid[i * k + j]]
                counts[j * k + i] = s.n[s.pid[i * k + j]]
        return uc
    finally:
        free(s.pid); free(s.pi); free(s.pj); free(s.n); free(s.wl); free(s.wdiv)
        free(s.divs); free(r.cur); free(r.in_lr); free(r.in_ln); free(r.scratch)
        free(r.bhat); free(u); free(cands); free(ties); free(selfd)
