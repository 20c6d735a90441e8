# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``doda._pykernels`` function for function."""

from libc.stdint cimport int64_t
from libc.stdlib cimport malloc, free

cdef enum:
    RULE_WAITING = 0
    RULE_GATHERING = 1
    RULE_WAITING_GREEDY = 2

WAITING = RULE_WAITING
GATHERING = RULE_GATHERING
WAITING_GREEDY = RULE_WAITING_GREEDY


def meet_times(const int64_t[::1] us, const int64_t[::1] vs, Py_ssize_t n,
               int64_t[::1] mu, int64_t[::1] mv):
    cdef Py_ssize_t t, length = us.shape[0]
    cdef int64_t a, b
    cdef int64_t *nxt = <int64_t *> malloc(n * sizeof(int64_t))
    if nxt == NULL:
        raise MemoryError()
    try:
        with nogil:
            for t in range(n):
                nxt[t] = -1
            for t in range(length - 1, -1, -1):
                a = us[t]
                b = vs[t]
                if a == 0:
                    mu[t] = t
                    mv[t] = nxt[b]
                    nxt[b] = t
                else:
                    mu[t] = nxt[a]
                    mv[t] = nxt[b]
    finally:
        free(nxt)


def aggregate(const int64_t[::1] us, const int64_t[::1] vs, Py_ssize_t start, Py_ssize_t stop,
              unsigned char[::1] owns, int64_t remaining, int rule, int64_t tau,
              const int64_t[::1] mu, const int64_t[::1] mv, bint resolved):
    cdef Py_ssize_t t
    cdef int64_t a, b, sender, m1, m2
    cdef int64_t status = -1
    if stop > us.shape[0]:
        stop = us.shape[0]
    if rule == RULE_WAITING_GREEDY and (mu.shape[0] < stop or mv.shape[0] < stop):
        raise ValueError("meet-time columns shorter than the range")
    with nogil:
        for t in range(start, stop):
            a = us[t]
            b = vs[t]
            if owns[a] == 0 or owns[b] == 0:
                continue
            if rule == RULE_WAITING:
                if a != 0:
                    continue
                sender = b
            elif rule == RULE_GATHERING:
                sender = b
            else:
                m1 = mu[t]
                m2 = mv[t]
                if m1 < 0 or m2 < 0:
                    if not resolved:
                        status = -2 - t
                        break
                    if m2 < 0:
                        sender = b
                    else:
                        sender = a
                elif m1 <= m2:
                    if tau < m2:
                        sender = b
                    else:
                        continue
                elif tau < m1:
                    sender = a
                else:
                    continue
            owns[sender] = 0
            remaining -= 1
            if remaining == 0:
                status = t
                break
    return status, remaining


def reverse_broadcast(const int64_t[::1] us, const int64_t[::1] vs, Py_ssize_t first,
                      Py_ssize_t last, Py_ssize_t n, int64_t[::1] parent, int64_t[::1] ptime):
    cdef Py_ssize_t t, x
    cdef int64_t a, b, child, par
    cdef Py_ssize_t count = 1
    cdef unsigned char *informed
    for x in range(n):
        parent[x] = -1
        ptime[x] = -1
    if last < first:
        return 1
    informed = <unsigned char *> malloc(n)
    if informed == NULL:
        raise MemoryError()
    try:
        with nogil:
            for x in range(n):
                informed[x] = 0
            informed[0] = 1
            for t in range(last, first - 1, -1):
                a = us[t]
                b = vs[t]
                if informed[a] == informed[b]:
                    continue
                if informed[a]:
                    child = b
                    par = a
                else:
                    child = a
                    par = b
                informed[child] = 1
                parent[child] = par
                ptime[child] = t
                count += 1
                if count == n:
                    break
    finally:
        free(informed)
    return count


def forward_broadcast(const int64_t[::1] us, const int64_t[::1] vs, Py_ssize_t start,
                      Py_ssize_t stop, Py_ssize_t n, Py_ssize_t source):
    cdef Py_ssize_t t, x
    cdef int64_t a, b
    cdef Py_ssize_t count = 1
    cdef int64_t result = -1
    cdef unsigned char *informed
    if n <= 1:
        return start
    if stop > us.shape[0]:
        stop = us.shape[0]
    informed = <unsigned char *> malloc(n)
    if informed == NULL:
        raise MemoryError()
    try:
        with nogil:
            for x in range(n):
                informed[x] = 0
            informed[source] = 1
            for t in range(start, stop):
                a = us[t]
                b = vs[t]
                if informed[a] != informed[b]:
                    informed[a] = 1
                    informed[b] = 1
                    count += 1
                    if count == n:
                        result = t
                        break
    finally:
        free(informed)
    return result


cdef bint _feasible(const int64_t[::1] us, const int64_t[::1] vs, Py_ssize_t first,
                    Py_ssize_t last, Py_ssize_t n, unsigned char *informed) noexcept nogil:
    cdef Py_ssize_t t, x
    cdef int64_t a, b
    cdef Py_ssize_t count = 1
    for x in range(n):
        informed[x] = 0
    informed[0] = 1
    for t in range(last, first - 1, -1):
        a = us[t]
        b = vs[t]
        if informed[a] != informed[b]:
            informed[a] = 1
            informed[b] = 1
            count += 1
            if count == n:
                return True
    return False


def opt_search(const int64_t[::1] us, const int64_t[::1] vs, Py_ssize_t start, Py_ssize_t n):
    cdef Py_ssize_t length = us.shape[0]
    cdef Py_ssize_t last, width, end, lo, hi, mid
    cdef int64_t result = -1
    cdef unsigned char *informed
    if start >= length:
        return -1
    informed = <unsigned char *> malloc(n)
    if informed == NULL:
        raise MemoryError()
    try:
        with nogil:
            last = length - 1
            width = n - 1
            lo = start - 1
            hi = -1
            while True:
                end = start + width - 1
                if end >= last:
                    end = last
                    if _feasible(us, vs, start, end, n, informed):
                        hi = end
                    break
                if _feasible(us, vs, start, end, n, informed):
                    hi = end
                    break
                lo = end
                width *= 2
            if hi >= 0:
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    if _feasible(us, vs, start, mid, n, informed):
                        hi = mid
                    else:
                        lo = mid
                result = hi
    finally:
        free(informed)
    return result
