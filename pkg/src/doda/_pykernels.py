"""Pure-Python hot kernels; the fallback for the compiled ``_kernels`` module.

Both modules expose the same functions with the same integer conventions:
node 0 is the sink, endpoints are canonical (``us[t] < vs[t]``) and ``-1``
stands for "none within the supplied prefix".
"""

WAITING = 0
GATHERING = 1
WAITING_GREEDY = 2


def meet_times(us, vs, n, mu, mv):
    """Fill ``mu[t]``/``mv[t]`` with the next sink meeting of each endpoint after ``t``."""
    nxt = [-1] * n
    a_col = us.tolist()
    b_col = vs.tolist()
    out_u = [0] * len(a_col)
    out_v = [0] * len(a_col)
    for t in range(len(a_col) - 1, -1, -1):
        a = a_col[t]
        b = b_col[t]
        if a == 0:
            out_u[t] = t
            out_v[t] = nxt[b]
            nxt[b] = t
        else:
            out_u[t] = nxt[a]
            out_v[t] = nxt[b]
    mu[:] = out_u
    mv[:] = out_v


def aggregate(us, vs, start, stop, owns, remaining, rule, tau, mu, mv, resolved):
    """Run an oblivious rule over ``[start, stop)``.

    Returns ``(status, remaining)``: ``status`` is the termination index, ``-1``
    if the range was exhausted, or ``-2 - t`` if a meet time needed at ``t``
    lies beyond the supplied prefix and ``resolved`` is false.
    """
    a_col = us[start:stop].tolist()
    b_col = vs[start:stop].tolist()
    if rule == WAITING_GREEDY:
        m_u = mu[start:stop].tolist()
        m_v = mv[start:stop].tolist()
    for i in range(len(a_col)):
        a = a_col[i]
        b = b_col[i]
        if not (owns[a] and owns[b]):
            continue
        if rule == WAITING:
            if a != 0:
                continue
            sender = b
        elif rule == GATHERING:
            sender = b
        else:
            m1 = m_u[i]
            m2 = m_v[i]
            if m1 < 0 or m2 < 0:
                if not resolved:
                    return -2 - (start + i), remaining
                # beyond the horizon counts as infinitely late; inf vs inf
                # takes the first branch
                sender = b if m2 < 0 else a
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
            return start + i, remaining
    return -1, remaining


def reverse_broadcast(us, vs, first, last, n, parent, ptime):
    """Broadcast from the sink over indices ``last, last-1, ..., first``.

    Records the first informing edge of every node in ``parent``/``ptime``
    and returns how many nodes ended up informed.
    """
    for x in range(n):
        parent[x] = -1
        ptime[x] = -1
    if last < first:
        return 1
    informed = [False] * n
    informed[0] = True
    count = 1
    a_col = us[first:last + 1].tolist()
    b_col = vs[first:last + 1].tolist()
    for i in range(len(a_col) - 1, -1, -1):
        a = a_col[i]
        b = b_col[i]
        ia = informed[a]
        if ia == informed[b]:
            continue
        if ia:
            child, par = b, a
        else:
            child, par = a, b
        informed[child] = True
        parent[child] = par
        ptime[child] = first + i
        count += 1
        if count == n:
            break
    return count


def forward_broadcast(us, vs, start, stop, n, source):
    """Index at which a broadcast from ``source`` started at ``start`` informs everyone."""
    if n <= 1:
        return start
    informed = [False] * n
    informed[source] = True
    count = 1
    a_col = us[start:stop].tolist()
    b_col = vs[start:stop].tolist()
    for i in range(len(a_col)):
        a = a_col[i]
        b = b_col[i]
        if informed[a] != informed[b]:
            informed[a] = informed[b] = True
            count += 1
            if count == n:
                return start + i
    return -1


def _feasible(a_col, b_col, last, n, informed):
    # reverse broadcast over relative indices last..0, count only
    for x in range(n):
        informed[x] = False
    informed[0] = True
    count = 1
    for t in range(last, -1, -1):
        a = a_col[t]
        b = b_col[t]
        if informed[a] != informed[b]:
            informed[a] = informed[b] = True
            count += 1
            if count == n:
                return True
    return False


def opt_search(us, vs, start, n):
    """Smallest ``end >= start`` such that aggregation fits in ``[start, end]``.

    Doubling then binary search over the monotone feasibility predicate.
    Returns ``-1`` when even the whole prefix is insufficient.
    """
    length = len(us)
    if start >= length:
        return -1
    informed = [False] * n
    last = length - 1 - start  # relative index of the final interaction
    width = n - 1
    lo = -1  # largest relative end known infeasible
    while True:
        end = width - 1
        if end >= last:
            end = last
            a_col = us[start:start + end + 1].tolist()
            b_col = vs[start:start + end + 1].tolist()
            if not _feasible(a_col, b_col, end, n, informed):
                return -1
            hi = end
            break
        a_col = us[start:start + end + 1].tolist()
        b_col = vs[start:start + end + 1].tolist()
        if _feasible(a_col, b_col, end, n, informed):
            hi = end
            break
        lo = end
        width *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _feasible(a_col, b_col, mid, n, informed):
            hi = mid
        else:
            lo = mid
    return start + hi
