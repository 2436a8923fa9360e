"""Hot loops. Every function here is valid nopython numba and valid Python.

Use the ``*_kernel()`` accessors to obtain the variant selected by
``FOGALLOC_NO_NUMBA``; see :mod:`fogalloc._accel`.
"""

from __future__ import annotations

import numpy as np

from ._accel import dispatch, jitable

PAUSED = 1
FINISHED = 0

# istate slots
I_DEPTH, I_NODES, I_HAS_INC, I_RES_TOTAL = 0, 1, 2, 3


def enum_minimal_subsets(fail, w, demand, budget, target, max_size, eps):
    """Minimal server subsets meeting one user's QoS and budget.

    ``fail[s] = 1 - p_s``. A subset qualifies when its size is at most
    ``max_size``, ``demand * sum(w) <= budget + eps`` and
    ``prod(fail) <= target + eps``; it is minimal when dropping any single
    member breaks the QoS test (dropping never breaks the budget).
    Returns (servers padded with -1, sizes, costs) in discovery order.
    """
    n = fail.shape[0]
    width = max(max_size, 1)
    cap = 64
    out = np.full((cap, width), -1, dtype=np.int32)
    sizes = np.zeros(cap, dtype=np.int64)
    costs = np.zeros(cap, dtype=np.float64)
    found = 0

    stack = np.zeros(width + 1, dtype=np.int64)
    prod = np.ones(width + 1, dtype=np.float64)
    wsum = np.zeros(width + 1, dtype=np.float64)
    k = 0
    nxt = 0
    while True:
        if nxt >= n or k >= max_size:
            if k == 0:
                break
            k -= 1
            nxt = stack[k] + 1
            continue
        s = nxt
        nxt = s + 1
        newsum = wsum[k] + w[s]
        if demand * newsum > budget + eps:
            continue
        newprod = prod[k] * fail[s]
        if newprod <= target + eps:
            stack[k] = s
            minimal = True
            for drop in range(k + 1):
                rest = 1.0
                for j in range(k + 1):
                    if j != drop:
                        rest *= fail[stack[j]]
                if rest <= target + eps:
                    minimal = False
                    break
            if minimal:
                if found == cap:
                    cap *= 2
                    grown = np.full((cap, width), -1, dtype=np.int32)
                    grown[:found] = out[:found]
                    out = grown
                    gs = np.zeros(cap, dtype=np.int64)
                    gs[:found] = sizes[:found]
                    sizes = gs
                    gc = np.zeros(cap, dtype=np.float64)
                    gc[:found] = costs[:found]
                    costs = gc
                for j in range(k + 1):
                    out[found, j] = stack[j]
                sizes[found] = k + 1
                costs[found] = demand * newsum
                found += 1
            # supersets of a QoS-satisfying set are never minimal
            continue
        if k + 1 < max_size:
            stack[k] = s
            prod[k + 1] = newprod
            wsum[k + 1] = newsum
            k += 1
    return out[:found], sizes[:found], costs[:found]


@jitable
def _fits(c, demand, cand_srv, cand_size, residual):
    for j in range(cand_size[c]):
        if residual[cand_srv[c, j]] < demand:
            return False
    return True


@jitable
def _completion_bound(depth, demand, cstart, cend, cand_srv, cand_size, cand_cost,
                      same_prev, choice, residual, res_total, need_suffix, reach_static,
                      servers_by_cost, unit_cost, reach):
    """Lower bound on the cost of assigning positions depth+1..U-1.

    Maximum of two relaxations: each remaining user alone on its cheapest
    candidate that still fits, and the cheapest way to absorb the total
    minimum replicated demand with residual capacity on reachable servers.
    Returns -1.0 when some user has nothing left that fits or the reachable
    capacity is too small.
    """
    n_pos = demand.shape[0]
    n_srv = residual.shape[0]
    need = need_suffix[depth + 1]
    if need > res_total:
        return -1.0
    for s in range(n_srv):
        reach[s] = False
    lb_single = 0.0
    prev_val = 0.0
    for q in range(depth + 1, n_pos):
        if q > depth + 1 and same_prev[q]:
            # same class and same start row as q - 1
            lb_single += prev_val
            continue
        in_run = q == depth + 1 and same_prev[q]
        start = choice[depth] if in_run else cstart[q]
        val = -1.0
        d = demand[q]
        for c in range(start, cend[q]):
            if _fits(c, d, cand_srv, cand_size, residual):
                if val < 0.0:
                    val = cand_cost[c]
                for j in range(cand_size[c]):
                    reach[cand_srv[c, j]] = True
                if not in_run:
                    break
        if val < 0.0:
            return -1.0
        if not in_run:
            for s in range(n_srv):
                if reach_static[q, s]:
                    reach[s] = True
        lb_single += val
        prev_val = val
    lb_fill = 0.0
    left = need
    for i in range(n_srv):
        s = servers_by_cost[i]
        if not reach[s] or residual[s] <= 0:
            continue
        take = residual[s] if residual[s] < left else left
        lb_fill += take * unit_cost[s]
        left -= take
        if left == 0:
            break
    if left > 0:
        return -1.0
    return lb_single if lb_single > lb_fill else lb_fill


@jitable
def _apply(c, sign, demand, cand_srv, cand_size, residual):
    for j in range(cand_size[c]):
        residual[cand_srv[c, j]] -= sign * demand
    return sign * demand * cand_size[c]


def bnb_search(demand, cstart, cend, cand_srv, cand_size, cand_cost, same_prev,
               static_rest, need_suffix, reach_static, servers_by_cost, unit_cost,
               residual, choice, next_try, path_cost, best_choice, istate, fstate,
               eps, node_budget):
    """Depth-first branch and bound over per-position candidate lists.

    Position q is the q-th user in branching order; its candidates are the
    rows ``cstart[q]:cend[q]`` sorted by (cost, server indices). Identical
    consecutive users (``same_prev``) take nondecreasing candidate rows,
    which drops permuted duplicates of the same solution.

    All search state lives in the passed arrays so the call can stop after
    ``node_budget`` child expansions and later resume where it left off.
    Returns FINISHED or PAUSED.
    """
    n_pos = demand.shape[0]
    reach = np.zeros(residual.shape[0], dtype=np.bool_)
    depth = istate[I_DEPTH]
    nodes = istate[I_NODES]
    res_total = istate[I_RES_TOTAL]
    stop_at = nodes + node_budget
    best = fstate[0]
    while depth >= 0:
        if depth == n_pos:
            if path_cost[n_pos] < best - eps:
                best = path_cost[n_pos]
                for q in range(n_pos):
                    best_choice[q] = choice[q]
                istate[I_HAS_INC] = 1
            depth -= 1
            res_total -= _apply(choice[depth], -1, demand[depth], cand_srv, cand_size, residual)
            continue
        d = demand[depth]
        c = next_try[depth]
        advanced = False
        while c < cend[depth]:
            if path_cost[depth] + cand_cost[c] + static_rest[depth + 1] >= best - eps:
                c = cend[depth]
                break
            if not _fits(c, d, cand_srv, cand_size, residual):
                c += 1
                continue
            if nodes >= stop_at:
                next_try[depth] = c
                istate[I_DEPTH] = depth
                istate[I_NODES] = nodes
                istate[I_RES_TOTAL] = res_total
                fstate[0] = best
                return PAUSED
            nodes += 1
            res_total -= _apply(c, 1, d, cand_srv, cand_size, residual)
            choice[depth] = c
            path_cost[depth + 1] = path_cost[depth] + cand_cost[c]
            next_try[depth] = c + 1
            if depth + 1 == n_pos:
                advanced = True
            else:
                lb = _completion_bound(depth, demand, cstart, cend, cand_srv, cand_size,
                                       cand_cost, same_prev, choice, residual, res_total,
                                       need_suffix, reach_static, servers_by_cost,
                                       unit_cost, reach)
                advanced = lb >= 0.0 and path_cost[depth + 1] + lb < best - eps
            if advanced:
                break
            res_total -= _apply(c, -1, d, cand_srv, cand_size, residual)
            c += 1
        if advanced:
            depth += 1
            if depth < n_pos:
                next_try[depth] = choice[depth - 1] if same_prev[depth] else cstart[depth]
            continue
        next_try[depth] = c
        depth -= 1
        if depth >= 0:
            res_total -= _apply(choice[depth], -1, demand[depth], cand_srv, cand_size, residual)
    istate[I_DEPTH] = -1
    istate[I_NODES] = nodes
    istate[I_RES_TOTAL] = res_total
    fstate[0] = best
    return FINISHED


def bruteforce_scan(n_users, n_servers, demand, budget, fail_allowed, unit_cost,
                    capacity, availability, multicast_bound, eps):
    """Exhaustive scan over every 0/1 matrix; bit u*S+s of the mask is x[u, s].

    Returns (best mask or -1, best cost). Ties keep the smallest mask.
    """
    n = n_users * n_servers
    best_mask = -1
    best_cost = np.inf
    load = np.zeros(n_servers, dtype=np.int64)
    for mask in range(1 << n):
        ok = True
        cost = 0.0
        for s in range(n_servers):
            load[s] = 0
        for u in range(n_users):
            cnt = 0
            spend = 0.0
            fail = 1.0
            for s in range(n_servers):
                if (mask >> (u * n_servers + s)) & 1:
                    cnt += 1
                    spend += demand[u] * unit_cost[s]
                    fail *= 1.0 - availability[s]
                    load[s] += demand[u]
            if cnt > multicast_bound or spend > budget[u] + eps or fail > fail_allowed[u] + eps:
                ok = False
                break
            cost += spend
        if not ok:
            continue
        for s in range(n_servers):
            if load[s] > capacity[s]:
                ok = False
                break
        if ok and cost < best_cost - eps:
            best_cost = cost
            best_mask = mask
    return best_mask, best_cost


def bruteforce_scan_numpy(n_users, n_servers, demand, budget, fail_allowed, unit_cost,
                          capacity, availability, multicast_bound, eps, chunk=1 << 14):
    """Vectorised twin of :func:`bruteforce_scan` for runs without numba."""
    n = n_users * n_servers
    shifts = np.arange(n, dtype=np.int64)
    best_mask, best_cost = -1, np.inf
    fail_s = 1.0 - availability
    for lo in range(0, 1 << n, chunk):
        masks = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        x = ((masks[:, None] >> shifts[None, :]) & 1).reshape(-1, n_users, n_servers)
        ok = x.sum(axis=2) <= multicast_bound
        spend = (x * unit_cost[None, None, :]).sum(axis=2) * demand[None, :]
        ok &= spend <= budget[None, :] + eps
        fail = np.where(x == 1, fail_s[None, None, :], 1.0).prod(axis=2)
        ok &= fail <= fail_allowed[None, :] + eps
        ok = ok.all(axis=1)
        load = (x * demand[None, :, None]).sum(axis=1)
        ok &= (load <= capacity[None, :]).all(axis=1)
        if not ok.any():
            continue
        cost = spend.sum(axis=1)
        cost[~ok] = np.inf
        i = int(np.argmin(cost))
        if cost[i] < best_cost - eps:
            best_cost = float(cost[i])
            best_mask = int(masks[i])
    return best_mask, best_cost


def enum_kernel():
    return dispatch(enum_minimal_subsets)


def bnb_kernel():
    return dispatch(bnb_search)


def bruteforce_kernel():
    fn = dispatch(bruteforce_scan)
    return bruteforce_scan_numpy if fn is bruteforce_scan else fn
