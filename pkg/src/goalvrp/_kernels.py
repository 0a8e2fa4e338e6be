"""Compiled population evaluator.

Mirrors ``solution.decode`` + ``solution.evaluate`` operation for operation so
both paths produce bit-identical objective vectors.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _sorted_sum(values, count):
    buf = np.sort(values[:count])
    total = 0.0
    for i in range(count):
        total += buf[i]
    return total


@njit(cache=True)
def evaluate_batch(genes, visit_order, demand, window_start, ref, service, cost, capacity):
    pop, n = genes.shape
    out = np.empty((pop, 5))
    keys = np.empty(n, dtype=np.int64)
    route_dist = np.empty(n)
    route_wait = np.empty(n)
    route_delay = np.empty(n)
    for p in range(pop):
        for k in range(n):
            keys[k] = genes[p, visit_order[k] - 1]
        perm = np.argsort(keys, kind="mergesort")

        n_routes = 0
        makespan = 0.0
        k = 0
        while k < n:
            gene = keys[perm[k]]
            # one gene group; split into capacity-feasible consecutive chunks
            load = 0.0
            prev = 0
            t = 0.0
            dist = 0.0
            wait = 0.0
            delay = 0.0
            while k < n and keys[perm[k]] == gene:
                cust = visit_order[perm[k]]
                if prev != 0 and load + demand[cust] > capacity:
                    dist += cost[prev, 0]
                    t += cost[prev, 0]
                    route_dist[n_routes] = dist
                    route_wait[n_routes] = wait
                    route_delay[n_routes] = delay
                    n_routes += 1
                    if t > makespan:
                        makespan = t
                    load = 0.0
                    prev = 0
                    t = 0.0
                    dist = 0.0
                    wait = 0.0
                    delay = 0.0
                load += demand[cust]
                dist += cost[prev, cust]
                t += cost[prev, cust]
                w = window_start[cust] - t
                if w > 0.0:
                    wait += w
                d = t - ref[cust]
                if d > 0.0:
                    delay += d
                if t < window_start[cust]:
                    t = window_start[cust]
                t += service[cust]
                prev = cust
                k += 1
            dist += cost[prev, 0]
            t += cost[prev, 0]
            route_dist[n_routes] = dist
            route_wait[n_routes] = wait
            route_delay[n_routes] = delay
            n_routes += 1
            if t > makespan:
                makespan = t
        out[p, 0] = n_routes
        out[p, 1] = _sorted_sum(route_dist, n_routes)
        out[p, 2] = makespan
        out[p, 3] = _sorted_sum(route_wait, n_routes)
        out[p, 4] = _sorted_sum(route_delay, n_routes)
    return out
