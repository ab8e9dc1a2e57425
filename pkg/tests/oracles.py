"""Independent brute-force references used by the tests."""


def probe_edges(system):
    """Superposition edges by point probing.

    Assumes every endpoint and atom is an integer, so a positive-length
    overlap of ac parts always contains a half-integer.
    """
    lo, hi = system.window
    halves = [k + 0.5 for k in range(int(lo), int(hi))]
    edges = set()
    slots = system.slots
    for i, a in enumerate(slots):
        for b in slots[i + 1:]:
            sa, sb = a.klass, b.klass
            hit = any(sb.support().contains(x) for x in sa.pp_support.atoms)
            hit |= any(sa.support().contains(x) for x in sb.pp_support.atoms)
            hit |= any(sa.ac_support.contains(h) and sb.ac_support.contains(h) for h in halves)
            if hit:
                edges.add(frozenset((a.id, b.id)))
    return edges


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]
        yield [[first]] + part


def brute_force_min_partition(nodes, edges):
    best = len(nodes)
    for part in set_partitions(list(nodes)):
        if len(part) >= best:
            continue
        if all(frozenset((a, b)) not in edges
               for block in part for i, a in enumerate(block) for b in block[i + 1:]):
            best = len(part)
    return best
