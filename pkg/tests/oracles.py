"""Independent brute-force oracles used by the syntomic and acceptance tests.

Nothing here imports the engine."""
import itertools
from math import gcd, log


def _plog(n, p):
    k = round(log(n, p))
    assert p**k == n
    return k


def fixed_point_oracle(p, e, j):
    """x -> x - phi(x) on F_p[z]/z^(e j), phi(z) = z^p, constants fixed.

    Returns (log_p |kernel|, log_p |cokernel|)."""
    n = e * j
    elems = list(itertools.product(range(p), repeat=n))

    def phi(x):
        out = [0] * n
        for k, c in enumerate(x):
            if c and p * k < n:
                out[p * k] = (out[p * k] + c) % p
        return tuple(out)

    image = set()
    ker = 0
    for x in elems:
        y = tuple((a - b) % p for a, b in zip(x, phi(x)))
        image.add(y)
        ker += not any(y)
    return _plog(ker, p), _plog(len(elems) // len(image), p)


def unit_group_p_part(n, p):
    """Invariant factors of the p-Sylow subgroup of (Z/n)^x, by counting
    elements of order dividing p^k."""
    units = [a for a in range(1, n) if gcd(a, n) == 1]

    def order(a):
        k, x = 1, a
        while x != 1:
            x = x * a % n
            k += 1
        return k

    orders = [order(a) for a in units]
    counts = []
    k = 0
    while True:
        c = sum(1 for o in orders if (p**k) % o == 0)
        counts.append(c)
        if k and c == counts[-2]:
            break
        k += 1
    # number of cyclic factors of order >= p^k is log_p(counts[k] / counts[k-1])
    ge = [_plog(counts[k] // counts[k - 1], p) for k in range(1, len(counts))]
    factors = []
    for k in range(1, len(ge) + 1):
        exact = ge[k - 1] - (ge[k] if k < len(ge) else 0)
        factors += [p**k] * exact
    return sorted(factors)
