from shrinklat.linalg import Mat
from shrinklat.scalars import Rat


def random_unimodular(rng, n):
    """Product of random integer shears; det +-1 by construction."""
    m = Mat([[Rat(1) if i == j else Rat(0) for j in range(n)]
             for i in range(n)])
    for _ in range(8):
        i, j = rng.sample(range(n), 2)
        shear = [[Rat(1) if a == b else Rat(0) for b in range(n)]
                 for a in range(n)]
        shear[i][j] = Rat(rng.randint(-4, 4))
        m = m * Mat(shear)
    return m
