def random_monotone(rng, d, skew=1.0, psd_rank=None):
    """Random matrix with positive semidefinite symmetric part."""
    k = d if psd_rank is None else psd_rank
    B = rng.normal(size=(d, k))
    S = rng.normal(size=(d, d))
    return B @ B.T + skew * (S - S.T)


# acceptance lines collected during the run and printed in the terminal summary
ACCEPTANCE = {}


def record(n: int, ok: bool, text: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {text}"
    ACCEPTANCE.setdefault(n, []).append((ok, line))
    print(line)
