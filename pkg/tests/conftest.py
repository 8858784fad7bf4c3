import random

import pytest

from rasched.rational import Frac
from rasched.model import Schedule, make_instance, scale_instance

EPS = Frac(1, 24)  # load cap 1 + R = 23/12 throughout the fixed-epsilon tests
CAP = Frac(23, 12)


def scaled_of(jobs, machines, *, guess=1, eps=EPS):
    """Build a ScaledInstance from (size, permitted) pairs in original order."""
    inst = make_instance(machines, [(Frac(s) if not hasattr(s, "numerator") else s, set(g))
                                    for s, g in jobs])
    return scale_instance(inst, guess, eps)


def schedule_of(scaled, assignment):
    sched = Schedule(scaled)
    for j, i in assignment.items():
        sched.assign(j, i)
    return sched


@pytest.fixture
def rng():
    return random.Random(20240811)
