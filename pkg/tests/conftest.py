import math
from functools import lru_cache

import pytest

from stap_sim import dynamics, model
from stap_sim.model import Scheme, SchemeSpec

EPS = math.asin(0.25)


@lru_cache(maxsize=None)
def cached_run(scheme: Scheme, t_f: float = 10.0, upsilon: float = 0.0, m=None,
               open_system: bool = False, **rates):
    spec = SchemeSpec(scheme, t_f=t_f, m=m, **rates)
    if upsilon:
        spec = spec.with_decay(upsilon)
    return dynamics.run(spec, model.stap_protocol(spec), open_system=open_system)


@pytest.fixture
def fpt_spec():
    return SchemeSpec(Scheme.FPT)


@pytest.fixture
def fpt_closed():
    return cached_run(Scheme.FPT)
