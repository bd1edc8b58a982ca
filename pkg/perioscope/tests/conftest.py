import pytest

from ..continuation import ContinuationConfig
from ..models import make_problem


@pytest.fixture
def fast_config():
    """Continuation settings on a coarse grid, enough for 1e-8 agreement on smooth problems."""
    return ContinuationConfig(grid_N=512, newton_iters=4, delta_xi=0.25)


@pytest.fixture
def lazer_solimini_unforced():
    return make_problem('lazer_solimini', c=0.5, T=1.0, e=0.0, p=1.0, name='ls-unforced')


@pytest.fixture
def fig1_problem():
    return make_problem('lazer_solimini', c=0.5, T=1.2, e='6*sin(2*pi*t/1.2)', p=0.5, name='fig1')


@pytest.fixture
def fig2_problem():
    return make_problem('mems', c=0.5, T=0.8, e='5*sin(2*pi*t/0.8)', b=2.0, p=3.0,
                        a='2 + cos(2*pi*t/0.8)^3', name='fig2')


@pytest.fixture
def fig3_problem():
    return make_problem('condensed_matter', c=0.3, T=1.0, e='8*cos(2*pi*t)', a=3.0, name='fig3')
