import pytest

from fractalframes.lattice import DigitSet, ExpandingMatrix
from fractalframes.towers import Tower, TowerLevel


def em(rows):
    if isinstance(rows, int):
        rows = ((rows,),)
    return ExpandingMatrix(tuple(tuple(r) for r in rows))


def ds(values):
    return DigitSet.of(values)


def one_level_tower(r, b, l, kind="frame", mode="periodic"):
    return Tower(
        levels=(TowerLevel(em(r), ds(b), ds(l)),),
        kind=kind,
        mode=mode,
    )


@pytest.fixture
def quarter_tower():
    """Jorgensen-Pedersen quarter measure with its canonical Hadamard pair."""
    return one_level_tower(4, [0, 2], [0, 1])
