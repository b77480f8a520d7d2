import numpy as np
import pytest

from smokeintent.schema import load_builtin_catalog, loads_catalog

TINY_SCHEMA = """\
catalog tinytest
version 0.1

[P1]
text = First predictor
role = predictor
kind = single-choice
code 1 = a
code 2 = b
code 3 = c

[P2]
text = Second predictor
role = predictor
kind = single-choice
code 1 = low
code 2 = high

[M1]
text = Multi predictor
role = predictor
kind = multi-select
code 1 = opt one
code 2 = opt two

[C1]
text = Ever tried it?
role = cohort-non-smoker
kind = single-choice
code 1 = Yes
code 2 = No
keep = 2

[T1]
text = Will you try it soon?
role = target
kind = single-choice
code 1 = Definitely yes
code 2 = Probably yes
code 3 = Probably not
code 4 = Definitely not
yes = 1 2
no = 3 4

[T2]
text = Will you use it next year?
role = target
kind = single-choice
code 1 = Definitely yes
code 2 = Probably yes
code 3 = Probably not
code 4 = Definitely not
yes = 1 2
no = 3 4
"""


@pytest.fixture(scope="session")
def nyts_catalog():
    return load_builtin_catalog("nyts2018")


@pytest.fixture()
def tiny_catalog():
    return loads_catalog(TINY_SCHEMA)


def random_categorical(rng: np.random.Generator, n_rows: int, n_features: int, max_codes: int = 4):
    """Random integer-code matrix with per-feature arity in [2, max_codes]."""
    arities = rng.integers(2, max_codes + 1, size=n_features)
    columns = [rng.integers(1, a + 1, size=n_rows) for a in arities]
    return np.column_stack(columns).astype(np.int64)


def conflict_free_labels(rng: np.random.Generator, X: np.ndarray) -> np.ndarray:
    """Labels from a random function of the full feature tuple, so identical
    rows always share a label (the dataset is conflict-free by construction)."""
    table: dict[tuple, int] = {}
    y = np.empty(len(X), dtype=np.int64)
    for i, row in enumerate(X):
        key = tuple(int(v) for v in row)
        if key not in table:
            table[key] = int(rng.integers(0, 2))
        y[i] = table[key]
    return y
