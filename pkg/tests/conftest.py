from __future__ import annotations

import io

import numpy as np
import pytest

from alphaledger.dataset import load_dataset


def census_csv(rows: int = 2000, seed: int = 7) -> str:
    """Synthetic census-style CSV with a few real effects baked in.

    Education shifts salary, marital status shifts age, and gender is
    independent of everything, so sessions produce a mix of rejections
    and acceptances.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    education_levels = ["hs", "bs", "ms", "phd"]
    lines = ["gender,education,married,salary,age"]
    for _ in range(rows):
        gender = "m" if rng.random() < 0.5 else "f"
        education = education_levels[rng.integers(0, 4)]
        married = "yes" if rng.random() < 0.55 else "no"
        base = 30000 + 12000 * education_levels.index(education)
        salary = base + rng.normal(0, 9000)
        age = 40 + (6 if married == "yes" else -6) + rng.normal(0, 9)
        lines.append(f"{gender},{education},{married},{salary:.0f},{age:.1f}")
    return "\n".join(lines) + "\n"


@pytest.fixture(scope="session")
def census_text() -> str:
    return census_csv()


@pytest.fixture(scope="session")
def census(census_text):
    return load_dataset(io.StringIO(census_text), name="census")
