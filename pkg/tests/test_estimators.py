import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from cadlag.errors import DomainError
from cadlag.estimators import (FunctionalTransformer, LimitLawGoodnessOfFit, ModulusTransformer,
                               SkorokhodDistance, check_paths)
from cadlag.harness import ExperimentConfig, simulate_functional
from cadlag.paths import CadlagPath

ind = CadlagPath.indicator
PATHS = [ind(0.3), ind(0.4), CadlagPath.step([0, 0.5], [0, 2], 2.0)]


def test_check_paths():
    assert check_paths(PATHS) == tuple(PATHS)
    with pytest.raises(DomainError):
        check_paths(ind(0.3))
    with pytest.raises(DomainError):
        check_paths([])
    with pytest.raises(DomainError):
        check_paths([ind(0.3), 1.0])


def test_functional_transformer():
    out = FunctionalTransformer("sup").fit_transform(PATHS)
    assert out.shape == (3, 1) and out.ravel().tolist() == [1.0, 1.0, 2.0]
    with pytest.raises(DomainError):
        FunctionalTransformer("median").fit(PATHS)


def test_modulus_transformer():
    out = ModulusTransformer(delta=0.1, kind="w").fit_transform(PATHS)
    assert np.array_equal(out, [[1, 0], [1, 0], [2, 0]])
    tent = CadlagPath.linear([0, 0.5, 1], [0, 1, 0])
    val, err = ModulusTransformer(delta=0.2).fit_transform([tent])[0]
    assert abs(val - 0.5) <= err + 1e-12
    with pytest.raises(DomainError):
        ModulusTransformer(kind="w3").fit(PATHS)


def test_distance_matrix():
    est = SkorokhodDistance(kind="d").fit(PATHS[:2])
    D = est.transform(PATHS)
    assert D.shape == (3, 2)
    assert D[0, 0] == 0 and D[0, 1] == pytest.approx(0.1) and D[1, 0] == pytest.approx(0.1)
    Dc = SkorokhodDistance(kind="dcirc").fit(PATHS[:2]).transform(PATHS[:1])
    assert Dc[0, 1] == pytest.approx(math.log(4 / 3))
    assert SkorokhodDistance(kind="uniform").fit(PATHS[:1]).transform(PATHS[1:2])[0, 0] == 1
    with pytest.raises(DomainError):
        SkorokhodDistance(kind="j2").fit(PATHS)


def test_params_and_clone():
    est = SkorokhodDistance(kind="dcirc", mode="grid")
    assert clone(est).get_params() == est.get_params()
    assert est.set_params(kind="d").kind == "d"


def test_pipeline():
    pipe = make_pipeline(FunctionalTransformer("sup_abs"))
    assert pipe.fit_transform(PATHS).ravel().tolist() == [1.0, 1.0, 2.0]


def test_goodness_of_fit():
    values = simulate_functional(ExperimentConfig.preset("donsker-sup", n=200, replicas=5000))
    gof = LimitLawGoodnessOfFit("wiener-sup", tolerance=0.04).fit(values)
    assert gof.n_samples_ == 5000 and gof.passed_ and gof.ks_ <= 0.04
    assert gof.score(values) == -gof.ks_
    assert gof.predict([1.0])[0] == pytest.approx(0.682689492137)
    with pytest.raises(DomainError):
        LimitLawGoodnessOfFit("cauchy").fit(values)
