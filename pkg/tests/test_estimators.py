import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from packclass.estimators import Defragmenter, OrthogonalPacker, StripPacker, check_modules
from packclass.geometry import Container, Layout, ModuleSpec, validate_layout
from packclass.harness import bundled_scenarios


def test_check_modules_validation():
    ms = check_modules([[2, 3], [1, 1]])
    assert [(m.id, m.width, m.height) for m in ms] == [("M1", 2, 3), ("M2", 1, 1)]
    assert check_modules(np.empty((0, 2))) == []
    for bad in ([[0, 1]], [[1.5, 2]], [[1, 2, 3]], [[np.nan, 1]]):
        with pytest.raises(ValueError):
            check_modules(bad)
    with pytest.raises(ValueError):
        check_modules([[1, 1]], ids=["a", "b"])
    with pytest.raises(ValueError):
        check_modules([ModuleSpec("a", 1, 1), ModuleSpec("a", 2, 2)])


def test_orthogonal_packer():
    est = OrthogonalPacker(width=3, height=3).fit([[2, 2], [2, 2]])
    assert not est.feasible_ and est.positions_ is None
    assert (est.predict([[2, 2], [2, 2]]) == -1).all()
    est = OrthogonalPacker(width=2, height=3).fit([[2, 3]])
    assert est.feasible_ and est.positions_.tolist() == [[0, 0]]
    # predicting a different set refits
    assert OrthogonalPacker(width=4, height=4).fit([[1, 1]]).predict([[2, 2], [2, 2]]).shape == (2, 2)


def test_strip_packer_transform():
    X = [[3, 4], [2, 2], [2, 2], [1, 3]]
    est = StripPacker(height=4)
    pos = est.fit_transform(X)
    assert est.width_ == 6 and pos.shape == (4, 2)
    boxes = [(x, y, w, h) for (x, y), (w, h) in zip(pos, X)]
    assert all(x + w <= 6 and y + h <= 4 for x, y, w, h in boxes)


def test_get_params_and_clone():
    est = StripPacker(height=7, node_budget=10)
    assert est.get_params() == {"height": 7, "node_budget": 10, "time_budget": est.time_budget}
    again = clone(est)
    assert again.get_params() == est.get_params() and not hasattr(again, "width_")
    with pytest.raises(NotFittedError):
        again.transform([[1, 1]])


def test_defragmenter_on_fixture():
    a = next(s for s in bundled_scenarios() if s.name == "A").initial
    est = Defragmenter().fit(a)
    assert est.width_ == 11 and est.after_.free_column_count == 2
    out = est.transform(a)
    assert validate_layout(out) == [] and out.used_width() <= 11
    with pytest.raises(TypeError):
        Defragmenter().fit([[1, 1]])
    overlap = Layout.build(Container(3, 3), [(ModuleSpec("a", 2, 2), 0, 0)]).with_placement(ModuleSpec("b", 2, 2), 1, 1)
    with pytest.raises(ValueError):
        Defragmenter().fit(overlap)
