import json

import numpy as np
import pytest

from core.exceptions import ArgumentError
from density.distributions import CategoricalProduct, Gaussian, MixedProduct, Mixture
from density.operations import log_densities
from density.serializers import from_document, load_group_matrix, load_models, to_document


def mixed_mixture():
    return Mixture([0.4, 0.6], [
        MixedProduct(Gaussian([0, 1], [[1, 0.2], [0.2, 2]]), CategoricalProduct([[0.3, 0.7]])),
        MixedProduct(Gaussian([2, -1], np.eye(2)), CategoricalProduct([[0.9, 0.1]])),
    ])


def test_document_layout():
    document = to_document(Gaussian([1, 2], [[2, 0.5], [0.5, 1]]))
    assert document == {'kind': 'gaussian', 'mean': [1.0, 2.0], 'cov': [[2.0, 0.5], [0.5, 1.0]]}


def test_nested_document_rebuilds_the_same_density():
    model = mixed_mixture()
    rebuilt = from_document(json.loads(json.dumps(to_document(model))))
    points = model.draw(np.random.default_rng(1), 25)
    np.testing.assert_allclose(log_densities(rebuilt, points), log_densities(model, points))


@pytest.mark.parametrize('document', [
    {'kind': 'gaussian', 'mean': [0.0], 'cov': [[-1.0]]},
    {'kind': 'catprod', 'probs': [[0.5, 0.6]]},
    {'kind': 'mixture', 'weights': [1.0], 'components': []},
    {'kind': 'beta', 'a': 1},
    ['not', 'an', 'object'],
])
def test_invalid_documents_raise_argument_error(document):
    with pytest.raises(ArgumentError):
        from_document(document)


def test_load_models_accepts_single_document(tmp_path):
    path = tmp_path / 'model.json'
    path.write_text(json.dumps(to_document(Gaussian(0, 1))))
    models = load_models(path)
    assert len(models) == 1 and isinstance(models[0], Gaussian)


def test_group_matrix_shapes(tmp_path):
    row = [to_document(Gaussian(0, 1)), to_document(Gaussian(2, 1))]
    flat = tmp_path / 'flat.json'
    flat.write_text(json.dumps(row))
    nested = tmp_path / 'nested.json'
    nested.write_text(json.dumps([row, row, row]))
    assert [len(r) for r in load_group_matrix(flat)] == [2]
    assert [len(r) for r in load_group_matrix(nested)] == [2, 2, 2]
