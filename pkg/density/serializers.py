"""
JSON documents for density models.

    {"kind": "gaussian", "mean": [...], "cov": [[...], ...]}     (row-major)
    {"kind": "catprod", "probs": [[...], ...]}
    {"kind": "mixed", "continuous": {gaussian}, "discrete": {catprod}}
    {"kind": "mixture", "weights": [...], "components": [{...}, ...]}
"""

import json
from pathlib import Path
from typing import Any, Dict, List

from rest_framework import serializers

from core.exceptions import ArgumentError, UnderlapError
from density.distributions import (
    CategoricalProduct,
    DensityModel,
    Gaussian,
    MixedProduct,
    Mixture,
)


class DensityDocumentSerializer(serializers.Serializer):
    """Base serializer: validates a document and builds the model in validate()"""

    kind = serializers.CharField()
    expected_kind = None

    def validate_kind(self, value):
        if value != self.expected_kind:
            raise serializers.ValidationError(f"expected kind '{self.expected_kind}', got '{value}'")
        return value

    def validate(self, attrs):
        try:
            attrs['model'] = self.build(attrs)
        except UnderlapError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs

    def build(self, attrs) -> DensityModel:
        raise NotImplementedError

    def create(self, validated_data) -> DensityModel:
        return validated_data['model']


class GaussianSerializer(DensityDocumentSerializer):
    expected_kind = Gaussian.kind

    mean = serializers.ListField(child=serializers.FloatField(), min_length=1)
    cov = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()))

    def build(self, attrs):
        return Gaussian(attrs['mean'], attrs['cov'])

    def to_representation(self, instance: Gaussian):
        return {
            'kind': Gaussian.kind,
            'mean': instance.mean.tolist(),
            'cov': instance.cov.tolist(),
        }


class CategoricalProductSerializer(DensityDocumentSerializer):
    expected_kind = CategoricalProduct.kind

    probs = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(min_value=0.0), min_length=2),
        min_length=1,
    )

    def build(self, attrs):
        return CategoricalProduct(attrs['probs'])

    def to_representation(self, instance: CategoricalProduct):
        return {
            'kind': CategoricalProduct.kind,
            'probs': [vector.tolist() for vector in instance.probs],
        }


class MixedProductSerializer(DensityDocumentSerializer):
    expected_kind = MixedProduct.kind

    continuous = GaussianSerializer()
    discrete = CategoricalProductSerializer()

    def build(self, attrs):
        return MixedProduct(attrs['continuous']['model'], attrs['discrete']['model'])

    def to_representation(self, instance: MixedProduct):
        return {
            'kind': MixedProduct.kind,
            'continuous': GaussianSerializer(instance.continuous).data,
            'discrete': CategoricalProductSerializer(instance.discrete).data,
        }


class MixtureSerializer(DensityDocumentSerializer):
    expected_kind = Mixture.kind

    weights = serializers.ListField(child=serializers.FloatField(min_value=0.0), min_length=1)
    components = serializers.ListField(child=serializers.DictField(), min_length=1)

    def build(self, attrs):
        return Mixture(attrs['weights'], [from_document(doc) for doc in attrs['components']])

    def to_representation(self, instance: Mixture):
        return {
            'kind': Mixture.kind,
            'weights': instance.weights.tolist(),
            'components': [to_document(component) for component in instance.components],
        }


SERIALIZERS = {
    Gaussian.kind: GaussianSerializer,
    CategoricalProduct.kind: CategoricalProductSerializer,
    MixedProduct.kind: MixedProductSerializer,
    Mixture.kind: MixtureSerializer,
}


def to_document(model: DensityModel) -> Dict[str, Any]:
    return SERIALIZERS[model.kind](model).data


def from_document(document: Dict[str, Any]) -> DensityModel:
    if not isinstance(document, dict):
        raise ArgumentError("a density document must be a JSON object")
    serializer_class = SERIALIZERS.get(document.get('kind'))
    if serializer_class is None:
        raise ArgumentError(
            f"unknown density kind {document.get('kind')!r}; expected one of {sorted(SERIALIZERS)}"
        )
    serializer = serializer_class(data=document)
    if not serializer.is_valid():
        raise ArgumentError(f"invalid {document['kind']} document: {serializer.errors}")
    return serializer.save()


def load_models(path) -> List[DensityModel]:
    """Read a JSON file holding one density document or a list of them"""
    payload = json.loads(Path(path).read_text())
    documents = payload if isinstance(payload, list) else [payload]
    return [from_document(doc) for doc in documents]


def load_group_matrix(path) -> List[List[DensityModel]]:
    """
    Read group densities for UNL estimation.

    A flat list of documents is one set of K groups; a list of lists is an
    S x K matrix, one row per posterior draw.
    """
    payload = json.loads(Path(path).read_text())
    if not isinstance(payload, list) or not payload:
        raise ArgumentError(f"{path} must hold a nonempty JSON list of density documents")
    rows = payload if isinstance(payload[0], list) else [payload]
    return [[from_document(doc) for doc in row] for row in rows]
