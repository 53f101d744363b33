from ..interfaces.abstract_normal_form_engine import AbstractNormalFormEngine

class ProductEngine(AbstractNormalFormEngine):
    """Direct products. The generating set is the union of the factors' generators, so the
    length of an element is the sum of the lengths of its factor components."""
    kind = "product"

    @classmethod
    def offsets(cls, spec):
        offsets, start = [], 0
        for factor in spec.params:
            offsets.append(start)
            start += factor.rank
        return offsets

    @classmethod
    def validate(cls, spec):
        if len(spec.params) < 2:
            raise ValueError("A product needs at least two factors")
        if sum(factor.rank for factor in spec.params) != spec.rank:
            raise ValueError(f"Factor ranks do not add up to the rank of {spec.text}")

    @classmethod
    def normal_form(cls, spec, word):
        offsets = cls.offsets(spec)
        parts = [[] for _ in spec.params]
        for index, sign in word:
            position = max(i for i, start in enumerate(offsets) if start <= index)
            parts[position].append((index - offsets[position], sign))

        letters = []
        for factor, start, part in zip(spec.params, offsets, parts):
            letters.extend((index + start, sign) for index, sign in factor.reduce(tuple(part)))
        return tuple(letters)
