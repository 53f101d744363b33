from ..interfaces.abstract_normal_form_engine import AbstractNormalFormEngine

class AbelianEngine(AbstractNormalFormEngine):
    """Free abelian groups: a word collapses to its exponent vector, written x1^e1 x2^e2 ..."""
    kind = "abelian"

    @classmethod
    def exponents(cls, spec, word):
        vector = [0] * spec.rank
        for index, sign in word:
            vector[index] += sign
        return vector

    @classmethod
    def normal_form(cls, spec, word):
        letters = []
        for index, exponent in enumerate(cls.exponents(spec, word)):
            sign = 1 if exponent > 0 else -1
            letters.extend([(index, sign)] * abs(exponent))
        return tuple(letters)
