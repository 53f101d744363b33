from ..interfaces.abstract_normal_form_engine import AbstractNormalFormEngine

class CyclicProductEngine(AbstractNormalFormEngine):
    """
    Free products of cyclic groups. ``spec.params`` holds one order per generator, 0 for
    infinite cyclic. A word is a sequence of syllables g^k with neighbouring syllables on
    different generators; each exponent is reduced to the representative of least absolute
    value modulo the order, the positive one when n is even and k = n/2.
    """
    kind = "cyclic-product"

    @classmethod
    def validate(cls, spec):
        if len(spec.params) != spec.rank:
            raise ValueError(f"Expected {spec.rank} orders, got {len(spec.params)}")
        for order in spec.params:
            if order < 0:
                raise ValueError(f"Cyclic orders must be >= 0, got {order}")

    @staticmethod
    def reduce_exponent(exponent: int, order: int) -> int:
        if order == 0:
            return exponent
        residue = exponent % order
        if 2 * residue > order:
            residue -= order
        return residue

    @classmethod
    def syllables(cls, spec, word):
        orders = spec.params
        stack = []
        for index, sign in word:
            if stack and stack[-1][0] == index:
                exponent = cls.reduce_exponent(stack[-1][1] + sign, orders[index])
                if exponent == 0:
                    stack.pop()
                else:
                    stack[-1] = (index, exponent)
            else:
                exponent = cls.reduce_exponent(sign, orders[index])
                if exponent != 0:
                    stack.append((index, exponent))
        return stack

    @classmethod
    def normal_form(cls, spec, word):
        letters = []
        for index, exponent in cls.syllables(spec, word):
            sign = 1 if exponent > 0 else -1
            letters.extend([(index, sign)] * abs(exponent))
        return tuple(letters)
