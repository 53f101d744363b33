from ..interfaces.abstract_normal_form_engine import AbstractNormalFormEngine

class FreeEngine(AbstractNormalFormEngine):
    kind = "free"

    @classmethod
    def normal_form(cls, spec, word):
        stack = []
        for index, sign in word:
            if stack and stack[-1] == (index, -sign):
                stack.pop()
            else:
                stack.append((index, sign))
        return tuple(stack)
