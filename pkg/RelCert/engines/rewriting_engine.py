from ..interfaces.abstract_normal_form_engine import AbstractNormalFormEngine
from ..errors import NonConfluentSystemError, NonReducingRuleError, ResourceLimitError
from ..groups import format_word
from ..services.configuration_manager import ConfigurationManager

class RewritingEngine(AbstractNormalFormEngine):
    """
    Groups given by a rewriting system on the free group. Free cancellation is always
    applied; the user rules ``spec.params = ((lhs, rhs), ...)`` are applied at the leftmost
    match until no rule fires. Rules must shorten words unless the system is flagged
    confluent. Completion is not attempted, but every critical pair of the rules together
    with free cancellation must resolve to a common normal form or the system is rejected.
    """
    kind = "rewriting"

    @classmethod
    def validate(cls, spec):
        for lhs, rhs in spec.params:
            if not lhs:
                raise NonReducingRuleError(f"Rule with empty left-hand side in {spec.text}")
            if len(rhs) >= len(lhs) and not spec.confluent:
                raise NonReducingRuleError(
                    f"Rule of length {len(lhs)} -> {len(rhs)} is not length-reducing; mark the system 'confluent' to accept it")
        for word, left, right in cls.critical_pairs(spec):
            left, right = cls.normal_form(spec, left), cls.normal_form(spec, right)
            if left != right:
                raise NonConfluentSystemError(
                    f"{spec.text} is not confluent: {format_word(word, spec)} rewrites to both "
                    f"{format_word(left, spec)} and {format_word(right, spec)}")

    @staticmethod
    def _rules(spec):
        cancellations = [(((index, sign), (index, -sign)), ()) for index, sign in spec.letters()]
        return [(tuple(lhs), tuple(rhs)) for lhs, rhs in spec.params] + cancellations

    @classmethod
    def critical_pairs(cls, spec):
        """Each overlap or inclusion of two left-hand sides, as (word, one rewrite, the other rewrite)."""
        rules = cls._rules(spec)
        for first, (l1, r1) in enumerate(rules):
            for second, (l2, r2) in enumerate(rules):
                for k in range(1, min(len(l1), len(l2))):
                    if l1[-k:] == l2[:k]:
                        yield l1 + l2[k:], r1 + l2[k:], l1[:-k] + r2
                if first == second or len(l2) > len(l1):
                    continue
                for start in range(len(l1) - len(l2) + 1):
                    if l1[start:start + len(l2)] == l2:
                        yield l1, r1, l1[:start] + r2 + l1[start + len(l2):]

    @staticmethod
    def _cancel(word):
        stack = []
        for index, sign in word:
            if stack and stack[-1] == (index, -sign):
                stack.pop()
            else:
                stack.append((index, sign))
        return stack

    @classmethod
    def _rewrite_once(cls, word, rules):
        for start in range(len(word)):
            for lhs, rhs in rules:
                if tuple(word[start:start + len(lhs)]) == lhs:
                    return word[:start] + list(rhs) + word[start + len(lhs):]
        return None

    @classmethod
    def normal_form(cls, spec, word):
        cap = ConfigurationManager.get_setting("search", "max_cells")
        current = cls._cancel(word)
        for _ in range(cap):
            rewritten = cls._rewrite_once(current, spec.params)
            if rewritten is None:
                return tuple(current)
            current = cls._cancel(rewritten)
        raise ResourceLimitError(f"Rewriting did not terminate within {cap} steps in {spec.text}")
