"""Recursive-descent reader for group specification strings.

    free(g1,...,gk)
    abelian(n)
    cyclic-product(n1,...,nk)            0 means infinite cyclic; items may be named, e.g. a:2
    product(spec;spec;...)
    rewriting(g1,...,gk | lhs->rhs, ...) [confluent]
"""
from typing import List, Tuple
import re

from ..errors import GroupSpecSyntaxError, UnsupportedGroupKindError
from ..groups import Generator, GroupSpec, RESERVED_SYMBOLS, format_word, parse_word
from ..logging import PipelineLogger
from .engine_manager import EngineManager

_IDENTIFIER = re.compile(r'[A-Za-z_][A-Za-z0-9_]*')
_KIND = re.compile(r'[A-Za-z][A-Za-z-]*')
_INTEGER = re.compile(r'-?\d+')


class GroupSpecParser:
    _logger = PipelineLogger("spec_parser").get_logger()

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def parse(self) -> GroupSpec:
        spec = self._spec()
        self._skip_whitespace()
        if self.pos != len(self.text):
            self._fail("Unexpected trailing input")
        self._logger.debug(f"Parsed {self.text!r} as {spec.text}")
        return spec

    def _fail(self, message: str, position: int = None):
        raise GroupSpecSyntaxError(message, self.pos if position is None else position)

    def _skip_whitespace(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _expect(self, literal: str):
        self._skip_whitespace()
        if not self.text.startswith(literal, self.pos):
            self._fail(f"Expected {literal!r}")
        self.pos += len(literal)

    def _peek(self, literal: str) -> bool:
        self._skip_whitespace()
        return self.text.startswith(literal, self.pos)

    def _match(self, pattern, what: str) -> str:
        self._skip_whitespace()
        match = pattern.match(self.text, self.pos)
        if not match:
            self._fail(f"Expected {what}")
        self.pos = match.end()
        return match.group(0)

    def _identifier(self) -> str:
        start = self.pos
        symbol = self._match(_IDENTIFIER, "a generator symbol")
        if symbol in RESERVED_SYMBOLS:
            self._fail(f"Generator symbol {symbol!r} is reserved for the identity", start)
        return symbol

    def _integer(self) -> Tuple[int, int]:
        self._skip_whitespace()
        start = self.pos
        return int(self._match(_INTEGER, "an integer")), start

    def _identifier_list(self) -> List[str]:
        symbols = [self._identifier()]
        while self._peek(","):
            self._expect(",")
            symbols.append(self._identifier())
        return symbols

    def _spec(self) -> GroupSpec:
        self._skip_whitespace()
        start = self.pos
        kind = self._match(_KIND, "a group kind")
        builders = {
            "free": self._free,
            "abelian": self._abelian,
            "cyclic-product": self._cyclic_product,
            "product": self._product,
            "rewriting": self._rewriting,
        }
        if kind not in builders:
            raise UnsupportedGroupKindError(f"Unsupported group kind {kind!r} at offset {start}. Must be one of: {', '.join(builders)}")
        self._expect("(")
        spec = builders[kind](start)
        EngineManager.get_engine(spec.kind).validate(spec)
        return spec

    @staticmethod
    def _generators(symbols: List[str]) -> Tuple[Generator, ...]:
        return tuple(Generator(symbol, index) for index, symbol in enumerate(symbols))

    def _build(self, start: int, **kwargs) -> GroupSpec:
        try:
            return GroupSpec(**kwargs)
        except ValueError as error:
            self._fail(str(error), start)

    def _free(self, start: int) -> GroupSpec:
        symbols = self._identifier_list()
        self._expect(")")
        return self._build(start, kind="free", generators=self._generators(symbols), text=f"free({','.join(symbols)})")

    def _abelian(self, start: int) -> GroupSpec:
        rank, position = self._integer()
        if rank < 1:
            self._fail(f"Rank must be >= 1, got {rank}", position)
        self._expect(")")
        symbols = [f"x{i}" for i in range(1, rank + 1)]
        return self._build(start, kind="abelian", generators=self._generators(symbols), text=f"abelian({rank})")

    def _cyclic_item(self, number: int) -> Tuple[str, int]:
        self._skip_whitespace()
        if _IDENTIFIER.match(self.text, self.pos):
            symbol = self._identifier()
            self._expect(":")
        else:
            symbol = chr(ord("a") + number) if number < 26 else f"g{number + 1}"
        order, position = self._integer()
        if order < 0:
            self._fail(f"Cyclic orders must be >= 0, got {order}", position)
        return symbol, order

    def _cyclic_product(self, start: int) -> GroupSpec:
        items = [self._cyclic_item(0)]
        while self._peek(","):
            self._expect(",")
            items.append(self._cyclic_item(len(items)))
        self._expect(")")
        symbols = [symbol for symbol, _ in items]
        orders = tuple(order for _, order in items)
        text = f"cyclic-product({','.join(f'{s}:{n}' for s, n in items)})"
        return self._build(start, kind="cyclic-product", generators=self._generators(symbols), params=orders, text=text)

    def _product(self, start: int) -> GroupSpec:
        factors = [self._spec()]
        while self._peek(";"):
            self._expect(";")
            factors.append(self._spec())
        self._expect(")")
        if len(factors) < 2:
            self._fail("A product needs at least two factors", start)
        symbols = [g.symbol for factor in factors for g in factor.generators]
        text = f"product({';'.join(factor.text for factor in factors)})"
        return self._build(start, kind="product", generators=self._generators(symbols), params=tuple(factors), text=text)

    def _read_until(self, stops: Tuple[str, ...]) -> Tuple[str, int]:
        self._skip_whitespace()
        start = self.pos
        while self.pos < len(self.text) and not any(self.text.startswith(stop, self.pos) for stop in stops):
            self.pos += 1
        if self.pos == len(self.text):
            self._fail(f"Expected one of {', '.join(repr(s) for s in stops)}")
        return self.text[start:self.pos], start

    def _rewriting(self, start: int) -> GroupSpec:
        symbols = self._identifier_list()
        self._expect("|")
        free = self._build(start, kind="free", generators=self._generators(symbols), text=f"free({','.join(symbols)})")

        rules = []
        while True:
            lhs_text, lhs_position = self._read_until(("->",))
            self._expect("->")
            rhs_text, rhs_position = self._read_until((",", ")"))
            rules.append((self._rule_word(lhs_text, free, lhs_position), self._rule_word(rhs_text, free, rhs_position)))
            if self._peek(","):
                self._expect(",")
                continue
            self._expect(")")
            break

        confluent = False
        if self._peek("[confluent]"):
            self._expect("[confluent]")
            confluent = True
        elif self._peek("confluent"):
            self._expect("confluent")
            confluent = True

        rule_text = ", ".join(f"{format_word(lhs, free)}->{format_word(rhs, free)}" for lhs, rhs in rules)
        text = f"rewriting({','.join(symbols)} | {rule_text})" + (" confluent" if confluent else "")
        return self._build(start, kind="rewriting", generators=free.generators, params=tuple(rules), confluent=confluent, text=text)

    def _rule_word(self, text: str, free: GroupSpec, position: int):
        try:
            return parse_word(text, free)
        except ValueError as error:
            self._fail(str(error), position)
