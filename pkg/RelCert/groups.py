"""Finitely generated groups with canonical normal forms.

A word is a tuple of letters ``(generator_index, sign)`` with sign +1 or -1. Letters are
ordered by generator index, a generator before its inverse; words are compared shortlex.
Every supported group kind has a normal-form engine (see ``RelCert.engines``) that returns
the shortlex-least geodesic representative, so the length of a normal form is the word
metric distance to the identity.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple
import re

from .errors import ResourceLimitError, SpecMismatchError
from .logging import PipelineLogger
from .services.configuration_manager import ConfigurationManager

Letter = Tuple[int, int]
Word = Tuple[Letter, ...]

_logger = PipelineLogger("groups").get_logger()

_TOKEN = re.compile(r'([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$')
RESERVED_SYMBOLS = frozenset({"e"})


def letter_key(letter: Letter) -> Tuple[int, int]:
    return (letter[0], 0 if letter[1] > 0 else 1)


def shortlex_key(word: Word):
    return (len(word), tuple(letter_key(letter) for letter in word))


def invert_word(word: Word) -> Word:
    return tuple((index, -sign) for index, sign in reversed(word))


@dataclass(frozen=True)
class Generator:
    symbol: str
    index: int


@dataclass(frozen=True, eq=False)
class GroupSpec:
    kind: str
    generators: Tuple[Generator, ...]
    params: tuple = ()
    confluent: bool = False
    text: str = ""

    def __post_init__(self):
        symbols = [g.symbol for g in self.generators]
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"Generator symbols must be unique, got {symbols}")
        if not self.generators:
            raise ValueError("A group specification needs rank >= 1")

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __repr__(self):
        return f"GroupSpec({self.text})"

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def engine(self):
        from .services.engine_manager import EngineManager
        return EngineManager.get_engine(self.kind)

    def symbol_index(self) -> Dict[str, int]:
        return {g.symbol: g.index for g in self.generators}

    def letters(self) -> List[Letter]:
        """All generators and inverses in letter order."""
        return [(g.index, sign) for g in self.generators for sign in (1, -1)]

    def reduce(self, word: Word) -> Word:
        for index, _ in word:
            if not 0 <= index < self.rank:
                raise ValueError(f"Letter index {index} is not a generator of {self.text}")
        return tuple(self.engine.normal_form(self, tuple(word)))


@dataclass(frozen=True)
class Element:
    spec: GroupSpec = field(compare=False, repr=False)
    word: Word

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def normal_form(self) -> Word:
        return self.word

    def __mul__(self, other: "Element") -> "Element":
        _check_same_spec(self, other)
        return Element(self.spec, self.spec.reduce(self.word + other.word))

    def inverse(self) -> "Element":
        return Element(self.spec, self.spec.reduce(invert_word(self.word)))

    def is_identity(self) -> bool:
        return not self.word

    def sort_key(self):
        return shortlex_key(self.word)

    def __str__(self):
        return format_word(self.word, self.spec)


def _check_same_spec(g: Element, h: Element):
    if g.spec != h.spec:
        raise SpecMismatchError(f"Elements belong to different groups: {g.spec.text} vs {h.spec.text}")


def parse_group_spec(text: str) -> GroupSpec:
    from .services.spec_parser import GroupSpecParser
    return GroupSpecParser(text).parse()


def identity(spec: GroupSpec) -> Element:
    return Element(spec, ())


def normal_form(word: Iterable[Letter], spec: GroupSpec) -> Element:
    return Element(spec, spec.reduce(tuple(word)))


def element(spec: GroupSpec, text: str) -> Element:
    return normal_form(parse_word(text, spec), spec)


def distance(g: Element, h: Element) -> int:
    _check_same_spec(g, h)
    return (g.inverse() * h).length


def ball(spec: GroupSpec, radius: int, cap: Optional[int] = None) -> List[Element]:
    """All elements of word length <= radius, in shortlex order."""
    if radius < 0:
        raise ValueError(f"Radius must be non-negative, got {radius}")
    if cap is None:
        cap = ConfigurationManager.get_setting("search", "max_cells")

    letters = spec.letters()
    seen = {(): None}
    frontier = [()]
    for _ in range(radius):
        next_frontier = []
        for word in frontier:
            for letter in letters:
                candidate = spec.reduce(word + (letter,))
                if candidate in seen:
                    continue
                seen[candidate] = None
                next_frontier.append(candidate)
                if len(seen) > cap:
                    raise ResourceLimitError(f"Ball of radius {radius} in {spec.text} exceeds the element cap {cap}")
        frontier = next_frontier

    _logger.debug(f"ball({spec.text}, {radius}) has {len(seen)} elements")
    return [Element(spec, word) for word in sorted(seen, key=shortlex_key)]


def sphere_letters(spec: GroupSpec) -> List[Element]:
    """Generators and their inverses as elements, in letter order."""
    return [normal_form((letter,), spec) for letter in spec.letters()]


def parse_word(text: str, spec: GroupSpec) -> Word:
    """Read 'a*b^-1*a^2' (or whitespace separated tokens); 'e' and '1' are the empty word."""
    symbols = spec.symbol_index()
    stripped = text.strip()
    if stripped in ("", "e", "1"):
        return ()
    letters: List[Letter] = []
    for token in re.split(r'[\s*]+', stripped):
        if not token:
            continue
        match = _TOKEN.match(token)
        if not match or match.group(1) not in symbols:
            raise ValueError(f"Unknown token {token!r} in word {text!r} for {spec.text}")
        index = symbols[match.group(1)]
        power = int(match.group(2)) if match.group(2) is not None else 1
        sign = 1 if power > 0 else -1
        letters.extend([(index, sign)] * abs(power))
    return tuple(letters)


def format_word(word: Word, spec: GroupSpec) -> str:
    if not word:
        return "e"
    tokens = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        index, sign = word[i]
        power = (j - i) * sign
        symbol = spec.generators[index].symbol
        tokens.append(symbol if power == 1 else f"{symbol}^{power}")
        i = j
    return "*".join(tokens)
