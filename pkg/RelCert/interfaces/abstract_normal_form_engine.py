from abc import ABC, abstractmethod

class AbstractNormalFormEngine(ABC):
    kind: str = None

    @classmethod
    def validate(cls, spec):
        pass

    @classmethod
    @abstractmethod
    def normal_form(cls, spec, word):
        pass
