from abc import ABC, abstractmethod

class AbstractCosetResolver(ABC):
    # recorded in saved coset spaces and accepted back by make_resolver
    name: str = ""

    @abstractmethod
    def canonical(self, component, word):
        """Canonical key of the coset word·H_component: its shortlex-least word."""
        pass
