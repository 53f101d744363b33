from abc import ABC, abstractmethod

class AbstractSpaceAction(ABC):

    @abstractmethod
    def act(self, g, x):
        pass

    @abstractmethod
    def distance(self, x, y):
        pass

    @property
    @abstractmethod
    def basepoint(self):
        pass
