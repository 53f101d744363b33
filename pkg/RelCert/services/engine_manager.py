from ..engines import AbelianEngine, CyclicProductEngine, FreeEngine, ProductEngine, RewritingEngine
from ..interfaces.abstract_normal_form_engine import AbstractNormalFormEngine
from ..errors import UnsupportedGroupKindError
from typing import Dict, List, Type

class EngineManager:
    _engines: Dict[str, Type[AbstractNormalFormEngine]] = {
        "free": FreeEngine,
        "abelian": AbelianEngine,
        "cyclic-product": CyclicProductEngine,
        "product": ProductEngine,
        "rewriting": RewritingEngine,
    }
    _is_initialized = False

    @classmethod
    def initialize(cls, config_manager=None):
        cls._configuration_manager = config_manager
        cls._is_initialized = True
        return cls

    @classmethod
    def is_initialized(cls):
        return cls._is_initialized

    @classmethod
    def get_engine(cls, kind: str) -> Type[AbstractNormalFormEngine]:
        try:
            return cls._engines[kind]
        except KeyError:
            raise UnsupportedGroupKindError(f"Unsupported group kind {kind!r}. Must be one of: {', '.join(cls._engines)}")

    @classmethod
    def get_kinds(cls) -> List[str]:
        return list(cls._engines)

    @classmethod
    def register_engine(cls, engine: Type[AbstractNormalFormEngine]):
        if not issubclass(engine, AbstractNormalFormEngine) or not engine.kind:
            raise ValueError(f"{engine} is not a normal-form engine with a kind")
        cls._engines[engine.kind] = engine
