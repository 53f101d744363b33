from .services.configuration_manager import ConfigurationManager
from .services.engine_manager import EngineManager
from .logging import PipelineLogger
from typing import Optional
import time

class Orchestrator:
    def __init__(self, config_dir: Optional[str] = None, verbosity: Optional[int] = None):
        self.configuration_manager = None
        self.engine_manager = None
        self.logger = None
        self.initialize(config_dir, verbosity)

    def initialize(self, config_dir: Optional[str] = None, verbosity: Optional[int] = None):
        self.init_configuration_manager(config_dir)
        self.init_engine_manager()
        self.init_logging(verbosity)

    def init_configuration_manager(self, config_dir: Optional[str] = None):
        self.configuration_manager = ConfigurationManager.initialize(config_dir)
        self._wait_for_completion(self.configuration_manager.is_initialized, "ConfigurationManager")

    def init_engine_manager(self):
        if not self.configuration_manager:
            raise RuntimeError("ConfigurationManager must be initialized before EngineManager")
        self.engine_manager = EngineManager.initialize(self.configuration_manager)
        self._wait_for_completion(self.engine_manager.is_initialized, "EngineManager")

    def init_logging(self, verbosity: Optional[int] = None):
        settings = self.configuration_manager.get_section("logging")
        self.logger = PipelineLogger.from_settings(settings, verbosity).get_logger()

    def _wait_for_completion(self, check_func, component_name, timeout=10, interval=0.1):
        start_time = time.time()
        while time.time() - start_time < timeout:
            if check_func():
                return
            time.sleep(interval)
        raise TimeoutError(f"{component_name} initialization timed out.")

    def get_config_manager(self):
        return self.configuration_manager

    def get_engine_manager(self):
        return self.engine_manager
