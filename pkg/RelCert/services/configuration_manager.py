from . import helpers
from typing import Any, Dict, List, Optional
from ..logging import PipelineLogger
from pathlib import Path
from dataclasses import dataclass, field
from functools import wraps
import json
import os

@dataclass
class MainConfig:
    sections: List[str] = None
    section_config_file_names: Dict[str, str] = field(default_factory=dict)
    max_cells_env_var: str = "RELCERT_MAX_CELLS"
    config_dir: Optional[str] = None
    main_config_file_name: str = "main_config.json"
    main_config_path: Optional[Path] = None

    def __post_init__(self):
        if self.config_dir is None:
            self.config_dir: Path = Path(__file__).parent.parent.parent.resolve() / "config"
        else:
            self.config_dir = Path(self.config_dir)

        self.main_config_path = self.config_dir / self.main_config_file_name

class ConfigurationManager:
    _is_initialized = False
    _logger = PipelineLogger("configuration").get_logger()
    _main_config: MainConfig = None
    section_configs: Dict[str, Dict[str, Any]] = {}

    @classmethod
    def initialize(cls, config_dir: Optional[str] = None):
        cls._initialize_main_config(config_dir)
        cls._setup_main_config()
        cls._setup_section_configs()
        cls._apply_environment_overrides()
        cls._is_initialized = True
        return cls

    @classmethod
    def is_initialized(cls):
        return cls._is_initialized

    @classmethod
    def ensure_initialized(cls):
        if not cls._is_initialized:
            cls.initialize()
        return cls

    @classmethod
    def _initialize_main_config(cls, config_dir: Optional[str]):
        cls._main_config = MainConfig(config_dir=config_dir)

    @classmethod
    def _setup_main_config(cls):
        main_config_path = cls._main_config.main_config_path

        cls._logger.info(f"Looking for file at {main_config_path}")

        if not main_config_path.exists():
            cls._logger.error(f"Main config file not found at {main_config_path}")
            raise FileNotFoundError(f"Main config file not found at {main_config_path}")

        config_variables = helpers.load_json(main_config_path)
        cls._main_config.sections = config_variables["sections"]
        cls._main_config.section_config_file_names = config_variables["section_config_file_names"]
        cls._main_config.max_cells_env_var = config_variables.get("max_cells_env_var", "RELCERT_MAX_CELLS")

    @classmethod
    def _setup_section_configs(cls):
        cls.section_configs = {}
        for section, file_name in cls._main_config.section_config_file_names.items():
            section_path = cls._main_config.config_dir / file_name

            if not section_path.exists():
                cls._logger.error(f"Configuration file for {section} could not be found at {section_path}")
                raise FileNotFoundError(f"Configuration file for {section} could not be found at {section_path}")

            cls._logger.info(f"Loading configuration file for {section} from {section_path}")
            cls.section_configs[section] = helpers.load_json(section_path)

    @classmethod
    def _apply_environment_overrides(cls):
        raw = os.environ.get(cls._main_config.max_cells_env_var)
        if raw is None:
            return
        try:
            cells = int(raw)
        except ValueError:
            raise ValueError(f"{cls._main_config.max_cells_env_var} must be an integer, got {raw!r}.")
        if cells < 1:
            raise ValueError(f"{cls._main_config.max_cells_env_var} must be positive, got {cells}.")
        cls._logger.info(f"Element cap overridden from environment: {cells}")
        cls.section_configs["search"]["max_cells"] = cells

    def validate_section(func):
        @wraps(func)
        def wrapper(cls, section, *args, **kwargs):
            cls.ensure_initialized()
            if section not in cls._main_config.sections:
                raise KeyError(f"Invalid section {section}. Section must be one of: {', '.join(cls._main_config.sections)}")
            return func(cls, section, *args, **kwargs)
        return wrapper

    @classmethod
    @validate_section
    def get_setting(cls, section, key):
        try:
            return cls.section_configs[section][key]
        except KeyError:
            raise KeyError(f"Setting {key} not found in section {section}.")

    @classmethod
    @validate_section
    def update_setting(cls, section, key, value):
        if key not in cls.section_configs[section]:
            raise KeyError(f"Setting {key} not found in section {section}.")
        cls.section_configs[section][key] = value

    @classmethod
    @validate_section
    def get_section(cls, section):
        return dict(cls.section_configs[section])

    @classmethod
    @validate_section
    def print_section(cls, section):
        print(json.dumps(cls.section_configs[section], indent=4))

    @classmethod
    def get_sections(cls):
        cls.ensure_initialized()
        return list(cls._main_config.sections)

    @classmethod
    @validate_section
    def save_config_to_disk(cls, section):
        file_name = cls._main_config.section_config_file_names[section]
        section_path = cls._main_config.config_dir / file_name
        helpers.save_json(cls.section_configs[section], section_path)
