import logging
import re
from typing import Any, Dict, Mapping, Optional, Union

FormatterConfig = Union[None, str, Dict[str, Any], logging.Formatter]

DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class PipelineLogger:
    """
    Loggers for the package: one child of ``RelCert`` per module, configured once at the top.

    Modules call ``PipelineLogger("coset_space").get_logger()`` and inherit level and handlers from
    the package logger; the orchestrator configures that one from the ``logging`` config section.
    """
    ROOT_NAME = "RelCert"

    def __init__(self,
                 name: Optional[str] = None,
                 default_formatter: Optional[logging.Formatter] = None,
                 verbosity: Optional[int] = None,
                 *handlers: logging.Handler,
                 **handler_kwargs: Dict[str, Optional[Any]]) -> None:
        """
        Args:
            name (Optional[str]): Child logger name, usually the module's short name
                ("coset_space", "simplex", ...). If None, the package logger itself is used.
            default_formatter (Optional[logging.Formatter]): Formatter for handlers without one.
            verbosity (Optional[int]): 0 ERROR, 1 WARNING, 2 INFO, 3+ DEBUG. When None a child
                logger is left untouched and inherits from the package logger.
            *handlers: Pre-built logging.Handler objects.
            **handler_kwargs: Handler class name (from the logging module) mapped to its
                constructor arguments, e.g. FileHandler={'filename': 'run.log'}.

        Raises:
            ValueError: If a positional handler is not a logging.Handler or a named
                handler class does not exist.
        """
        package_logger = logging.getLogger(self.ROOT_NAME)
        self.logger = package_logger.getChild(self.safe_logger_name(name)) if name else package_logger
        if name is None or verbosity is not None or handlers or handler_kwargs:
            self.set_logging_config(verbosity or 0, default_formatter, *handlers, **handler_kwargs)

    @classmethod
    def from_settings(cls, settings: Mapping[str, Any], verbosity: Optional[int] = None) -> "PipelineLogger":
        """
        Configure the package logger from the ``logging`` config section.

        Recognised keys: ``verbosity``, ``format`` and ``log_file`` (null for stderr only).
        An explicit ``verbosity`` argument (the CLI's -v count) wins over the section.
        """
        level = verbosity if verbosity is not None else int(settings.get("verbosity", 0))
        formatter = logging.Formatter(settings.get("format") or DEFAULT_FORMAT)
        handler_kwargs: Dict[str, Dict[str, Any]] = {}
        if settings.get("log_file"):
            handler_kwargs["StreamHandler"] = {}
            handler_kwargs["FileHandler"] = {"filename": settings["log_file"], "mode": "a", "encoding": "utf-8"}
        return cls(None, formatter, level, **handler_kwargs)

    def get_logger(self) -> logging.Logger:
        return self.logger

    @staticmethod
    def safe_logger_name(name: str) -> str:
        """Replace characters that would split the dotted logger hierarchy."""
        return re.sub(r'[^0-9a-zA-Z_]', '_', name)

    def set_logging_config(self,
                           verbosity: int,
                           default_formatter: Optional[logging.Formatter],
                           *handlers: logging.Handler,
                           **handler_kwargs: Dict[str, Optional[Any]]) -> None:
        """
        Set the level and replace the handlers. With nothing supplied a single StreamHandler is
        attached.

        Example:
            set_logging_config(
                2,
                logging.Formatter(DEFAULT_FORMAT),
                FileHandler={'filename': 'relcert.log', 'mode': 'a'},
            )
        """
        self.logger.setLevel(self.get_level(verbosity))
        for handler in self.logger.handlers[:]:
            self.logger.removeHandler(handler)
            handler.close()

        default_formatter = default_formatter or logging.Formatter(DEFAULT_FORMAT)

        for handler in handlers:
            if not isinstance(handler, logging.Handler):
                raise ValueError(f"Positional argument {handler} is not a valid logging.Handler object.")
            if not handler.formatter:
                handler.setFormatter(default_formatter)
            self.logger.addHandler(handler)

        for handler_name, handler_config in handler_kwargs.items():
            self.logger.addHandler(self._build_handler(handler_name, dict(handler_config or {}), default_formatter))

        if not self.logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(default_formatter)
            self.logger.addHandler(handler)

    @classmethod
    def _build_handler(cls, handler_name: str, config: Dict[str, Any],
                       default_formatter: logging.Formatter) -> logging.Handler:
        handler_class = getattr(logging, handler_name, None)
        if not (isinstance(handler_class, type) and issubclass(handler_class, logging.Handler)):
            raise ValueError(f"Unknown handler type {handler_name}")
        formatter_config = config.pop('formatter', None)
        handler = handler_class(**config)
        handler.setFormatter(cls._formatter(handler_name, formatter_config, default_formatter))
        return handler

    @staticmethod
    def _formatter(handler_name: str, config: FormatterConfig, default_formatter: logging.Formatter) -> logging.Formatter:
        if config is None:
            return default_formatter
        if isinstance(config, logging.Formatter):
            return config
        if isinstance(config, str):
            return logging.Formatter(config)
        if isinstance(config, dict):
            return logging.Formatter(**config)
        raise ValueError(f"Invalid formatter configuration for {handler_name}")

    @staticmethod
    def get_level(verbosity: int) -> int:
        """
        Map a verbosity count to a logging level.

        Example:
            >>> PipelineLogger.get_level(2)
            20
        """
        if verbosity == 1:
            return logging.WARNING
        elif verbosity == 2:
            return logging.INFO
        elif verbosity >= 3:
            return logging.DEBUG
        else:
            return logging.ERROR
