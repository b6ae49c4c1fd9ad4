from configparser import ConfigParser, SectionProxy
from pathlib import Path
from helper.logger_setup import setup_logger
from dotenv import load_dotenv
from os import getenv

DEFAULT_CONFIG_PATH = Path(__file__).with_name('config.ini')

#Load environmental variables
load_dotenv()

class ConfigurationCenter:
    def __init__(self, config_path: str | Path | None = None):
        self.logger = setup_logger('configuration_reader')
        if config_path is None:
            config_path = getenv('PAGOF_CONFIG') or DEFAULT_CONFIG_PATH
        self.config_path = Path(config_path)

        if not self.config_path.is_file():
            self.logger.error(f"Configuration file not found: {self.config_path}")
            raise RuntimeError("Configuration file does not exist.")

        self.config = ConfigParser()
        self.config.read(self.config_path)
        self.logger.info(f"Configuration loaded from: {self.config_path}")

    def _get_section(self, section: str) -> SectionProxy | None:
        if not section:
            self.logger.error("Section name must be a non-empty string.")
            return None
        if section not in self.config:
            self.logger.error(
                f"Section '{section}' not found in configuration file. "
                f"Available sections: {self.config.sections()}"
            )
            return None
        return self.config[section]

    def get_parameter(self, section: str, parameter: str) -> str | None:
        if not parameter:
            self.logger.error("Parameter name must be a non-empty string.")
            return None

        section_data = self._get_section(section)
        if section_data is None:
            return None

        if parameter not in section_data:
            self.logger.error(
                f"Parameter '{parameter}' not found under section '{section}'. "
                f"Available keys: {list(section_data.keys())}"
            )
            return None

        return section_data.get(parameter)

    def get_int(self, section: str, parameter: str, default: int) -> int:
        value = self.get_parameter(section, parameter)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            self.logger.error(f"Parameter '{section}.{parameter}' is not an integer: {value!r}, using {default}")
            return default

    def get_float(self, section: str, parameter: str, default: float) -> float:
        value = self.get_parameter(section, parameter)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            self.logger.error(f"Parameter '{section}.{parameter}' is not a number: {value!r}, using {default}")
            return default

    def get_bool(self, section: str, parameter: str, default: bool) -> bool:
        value = self.get_parameter(section, parameter)
        if value is None:
            return default
        if value.strip().lower() not in self.config.BOOLEAN_STATES:
            self.logger.error(f"Parameter '{section}.{parameter}' is not a boolean: {value!r}, using {default}")
            return default
        return self.config.BOOLEAN_STATES[value.strip().lower()]

    def get_list(self, section: str, parameter: str, default: list[str]) -> list[str]:
        value = self.get_parameter(section, parameter)
        if value is None:
            return list(default)
        return [item.strip() for item in value.split(',') if item.strip()]

    def get_environmental(self, variable_name: str, default: str | None = None) -> str | None:
        retrieved_variable = getenv(variable_name)
        if retrieved_variable is None:
            self.logger.debug(f'Environmental variable {variable_name} not set, using {default!r}')
            return default
        return retrieved_variable
