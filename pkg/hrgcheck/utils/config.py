import json
import logging
from copy import deepcopy
from pathlib import Path
from typing import Optional

logger = logging.getLogger("hrgcheck")


root_path = Path(".")
package_path = Path(__file__).resolve().parent.parent
defaults_path = package_path.joinpath("utils", "defaults.json")
loc_path = package_path.joinpath("loc")


def read_json_file(path: "Path") -> "dict":
    """Contents of a json file, empty when it is missing or broken."""
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        return {}
    except json.JSONDecodeError:
        logger.exception(f"{path} isn't valid json.")
        return {}


def load_config_info(config: "dict", defaults: "dict"):
    """Fill missing options from the defaults and reset the ones of the wrong type."""
    for section, options in defaults.items():
        user_section = config.setdefault(section, {})
        for option, default in options.items():
            value = user_section.get(option)
            if value is None:
                logger.debug(f"Using default value for config {section}: {option}")
                user_section[option] = default
            elif type(value) != type(default):
                logger.warning(
                    f"Config {section}: {option} has the wrong type, using the default."
                )
                user_section[option] = default

    # Jobs are capped at the default
    jobs = config["options"]["number_jobs"]
    config["options"]["number_jobs"] = max(1, min(jobs, defaults["options"]["number_jobs"]))


def open_config_file(folder: "Path") -> "dict":
    config_file_path = folder.joinpath("config.json")
    if config_file_path.exists():
        config = read_json_file(config_file_path)
    else:
        logger.debug("Config file not found, using the defaults.")
        config = {}

    load_config_info(config, deepcopy(read_json_file(defaults_path)))
    return config


def load_localisation(lang: "Optional[str]") -> "dict":
    """Messages for the language, English fills the gaps."""
    lang = (lang or "en").lower()
    english = read_json_file(loc_path.joinpath("en.json"))
    if not english:
        logger.error("No localisation file found for en.")
        raise FileNotFoundError("No localisation file found for en.")
    if lang == "en":
        return english

    translated = read_json_file(loc_path.joinpath(f"{lang}.json"))
    if not translated:
        logger.error(f"No localisation file found for {lang}, using English.")
    return {key: translated.get(key) or message for key, message in english.items()}


VERBOSE = False
config = open_config_file(root_path)

TREE_COUNT_CAP = config["options"]["tree_count_cap"]
ORACLE_MEMBER_CAP = config["options"]["oracle_member_cap"]
ORACLE_DEPTH = config["options"]["oracle_depth"]
NUMBER_JOBS = config["options"]["number_jobs"]
MAX_LOG_DAYS = config["options"]["max_log_days"]
PRUNE_COLORS = config["options"]["prune_colors"]
PARALLEL_SUBFORMULAE = config["options"]["parallel_subformulae"]
TRANSLATION = load_localisation(config["options"]["language"])
