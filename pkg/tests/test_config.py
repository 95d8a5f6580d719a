import os
import time

from hrgcheck.utils.config import (
    TRANSLATION,
    load_config_info,
    load_localisation,
    open_config_file,
    read_json_file,
)
from hrgcheck.utils.logs import clear_old_logs

DEFAULTS = {
    "paths": {"logs_folder": "logs"},
    "options": {"number_jobs": 4, "prune_colors": True, "language": "en"},
}


class TestConfig:
    def test_missing_options_use_defaults(self):
        config = {"options": {"prune_colors": False}}
        load_config_info(config, DEFAULTS)
        assert config["paths"] == {"logs_folder": "logs"}
        assert config["options"]["prune_colors"] is False
        assert config["options"]["number_jobs"] == 4

    def test_wrong_type_is_reset(self):
        config = {"options": {"number_jobs": "many"}}
        load_config_info(config, DEFAULTS)
        assert config["options"]["number_jobs"] == 4

    def test_jobs_are_clamped(self):
        config = {"options": {"number_jobs": 64}}
        load_config_info(config, DEFAULTS)
        assert config["options"]["number_jobs"] == 4
        config = {"options": {"number_jobs": 0}}
        load_config_info(config, DEFAULTS)
        assert config["options"]["number_jobs"] == 1

    def test_config_file(self, tmp_path):
        tmp_path.joinpath("config.json").write_text(
            '{"options": {"oracle_depth": 3}}', encoding="utf-8"
        )
        config = open_config_file(tmp_path)
        assert config["options"]["oracle_depth"] == 3
        assert config["options"]["tree_count_cap"] == 1000000

    def test_broken_config_file(self, tmp_path):
        tmp_path.joinpath("config.json").write_text("{", encoding="utf-8")
        assert read_json_file(tmp_path.joinpath("config.json")) == {}
        assert open_config_file(tmp_path)["options"]["oracle_depth"] == 5


class TestLocalisation:
    def test_english(self):
        assert load_localisation(None) == TRANSLATION
        assert TRANSLATION["check_counts"].format("INF", "0") == "sat=INF fal=0"

    def test_unknown_language_falls_back(self):
        assert load_localisation("xx") == load_localisation("en")


class TestLogs:
    def test_old_logs_are_removed(self, tmp_path):
        old = tmp_path / "hrgcheck_2000-01-01.log"
        new = tmp_path / "hrgcheck_today.log"
        old.write_text("", encoding="utf-8")
        new.write_text("", encoding="utf-8")
        stamp = time.time() - 90 * 24 * 3600
        os.utime(old, (stamp, stamp))
        clear_old_logs(tmp_path, max_log_days=30)
        assert not old.exists()
        assert new.exists()
