"""Tests for kypherhound.config module."""

from unittest.mock import patch

from kypherhound.config import Config


class TestGetCachePath:
    """Tests for Config.get_cache_path."""

    def test_override_file(self, tmp_path):
        """Should use an explicit file path and create its directory."""
        path = tmp_path / "caches" / "mine.sqlite3"
        assert Config.get_cache_path(str(path)) == path
        assert (tmp_path / "caches").is_dir()

    def test_override_directory(self, tmp_path):
        """Should place the cache file inside an existing directory."""
        assert Config.get_cache_path(tmp_path) == tmp_path / Config.CACHE_FILENAME

    def test_environment(self, tmp_path, monkeypatch):
        """Should fall back to the environment variable."""
        monkeypatch.setenv(Config.CACHE_ENV_VAR, str(tmp_path / "env.sqlite3"))
        assert Config.get_cache_path() == tmp_path / "env.sqlite3"

    def test_override_beats_environment(self, tmp_path, monkeypatch):
        """Should prefer the flag to the environment."""
        monkeypatch.setenv(Config.CACHE_ENV_VAR, str(tmp_path / "env.sqlite3"))
        assert Config.get_cache_path(tmp_path / "flag.sqlite3") == tmp_path / "flag.sqlite3"

    def test_relative_path_resolved_to_cwd(self, tmp_path, monkeypatch):
        """Should resolve a relative path against cwd."""
        monkeypatch.chdir(tmp_path)
        path = Config.get_cache_path("data/cache.sqlite3")
        assert path == tmp_path / "data" / "cache.sqlite3"
        assert (tmp_path / "data").is_dir()

    def test_default(self, tmp_path, monkeypatch):
        """Should use the home cache directory when nothing is set."""
        monkeypatch.delenv(Config.CACHE_ENV_VAR, raising=False)
        with patch.object(Config, "DEFAULT_CACHE_DIR", tmp_path / "home"):
            path = Config.get_cache_path()
        assert path == tmp_path / "home" / Config.CACHE_FILENAME
        assert (tmp_path / "home").is_dir()


class TestGetGraphDir:
    """Tests for Config.get_graph_dir."""

    def test_unset(self):
        """Should return None without a flag or environment variable."""
        assert Config.get_graph_dir() is None

    def test_environment(self, tmp_path, monkeypatch):
        """Should read the environment variable."""
        monkeypatch.setenv(Config.GRAPH_DIR_ENV_VAR, str(tmp_path))
        assert Config.get_graph_dir() == tmp_path

    def test_override(self, tmp_path, monkeypatch):
        """Should prefer the flag."""
        monkeypatch.setenv(Config.GRAPH_DIR_ENV_VAR, "/elsewhere")
        assert Config.get_graph_dir(str(tmp_path)) == tmp_path
