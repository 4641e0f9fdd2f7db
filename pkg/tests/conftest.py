"""Pytest configuration and fixtures."""

from pathlib import Path

from dotenv import load_dotenv


def pytest_configure(config):
    """Load .env before tests run so PBLAB_THREADS and PBLAB_LOG_DIR overrides apply."""
    project_root = Path(__file__).parent.parent
    env_file = project_root / ".env"
    if env_file.exists():
        load_dotenv(env_file)
