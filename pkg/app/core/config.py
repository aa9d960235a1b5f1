"""Application settings loaded from environment / .env file."""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # ── Session defaults ─────────────────────────────────
    default_participants: int = 3
    default_secret_len: int = 16
    default_decoys: int = 16  # K = N, the efficiency setting
    default_abort_threshold: float = 0.0
    default_seed: int = 7

    # ── Monte Carlo ──────────────────────────────────────
    default_trials: int = 10_000
    sweep_workers: int = 1  # 1 = run trials in-process

    # ── Simulator ────────────────────────────────────────
    max_register_qubits: int = 20

    # ── Service ──────────────────────────────────────────
    log_level: str = "INFO"
    allowed_origins: str = "*"  # comma-separated
    cache_ttl_seconds: float = 300


@lru_cache
def get_settings() -> Settings:
    return Settings()
