from pydantic_settings import BaseSettings
from pydantic import Field, ConfigDict
from pathlib import Path


class Settings(BaseSettings):
    """
    Application settings using Pydantic Settings.
    Loads from environment variables with fallback to .env file.
    """

    # Application Configuration
    app_name: str = "cfrac-prover"
    app_version: str = "0.1.0"
    debug: bool = False

    # Guessing Configuration（N、L 为猜测阶段的两个主要参数）
    default_terms: int = Field(default=20, description="Number of C-fraction terms fed to the guesser (N)")
    default_period_max: int = Field(default=2, description="Largest period tried by the formula guesser (L)")
    interp_max_num_deg: int = Field(default=4, description="Numerator degree cap for rational interpolation")
    interp_max_den_deg: int = Field(default=4, description="Denominator degree cap for rational interpolation")
    rec_max_order: int = Field(default=6, description="Order cap for recurrence guessing")
    rec_max_deg: int = Field(default=8, description="Coefficient degree cap for recurrence guessing")
    verify_margin: int = Field(default=2, description="Held-out points every accepted guess must match")
    max_prefix: int = Field(default=3, description="Longest exceptional prefix stripped before interpolation")

    # Proof Configuration
    h_count: int = Field(default=8, description="Number of H values computed directly from convergents")
    reduce_max_terms: int = Field(default=32, description="Largest unfolding length tried by reduction of order")
    h_recurrence_max_order: int = Field(default=12, description="Order cap for the H-recurrence search")
    series_max_truncation: int = Field(default=400, description="Largest series truncation order tried")

    # Corpus Configuration
    corpus_dir: str = Field(
        default=str(Path(__file__).parent.parent / "corpus"),
        description="Directory holding the bundled problem files",
    )
    corpus_workers: int = Field(default=1, description="Worker processes for corpus runs (1 = sequential)")

    # Logging Configuration
    log_level: str = "INFO"
    log_file_path: str = "logs/cfrac.log"
    log_format: str = "json"
    log_rotation: str = "1 day"
    log_retention: str = "30 days"
    log_to_file: bool = Field(default=True, description="Also write the rotating file sinks")

    model_config = ConfigDict(
        # 使用绝对路径，从任意工作目录都能找到.env文件
        env_file=str(Path(__file__).parent.parent / ".env"),
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"  # 忽略额外字段
    )

    def get_log_file_path(self) -> str:
        """Get the full log file path, creating directory if needed."""
        Path(self.log_file_path).parent.mkdir(parents=True, exist_ok=True)
        return self.log_file_path


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get the global settings instance."""
    return settings


def reload_settings() -> Settings:
    """Reload settings from environment."""
    global settings
    settings = Settings()
    return settings
