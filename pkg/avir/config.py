from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

DEFAULT_INSTRUCTION = "Answer the question using a single word or phrase."


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="AVIR_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    # Model endpoints
    scorer_url: Optional[str] = None
    answer_url: Optional[str] = None
    model: str = "Qwen/Qwen2.5-VL-7B-Instruct"
    api_key: str = "EMPTY"  # vLLM / TGI style servers accept any key

    # Client behaviour
    timeout_ms: int = 30000
    max_retries: int = 2
    backoff_base_ms: int = 500
    parallelism: int = 4
    instruction: str = DEFAULT_INSTRUCTION

    # Score server
    serve_host: str = "0.0.0.0"
    serve_port: int = 8080

    log_level: str = "INFO"


settings = Settings()
