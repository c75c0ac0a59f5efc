from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file = ".env", env_file_encoding = "utf-8", extra="ignore", env_prefix="OPMEAN_"
    )

    # Reprodutibilidade
    SEED: int = Field(42, ge=0)

    # Loewner / matrizes
    TOL: float = Field(1e-8, gt=0)
    HERMITIAN_TOL: float = Field(1e-8, gt=0)
    PD_GATE: float = Field(1e-10, gt=0)
    MAX_DIM: int = Field(64, ge=1)
    DEFAULT_COND_CAP: float = Field(10.0, ge=1)

    # Quadratura
    QUAD_BASE_NODES: int = Field(64, ge=2)
    QUAD_ABS_TOL: float = Field(1e-10, gt=0)
    QUAD_MAX_DOUBLINGS: int = Field(6, ge=1)
    QUAD_OUTER_ABS_TOL: float = Field(1e-8, gt=0)

    # Execução dos ensembles
    BACKEND: Literal["serial", "process", "celery"] = "serial"
    WORKERS: int = Field(0, ge=0)

    LOG_LEVEL: str = "INFO"

    # Celery
    #CELERY_BROKER_URL: str = "redis://localhost:6379/0"
    #CELERY_RESULT_BACKEND: str = "redis://localhost:6379/0"
    CELERY_BROKER_URL: str = "memory://"
    CELERY_RESULT_BACKEND: str = "cache+memory://"
    CELERY_ALWAYS_EAGER: bool = True


settings = Settings()
