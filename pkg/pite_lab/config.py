from pathlib import Path

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    threads: int = 1
    max_sites: int = 14  # dense eigensolver cap: N = 2^14
    max_circuit_qubits: int = 8
    data_dir: Path = Path("data")
    database_url: str = "sqlite:///data/db/pite_lab.db"
    record_runs: bool = False
    log_level: str = "WARNING"
    golden_rel_tol: float = 1e-9

    model_config = {"env_prefix": "PITE_LAB_", "env_file": ".env"}


settings = Settings()
