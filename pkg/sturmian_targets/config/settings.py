from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()

class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="STURMIAN_", env_file=".env", extra="ignore")

    output_dir: str = "results"
    log_level: str = "INFO"
    jobs: int = 1

    ### alpha construction
    default_tail: int = 10**6   ## tail element M of the rational proxy

    ### verification / sweeps
    oracle_max: int = 2000
    anchor_limit: int = 200_000   ## largest block whose anchors get sorted per sweep

    ### sampling
    point_bits: int = 128
    max_skip_fraction: float = 0.01

    ### rendering
    float_digits: int = 15
    decimal_digits: int = 30

settings = Settings()
