from __future__ import annotations

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

_DEFAULT_BASE_URL = "http://localhost:8000/v1"


class Config:
    LLM1_BASE_URL = os.environ.get("LLM1_BASE_URL", _DEFAULT_BASE_URL)
    LLM1_MODEL = os.environ.get("LLM1_MODEL", "llama-3.1-70b-instruct")
    LLM2_BASE_URL = os.environ.get("LLM2_BASE_URL", LLM1_BASE_URL)
    LLM2_MODEL = os.environ.get("LLM2_MODEL", "llama-3.1-8b-instruct")
    LLM_API_KEY_ENV = os.environ.get("LLM_API_KEY_ENV", "OPENAI_API_KEY")
    LLM_TIMEOUT = float(os.environ.get("LLM_TIMEOUT", 60))
    LLM_MAX_RETRIES = int(os.environ.get("LLM_MAX_RETRIES", 3))
    LLM_MAX_TOKENS = int(os.environ.get("LLM_MAX_TOKENS", 1024))
    MAX_PROMPT_CHARS = int(os.environ.get("MAX_PROMPT_CHARS", 60000))
    RESULTS_DIR = os.environ.get("RESULTS_DIR", str(Path("results")))
    MEMORY_CAPACITY = int(os.environ.get("MEMORY_CAPACITY", 2))
    BENCH_PARALLELISM = int(os.environ.get("BENCH_PARALLELISM", 1))
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
