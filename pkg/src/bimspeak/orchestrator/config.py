"""Engine configuration. One flat file, documented keys, strict validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional


@dataclass
class EngineConfig:
    backend: str = "mock"  # "mock" | "live"
    base_url: str = "https://api.openai.com/v1"
    chat_model: str = "gpt-4"
    transcription_model: str = "whisper-1"
    api_key_env: str = "OPENAI_API_KEY"
    theta: float = 0.8
    repair_budget: int = 2
    retry_budget: int = 5
    strict_rc_threshold: bool = False
    check_enabled: bool = True  # False switches the Check step off entirely
    mode: str = "fused"  # "fused" | "split"
    mock_script_path: Optional[str] = None
    mock_seed: int = 0
    context_turns: int = 6
    confidence_floor: float = 0.5
    fill_temperature: float = 0.7
    slot_schema_path: Optional[str] = None
    alias_path: Optional[str] = None
    rule_params_path: Optional[str] = None
    extra: dict = field(default_factory=dict, repr=False)

    def validate(self) -> None:
        if self.backend not in ("mock", "live"):
            raise ValueError(f"backend must be 'mock' or 'live', got {self.backend!r}")
        if self.mode not in ("fused", "split"):
            raise ValueError(f"mode must be 'fused' or 'split', got {self.mode!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must be within [0, 1]")
        if self.repair_budget < 0 or self.retry_budget < 1:
            raise ValueError("repair_budget must be >= 0 and retry_budget >= 1")
        if self.context_turns < 0:
            raise ValueError("context_turns must be >= 0")

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        known = {f.name for f in fields(cls)} - {"extra"}
        kwargs = {k: v for k, v in data.items() if k in known}
        extra = {k: v for k, v in data.items() if k not in known}
        config = cls(**kwargs, extra=extra)
        config.validate()
        return config
