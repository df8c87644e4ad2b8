import re
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

URL_LIKE = re.compile(r"^(https?://|www\.)", re.IGNORECASE)


class Statement(BaseModel):
    """One labeled statement; label 1 = sexist, 0 = ambiguous/neutral."""

    model_config = ConfigDict(frozen=True)

    raw_text: str
    tokens: Tuple[str, ...] = ()
    label: int
    source_tag: Optional[str] = None
    extra: Dict[str, str] = Field(default_factory=dict)

    @field_validator("label", mode="before")
    def label_must_be_binary(cls, v):
        if isinstance(v, bool):
            v = int(v)
        if isinstance(v, str):
            v = v.strip()
            if v not in {"0", "1"}:
                raise ValueError(f"label must be 0 or 1, got {v!r}")
            return int(v)
        if v not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {v!r}")
        return int(v)

    @field_validator("tokens", mode="before")
    def tokens_must_be_normalized(cls, v):
        tokens = tuple(v or ())
        for token in tokens:
            if not token or token != token.lower() or "#" in token or token.startswith("@") or URL_LIKE.match(token):
                raise ValueError(f"token {token!r} is not normalized")
            if any(ch.isspace() for ch in token):
                raise ValueError(f"token {token!r} contains whitespace")
        return tokens
