from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Keys of one machine-readable report line, in output order
REPORT_KEYS = (
    "model", "description", "embedding", "seed", "precision", "recall", "f1",
    "epochs", "wallclock_s", "config_hash", "status", "error",
)


class ReportRow(BaseModel):
    """One trained-and-evaluated experiment (one seed)."""

    model_config = ConfigDict(frozen=True)

    model: str
    description: str
    embedding: str
    seed: int
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None
    epochs: Optional[int] = None
    wallclock_s: Optional[float] = None
    config_hash: str
    status: Literal["ok", "failed"] = "ok"
    error: Optional[str] = None
    predicted_positive_rate: Optional[float] = None

    @field_validator("precision", "recall", "f1", "predicted_positive_rate")
    def metric_must_be_fraction(cls, v):
        if v is not None and not (0.0 <= v <= 1.0):
            raise ValueError(f"metric {v} outside [0, 1]")
        return v

    @model_validator(mode="after")
    def f1_must_be_harmonic_mean(self):
        if self.status == "ok":
            if None in (self.precision, self.recall, self.f1):
                raise ValueError("ok rows need precision, recall and f1")
            p, r = self.precision, self.recall
            expected = 2 * p * r / (p + r) if p + r > 0 else 0.0
            if abs(self.f1 - expected) > 1e-9:
                raise ValueError(f"f1 {self.f1} is not the harmonic mean of {p} and {r}")
        return self


class AggregateRow(BaseModel):
    """Mean and standard deviation of one ladder row over its seeds."""

    model_config = ConfigDict(frozen=True)

    model: str
    description: str
    embedding: str
    n_seeds: int = Field(ge=0)
    n_failed: int = Field(default=0, ge=0)
    precision_mean: Optional[float] = None
    precision_std: Optional[float] = None
    recall_mean: Optional[float] = None
    recall_std: Optional[float] = None
    f1_mean: Optional[float] = None
    f1_std: Optional[float] = None
    status: Literal["ok", "failed"] = "ok"


class ReportHeader(BaseModel):
    dataset: str
    substituted_fixture: bool = False
    n_train: int
    n_test: int
    split_seed: int
    split_ratio: float
    seeds: List[int]
    notes: List[str] = Field(default_factory=list)


class TrainingSummary(BaseModel):
    """What one training run reports besides its model."""

    epochs: int = Field(ge=0)
    loss_history: List[float] = Field(default_factory=list)
    vocab_size: int = Field(ge=2)
    embedding_coverage: Optional[float] = None
    wallclock_s: float = Field(default=0.0, ge=0.0)

    @property
    def final_loss(self) -> Optional[float]:
        return self.loss_history[-1] if self.loss_history else None
