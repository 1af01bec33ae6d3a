"""Run configuration for the command-line driver."""

from math import prod
from pathlib import Path
from typing import Any, Dict, List, Literal, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import settings


class RunConfig(BaseModel):
    """
    Every knob of a verification run. Loaded from a flat KEY=VALUE file;
    keys are case-insensitive and unknown keys are rejected.
    """
    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    grid_n: int = 16
    initial_kind: Literal["taylor_green", "random"] = "taylor_green"
    amplitude: float = Field(0.1, gt=0)
    seed: int = 7
    decay: float = Field(3.0, gt=2.5)
    times: List[float] = Field(default_factory=lambda: [0.05], min_length=1)
    probe_times: List[float] = Field(default_factory=lambda: [0.02, 0.04, 0.08, 0.16], min_length=3)
    series_max_order: int = Field(5, ge=0)
    equivalence_max_order: int = Field(3, ge=1)
    quad_scheme: Literal["gauss_legendre", "uniform"] = "gauss_legendre"
    quad_nodes: int = Field(settings.QUAD_NODES, ge=2)
    quad_refined_nodes: int = Field(settings.QUAD_REFINED_NODES, ge=2)
    tau_t_max: float = Field(settings.TAU_T_MAX, gt=0)
    tau_nodes: int = Field(settings.TAU_NODES, ge=4)
    solver_dt: float = Field(settings.SOLVER_DT, gt=0)
    dealias: bool = True
    tree_n_max: int = Field(6, ge=0)
    forest_n_max: int = Field(4, ge=0)
    forest_k_max: int = Field(4, ge=1)
    scaling_lambda: int = Field(2, ge=1)
    output_dir: str = str(settings.OUTPUT_DIR)
    jobs: int = Field(settings.JOBS, ge=1)

    @field_validator("times", "probe_times", mode="before")
    @classmethod
    def _split_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("times", "probe_times")
    @classmethod
    def _check_times(cls, value: List[float]) -> List[float]:
        for t in value:
            if not 0 < t <= 1.0:
                raise ValueError(f"time {t} outside (0, 1]")
        return value

    @field_validator("grid_n")
    @classmethod
    def _check_grid(cls, value: int) -> int:
        if value <= 0 or value % 2:
            raise ValueError(f"grid_n must be even and positive, got {value}")
        return value

    @field_validator("tau_nodes")
    @classmethod
    def _check_tau_nodes(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"tau_nodes must be even, got {value}")
        return value

    @model_validator(mode="after")
    def _check_caps(self) -> "RunConfig":
        if self.tree_n_max > settings.TREE_CAP:
            raise ValueError(f"tree_n_max {self.tree_n_max} exceeds cap {settings.TREE_CAP}")
        if self.forest_n_max > settings.FOREST_N_CAP:
            raise ValueError(f"forest_n_max {self.forest_n_max} exceeds cap {settings.FOREST_N_CAP}")
        if self.forest_k_max > settings.FOREST_K_CAP:
            raise ValueError(f"forest_k_max {self.forest_k_max} exceeds cap {settings.FOREST_K_CAP}")
        if self.series_max_order > settings.TREE_TERM_CAP:
            raise ValueError(
                f"series_max_order {self.series_max_order} exceeds cap {settings.TREE_TERM_CAP}"
            )
        if self.equivalence_max_order > settings.TREE_TERM_CAP:
            raise ValueError("equivalence_max_order exceeds the tree-term cap")
        if prod(range(1, self.equivalence_max_order + 1)) > settings.DUHAMEL_TERM_CAP:
            raise ValueError("equivalence_max_order exceeds the nested Duhamel term cap")
        if self.quad_refined_nodes <= self.quad_nodes:
            raise ValueError("quad_refined_nodes must exceed quad_nodes")
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """Parse a flat KEY=VALUE file."""
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        raw = dotenv_values(path)
        data: Dict[str, Any] = {}
        for key, value in raw.items():
            if value is None:
                raise ValueError(f"config key {key!r} has no value")
            data[key.strip().lower()] = value
        return cls.model_validate(data)

    def with_overrides(self, **updates: Any) -> "RunConfig":
        """Validated copy with some keys replaced; None values are ignored."""
        data = self.model_dump()
        data.update({k: v for k, v in updates.items() if v is not None})
        return type(self).model_validate(data)

    def provenance(self) -> Dict[str, Any]:
        """The resolved config plus code version, embedded in every report."""
        return {
            "config": self.model_dump(),
            "code_version": settings.CODE_VERSION,
            "schema_version": settings.REPORT_SCHEMA_VERSION,
        }
