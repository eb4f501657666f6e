from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class UnlSubsetResult(BaseModel):
    name: str
    columns: List[str]
    summary: Dict[str, Any] = Field(default_factory=dict)
    draws: List[Dict[str, Any]] = Field(default_factory=list)


class PipelineState(BaseModel):
    kind: str
    stage: str = ""
    config: Dict[str, Any] = Field(default_factory=dict)
    n_rows: int = 0
    dropped_rows: int = 0
    fit: Dict[str, Any] = Field(default_factory=dict)
    n_clusters: int = 0
    cluster_sizes: List[int] = Field(default_factory=list)
    partition: List[int] = Field(default_factory=list)
    unl: List[UnlSubsetResult] = Field(default_factory=list)
    predictive: Optional[Dict[str, Any]] = None
    notices: List[str] = Field(default_factory=list)
