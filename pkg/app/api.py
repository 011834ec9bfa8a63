"""
API endpoints for dimshape: box-mesh and variation dimension estimates over HTTP.
"""

from datetime import datetime
from typing import Any, Dict, List, Optional, Union

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field, model_validator

from . import strings
from .box_mesh import mesh_curve, mesh_dimensions
from .environments import ENVIRONMENTS
from .errors import DimshapeError
from .fractals import EXPECTED_DIMENSION, FractalSpec, generate, get_all_fractals
from .models import MeshConfig, POSTPROCESSORS
from .storage import jsonable
from .trajectory import RunningStats
from .variation import madogram, variation_estimator, variogram, MADOGRAM_ORDER, VARIOGRAM_ORDER

API_VERSION = "1.0.0"
MAX_FRACTAL_POINTS = 200_000

app = FastAPI(
    title="dimshape API",
    description="Box-mesh and variation estimates of trajectory dimension",
    version=API_VERSION,
)


# Pydantic models

# NaN travels as null and infinities as "inf"/"-inf", as in the files the CLI writes
JsonFloat = Union[float, str, None]


def _check_rows(name: str, rows: Optional[List[List[float]]]) -> None:
    if rows is None:
        return
    lengths = sorted({len(row) for row in rows})
    if 0 in lengths or len(lengths) > 1:
        raise ValueError(strings.ERROR_RAGGED_ROWS.format(name, lengths))


class DimensionRequest(BaseModel):
    points: List[List[float]] = Field(..., description="Point set, one row per point")
    mesh: MeshConfig = Field(MeshConfig(), description="Box-size schedule")
    normalize: bool = Field(True, description="Normalize with stats fitted on the points")

    @model_validator(mode="after")
    def _check_points(self) -> "DimensionRequest":
        _check_rows("points", self.points)
        return self


class DimensionResponse(BaseModel):
    n_points: int
    lower: JsonFloat
    upper: JsonFloat
    central: JsonFloat
    curve: List[Dict[str, JsonFloat]]


class VariationRequest(BaseModel):
    series: Optional[List[float]] = Field(None, description="Scalar time series")
    states: Optional[List[List[float]]] = Field(None, description="Trajectory states, one row per step")

    @model_validator(mode="after")
    def _check_states(self) -> "VariationRequest":
        _check_rows("states", self.states)
        return self


class VariationResponse(BaseModel):
    madogram: JsonFloat
    variogram: JsonFloat


def estimate(points: List[List[float]], mesh: MeshConfig, normalize: bool = True) -> DimensionResponse:
    stats = None if normalize else RunningStats.identity(len(points[0]) if points else 1)
    curve = mesh_curve(points, f=mesh.f, d0=mesh.d0, stats=stats)
    dims = mesh_dimensions(curve, window=mesh.upper_window)
    return DimensionResponse(
        **jsonable(
            {
                "n_points": len(points),
                "lower": dims.lower,
                "upper": dims.upper,
                "central": dims.central,
                "curve": curve.rows(),
            }
        )
    )


# API Endpoints

@app.get("/")
def root():
    """Root endpoint with API information."""
    return {
        "name": "dimshape",
        "version": API_VERSION,
        "description": "Trajectory dimension estimation for reward postprocessing",
        "endpoints": {
            "dimension": "/dimension",
            "variation": "/variation",
            "fractal": "/fractal/{kind}",
            "postprocessors": "/postprocessors",
            "environments": "/environments",
        },
    }


@app.post("/dimension", response_model=DimensionResponse)
def dimension_endpoint(request: DimensionRequest):
    """
    Mesh curve and lower/upper/central mesh dimensions of a point set.

    - **points**: rows of equal length
    - **mesh**: f, d0 and the upper-slope window
    - **normalize**: fit mean/std on the points (otherwise use raw coordinates)
    """
    try:
        return estimate(request.points, request.mesh, request.normalize)
    except DimshapeError as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.post("/variation", response_model=VariationResponse)
def variation_endpoint(request: VariationRequest):
    """Madogram and variogram dimensions of a series or of trajectory states (mean over coordinates)."""
    if (request.series is None) == (request.states is None):
        raise HTTPException(status_code=422, detail="provide exactly one of series or states")
    try:
        if request.series is not None:
            scores = {
                "madogram": variation_estimator(request.series, MADOGRAM_ORDER),
                "variogram": variation_estimator(request.series, VARIOGRAM_ORDER),
            }
        else:
            scores = {"madogram": madogram(request.states), "variogram": variogram(request.states)}
    except DimshapeError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return VariationResponse(**jsonable(scores))


@app.get("/fractal/{kind}")
def fractal_endpoint(
    kind: str,
    n_points: int = Query(10_000, ge=1, le=MAX_FRACTAL_POINTS),
    seed: int = 0,
):
    """Generate a reference fractal and report its estimated and expected dimensions."""
    if kind not in get_all_fractals():
        raise HTTPException(status_code=404, detail=strings.ERROR_UNKNOWN_FRACTAL.format(kind, get_all_fractals()))
    try:
        points = generate(FractalSpec(kind=kind, n_points=n_points, seed=seed))
        result = estimate(points.tolist(), MeshConfig())
    except DimshapeError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return {"kind": kind, "expected": EXPECTED_DIMENSION[kind], **result.model_dump()}


@app.get("/postprocessors")
def list_postprocessors():
    """Available reward postprocessors."""
    return {"postprocessors": POSTPROCESSORS, "count": len(POSTPROCESSORS)}


@app.get("/environments")
def list_environments() -> Dict[str, Any]:
    """Available environments with their dimensions."""
    environments = {
        name: {
            "obs_dim": entry["spec"]["obs_dim"],
            "action_dim": entry["spec"]["action_dim"],
            "meshed_coords": list(entry["spec"]["meshed_coords"]),
            "description": entry["description"],
        }
        for name, entry in ENVIRONMENTS.items()
    }
    return {"environments": environments, "count": len(environments)}


@app.get("/health")
def health_check():
    """Health check endpoint."""
    return {"status": "healthy", "timestamp": datetime.now().isoformat()}
