"""HTTP API exposing speckle detection and image-quality metrics."""

import logging
from datetime import datetime
from typing import Any, Dict

from fastapi import FastAPI, Request, status
from pydantic import BaseModel, Field

from .constants import APP_NAME, APP_VERSION
from .services import DetectRequest, MetricsRequest, SpeckleService

logger = logging.getLogger(__name__)

DESCRIPTION = (
    "Speckle detection in multi-frame grayscale sequences via granular-computing "
    "activity analysis, with conditional Haar-wavelet de-noising."
)

app = FastAPI(
    title="Speckle Activity",
    description=DESCRIPTION,
    version=APP_VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
)

service = SpeckleService()


class HealthResponse(BaseModel):
    """Health check response model."""
    status: str = Field(..., description="Application status (healthy/unhealthy)")
    version: str = Field(..., description="Application version")
    healthy: bool = Field(..., description="Health status boolean")
    timestamp: str = Field(..., description="Check timestamp")


@app.get("/health", response_model=HealthResponse, status_code=status.HTTP_200_OK)
async def health_check():
    """Check application health and readiness."""
    logger.info("Health check endpoint called")
    return HealthResponse(
        status="healthy",
        version=APP_VERSION,
        healthy=True,
        timestamp=datetime.now().isoformat(),
    )


@app.post("/detect", status_code=status.HTTP_200_OK)
def detect(request: DetectRequest) -> Dict[str, Any]:
    """
    Activity analysis of one frame sequence.

    Returns:
        activity report, verdict and the threshold it was compared with

    Raises:
        HTTPException: 422 for invalid frames or partitions, 500 otherwise
    """
    logger.info(f"Detect request with {len(request.frames)} frames")
    return service.process_detect(request)


@app.post("/metrics", status_code=status.HTTP_200_OK)
def metrics(request: MetricsRequest) -> Dict[str, Any]:
    """MSE, PSNR and IEF of a clean / noisy / denoised triple."""
    return service.process_metrics(request)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    """Log all incoming HTTP requests and responses."""
    logger.info(f"Incoming: {request.method} {request.url.path}")
    try:
        response = await call_next(request)
        logger.info(f"Response: {response.status_code} for {request.url.path}")
        return response
    except Exception as e:
        logger.error(f"Error processing request: {str(e)}")
        raise


@app.get("/", status_code=status.HTTP_200_OK)
async def root():
    """Root endpoint with API information and links."""
    return {
        "name": APP_NAME,
        "description": DESCRIPTION,
        "version": APP_VERSION,
        "endpoints": {
            "docs": "/docs",
            "health": "/health",
            "detect": "/detect",
            "metrics": "/metrics",
        },
        "status": "running",
    }


if __name__ == "__main__":
    import uvicorn

    logger.info(f"Starting {APP_NAME} API")
    uvicorn.run(app, host="0.0.0.0", port=8000, log_level="info")
