from fastapi import FastAPI, File, HTTPException, Query, UploadFile
from app.utils.state_upload import StateUploadProcessor, state_from_payload
from app.services.bell_service import BellService
from bellsurvey import __version__, config
from bellsurvey.bounds import BoundQuery
from bellsurvey.errors import BellSurveyError
from bellsurvey.optimize import SeesawConfig
from bellsurvey.qcore import MeasurementSettings
from dotenv import load_dotenv
from typing import Optional
import logging
import math

# Load environment variables
load_dotenv(override=False)

# Setup logging
logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT)
logger = logging.getLogger(__name__)

# Create FastAPI app instance
app = FastAPI(
    title="Bell Survey API",
    description="Concentration bounds, GHZ references and see-saw optimization for full-correlation Bell inequalities",
    version=__version__
)

# Initialize services
state_processor = StateUploadProcessor()
bell_service = BellService()


def _bad_request(action: str, e: Exception) -> HTTPException:
    logger.error(f"{action} rejected: {str(e)}")
    return HTTPException(status_code=400, detail=str(e))


def _server_error(action: str, e: Exception) -> HTTPException:
    logger.error(f"{action} error: {str(e)}")
    return HTTPException(status_code=500, detail=f"{action} failed: {str(e)}")


@app.get("/")
async def root():
    """Root endpoint - API welcome message"""
    return {
        "message": "Bell Survey API",
        "version": __version__,
        "endpoints": {
            "docs": "/docs",
            "health": "/health",
            "bounds": "/bounds (POST)",
            "net": "/net",
            "ghz": "/ghz/{n_sites}",
            "qnl": "/qnl (POST)",
            "optimize": "/optimize (POST)"
        },
        "description": "Evaluate concentration bounds and Bell functionals on uploaded states"
    }


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "max_amplitudes": bell_service.max_amplitudes
    }


@app.post("/bounds")
async def bounds(payload: dict):
    """
    Evaluate the noiseless or noisy concentration bound.

    Args:
        payload: {"d", "n_sites", "v", "delta" (number or "auto"), "lambda", "theorem" (optional)}

    Returns:
        BoundReport as JSON
    """
    try:
        query = BoundQuery.from_dict(payload)
        theorem = payload.get("theorem")
        return bell_service.bounds(query, int(theorem) if theorem is not None else None)
    except (BellSurveyError, KeyError, TypeError, ValueError) as e:
        raise _bad_request("Bound query", e)
    except Exception as e:
        raise _server_error("Bound evaluation", e)


@app.get("/net")
async def net(d: int, n: int, delta: float):
    """Epsilon-net parameters for resolution delta"""
    try:
        return bell_service.net(d, n, delta)
    except BellSurveyError as e:
        raise _bad_request("Net query", e)


@app.get("/ghz/{n_sites}")
async def ghz(n_sites: int, alpha: float = 1 / math.sqrt(2), beta: float = 1 / math.sqrt(2)):
    """GHZ reference value with its direct cross-check"""
    try:
        return bell_service.ghz(n_sites, alpha, beta)
    except BellSurveyError as e:
        raise _bad_request("GHZ query", e)


@app.post("/qnl")
async def evaluate_qnl(payload: dict):
    """
    Evaluate Q_NL for an inline state and settings.

    Args:
        payload: {"state": state document, "settings": settings document, "lambda": optional}
    """
    if "state" not in payload or "settings" not in payload:
        raise HTTPException(status_code=400, detail="Payload needs 'state' and 'settings'")
    state = state_from_payload(payload["state"])
    try:
        settings = MeasurementSettings.from_dict(payload["settings"])
        return bell_service.evaluate(state, settings, payload.get("lambda"))
    except BellSurveyError as e:
        raise _bad_request("Evaluation", e)
    except Exception as e:
        raise _server_error("Evaluation", e)


@app.post("/optimize")
async def optimize_state(
    file: UploadFile = File(...),
    restarts: int = config.DEFAULT_RESTARTS,
    max_sweeps: int = config.DEFAULT_MAX_SWEEPS,
    tol: float = config.DEFAULT_IMPROVEMENT_TOL,
    seed: int = 0,
    lam: Optional[float] = Query(None, alias="lambda"),
):
    """
    Upload a state file and run the see-saw search on it.

    Args:
        file: JSON state document
        restarts, max_sweeps, tol, seed: See-saw parameters
        lam: Optional local noise level (qubits only)

    Returns:
        JSON with state info and the optimization result
    """
    logger.info(f"Received file: {file.filename}")

    contents = await file.read()
    state_info = state_processor.validate_and_process(contents, file.filename)

    try:
        seesaw = SeesawConfig(restarts=restarts, max_sweeps=max_sweeps, improvement_tol=tol, seed=seed)
        result = bell_service.optimize(state_info["state"], seesaw, lam)
    except BellSurveyError as e:
        raise _bad_request("Optimization", e)
    except Exception as e:
        raise _server_error("Optimization", e)

    return {
        "status": "success",
        "filename": file.filename,
        "state_info": {
            "d": state_info["d"],
            "n_sites": state_info["n_sites"],
            "dimension": state_info["dimension"],
            "size_bytes": state_info["size_bytes"]
        },
        "result": result
    }
