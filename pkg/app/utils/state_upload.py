import json
import logging

from fastapi import HTTPException

from bellsurvey import config
from bellsurvey.errors import BellSurveyError, ValidationError
from bellsurvey.qcore import PureState
from bellsurvey.storage import parse_state

logger = logging.getLogger(__name__)

# Configuration
MAX_STATE_SIZE = config.API_MAX_UPLOAD_BYTES
MAX_SITES = 24  # upper limit on n_sites accepted over HTTP


def _declared_sites(document) -> int:
    if not isinstance(document, dict):
        return 0
    body = document.get('state', document)
    if not isinstance(body, dict):
        return 0
    try:
        return int(body.get('n_sites', 0) or 0)
    except (TypeError, ValueError):
        raise ValidationError(f"n_sites must be an integer, got {body.get('n_sites')!r}")


class StateUploadProcessor:
    """Handle state-file validation"""

    @staticmethod
    def validate_and_process(state_data: bytes, filename: str) -> dict:
        """
        Validate an uploaded state document and return it with its metadata.

        Args:
            state_data: Raw file bytes (JSON state document)
            filename: Original filename

        Returns:
            dict with the PureState and its dimensions

        Raises:
            HTTPException: If the document is invalid
        """
        if len(state_data) == 0:
            raise HTTPException(status_code=400, detail="Empty file provided")

        if len(state_data) > MAX_STATE_SIZE:
            raise HTTPException(
                status_code=400,
                detail=f"State file too large. Max size: {MAX_STATE_SIZE / 1024 / 1024}MB"
            )

        try:
            document = json.loads(state_data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            logger.error(f"Failed to parse state file {filename}: {str(e)}")
            raise HTTPException(status_code=400, detail="Invalid state file. Expected a JSON document.")

        try:
            if _declared_sites(document) > MAX_SITES:
                raise HTTPException(status_code=400, detail=f"Too many sites. Max: {MAX_SITES}")
            state = parse_state(document)
        except BellSurveyError as e:
            logger.error(f"Rejected state file {filename}: {str(e)}")
            raise HTTPException(status_code=400, detail=f"Invalid state: {str(e)}")

        logger.info(f"Processed state: {filename} - d={state.d}, N={state.n_sites}")

        return {
            "d": state.d,
            "n_sites": state.n_sites,
            "dimension": state.dimension,
            "size_bytes": len(state_data),
            "state": state,  # PureState for further processing
        }


def state_from_payload(payload: dict) -> PureState:
    """Parse an inline JSON state, mapping package errors to 400"""
    try:
        return parse_state(payload)
    except BellSurveyError as e:
        raise HTTPException(status_code=400, detail=f"Invalid state: {str(e)}")
