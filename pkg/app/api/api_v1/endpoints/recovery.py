from fastapi import APIRouter, File, Form, HTTPException, UploadFile, status
from fastapi.concurrency import run_in_threadpool
from typing import Optional
import logging

from app.core.exceptions import MedsError
from app.db.config_store import parse_config
from app.schemas.experiment import ExperimentConfig, RecoverResponse
from app.services.experiment_service import ingest_and_recover, preset
from app.utils.file_upload import delete_file, save_upload

logger = logging.getLogger(__name__)

router = APIRouter()

allowed_types = ["text/csv", "text/plain", "application/octet-stream", "application/vnd.ms-excel"]


@router.post("/", response_model=RecoverResponse)
async def recover_from_upload(
    triggers: UploadFile = File(...),
    reference: Optional[UploadFile] = File(None),
    config: Optional[str] = Form(None),
    preset_name: str = Form("synthetic"),
):
    """
    Recover a folded input from uploaded trigger times.

    `triggers` is a k,t CSV and `reference` an optional t,value CSV on a uniform grid.
    `config` is the text of a key=value experiment file; without it the named preset is used.
    """
    for upload in (triggers, reference):
        if upload is not None and upload.content_type not in allowed_types:
            raise HTTPException(
                status_code=status.HTTP_400_BAD_REQUEST,
                detail=f"Only CSV uploads are accepted, got {upload.content_type}"
            )

    try:
        experiment: ExperimentConfig = parse_config(config, "<upload>") if config else preset(preset_name)
    except MedsError as e:
        raise HTTPException(status_code=e.http_status, detail=e.message)

    trigger_path = await save_upload(triggers, folder="triggers")
    reference_path = await save_upload(reference, folder="references") if reference is not None else None
    try:
        _, report = await run_in_threadpool(ingest_and_recover, trigger_path, experiment, reference_path)
    except MedsError as e:
        logger.warning(f"Recovery from upload failed: {e.message}")
        raise HTTPException(status_code=e.http_status, detail=e.message)
    finally:
        await delete_file(trigger_path)
        if reference_path is not None:
            await delete_file(reference_path)

    return RecoverResponse(report=report, source="upload")
