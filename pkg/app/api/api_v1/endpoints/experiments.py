from fastapi import APIRouter, HTTPException, Query
from fastapi.concurrency import run_in_threadpool
import logging

from app.core.exceptions import MedsError
from app.schemas.experiment import (
    BaselineResponse, CheckRequest, ExperimentConfig, SweepRequest, SweepResponse, SyntheticResult,
)
from app.schemas.recovery import ConditionReport
from app.services.asdm_service import dynamic_range
from app.services.bounds_service import check_sufficient_conditions
from app.services.experiment_service import build_signal, run_baseline, run_delta_sweep, run_synthetic
from app.services.signal_service import peak_amplitude, signal_callable

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/simulate", response_model=SyntheticResult)
async def simulate(config: ExperimentConfig, write: bool = Query(False)):
    """
    Encode the configured input with the standalone ASDM and with MEDS and decode both.
    A failed fold detection is reported in the result, not as an error.
    """
    try:
        return await run_in_threadpool(run_synthetic, config, None, write)
    except MedsError as e:
        logger.error(f"Simulation failed: {e.message}")
        raise HTTPException(status_code=e.http_status, detail=e.message)


@router.post("/sweep", response_model=SweepResponse)
async def sweep(request: SweepRequest, write: bool = Query(False)):
    """
    Repeat the MEDS experiment across evenly spaced delta values
    """
    try:
        rows = await run_in_threadpool(
            run_delta_sweep,
            request.config,
            request.delta_min,
            request.delta_max,
            request.count,
            request.workers,
            None,
            write,
        )
    except MedsError as e:
        raise HTTPException(status_code=e.http_status, detail=e.message)
    return SweepResponse(rows=rows, output_dir=request.config.output_dir if write else None)


@router.post("/check", response_model=ConditionReport)
async def check(request: CheckRequest):
    """
    Sufficient recovery conditions; the measured peak is used when g_sup is omitted
    """
    config = request.config
    g_sup = request.g_sup
    try:
        if g_sup is None:
            fn = signal_callable(build_signal(config))
            g_sup = await run_in_threadpool(peak_amplitude, fn, 0.0, config.duration, config.omega)
        return check_sufficient_conditions(config.asdm, config.modulo, config.omega, g_sup, config.order)
    except MedsError as e:
        raise HTTPException(status_code=e.http_status, detail=e.message)


@router.post("/baseline", response_model=BaselineResponse)
async def baseline(config: ExperimentConfig):
    """
    Classical ASDM decoding of the unfolded input
    """
    try:
        triggers, _, err = await run_in_threadpool(run_baseline, config)
        fn = signal_callable(build_signal(config))
        peak = await run_in_threadpool(peak_amplitude, fn, 0.0, config.duration, config.omega)
        g_max = dynamic_range(config.asdm, config.omega)
    except MedsError as e:
        raise HTTPException(status_code=e.http_status, detail=e.message)
    return BaselineResponse(err_asdm=err, trigger_count=triggers.count, peak=peak, dynamic_range=g_max)
