from fastapi import APIRouter, HTTPException, Query
from fastapi.concurrency import run_in_threadpool

from app.core.exceptions import MedsError
from app.schemas.asdm import AsdmParams
from app.schemas.experiment import ExperimentConfig
from app.schemas.signal import DynamicRangeResponse, SignalSummary
from app.services.asdm_service import dynamic_range
from app.services.experiment_service import build_signal
from app.services.signal_service import peak_amplitude, signal_callable

router = APIRouter()


@router.get("/dynamic-range", response_model=DynamicRangeResponse)
async def get_dynamic_range(
    delta: float = Query(..., gt=0),
    b: float = Query(..., gt=0),
    omega: float = Query(..., gt=0),
):
    """
    Largest amplitude the standalone ASDM recovers: b - 2 delta Omega / pi
    """
    try:
        g_max = dynamic_range(AsdmParams(delta=delta, b=b), omega)
    except MedsError as e:
        raise HTTPException(status_code=e.http_status, detail=e.message)
    return DynamicRangeResponse(delta=delta, b=b, omega=omega, g_max=g_max)


@router.post("/summary", response_model=SignalSummary)
async def summarize_signal(config: ExperimentConfig):
    """
    Build the experiment input and report its measured peak
    """
    sig = build_signal(config)
    peak = await run_in_threadpool(peak_amplitude, signal_callable(sig), 0.0, config.duration, config.omega)
    return SignalSummary(
        bandwidth=sig.bandwidth,
        amplitude=config.amplitude,
        support_end=sig.support_end,
        peak=peak,
        coefficient_count=len(sig.coefficients),
    )
