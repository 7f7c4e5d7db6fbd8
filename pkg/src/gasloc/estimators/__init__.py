from .doppler import DopplerEstimate, SatTrack, doppler_batch_ls
from .snapshot import (
    PositionEstimate,
    SolverConfig,
    hybrid_range_aoa,
    mlat_range,
    mlat_tdoa,
    tdoa_from_toas,
    tdoa_measurements,
    triangulate,
)
from .tracking import (
    TrackState,
    aoa_model,
    cv_process_noise,
    cv_transition,
    kf_predict,
    kf_update,
    nees,
    position_model,
    pseudorange_rate_model,
    range_model,
)

__all__ = [
    "DopplerEstimate", "PositionEstimate", "SatTrack", "SolverConfig", "TrackState",
    "aoa_model", "cv_process_noise", "cv_transition", "doppler_batch_ls",
    "hybrid_range_aoa", "kf_predict", "kf_update", "mlat_range", "mlat_tdoa", "nees",
    "position_model", "pseudorange_rate_model", "range_model", "tdoa_from_toas",
    "tdoa_measurements", "triangulate",
]
