"""Vehicle-dynamics workbench: single-track simulation and GP residual models."""

from ._core import (
    ConfigError,
    ControlInput,
    Error,
    ErrorGP,
    Kernel,
    VehicleParams,
    VehicleState,
    __version__,
    build_refline,
    clamp_input,
    compute_errors,
    corrected_step,
    explained_variance,
    feature_matrix,
    fit_error_model,
    gp_fit,
    gp_predict,
    integrate_step,
    load_config,
    load_error_model,
    load_track,
    parse_config,
    predict_errors,
    r_squared,
    rmse,
    rollout,
    run_matrix,
    save_error_model,
    sectors,
    simulate,
    study_combos,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
