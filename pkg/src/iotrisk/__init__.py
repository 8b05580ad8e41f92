"""Economic model of IoT cyber risk: asset valuation, micromort risk units and
cyber Value-at-Risk."""

__version__ = "0.1.0"

from .assets import (  # noqa: E402
    Asset,
    AssetClass,
    Axis,
    Basis,
    Category,
    CompositionRatio,
    Inventory,
    Origin,
    Valuation,
    composition_ratio,
    total_value,
    value_of,
)
from .micromort import (  # noqa: E402
    FleetStats,
    ScanResult,
    WtpParams,
    fleet_iotmm,
    group_wtp,
    scan_vulnerability_rate,
    value_of_one_iotmm,
)
from .risk import (  # noqa: E402
    MicromortRate,
    RiskFactorProfile,
    Scenario,
    ScenarioSet,
    expected_consequence,
    from_micromorts,
    residual_risk,
    scenario_risk,
    to_micromorts,
)
from .var import (  # noqa: E402
    Exposure,
    IoTMM2Report,
    LossDistribution,
    SimConfig,
    VaRCurve,
    exact_distribution,
    historical_distribution,
    iotmm2_report,
    linear_var,
    simulate_losses,
    var_at,
    var_curve,
)
