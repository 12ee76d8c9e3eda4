"""LoRa link-quality toolkit.

Link budgets (RSSI/SNR/ESP/path-loss/free-space-loss), LoRa PHY timing, a
measurement-table dataset with a data-driven configuration recommender, a
deterministic TDMA uplink simulator, and a channel-update bridge.
"""

from .core_types import (
    BW_HZ_VALUES,
    CR_NUMERATORS,
    SF_VALUES,
    CodingRate,
    GridValidationError,
    LinkParams,
    RadioConfig,
    SignalSample,
    config_from_text,
    config_to_text,
    validate_measurement_grid,
)
from .link_budget import (
    LossBreakdown,
    esp,
    free_space_loss,
    loss_breakdown,
    packet_loss_pct,
    path_loss,
    rssi_from_register,
    snr_from_register,
)
from .phy_model import (
    FrameParams,
    MonopoleDesign,
    monopole_dimensions,
    nominal_bit_rate,
    symbol_duration,
    time_on_air,
)
from .dataset import (
    CAMPAIGN_FREQ_HZ,
    CAMPAIGN_LINK_PARAMS,
    CAMPAIGN_TX_POWER_DBM,
    MeasurementRecord,
    MeasurementTable,
    load_bundled_measurements,
    load_measurements,
    lookup,
    reconstruct_excess_loss,
)
from .recommender import (
    Recommendation,
    SelectionConstraints,
    recommend_cr,
    recommend_sf_bw,
)
from .tdma_sim import (
    NodeSpec,
    SimReport,
    SlotSchedule,
    build_schedule,
    drop_model_from_table,
    parse_report,
    run_simulation,
    serialize_report,
)
from .uplink_bridge import (
    ChannelUpdate,
    DryRunTransport,
    HttpTransport,
    bridge_sim_report,
    format_update,
)

__version__ = "0.1.0"
