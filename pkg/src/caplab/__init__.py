"""caplab: quantum channel capacity estimation and two-channel
coherent-information experiments."""

from .qmath import (
    haar_unitary,
    max_entangled_state,
    partial_trace,
    random_basis,
    tensor,
    von_neumann_entropy,
)
from .channels import (
    QuantumChannel,
    RetroInstance,
    apply_channel,
    complementary_channel,
    dephasing_channel,
    depolarizing_channel,
    erasure_channel,
    identity_channel,
    isometric_dilation,
    make_channel,
    retro_fixed_channel,
    sample_retro_instance,
)
from .capacities import (
    CqState,
    Ensemble,
    OptimizationReport,
    coherent_information_channel,
    coherent_information_state,
    conditional_coherent_info,
    holevo_quantity,
    maximize_coherent,
    maximize_holevo,
    maximize_private,
    private_information_quantity,
)
from .protocol import (
    BranchValues,
    ProtocolEstimate,
    branch_coherent_infos,
    joint_coherent_info,
    joint_rate_lower_bound,
    joint_rate_positive,
    prescribed_control_dim,
    protocol_state,
)

__version__ = "0.1.0"

__all__ = [
    "BranchValues",
    "CqState",
    "Ensemble",
    "OptimizationReport",
    "ProtocolEstimate",
    "QuantumChannel",
    "RetroInstance",
    "apply_channel",
    "branch_coherent_infos",
    "coherent_information_channel",
    "coherent_information_state",
    "complementary_channel",
    "conditional_coherent_info",
    "dephasing_channel",
    "depolarizing_channel",
    "erasure_channel",
    "haar_unitary",
    "holevo_quantity",
    "identity_channel",
    "isometric_dilation",
    "joint_coherent_info",
    "joint_rate_lower_bound",
    "joint_rate_positive",
    "make_channel",
    "max_entangled_state",
    "maximize_coherent",
    "maximize_holevo",
    "maximize_private",
    "partial_trace",
    "prescribed_control_dim",
    "private_information_quantity",
    "protocol_state",
    "random_basis",
    "retro_fixed_channel",
    "sample_retro_instance",
    "tensor",
    "von_neumann_entropy",
]
