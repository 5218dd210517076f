"""BCM topology metric, BCM rewiring and localized QoS routing simulation."""

from .errors import BcmNetError
from .generators import (
    BaParams,
    WaxmanParams,
    assign_subnetworks,
    generate_barabasi_albert,
    generate_waxman,
    load_topology,
    save_topology,
    split_in_two,
)
from .rewire import RewireConfig, rewire_step, rewire_until
from .routing import RoutingParams, enumerate_candidates
from .simulate import (
    SimConfig,
    TwoSubnetTraffic,
    UniformTraffic,
    holding_time_for_load,
    replicate,
    run_simulation,
)
from .topology import Topology, bcm, build_topology, hop_matrix, topology_stats

__version__ = "0.1.0"
