//! Base expanders, unitary nets and the recursive family `G_t` with
//! certified spectral bounds.

mod base;
mod cert;
mod net;

pub use base::random_base;
pub use cert::{build_gt, cert_bound, CertNode, CompositionRule, ExpanderCert, GtFamily, DEFAULT_MATERIALIZE_CAP};
pub use net::{
    build_net, conjugation_distance, conjugation_distance_with_cap, discretize, net_search, ConjugationDistance,
    Discretized, GeneratorSet, NetMember, SearchMode, SearchResult, UnitaryNet, DEFAULT_SEARCH_BUDGET,
};
