//! Two weakly coupled pendulums: closed-form unperturbed motion, Melnikov
//! analysis, the continued periodic orbit, its invariant manifolds and
//! symbolic dynamics on a Poincaré section.

pub mod elliptic;
pub mod melnikov;
pub mod orbit;

pub use melnikov::{find_a0, j_integral, j_limit, melnikov, melnikov_slope0, A0Report};
pub use orbit::{PendulumOrbit, Separatrix};
pub mod manifold;
pub mod periodic;

pub use manifold::{manifold_gap, transversality_check, Transversality};
pub use periodic::{continue_periodic_orbit, coupling, Floquet, PeriodicOrbit};
pub mod section;

pub use section::{extract_symbols, lift_to_section, orbit_events, poincare_map};
pub mod target;

pub use target::{target_itinerary, target_symbols, Itinerary, Targeter};
