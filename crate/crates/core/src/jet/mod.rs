//! Jet-space bookkeeping: multi-indices, coordinate enumeration for
//! `J^k(E)` and `J^1(J^k(E))`, total derivatives, and the canonical
//! inclusion of `J^{k+1}(E)` into `J^1(J^k(E))`.
//!
//! Coordinate naming convention used everywhere (files, reports, CSV):
//! base coordinates `x1..xn`, jet coordinates `<fiber>_<mu>` with `mu`
//! the sorted digit string of the multi-index (`y1_12`), and the order-0
//! jet written as the bare fiber name.

mod inclusion;
mod multi_index;
mod space;

pub use inclusion::{CanonicalInclusion, LayeredPoint};
pub use multi_index::{multi_indices, multi_indices_up_to, MultiIndex};
pub use space::{jet_fiber_count, JetCoord, JetError, JetPoint, JetSpace, SpaceLimits};
