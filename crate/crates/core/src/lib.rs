//! Exact computation in incidence rings of locally finite preordered sets.

pub(crate) mod dense;
pub mod error;
pub mod functor_cat;
pub mod glgroup;
pub mod incidence;
pub mod io;
pub mod lazy;
pub mod proset;
pub mod recovery;
pub mod ring;

pub use error::{Error, Result};
pub use functor_cat::FccMap;
pub use glgroup::GroupElement;
pub use incidence::{IdealSpec, IncMatrix};
pub use proset::{Proset, ProsetFamily};
pub use ring::{CoeffRing, RingValue};

/// The library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
