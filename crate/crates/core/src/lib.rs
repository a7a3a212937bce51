pub mod census_file;
pub mod cyclicity;
pub mod elliptic;
pub mod enumeration;
pub mod error;
pub mod lattice;
pub mod poly;
pub mod primes;
pub mod residue;
pub mod sigma;
pub mod surd;
pub mod weil;

pub use cyclicity::{CountSummary, PrimeSet};
pub use enumeration::{IsogenyClassRecord, Mode};
pub use error::{Error, Result};
pub use sigma::BoundPair;
pub use weil::{FieldParams, RealCounterpart, WeilCoefficients};
