//! Instance generators, brute-force references, the query language, and
//! the verification driver.

pub mod brute;
pub mod gen;
pub mod query;
pub mod verify;

pub use brute::{brute_force, BruteResult};
pub use gen::{gen, GeneratorSpec};
pub use query::{answer, parse_query, Query};
pub use verify::{verify, Profile, VerificationReport};
