//! Modular symbols over the function field of an elliptic curve, computed
//! through the labeled Bruhat-Tits tree and its quotient.
//!
//! The pipeline: classify the curve's x-lines (`curve`), build the labeled
//! quotient tree (`stree`), materialize the full (q+1)-regular tree lazily
//! (`ttree`), decompose symbols into the four reduced types (`symbols`),
//! rewrite balanced relations into certified combinations of the nine
//! generator relations (`relations`), and present the symbol space with its
//! Borel-Moore homology group (`present`).

pub mod curve;
pub mod error;
pub mod present;
pub mod relations;
pub mod sampling;
pub mod snf;
pub mod stree;
pub mod symbols;
pub mod ttree;

pub use error::{Error, Result};
