//! Fractional birth-death processes.
//!
//! State probabilities come from three independent routes: the Adomian
//! decomposition series for arbitrary rates ([`adm`]), Mittag-Leffler closed
//! forms for linear rates ([`linear`], [`births`]), and Monte Carlo or
//! uniformization through the inverse-stable time change ([`mc`]).

pub mod adm;
pub mod births;
pub mod cli;
pub mod error;
pub mod linear;
pub mod mc;
pub mod rates;
pub mod special_fn;
pub mod validate;

pub use error::{FbdpError, Result};
pub use rates::{FractionalOrder, RateModel};
