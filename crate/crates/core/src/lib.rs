//! Diversity–multiplexing tradeoff (DMT) analysis of asynchronous two-hop
//! cooperative relay networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`waveforms`] – unit-energy shaping pulses and their delayed cross-correlations.
//! * [`gram`] – the block-Toeplitz correlation matrix `Ξ`, its spectral symbol `Γ(ω)`
//!   and the sinc-sampled Toeplitz matrices `Γ_j`, plus spectral diagnostics.
//! * [`channel_model`] – fading realizations, decode sets, exact log-det and
//!   high-SNR surrogate mutual information.
//! * [`pwl`] / [`dmt_closed_form`] – exact DMT curves for NSDF, OSDF, NAF and OAF.
//! * [`exponent_oracle`] – a brute-force grid solver for the underlying infimum
//!   problems, used to cross-check the closed forms.
//! * [`outage_sim`] – Monte Carlo outage estimation and slope fitting.

pub mod channel_model;
pub mod dmt_closed_form;
pub mod error;
pub mod exponent_oracle;
pub mod gram;
pub mod outage_sim;
pub mod pwl;
pub mod quad;
pub mod waveforms;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Relaying protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Non-orthogonal selection decode-and-forward.
    Nsdf,
    /// Orthogonal selection decode-and-forward.
    Osdf,
    /// Non-orthogonal amplify-and-forward.
    Naf,
    /// Orthogonal amplify-and-forward.
    Oaf,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Protocol::Nsdf, Protocol::Osdf, Protocol::Naf, Protocol::Oaf];

    pub fn is_decode_forward(self) -> bool {
        matches!(self, Protocol::Nsdf | Protocol::Osdf)
    }

    /// Whether the source keeps transmitting during the relaying phase.
    pub fn is_non_orthogonal(self) -> bool {
        matches!(self, Protocol::Nsdf | Protocol::Naf)
    }

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Nsdf => "nsdf",
            Protocol::Osdf => "osdf",
            Protocol::Naf => "naf",
            Protocol::Oaf => "oaf",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nsdf" => Ok(Protocol::Nsdf),
            "osdf" => Ok(Protocol::Osdf),
            "naf" => Ok(Protocol::Naf),
            "oaf" => Ok(Protocol::Oaf),
            _ => Err(Error::Invalid(format!("unknown protocol `{s}`"))),
        }
    }
}

/// Waveform regime: finite time support (`u < ∞`) or band-limited sinc pulses (`u → ∞`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Finite,
    Infinite,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Finite, Mode::Infinite];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Finite => "finite",
            Mode::Infinite => "infinite",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "finite" | "finite_u" | "finite-u" => Ok(Mode::Finite),
            "infinite" | "infinite_u" | "infinite-u" => Ok(Mode::Infinite),
            _ => Err(Error::Invalid(format!("unknown waveform mode `{s}`"))),
        }
    }
}

/// `(1+√5)/2`, the optimal single-relay NSDF frame split at low multiplexing gain.
pub const KAPPA_HAT: f64 = 1.618_033_988_749_895;
