//! Verification suites behind the subcommands. Each returns a [`Report`].

pub mod algebra;
pub mod bp;
pub mod counterexample;
pub mod dimension;
pub mod jump;
pub mod kernels;
pub mod solve;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;

use crate::CliError;

/// Run-wide settings shared by all suites.
#[derive(Clone, Debug)]
pub struct Settings {
    pub seed: u64,
    /// Refinement steps above the reference resolution (`1x` is 0, `2x` is 1).
    pub refine: u32,
    pub m: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: 7,
            refine: 0,
            m: None,
        }
    }
}

impl Settings {
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn resolution_label(&self) -> String {
        format!("{}x", 1u64 << self.refine)
    }
}

/// Suite configuration from an optional JSON file; absent fields keep defaults.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

pub(crate) fn core_err(e: hyperrh::Error) -> CliError {
    match e {
        hyperrh::Error::Parse(_)
        | hyperrh::Error::Invalid(_)
        | hyperrh::Error::UnsupportedDimension(_)
        | hyperrh::Error::OddDimension(_)
        | hyperrh::Error::HypothesisViolated { .. }
        | hyperrh::Error::NonInvertibleConstant { .. }
        | hyperrh::Error::NotStructural { .. }
        | hyperrh::Error::DimensionMismatch { .. }
        | hyperrh::Error::InvalidMesh(_)
        | hyperrh::Error::Io(_) => CliError::Config(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

pub(crate) fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

/// Deterministic unit directions on a golden spiral.
pub(crate) fn spiral(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

