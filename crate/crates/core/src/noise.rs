//! IID depolarizing noise: sampling, per-error probabilities and the
//! probability that a degree-`D` stabilizer parity is flipped.

use std::sync::OnceLock;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{PackedEnumeration, PackedPauli, PauliError, SinglePauli, SparsePauli, MAX_ENUMERATION_SUPPORT};

/// Upper end of the range where the quadratic lower bound is used (it is
/// positive on `(0, 3/8)` for degree 4).
pub const LOWER_BOUND_MAX_P: f64 = 3.0 / 8.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

fn check_probability(name: &str, p: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(NoiseError::Domain(format!("{name} = {p} is not in [0, 1]")))
    }
}

/// Depolarizing channel applying X, Y or Z each with probability `p/3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingModel {
    p: f64,
}

impl DepolarizingModel {
    pub fn new(p: f64) -> Result<Self, NoiseError> {
        check_probability("p", p)?;
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    fn pauli_for(&self, word: u64) -> SinglePauli {
        // 53 high bits → uniform in [0, 1)
        let r = (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let third = self.p / 3.0;
        if r >= self.p {
            SinglePauli::I
        } else if r < third {
            SinglePauli::X
        } else if r < 2.0 * third {
            SinglePauli::Y
        } else {
            SinglePauli::Z
        }
    }
}

/// Random source for trial `trial` under `master_seed`. Each trial owns a
/// ChaCha stream; vertex `v` consumes the `v`-th 64-bit word of that stream.
fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Samples an IID depolarizing error on vertices `0..vertex_count`.
/// Deterministic in `(master_seed, trial, vertex)`.
pub fn sample_error_on(vertex_count: usize, model: &DepolarizingModel, master_seed: u64, trial: u64) -> SparsePauli {
    if model.p == 0.0 {
        return SparsePauli::identity();
    }
    let mut rng = trial_rng(master_seed, trial);
    let terms = (0..vertex_count)
        .map(|v| (v, model.pauli_for(rng.next_u64())))
        .filter(|(_, p)| !p.is_identity())
        .collect();
    SparsePauli::from_sorted_unchecked(terms)
}

/// Samples an error on every vertex of `g` using stream 0 of `seed`.
pub fn sample_error(g: &crate::graph::Graph, model: &DepolarizingModel, seed: u64) -> SparsePauli {
    sample_error_on(g.vertex_count(), model, seed, 0)
}

/// `(p/3)^w (1-p)^(n-w)`: probability of one specific weight-`w` Pauli on `n` sites.
pub fn error_probability(weight: usize, support_size: usize, p: f64) -> Result<f64, NoiseError> {
    if weight > support_size {
        return Err(NoiseError::Domain(format!(
            "weight {weight} exceeds support size {support_size}"
        )));
    }
    check_probability("p", p)?;
    Ok(error_probability_unchecked(weight, support_size, p))
}

#[inline]
fn error_probability_unchecked(weight: usize, support_size: usize, p: f64) -> f64 {
    (p / 3.0).powi(weight as i32) * (1.0 - p).powi((support_size - weight) as i32)
}

/// Per-weight tallies of Paulis on the support of a degree-`D` stabilizer
/// that commute or anticommute with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipStats {
    pub degree: usize,
    pub commuting: Vec<u64>,
    pub anticommuting: Vec<u64>,
}

impl FlipStats {
    pub fn support_size(&self) -> usize {
        self.degree + 1
    }

    /// Probability that an IID depolarizing error flips the parity.
    pub fn flip_probability(&self, p: f64) -> f64 {
        let n = self.support_size();
        self.anticommuting
            .iter()
            .enumerate()
            .map(|(w, &count)| count as f64 * error_probability_unchecked(w, n, p))
            .sum()
    }

    /// Total probability mass of all enumerated errors; 1 up to rounding.
    pub fn total_probability(&self, p: f64) -> f64 {
        let n = self.support_size();
        (0..=n)
            .map(|w| (self.commuting[w] + self.anticommuting[w]) as f64 * error_probability_unchecked(w, n, p))
            .sum()
    }
}

fn check_degree(degree: usize) -> Result<(), NoiseError> {
    if degree == 0 {
        return Err(NoiseError::Domain("degree must be positive".into()));
    }
    if degree + 1 > MAX_ENUMERATION_SUPPORT {
        return Err(PauliError::SupportTooLarge { size: degree + 1 }.into());
    }
    Ok(())
}

fn enumerate_flip_counts(degree: usize) -> Result<FlipStats, NoiseError> {
    let n = degree + 1;
    // position 0 is the X-measured center, 1..=D the Z-measured neighbors
    let mut pattern = PackedPauli::default();
    pattern.set(0, SinglePauli::X);
    for k in 1..n {
        pattern.set(k, SinglePauli::Z);
    }
    let mut commuting = vec![0u64; n + 1];
    let mut anticommuting = vec![0u64; n + 1];
    for e in PackedEnumeration::new(n, 0)? {
        let w = e.weight() as usize;
        if e.anticommutes(pattern) {
            anticommuting[w] += 1;
        } else {
            commuting[w] += 1;
        }
    }
    Ok(FlipStats {
        degree,
        commuting,
        anticommuting,
    })
}

/// Exhaustive commutation tallies for a degree-`degree` stabilizer. Results
/// are cached per degree.
pub fn flip_counts(degree: usize) -> Result<FlipStats, NoiseError> {
    static CACHE: [OnceLock<FlipStats>; MAX_ENUMERATION_SUPPORT] = [const { OnceLock::new() }; MAX_ENUMERATION_SUPPORT];
    check_degree(degree)?;
    let slot = &CACHE[degree];
    if let Some(stats) = slot.get() {
        return Ok(stats.clone());
    }
    let stats = enumerate_flip_counts(degree)?;
    Ok(slot.get_or_init(|| stats).clone())
}

/// Parity-flip probability summed over the enumerated anticommuting errors.
pub fn p_flip_exact(degree: usize, p: f64) -> Result<f64, NoiseError> {
    check_probability("p", p)?;
    Ok(flip_counts(degree)?.flip_probability(p))
}

/// Closed form `(1 - (1 - 4p/3)^(D+1)) / 2`: each site independently
/// anticommutes with probability `2p/3` and the parity flips on odd counts.
pub fn p_flip_closed(degree: usize, p: f64) -> f64 {
    let n = (degree + 1) as f64;
    let q = 4.0 * p / 3.0;
    if q < 1.0 {
        // 1 - (1-q)^n without cancellation at small q
        -(n * (-q).ln_1p()).exp_m1() / 2.0
    } else {
        (1.0 - (1.0 - q).powi(degree as i32 + 1)) / 2.0
    }
}

/// `l_D(p) = (2(D+1)/3) p - (4D(D+1)/9) p²`, defined on `[0, 3/8]`.
pub fn lower_bound(degree: usize, p: f64) -> Result<f64, NoiseError> {
    if !(0.0..=LOWER_BOUND_MAX_P).contains(&p) {
        return Err(NoiseError::Domain(format!(
            "lower bound requires 0 <= p <= 3/8, got {p}"
        )));
    }
    let d = degree as f64;
    Ok(2.0 * (d + 1.0) / 3.0 * p - 4.0 * d * (d + 1.0) / 9.0 * p * p)
}

/// `u_D(p) = (2(D+1)/3) p`.
pub fn upper_bound(degree: usize, p: f64) -> Result<f64, NoiseError> {
    check_probability("p", p)?;
    Ok(upper_bound_unchecked(degree, p))
}

#[inline]
pub(crate) fn upper_bound_unchecked(degree: usize, p: f64) -> f64 {
    2.0 * (degree as f64 + 1.0) / 3.0 * p
}
