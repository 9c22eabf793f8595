//! Dense statevector cross-check for small graphs.
//!
//! Builds `|G⟩` explicitly, applies Pauli errors and evaluates stabilizer
//! expectations, so that the commutation-sign parities used by `protocol`
//! can be compared against direct linear algebra.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::noise::{self, DepolarizingModel, NoiseError};
use crate::pauli::{SinglePauli, SparsePauli};
use crate::protocol::Parity;

pub const MAX_QUBITS: usize = 16;

/// `⟨S⟩` values within this distance of ±1 count as deterministic.
const SIGN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{0} qubits exceed the statevector cap of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("Pauli acts on vertex {vertex} outside a {n}-qubit state")]
    OutsideState { vertex: usize, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Statevector on `n` qubits; qubit `v` is bit `v` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

/// `P|x⟩ = phase(x) |x ⊕ flip⟩` for a phase-free Pauli string.
struct PauliAction {
    flip: usize,
    z_mask: usize,
    y_phase: Complex64,
}

impl PauliAction {
    fn new(p: &SparsePauli, n: usize) -> Result<Self, OracleError> {
        let (mut flip, mut z_mask, mut y_count) = (0usize, 0usize, 0u32);
        for &(v, pauli) in p.terms() {
            if v >= n {
                return Err(OracleError::OutsideState { vertex: v, n });
            }
            let bit = 1usize << v;
            if pauli.x_bit() {
                flip |= bit;
            }
            if pauli.z_bit() {
                z_mask |= bit;
            }
            if pauli == SinglePauli::Y {
                y_count += 1;
            }
        }
        // Y = i X Z
        let y_phase = Complex64::i().powu(y_count);
        Ok(Self { flip, z_mask, y_phase })
    }

    #[inline]
    fn phase(&self, x: usize) -> Complex64 {
        if (x & self.z_mask).count_ones() % 2 == 1 {
            -self.y_phase
        } else {
            self.y_phase
        }
    }
}

impl DenseState {
    /// `|+⟩^⊗n` followed by CZ on every edge of `g`.
    pub fn graph_state(g: &Graph) -> Result<Self, OracleError> {
        let n = g.vertex_count();
        if n > MAX_QUBITS {
            return Err(OracleError::TooManyQubits(n));
        }
        let edges: Vec<usize> = g.edges().map(|(a, b)| (1 << a) | (1 << b)).collect();
        let norm = (1usize << n) as f64;
        let amp = 1.0 / norm.sqrt();
        let amplitudes = (0..1usize << n)
            .map(|x| {
                let sign_flips = edges.iter().filter(|&&m| x & m == m).count();
                Complex64::new(if sign_flips % 2 == 0 { amp } else { -amp }, 0.0)
            })
            .collect();
        Ok(Self { n, amplitudes })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn apply_pauli(&mut self, p: &SparsePauli) -> Result<(), OracleError> {
        let action = PauliAction::new(p, self.n)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (x, &a) in self.amplitudes.iter().enumerate() {
            out[x ^ action.flip] = action.phase(x) * a;
        }
        self.amplitudes = out;
        Ok(())
    }

    /// `⟨ψ|S|ψ⟩`. The result is real for a Hermitian Pauli string.
    pub fn expectation(&self, s: &SparsePauli) -> Result<f64, OracleError> {
        let action = PauliAction::new(s, self.n)?;
        let value: Complex64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(x, &a)| self.amplitudes[x ^ action.flip].conj() * action.phase(x) * a)
            .sum();
        debug_assert!(value.im.abs() < 1e-9);
        Ok(value.re)
    }
}

pub fn build_graph_state(g: &Graph) -> Result<DenseState, OracleError> {
    DenseState::graph_state(g)
}

pub fn expectation_of_generator(state: &DenseState, s: &SparsePauli) -> Result<f64, OracleError> {
    state.expectation(s)
}

/// Sign of a deterministic expectation, or `None` when `|⟨S⟩|` is not 1.
fn parity_from_expectation(value: f64) -> Option<Parity> {
    if (value - 1.0).abs() < SIGN_TOLERANCE {
        Some(Parity::Plus)
    } else if (value + 1.0).abs() < SIGN_TOLERANCE {
        Some(Parity::Minus)
    } else {
        None
    }
}

/// Star graph: vertex 0 joined to `1..=leaves`.
pub fn star_graph(leaves: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..=leaves).map(|u| (0, u)).collect();
    Graph::from_edges(leaves + 1, &edges).expect("star edges are valid")
}

/// Subgraph induced on the radius-`radius` ball around `center`, with the
/// center relabelled to 0. For `radius ≥ 2` the generator of the center is
/// unchanged by the restriction.
pub fn stabilizer_patch(g: &Graph, center: usize, radius: usize) -> Result<Graph, OracleError> {
    let dist = g.bfs_distances(center, Some(radius))?;
    let mut ball: Vec<(usize, usize)> = dist.iter().enumerate().filter_map(|(v, d)| d.map(|d| (d, v))).collect();
    ball.sort_unstable();
    let vertices: Vec<usize> = ball.into_iter().map(|(_, v)| v).collect();
    if vertices.len() > MAX_QUBITS {
        return Err(OracleError::TooManyQubits(vertices.len()));
    }
    Ok(g.induced_subgraph(&vertices)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexAgreement {
    pub vertex: usize,
    pub degree: usize,
    pub mean_parity: f64,
    pub expected_mean: f64,
    /// `|mean − expected|` in units of the binomial standard error.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub qubits: usize,
    pub p: f64,
    pub trials: u64,
    pub comparisons: u64,
    pub mismatches: u64,
    /// Expectations that were not ±1 (should never happen).
    pub nondeterministic: u64,
    pub max_abs_deviation: f64,
    pub vertices: Vec<VertexAgreement>,
}

impl CrossValidation {
    pub fn max_z_score(&self) -> f64 {
        self.vertices.iter().map(|v| v.z_score).fold(0.0, f64::max)
    }
}

/// Samples `trials` errors and compares, for every vertex, the
/// commutation-sign parity with the statevector expectation of `S_v` on
/// `e|G⟩`.
pub fn cross_validate(g: &Graph, p: f64, trials: u64, seed: u64) -> Result<CrossValidation, OracleError> {
    let model = DepolarizingModel::new(p)?;
    let base = DenseState::graph_state(g)?;
    let n = g.vertex_count();
    let stabilizers = (0..n)
        .map(|v| g.stabilizer_generator(v))
        .collect::<Result<Vec<_>, _>>()?;

    let mut parity_sums = vec![0i64; n];
    let (mut comparisons, mut mismatches, mut nondeterministic) = (0u64, 0u64, 0u64);
    for trial in 0..trials {
        let error = noise::sample_error_on(n, &model, seed, trial);
        let mut state = base.clone();
        state.apply_pauli(&error)?;
        for (v, s) in stabilizers.iter().enumerate() {
            let predicted = Parity::of(&error, s);
            comparisons += 1;
            match parity_from_expectation(state.expectation(s)?) {
                Some(measured) => {
                    if measured != predicted {
                        mismatches += 1;
                    }
                    parity_sums[v] += i64::from(measured.value());
                }
                None => nondeterministic += 1,
            }
        }
    }

    let mut vertices = Vec::with_capacity(n);
    for (v, &sum) in parity_sums.iter().enumerate() {
        let degree = g.degree(v)?;
        let flip = if degree == 0 {
            noise::p_flip_closed(0, p)
        } else {
            noise::p_flip_exact(degree, p)?
        };
        let expected_mean = 1.0 - 2.0 * flip;
        let mean_parity = sum as f64 / trials as f64;
        let se = ((1.0 - expected_mean * expected_mean) / trials as f64).sqrt();
        let deviation = (mean_parity - expected_mean).abs();
        let z_score = if se > 0.0 {
            deviation / se
        } else if deviation == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        vertices.push(VertexAgreement {
            vertex: v,
            degree,
            mean_parity,
            expected_mean,
            z_score,
        });
    }
    let max_abs_deviation = vertices
        .iter()
        .map(|a| (a.mean_parity - a.expected_mean).abs())
        .fold(0.0, f64::max);

    Ok(CrossValidation {
        qubits: n,
        p,
        trials,
        comparisons,
        mismatches,
        nondeterministic,
        max_abs_deviation,
        vertices,
    })
}
