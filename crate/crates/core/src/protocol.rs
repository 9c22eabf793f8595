//! Parameter derivation, test-vertex selection and the one-shot
//! accept/reject decision.
//!
//! A parity of `S_v` is simulated as the commutation sign of the sampled
//! Pauli error with `S_v`. For a graph state hit by a Pauli error this is
//! exactly the product of the X/Z single-qubit outcomes over `supp(S_v)`;
//! the `oracle` module checks the equivalence on small graphs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::noise::{self, NoiseError, LOWER_BOUND_MAX_P};
use crate::pauli::{anticommutes, SinglePauli, SparsePauli};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("only {found} eligible test vertices of degree {degree} found, {required} required")]
    InsufficientVertices {
        found: usize,
        required: usize,
        degree: usize,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Test parameters derived from the significance level, the threshold and
/// the stabilizer degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub delta: f64,
    pub p_th: f64,
    pub degree: usize,
    pub n_test: usize,
    pub p_goal: f64,
    pub measured_qubits: usize,
}

fn check_inputs(delta: f64, p_th: f64, degree: usize) -> Result<f64, ProtocolError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ProtocolError::Domain(format!("delta = {delta} must lie in (0, 1)")));
    }
    if degree == 0 {
        return Err(ProtocolError::Domain("degree must be positive".into()));
    }
    if !(p_th > 0.0 && p_th < LOWER_BOUND_MAX_P) {
        return Err(ProtocolError::Domain(format!("p_th = {p_th} must lie in (0, 3/8)")));
    }
    let l = noise::lower_bound(degree, p_th)?;
    if l <= 0.0 {
        return Err(ProtocolError::Domain(format!(
            "lower bound l_{degree}({p_th}) = {l} is not positive"
        )));
    }
    Ok(l)
}

/// `N_test = ⌈ln(1/δ) / l_D(p_th)⌉`.
pub fn required_tests(delta: f64, p_th: f64, degree: usize) -> Result<usize, ProtocolError> {
    let l = check_inputs(delta, p_th, degree)?;
    Ok((((1.0 / delta).ln() / l).ceil() as usize).max(1))
}

/// `N_test` from [`required_tests`] and the largest `p_goal` whose upper
/// bound satisfies `u/(1-u) ≤ (δ/ln(1/δ)) l_D(p_th)`.
///
/// Fails when that `p_goal` is not below `p_th`, which happens once
/// `δ/ln(1/δ)` approaches 1 (δ above roughly 0.567).
pub fn compute_params(delta: f64, p_th: f64, degree: usize) -> Result<ProtocolParams, ProtocolError> {
    let l = check_inputs(delta, p_th, degree)?;
    let n_test = required_tests(delta, p_th, degree)?;
    let r = delta / (1.0 / delta).ln() * l;
    let p_goal = 3.0 / (2.0 * (degree as f64 + 1.0)) * r / (1.0 + r);
    if p_goal >= p_th {
        return Err(ProtocolError::Domain(format!(
            "p_goal = {p_goal} is not below p_th = {p_th}; lower delta"
        )));
    }
    Ok(ProtocolParams {
        delta,
        p_th,
        degree,
        n_test,
        p_goal,
        measured_qubits: (degree + 1) * n_test,
    })
}

impl ProtocolParams {
    /// Largest goal rate whose linearized acceptance bound holds for the
    /// rounded `N_test`: `u_D(p) = δ / (N_test + δ)`. Never above `p_goal`.
    pub fn conservative_p_goal(&self) -> f64 {
        let u = self.delta / (self.n_test as f64 + self.delta);
        3.0 / (2.0 * (self.degree as f64 + 1.0)) * u
    }
}

/// One inequality `lhs ≥ rhs`; `slack = lhs - rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            slack: lhs - rhs,
            pass: lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    /// `1 - (1 - l_D(p_th))^N_test ≥ 1 - δ`
    pub reject_above_threshold: InequalityCheck,
    /// `(1 - u_D(p_goal))^N_test ≥ 1 - δ`
    pub accept_below_goal: InequalityCheck,
    /// `δ (1 - u_D(p_goal)) / u_D(p_goal) ≥ N_test`, the linearized form of the
    /// acceptance requirement. Informational: rounding `N_test` up can break
    /// it even when the requirement itself holds.
    pub accept_linearized: InequalityCheck,
}

impl ParamsReport {
    pub fn passes(&self) -> bool {
        self.reject_above_threshold.pass && self.accept_below_goal.pass
    }
}

pub fn verify_params(params: &ProtocolParams) -> Result<ParamsReport, ProtocolError> {
    let n = params.n_test as i32;
    let target = 1.0 - params.delta;
    let l = noise::lower_bound(params.degree, params.p_th)?;
    let u = noise::upper_bound(params.degree, params.p_goal)?;
    Ok(ParamsReport {
        reject_above_threshold: InequalityCheck::new(1.0 - (1.0 - l).powi(n), target),
        accept_below_goal: InequalityCheck::new((1.0 - u).powi(n), target),
        accept_linearized: InequalityCheck::new(params.delta * (1.0 - u) / u, params.n_test as f64),
    })
}

/// `(1 - p_flip(D, p))^N_test`.
pub fn accept_probability_analytic(degree: usize, p: f64, n_test: usize) -> Result<f64, ProtocolError> {
    let flip = noise::p_flip_exact(degree, p)?;
    Ok((1.0 - flip).powi(n_test as i32))
}

/// Chosen test vertices together with the measurement pattern of each
/// stabilizer (X on the center, Z on its neighbors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestPlan {
    degree: usize,
    vertices: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
    stabilizers: Vec<SparsePauli>,
}

impl TestPlan {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Z-measured qubits of each test vertex, aligned with `vertices()`.
    pub fn z_measure(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    pub fn stabilizers(&self) -> &[SparsePauli] {
        &self.stabilizers
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn measured_qubits(&self) -> usize {
        self.stabilizers.iter().map(SparsePauli::weight).sum()
    }

    fn from_parts(degree: usize, vertices: Vec<usize>, neighbors: Vec<Vec<usize>>) -> Result<Self, ProtocolError> {
        let stabilizers = vertices
            .iter()
            .zip(&neighbors)
            .map(|(&v, nbrs)| {
                SparsePauli::from_terms(
                    std::iter::once((v, SinglePauli::X)).chain(nbrs.iter().map(|&u| (u, SinglePauli::Z))),
                )
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ProtocolError::Domain(e.to_string()))?;
        Ok(Self {
            degree,
            vertices,
            neighbors,
            stabilizers,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    #[serde(rename = "D")]
    degree: usize,
    vertices: Vec<usize>,
    x_measure: Vec<usize>,
    z_measure: Vec<Vec<usize>>,
}

impl Serialize for TestPlan {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PlanFile {
            degree: self.degree,
            vertices: self.vertices.clone(),
            x_measure: self.vertices.clone(),
            z_measure: self.neighbors.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TestPlan {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let file = PlanFile::deserialize(deserializer)?;
        if file.x_measure != file.vertices {
            return Err(D::Error::custom("x_measure must list the test vertices"));
        }
        if file.z_measure.len() != file.vertices.len() {
            return Err(D::Error::custom("z_measure must have one entry per test vertex"));
        }
        if let Some(bad) = file.z_measure.iter().find(|z| z.len() != file.degree) {
            return Err(D::Error::custom(format!(
                "z_measure entry of size {} does not match D = {}",
                bad.len(),
                file.degree
            )));
        }
        TestPlan::from_parts(file.degree, file.vertices, file.z_measure).map_err(D::Error::custom)
    }
}

/// Greedy ascending-id scan: a vertex joins the plan when it has degree
/// `degree` and lies at distance ≥ 3 from every vertex already chosen.
pub fn select_test_vertices(g: &Graph, degree: usize, n_test: usize) -> Result<TestPlan, ProtocolError> {
    if n_test == 0 {
        return Err(ProtocolError::Domain("N_test must be at least 1".into()));
    }
    // vertices within distance 2 of a chosen vertex
    let mut blocked = vec![false; g.vertex_count()];
    let mut vertices = Vec::with_capacity(n_test);
    let mut neighbors = Vec::with_capacity(n_test);
    for v in 0..g.vertex_count() {
        if vertices.len() == n_test {
            break;
        }
        if blocked[v] || g.degree(v)? != degree {
            continue;
        }
        for (u, d) in g.bfs_distances(v, Some(2))?.into_iter().enumerate() {
            if d.is_some() {
                blocked[u] = true;
            }
        }
        vertices.push(v);
        neighbors.push(g.neighbors(v)?.to_vec());
    }
    if vertices.len() < n_test {
        return Err(ProtocolError::InsufficientVertices {
            found: vertices.len(),
            required: n_test,
            degree,
        });
    }
    TestPlan::from_parts(degree, vertices, neighbors)
}

/// Measured parity of one stabilizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn value(self) -> i8 {
        match self {
            Parity::Plus => 1,
            Parity::Minus => -1,
        }
    }

    pub fn of(error: &SparsePauli, stabilizer: &SparsePauli) -> Self {
        if anticommutes(error, stabilizer) {
            Parity::Minus
        } else {
            Parity::Plus
        }
    }
}

impl Serialize for Parity {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub parities: Vec<Parity>,
    pub accept: bool,
}

pub fn run_one_shot(plan: &TestPlan, error: &SparsePauli) -> Outcome {
    let parities: Vec<Parity> = plan.stabilizers.iter().map(|s| Parity::of(error, s)).collect();
    let accept = parities.iter().all(|&p| p == Parity::Plus);
    Outcome { parities, accept }
}

/// Accept decision only, without materializing the parities.
#[inline]
pub fn accepts(plan: &TestPlan, error: &SparsePauli) -> bool {
    !plan.stabilizers.iter().any(|s| anticommutes(error, s))
}
