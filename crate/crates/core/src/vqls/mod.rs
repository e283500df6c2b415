//! Variational quantum linear solver: local cost, derivative-free
//! optimization, solution-norm recovery, and the fidelity-vs-qubits
//! experiment.

mod ansatz;

pub use ansatz::{build_ansatz, parameter_count, AnsatzLayout};

use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::quantum::{prepare_state, Circuit};
use crate::seeding::mix_seed;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;

/// A linear system prepared for the variational solver: dense matrix over a
/// power-of-two dimension and the state-preparation circuit for |F>.
pub struct VqlsProblem {
    matrix: DMatrix<Complex64>,
    u_f: Circuit,
    u_f_dense: DMatrix<Complex64>,
    f_state: DVector<Complex64>,
    n: usize,
}

impl VqlsProblem {
    /// `matrix` must be square with power-of-two dimension >= 4 and
    /// nonsingular on its non-padded block; `f` is the unnormalized
    /// right-hand side (real, as required by the Ry-only preparation).
    pub fn new(matrix: DMatrix<Complex64>, f: &[f64]) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || !dim.is_power_of_two() || dim < 4 {
            return Err(Error::Vqls(format!(
                "matrix must be square with power-of-two dimension >= 4, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if f.len() != dim {
            return Err(Error::Vqls(format!(
                "right-hand side length {} does not match dimension {dim}",
                f.len()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        let u_f = prepare_state(f, n)?;
        let u_f_dense = u_f.dense_unitary();
        let f_state = DVector::from_iterator(dim, u_f.run_from_zero().amplitudes().iter().copied());
        Ok(Self {
            matrix,
            u_f,
            u_f_dense,
            f_state,
            n,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn f_state(&self) -> &DVector<Complex64> {
        &self.f_state
    }

    pub fn f_preparation(&self) -> &Circuit {
        &self.u_f
    }

    /// Local cost C_L = <x|H_L|x> / ||A|x>||^2 with
    /// H_L = A^dag U_F (1 - (1/n) sum_j |0_j><0_j| (x) 1_jbar) U_F^dag A;
    /// zero exactly when A|x> is proportional to |F>.
    pub fn local_cost(&self, x: &DVector<Complex64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Vqls("state dimension mismatch".into()));
        }
        let v = &self.matrix * x;
        let v_norm_sq = v.norm_squared();
        if v_norm_sq <= 1e-300 {
            return Err(Error::Vqls("A|x> vanishes; cost undefined".into()));
        }
        let y = self.u_f_dense.adjoint() * v;
        let mut projector_sum = 0.0;
        for (idx, amp) in y.iter().enumerate() {
            let zero_bits = self.n - (idx & (self.dim() - 1)).count_ones() as usize;
            projector_sum += zero_bits as f64 * amp.norm_sqr();
        }
        let expectation = y.norm_squared() - projector_sum / self.n as f64;
        Ok((expectation / v_norm_sq).clamp(0.0, 1.0))
    }

    /// Norm recovery ||E|| = ||F|| / <F|A|x>. The raw quotient is complex;
    /// its magnitude is what scales the state.
    pub fn norm_estimate(&self, x: &DVector<Complex64>, f_norm: f64) -> Result<NormEstimate> {
        let denominator = self.f_state.dotc(&(&self.matrix * x));
        if denominator.norm() < 1e-12 {
            return Err(Error::NormDenominator(denominator.norm()));
        }
        let raw = Complex64::new(f_norm, 0.0) / denominator;
        Ok(NormEstimate {
            raw,
            magnitude: raw.norm(),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NormEstimate {
    /// The complex quotient ||F|| / <F|A|x>.
    pub raw: Complex64,
    pub magnitude: f64,
}

/// Squared overlap |<a|b>|^2 of two normalized states.
pub fn fidelity(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Vqls(format!(
            "fidelity of states with dimensions {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.dotc(b).norm_sqr())
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub params: Vec<f64>,
    /// Cost at every objective evaluation, in evaluation order.
    pub cost_trace: Vec<f64>,
    pub final_cost: f64,
}

/// Derivative-free minimization of the local cost over the ansatz angles
/// (COBYLA); deterministic for a fixed seed, which only draws the starting
/// point.
pub fn optimize(
    problem: &VqlsProblem,
    layout: AnsatzLayout,
    layers: usize,
    max_iters: usize,
    seed: u64,
) -> Result<OptimizeResult> {
    if max_iters < 1 {
        return Err(Error::Vqls("optimizer budget must be at least 1".into()));
    }
    let n = problem.n_qubits();
    let n_params = parameter_count(layout, n, layers);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = (0..n_params)
        .map(|_| rng.random_range(0.0..2.0 * std::f64::consts::PI))
        .collect();

    let trace = RefCell::new(Vec::with_capacity(max_iters));
    let objective = |params: &[f64], _data: &mut ()| -> f64 {
        let circuit = build_ansatz(layout, n, layers, params).expect("validated parameters");
        let state = circuit.run_from_zero();
        let x = DVector::from_iterator(
            problem.dim(),
            state.amplitudes().iter().copied(),
        );
        // A singular ansatz point (A|x> = 0) is steered away from with a
        // saturated cost.
        let cost = problem.local_cost(&x).unwrap_or(1.0);
        trace.borrow_mut().push(cost);
        cost
    };
    let bounds = vec![(-2.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI); n_params];
    let cons: Vec<&dyn cobyla::Func<()>> = vec![];
    let (params, final_cost) = match cobyla::minimize(
        objective,
        &x0,
        &bounds,
        &cons,
        (),
        max_iters,
        cobyla::RhoBeg::All(0.5),
        None,
    ) {
        Ok((_, x_opt, y_opt)) => (x_opt, y_opt),
        // Roundoff-limited termination still carries the best point found.
        Err((_, x_opt, y_opt)) => (x_opt, y_opt),
    };
    Ok(OptimizeResult {
        params,
        cost_trace: trace.into_inner(),
        final_cost,
    })
}

/// The ansatz state for a finished optimization.
pub fn ansatz_state(
    layout: AnsatzLayout,
    n: usize,
    layers: usize,
    params: &[f64],
) -> Result<DVector<Complex64>> {
    let circuit = build_ansatz(layout, n, layers, params)?;
    let state = circuit.run_from_zero();
    Ok(DVector::from_iterator(
        1 << n,
        state.amplitudes().iter().copied(),
    ))
}

/// Ansatz depth and optimizer budget per problem size used throughout the
/// benchmark study.
pub fn budget_for(n: usize) -> Result<(usize, usize)> {
    match n {
        2 => Ok((1, 1000)),
        3 => Ok((2, 2000)),
        4 => Ok((4, 5000)),
        5 => Ok((8, 10000)),
        _ => Err(Error::Vqls(format!("no configured budget for n = {n}"))),
    }
}

#[derive(Debug, Clone)]
pub struct FidelityRecord {
    pub n: usize,
    pub layout: AnsatzLayout,
    pub layers: usize,
    pub max_iters: usize,
    pub trial: u32,
    pub final_cost: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub records: Vec<FidelityRecord>,
    /// Sizes skipped because the extracted submatrix was singular.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct FidelityConfig {
    pub trials: u32,
    pub base_seed: u64,
    pub min_qubits: usize,
    pub max_qubits: usize,
}

impl Default for FidelityConfig {
    fn default() -> Self {
        Self {
            trials: 5,
            base_seed: 1,
            min_qubits: 2,
            max_qubits: 5,
        }
    }
}

/// Pads the eliminated system to the next power of two: identity on the
/// padded diagonal keeps the matrix nonsingular while pinning the padded
/// amplitudes of the solution to zero.
pub fn padded_dense_system(system: &FemSystem) -> (DMatrix<Complex64>, Vec<f64>) {
    let n_free = system.matrix.n();
    let dim = n_free.next_power_of_two().max(4);
    let mut a = DMatrix::identity(dim, dim).map(|v: f64| Complex64::new(v, 0.0));
    for (r, c, v) in system.matrix.triplets() {
        a[(r, c)] = v;
    }
    let mut f = vec![0.0; dim];
    for (i, v) in system.rhs.iter().enumerate() {
        f[i] = v.re;
    }
    (a, f)
}

/// Runs the fidelity-vs-qubits study: for each size n, the leading 2^n
/// principal block of the padded benchmark system is solved variationally
/// with both ansatz layouts, `trials` restarts each, and compared with the
/// normalized classical solution.
pub fn fidelity_experiment(system: &FemSystem, config: &FidelityConfig) -> Result<FidelityReport> {
    let (a_full, f_full) = padded_dense_system(system);
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for n in config.min_qubits..=config.max_qubits {
        let dim = 1 << n;
        if dim > a_full.nrows() {
            warnings.push(format!("size n={n} exceeds the padded system; skipped"));
            continue;
        }
        let a_sub = a_full.view((0, 0), (dim, dim)).into_owned();
        let f_sub = &f_full[..dim];
        if f_sub.iter().all(|v| v.abs() < 1e-300) {
            warnings.push(format!("zero right-hand side at n={n}; skipped"));
            continue;
        }
        // Classical reference: normalized solution of the subsystem.
        let Some(solution) = a_sub.clone().lu().solve(&DVector::from_iterator(
            dim,
            f_sub.iter().map(|&v| Complex64::new(v, 0.0)),
        )) else {
            warnings.push(format!("singular {dim}x{dim} submatrix at n={n}; skipped"));
            continue;
        };
        let reference = &solution / Complex64::new(solution.norm(), 0.0);
        let problem = VqlsProblem::new(a_sub, f_sub)?;
        let (layers, max_iters) = budget_for(n)?;
        for layout in [AnsatzLayout::Circular, AnsatzLayout::Alternating] {
            for trial in 1..=config.trials {
                let seed = mix_seed(&[
                    config.base_seed,
                    n as u64,
                    match layout {
                        AnsatzLayout::Circular => 0,
                        AnsatzLayout::Alternating => 1,
                    },
                    trial as u64,
                ]);
                let result = optimize(&problem, layout, layers, max_iters, seed)?;
                let state = ansatz_state(layout, n, layers, &result.params)?;
                records.push(FidelityRecord {
                    n,
                    layout,
                    layers,
                    max_iters,
                    trial,
                    final_cost: result.final_cost,
                    fidelity: fidelity(&state, &reference)?,
                });
            }
        }
    }
    Ok(FidelityReport { records, warnings })
}

/// Mean fidelity and 95% confidence half-width (Student t) for one
/// (size, layout) cell of the report.
pub fn summarize(records: &[FidelityRecord], n: usize, layout: AnsatzLayout) -> Option<(f64, f64)> {
    let values: Vec<f64> = records
        .iter()
        .filter(|r| r.n == n && r.layout == layout)
        .map(|r| r.fidelity)
        .collect();
    if values.is_empty() {
        return None;
    }
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let t_critical = match values.len() - 1 {
        1 => 12.706,
        2 => 4.303,
        3 => 3.182,
        4 => 2.776,
        5 => 2.571,
        6 => 2.447,
        7 => 2.365,
        8 => 2.306,
        9 => 2.262,
        _ => 1.96,
    };
    Some((mean, t_critical * (variance / count).sqrt()))
}

/// Variational solve of the eliminated system, for driving the hybrid loop
/// at coarse sizes. Refuses systems beyond the qubit budget.
pub struct VqlsSolveOutcome {
    /// Recovered free-DOF vector (state scaled by the norm estimate).
    pub solution: DVector<Complex64>,
    pub final_cost: f64,
    pub norm_estimate: NormEstimate,
    pub layout: AnsatzLayout,
    pub layers: usize,
    pub max_iters: usize,
}

pub fn solve_vqls(
    system: &FemSystem,
    layout: AnsatzLayout,
    seed: u64,
    qubit_budget: usize,
) -> Result<VqlsSolveOutcome> {
    let n_free = system.matrix.n();
    let dim = n_free.next_power_of_two().max(4);
    let n = dim.trailing_zeros() as usize;
    if n > qubit_budget {
        return Err(Error::QubitBudget {
            dofs: n_free,
            budget: qubit_budget,
            max: 1 << qubit_budget,
        });
    }
    let (a, f) = padded_dense_system(system);
    let f_norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let problem = VqlsProblem::new(a, &f)?;
    let (layers, max_iters) = budget_for(n)?;
    let result = optimize(&problem, layout, layers, max_iters, seed)?;
    let state = ansatz_state(layout, n, layers, &result.params)?;
    let norm = problem.norm_estimate(&state, f_norm)?;
    let scaled = state.map(|amp| amp * norm.raw);
    Ok(VqlsSolveOutcome {
        solution: DVector::from_iterator(n_free, scaled.iter().take(n_free).copied()),
        final_cost: result.final_cost,
        norm_estimate: norm,
        layout,
        layers,
        max_iters,
    })
}
