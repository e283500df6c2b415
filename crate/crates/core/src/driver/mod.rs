//! The hybrid refinement loop: mesh, solve, estimate, mark, refine.

mod report;
pub mod selftest;
#[cfg(test)]
mod tests;

pub use report::{
    fidelity_csv, per_element_csv, IterationRecord, RunReport, StageTimings, VqlsIterationInfo,
};

use crate::error::{Error, Result};
use crate::estimator::{
    build_local_matrices, estimate_classical, estimate_from_forms, mark, project_source,
    LocalEstimator, PointSource,
};
use crate::fem::{
    assemble, benchmark, hcurl_error, solve_classical, BoundaryCondition, DofMap, Material,
    Quadrature,
};
use crate::geom::Point;
use crate::mesh::{lshape_mesh, refine, Mesh};
use crate::quantum::{
    estimate_element, real_coefficients, Embedding, QuantumEstimateConfig, ReadoutMode,
};
use crate::seeding::mix_seed;
use crate::vqls::{fidelity, solve_vqls, AnsatzLayout};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorPath {
    Classical,
    Forms,
    QuantumExact,
    QuantumSampled,
}

impl EstimatorPath {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorPath::Classical => "classical",
            EstimatorPath::Forms => "forms",
            EstimatorPath::QuantumExact => "quantum-exact",
            EstimatorPath::QuantumSampled => "quantum-sampled",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Self::Classical),
            "forms" => Ok(Self::Forms),
            "quantum-exact" => Ok(Self::QuantumExact),
            "quantum-sampled" => Ok(Self::QuantumSampled),
            other => Err(Error::Config(format!("unknown estimator path '{other}'"))),
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, Self::QuantumExact | Self::QuantumSampled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Classical,
    Vqls,
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::Classical => "classical",
            SolverChoice::Vqls => "vqls",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Self::Classical),
            "vqls" => Ok(Self::Vqls),
            other => Err(Error::Config(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotsPolicy {
    Fixed(u64),
    /// shots = ceil((max alpha)^2 ||E||^4 / eps^2).
    ComplexityScaled { epsilon: f64 },
}

/// Shot count needed for precision `epsilon` on a squared local estimator,
/// given the largest subnormalization and the solution norm.
pub fn shots_for(epsilon: f64, max_alpha: f64, norm_e: f64) -> u64 {
    let value = (max_alpha * max_alpha * norm_e.powi(4)) / (epsilon * epsilon);
    value.ceil().max(1.0) as u64
}

#[derive(Debug, Clone)]
pub struct AmrConfig {
    pub theta: f64,
    pub max_iterations: usize,
    pub estimator_path: EstimatorPath,
    pub solver: SolverChoice,
    pub resolution: usize,
    pub quad_degree: usize,
    pub edge_points: usize,
    pub corner_levels: u32,
    pub seed: u64,
    pub shots_policy: ShotsPolicy,
    pub embedding: Embedding,
    /// Caps both the VQLS system size and the global-embedding register.
    pub qubit_budget: usize,
    pub vqls_layout: AnsatzLayout,
    /// Optional early stop once the global estimator drops below this.
    pub eta_target: Option<f64>,
    pub dense_quantum: bool,
    pub out_dir: Option<std::path::PathBuf>,
    pub dump_solution: bool,
    pub dump_system: bool,
}

impl Default for AmrConfig {
    fn default() -> Self {
        Self {
            theta: 0.6,
            max_iterations: 10,
            estimator_path: EstimatorPath::Classical,
            solver: SolverChoice::Classical,
            resolution: 1,
            quad_degree: 4,
            edge_points: 3,
            corner_levels: 3,
            seed: 1,
            shots_policy: ShotsPolicy::Fixed(100_000),
            embedding: Embedding::Local,
            qubit_budget: 5,
            vqls_layout: AnsatzLayout::Alternating,
            eta_target: None,
            dense_quantum: false,
            out_dir: None,
            dump_solution: false,
            dump_system: false,
        }
    }
}

impl AmrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidTheta(self.theta));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.resolution < 1 {
            return Err(Error::Config("resolution must be at least 1".into()));
        }
        if let ShotsPolicy::Fixed(0) = self.shots_policy {
            return Err(Error::ZeroShots);
        }
        if let ShotsPolicy::ComplexityScaled { epsilon } = self.shots_policy {
            if epsilon <= 0.0 {
                return Err(Error::Config("epsilon must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn quadrature(&self) -> Result<Quadrature> {
        Ok(Quadrature::new(self.quad_degree, self.edge_points)?
            .with_grading(Point::origin(), self.corner_levels))
    }

    /// Resolved key=value view, echoed into reports.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("theta".into(), self.theta.to_string());
        map.insert("iterations".into(), self.max_iterations.to_string());
        map.insert("estimator".into(), self.estimator_path.name().into());
        map.insert("solver".into(), self.solver.name().into());
        map.insert("resolution".into(), self.resolution.to_string());
        map.insert("quad_degree".into(), self.quad_degree.to_string());
        map.insert("edge_points".into(), self.edge_points.to_string());
        map.insert("corner_levels".into(), self.corner_levels.to_string());
        map.insert("seed".into(), self.seed.to_string());
        match self.shots_policy {
            ShotsPolicy::Fixed(count) => {
                map.insert("shots_policy".into(), "fixed".into());
                map.insert("shots".into(), count.to_string());
            }
            ShotsPolicy::ComplexityScaled { epsilon } => {
                map.insert("shots_policy".into(), "scaled".into());
                map.insert("epsilon".into(), epsilon.to_string());
            }
        }
        map.insert(
            "embedding".into(),
            match self.embedding {
                Embedding::Local => "local".into(),
                Embedding::Global => "global".into(),
            },
        );
        map.insert("qubit_budget".into(), self.qubit_budget.to_string());
        map.insert("vqls_layout".into(), self.vqls_layout.name().into());
        map.insert(
            "eta_target".into(),
            self.eta_target.map_or("none".into(), |v| v.to_string()),
        );
        map.insert("dense_quantum".into(), self.dense_quantum.to_string());
        map.insert("dump_solution".into(), self.dump_solution.to_string());
        map.insert("dump_system".into(), self.dump_system.to_string());
        map
    }
}

enum Marking {
    Adaptive,
    Uniform,
}

/// A finished run: the serializable report plus the mesh of the last
/// iteration.
pub struct RunOutcome {
    pub report: RunReport,
    pub final_mesh: Mesh,
}

/// Adaptive run with maximum marking at the configured theta.
pub fn run_amr(config: &AmrConfig) -> Result<RunOutcome> {
    run_loop(config, Marking::Adaptive)
}

/// Uniform-refinement baseline: every element is marked each iteration.
pub fn run_uniform(config: &AmrConfig) -> Result<RunOutcome> {
    run_loop(config, Marking::Uniform)
}

fn run_loop(config: &AmrConfig, marking: Marking) -> Result<RunOutcome> {
    config.validate()?;
    let quad = config.quadrature()?;
    let material = Material::benchmark();
    let mut mesh = lshape_mesh(config.resolution)?;
    let mut iterations = Vec::new();

    for iteration in 1..=config.max_iterations {
        let total_start = Instant::now();
        let dofmap = DofMap::new(
            &mesh,
            BoundaryCondition::Tangential(&benchmark::boundary_field),
            &quad,
        );
        let system = assemble(&mesh, &dofmap, material, &benchmark::source_field, &quad)?;

        let solve_start = Instant::now();
        let (free, vqls_info) = match config.solver {
            SolverChoice::Classical => (solve_classical(&system)?, None),
            SolverChoice::Vqls => {
                let outcome = solve_vqls(
                    &system,
                    config.vqls_layout,
                    mix_seed(&[config.seed, iteration as u64, 0x501f]),
                    config.qubit_budget,
                )?;
                let classical = solve_classical(&system)?;
                let normalize = |v: &nalgebra::DVector<num_complex::Complex64>| {
                    v / num_complex::Complex64::new(v.norm(), 0.0)
                };
                let residual = (system.matrix.matvec(&outcome.solution) - &system.rhs).norm()
                    / system.rhs.norm();
                let info = VqlsIterationInfo {
                    final_cost: outcome.final_cost,
                    norm_estimate: outcome.norm_estimate.magnitude,
                    fidelity_vs_classical: fidelity(
                        &normalize(&outcome.solution),
                        &normalize(&classical),
                    )?,
                    relative_residual: residual,
                };
                (outcome.solution, Some(info))
            }
        };
        let solve_ms = solve_start.elapsed().as_millis() as u64;
        let e_full = dofmap.full_vector(&free);

        let estimate_start = Instant::now();
        let classical_est = estimate_classical(
            &mesh,
            &dofmap,
            &e_full,
            &PointSource(benchmark::source_field),
            &material,
            &quad,
        )?;
        let matrices = build_local_matrices(&mesh, &dofmap, &quad)?;
        let f_proj = project_source(&mesh, &PointSource(benchmark::source_field), &quad)?;
        let forms_est = estimate_from_forms(&e_full, &f_proj, &matrices, &mesh, &dofmap)?;

        let (quantum_est, max_alpha, shots) = if config.estimator_path.is_quantum() {
            if config.embedding == Embedding::Global {
                let n_global = dofmap.n_total().next_power_of_two().trailing_zeros() as usize;
                if n_global > config.qubit_budget {
                    return Err(Error::Quantum(format!(
                        "global embedding needs {n_global} qubits for {} DOFs, budget is {}",
                        dofmap.n_total(),
                        config.qubit_budget
                    )));
                }
            }
            let e_real = real_coefficients(&e_full)?;
            let f_real: Vec<[f64; 3]> = f_proj
                .iter()
                .map(|c| {
                    let max_im = c.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
                    if max_im > 1e-12 {
                        Err(Error::ComplexAmplitudes(max_im))
                    } else {
                        Ok([c[0].re, c[1].re, c[2].re])
                    }
                })
                .collect::<Result<_>>()?;
            let shots = match config.shots_policy {
                ShotsPolicy::Fixed(count) => count,
                ShotsPolicy::ComplexityScaled { epsilon } => {
                    let max_entry = matrices
                        .elements
                        .iter()
                        .flat_map(|b| [&b.mass, &b.cross_curl, &b.curl_curl, &b.div_div])
                        .chain(matrices.faces.iter().flat_map(|f| {
                            [
                                &f.curl_jump.0,
                                &f.curl_jump.1,
                                &f.curl_jump.2,
                                &f.normal_jump.0,
                                &f.normal_jump.1,
                                &f.normal_jump.2,
                            ]
                        }))
                        .flat_map(|m| m.iter().copied())
                        .fold(0.0f64, |a, v| a.max(v.abs()));
                    let dim = match config.embedding {
                        Embedding::Local => 4,
                        Embedding::Global => dofmap.n_total().next_power_of_two(),
                    };
                    shots_for(epsilon, dim as f64 * max_entry, free.norm())
                }
            };
            let mode = match config.estimator_path {
                EstimatorPath::QuantumExact => ReadoutMode::Exact,
                EstimatorPath::QuantumSampled => ReadoutMode::Shots(shots),
                _ => unreachable!(),
            };
            let qconfig = QuantumEstimateConfig {
                mode,
                embedding: config.embedding,
                seed: mix_seed(&[config.seed, iteration as u64, 0xe57]),
                dense: config.dense_quantum,
            };
            let estimates: Result<Vec<_>> = (0..mesh.n_triangles())
                .into_par_iter()
                .map(|k| {
                    estimate_element(&mesh, &dofmap, &matrices, k, &e_real, &f_real, &qconfig)
                })
                .collect();
            let estimates = estimates?;
            let estimator = LocalEstimator {
                eta1_sq: estimates.iter().map(|e| e.eta1_sq).collect(),
                eta2_sq: estimates.iter().map(|e| e.eta2_sq).collect(),
                eta3_sq: estimates.iter().map(|e| e.eta3_sq).collect(),
                eta4_sq: estimates.iter().map(|e| e.eta4_sq).collect(),
            };
            let alpha = estimates.iter().map(|e| e.max_alpha).fold(0.0, f64::max);
            let shots_used = matches!(mode, ReadoutMode::Shots(_)).then_some(shots);
            (Some(estimator), Some(alpha), shots_used)
        } else {
            (None, None, None)
        };
        let estimate_ms = estimate_start.elapsed().as_millis() as u64;

        let (hcurl_per_element, hcurl_global) = hcurl_error(
            &mesh,
            &dofmap,
            &e_full,
            &|p| benchmark::exact_solution(p).expect("quadrature point at the corner"),
            &|_| 0.0,
            &quad,
        )?;

        let marking_est = match config.estimator_path {
            EstimatorPath::Classical => &classical_est,
            EstimatorPath::Forms => &forms_est,
            _ => quantum_est.as_ref().expect("quantum path produced values"),
        };
        let marked = match marking {
            Marking::Adaptive => mark(marking_est, config.theta)?,
            Marking::Uniform => (0..mesh.n_triangles()).collect(),
        };

        let per_element_file = if let Some(dir) = &config.out_dir {
            std::fs::create_dir_all(dir)?;
            let name = format!("elements_iter{iteration:02}.csv");
            std::fs::write(
                dir.join(&name),
                per_element_csv(marking_est, &hcurl_per_element),
            )?;
            if config.dump_solution {
                std::fs::write(
                    dir.join(format!("solution_iter{iteration:02}.csv")),
                    crate::fem::dump_dof_vector(&e_full),
                )?;
            }
            if config.dump_system {
                std::fs::write(
                    dir.join(format!("system_iter{iteration:02}.mtx")),
                    crate::fem::dump_system(&system),
                )?;
            }
            Some(name)
        } else {
            None
        };

        let eta = marking_est.global();
        iterations.push(IterationRecord {
            iteration,
            n_free: dofmap.n_free(),
            n_elements: mesh.n_triangles(),
            eta,
            eta_classical: classical_est.global(),
            eta_forms: forms_est.global(),
            eta_quantum: quantum_est.as_ref().map(|e| e.global()),
            hcurl_error: hcurl_global,
            marked: marked.len(),
            max_alpha,
            shots,
            vqls: vqls_info,
            per_element_csv: per_element_file,
            timings: StageTimings {
                solve_ms,
                estimate_ms,
                total_ms: total_start.elapsed().as_millis() as u64,
            },
        });

        if let Some(target) = config.eta_target {
            if eta <= target {
                break;
            }
        }
        if iteration < config.max_iterations {
            mesh = refine(&mesh, &marked)?;
        }
    }

    let report = RunReport {
        config: config.echo(),
        iterations,
    };
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), report.to_json())?;
        std::fs::write(dir.join("convergence.csv"), report.convergence_csv())?;
    }
    Ok(RunOutcome {
        report,
        final_mesh: mesh,
    })
}

/// Fraction of elements whose centroid lies within `radius` of the
/// reentrant corner.
pub fn corner_fraction(mesh: &Mesh, radius: f64) -> f64 {
    let near = (0..mesh.n_triangles())
        .filter(|&t| mesh.centroid(t).coords.norm() < radius)
        .count();
    near as f64 / mesh.n_triangles() as f64
}
