//! Structural invariant suite behind the `selftest` subcommand.

use crate::estimator::{
    build_local_matrices, estimate_classical, estimate_classical_with_flipped_jump,
    estimate_from_forms, project_source, LocalEstimator, PointSource,
};
use crate::fem::{
    benchmark, BoundaryCondition, DofMap, ElementBasis, Material, Quadrature,
};
use crate::geom::{perp, Point};
use crate::mesh::{lshape_mesh, refine};
use crate::quantum::{block_encode, hadamard_test_diag, prepare_state};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Reduced trial counts, for a fast smoke run.
    pub quick: bool,
    /// Mutation hook: runs the estimator with a flipped jump sign, which
    /// the face-sum consistency check must catch.
    pub inject_jump_sign_flip: bool,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

/// Runs every structural check and reports one result per check.
pub fn run_selftest(options: SelftestOptions) -> Vec<CheckResult> {
    let mut results = Vec::new();
    results.push(conformity_check(options));
    results.push(basis_duality_check());
    results.push(divergence_check());
    results.push(vanishing_families_check());
    results.push(face_sum_check(options));
    results.push(path_equivalence_check());
    results.push(hadamard_identity_check(options));
    results.push(block_encoding_check(options));
    results.push(preparation_norm_check(options));
    results
}

fn conformity_check(options: SelftestOptions) -> CheckResult {
    let rounds = if options.quick { 2 } else { 5 };
    let mut mesh = match lshape_mesh(1) {
        Ok(m) => m,
        Err(e) => return check("mesh-conformity", false, e.to_string()),
    };
    for round in 0..rounds {
        if let Err(e) = mesh.validate() {
            return check("mesh-conformity", false, e.to_string());
        }
        let marked: Vec<usize> = (0..mesh.n_triangles())
            .filter(|t| (t + round) % 3 == 0)
            .collect();
        mesh = match refine(&mesh, &marked) {
            Ok(m) => m,
            Err(e) => return check("mesh-conformity", false, e.to_string()),
        };
    }
    match mesh.validate() {
        Ok(()) => check(
            "mesh-conformity",
            true,
            format!("{} elements after {rounds} refinement rounds", mesh.n_triangles()),
        ),
        Err(e) => check("mesh-conformity", false, e.to_string()),
    }
}

fn basis_duality_check() -> CheckResult {
    let mesh = lshape_mesh(1).unwrap();
    let quad = Quadrature::new(4, 3).unwrap();
    let mut worst: f64 = 0.0;
    for t in 0..mesh.n_triangles() {
        let basis = ElementBasis::new(&mesh, t).unwrap();
        let incidence = mesh.triangle_edges(t);
        for l in 0..3 {
            for m in 0..3 {
                let [a, b] = mesh.edge_points(incidence[m].edge);
                let tangent = (b - a).normalize();
                let integral =
                    quad.integrate_edge(a, b, &mut |p: Point| basis.value(l, p).dot(&tangent));
                let expected = if l == m { 1.0 } else { 0.0 };
                worst = worst.max((integral - expected).abs());
            }
        }
    }
    check(
        "basis-duality",
        worst <= 1e-12,
        format!("max deviation {worst:.3e}"),
    )
}

fn divergence_check() -> CheckResult {
    let mesh = lshape_mesh(1).unwrap();
    let quad = Quadrature::new(4, 3).unwrap();
    let mut worst: f64 = 0.0;
    for t in 0..mesh.n_triangles() {
        let basis = ElementBasis::new(&mesh, t).unwrap();
        for l in 0..3 {
            let integral = quad.integrate_triangle(mesh.triangle_points(t), &mut |p: Point| {
                basis.div(l, p) * basis.div(l, p)
            });
            worst = worst.max(integral.abs());
        }
    }
    check(
        "divergence-free-basis",
        worst == 0.0,
        format!("max int div^2 = {worst:.3e}"),
    )
}

fn vanishing_families_check() -> CheckResult {
    let mesh = lshape_mesh(1).unwrap();
    let quad = Quadrature::new(4, 3).unwrap();
    let dofmap = DofMap::new(&mesh, BoundaryCondition::HomogeneousPec, &quad);
    let matrices = build_local_matrices(&mesh, &dofmap, &quad).unwrap();
    let mut worst: f64 = 0.0;
    for block in &matrices.elements {
        for m in [&block.cross_curl, &block.curl_curl, &block.div_div] {
            worst = worst.max(m.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        }
    }
    check(
        "vanishing-families",
        worst == 0.0,
        format!("max |S_K, C_K, D_K| = {worst:.3e}"),
    )
}

fn benchmark_estimators(
    flipped: bool,
) -> (crate::mesh::Mesh, DofMap, Quadrature, LocalEstimator) {
    let mesh = lshape_mesh(1).unwrap();
    let quad = Quadrature::benchmark();
    let dofmap = DofMap::new(
        &mesh,
        BoundaryCondition::Tangential(&benchmark::boundary_field),
        &quad,
    );
    let system = crate::fem::assemble(
        &mesh,
        &dofmap,
        Material::benchmark(),
        &benchmark::source_field,
        &quad,
    )
    .unwrap();
    let free = crate::fem::solve_classical(&system).unwrap();
    let e_full = dofmap.full_vector(&free);
    let est = if flipped {
        estimate_classical_with_flipped_jump(
            &mesh,
            &dofmap,
            &e_full,
            &PointSource(benchmark::source_field),
            &Material::benchmark(),
            &quad,
        )
    } else {
        estimate_classical(
            &mesh,
            &dofmap,
            &e_full,
            &PointSource(benchmark::source_field),
            &Material::benchmark(),
            &quad,
        )
    }
    .unwrap();
    (mesh, dofmap, quad, est)
}

fn face_sum_check(options: SelftestOptions) -> CheckResult {
    let (mesh, dofmap, quad, est) = benchmark_estimators(options.inject_jump_sign_flip);
    let system = crate::fem::assemble(
        &mesh,
        &dofmap,
        Material::benchmark(),
        &benchmark::source_field,
        &quad,
    )
    .unwrap();
    let free = crate::fem::solve_classical(&system).unwrap();
    let e_full = dofmap.full_vector(&free);
    // Face-indexed accumulation, each interior face once.
    let mut eta3_faces = 0.0;
    for e in 0..mesh.n_edges() {
        if mesh.is_boundary_edge(e) {
            continue;
        }
        let (t1, t2) = mesh.edge_triangles(e);
        let t2 = t2.unwrap();
        let b1 = ElementBasis::new(&mesh, t1).unwrap();
        let b2 = ElementBasis::new(&mesh, t2).unwrap();
        let g1 = mesh.element_geometry(t1).unwrap();
        let g2 = mesh.element_geometry(t2).unwrap();
        let l1 = (0..3)
            .find(|&l| mesh.triangle_edges(t1)[l].edge == e)
            .unwrap();
        let l2 = (0..3)
            .find(|&l| mesh.triangle_edges(t2)[l].edge == e)
            .unwrap();
        let c1 = crate::fem::eval_fe_curl(&mesh, &dofmap, &e_full, t1, &b1);
        let c2 = crate::fem::eval_fe_curl(&mesh, &dofmap, &e_full, t2, &b2);
        let (nu1, nu2) = (g1.edges[l1].normal, g2.edges[l2].normal);
        let [a, b] = mesh.edge_points(e);
        eta3_faces += g1.edges[l1].h_f
            * quad.integrate_edge(a, b, &mut |_p: Point| {
                let jx = c1 * perp(nu1).x + c2 * perp(nu2).x;
                let jy = c1 * perp(nu1).y + c2 * perp(nu2).y;
                jx.norm_sqr() + jy.norm_sqr()
            });
    }
    let eta3_elements: f64 = est.eta3_sq.iter().sum();
    let deviation = (eta3_elements - eta3_faces).abs() / (1.0 + eta3_faces);
    check(
        "jump-face-sum",
        deviation <= 1e-12,
        format!("element sum vs face sum deviation {deviation:.3e}"),
    )
}

fn path_equivalence_check() -> CheckResult {
    let mesh = lshape_mesh(1).unwrap();
    let quad = Quadrature::benchmark();
    let dofmap = DofMap::new(
        &mesh,
        BoundaryCondition::Tangential(&benchmark::boundary_field),
        &quad,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(6021);
    let coeffs = DVector::from_fn(dofmap.n_total(), |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), 0.0)
    });
    let matrices = build_local_matrices(&mesh, &dofmap, &quad).unwrap();
    let f_proj = project_source(&mesh, &PointSource(benchmark::source_field), &quad).unwrap();
    let forms = estimate_from_forms(&coeffs, &f_proj, &matrices, &mesh, &dofmap).unwrap();
    let projected = crate::estimator::ProjectedSource::new(&mesh, &f_proj).unwrap();
    let classical = estimate_classical(
        &mesh,
        &dofmap,
        &coeffs,
        &projected,
        &Material::benchmark(),
        &quad,
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..mesh.n_triangles() {
        worst = worst.max(
            (forms.eta_k_sq(k) - classical.eta_k_sq(k)).abs() / (1.0 + classical.eta_k_sq(k)),
        );
    }
    check(
        "path-equivalence",
        worst <= 1e-10,
        format!("max per-element deviation {worst:.3e}"),
    )
}

fn hadamard_identity_check(options: SelftestOptions) -> CheckResult {
    let cases = if options.quick { 20 } else { 100 };
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n = rng.random_range(1..=2usize);
        let dim = 1 << n;
        let m = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        if m.iter().all(|v| v.abs() < 1e-12) {
            continue;
        }
        let be = block_encode(&m).unwrap();
        let psi: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        let prep = prepare_state(&psi, n).unwrap();
        let p0 = hadamard_test_diag(&be, &prep).unwrap();
        let mut expectation = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                expectation += psi[i] * m[(i, j)] * psi[j];
            }
        }
        expectation /= norm * norm;
        worst = worst.max((p0 - 0.5 * (1.0 + expectation / be.alpha)).abs());
    }
    check(
        "hadamard-identity",
        worst <= 1e-10,
        format!("{cases} cases, max deviation {worst:.3e}"),
    )
}

fn block_encoding_check(options: SelftestOptions) -> CheckResult {
    let random_cases = if options.quick { 10 } else { 50 };
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut worst: f64 = 0.0;
    for trial in 0..random_cases {
        let n = 1 + trial % 3;
        let m = DMatrix::from_fn(1 << n, 1 << n, |_, _| rng.random_range(-1.0..1.0));
        let be = block_encode(&m).unwrap();
        let block = be.reconstruct();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((block[(i, j)] - Complex64::new(m[(i, j)], 0.0)).norm());
            }
        }
    }
    // All benchmark local blocks.
    let mesh = lshape_mesh(1).unwrap();
    let quad = Quadrature::benchmark();
    let dofmap = DofMap::new(&mesh, BoundaryCondition::HomogeneousPec, &quad);
    let matrices = build_local_matrices(&mesh, &dofmap, &quad).unwrap();
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();
    for b in &matrices.elements {
        blocks.push(DMatrix::from_fn(3, 3, |i, j| b.mass[(i, j)]));
    }
    for f in &matrices.faces {
        for m in [
            &f.curl_jump.0,
            &f.curl_jump.1,
            &f.curl_jump.2,
            &f.normal_jump.0,
            &f.normal_jump.1,
            &f.normal_jump.2,
        ] {
            blocks.push(DMatrix::from_fn(3, 3, |i, j| m[(i, j)]));
        }
    }
    for raw in blocks {
        if raw.iter().all(|v| v.abs() == 0.0) {
            continue;
        }
        let padded = crate::quantum::pad_to_power_of_two(&raw);
        let be = block_encode(&padded).unwrap();
        let block = be.reconstruct();
        for i in 0..padded.nrows() {
            for j in 0..padded.ncols() {
                worst = worst.max((block[(i, j)] - Complex64::new(padded[(i, j)], 0.0)).norm());
            }
        }
    }
    check(
        "block-encoding-bound",
        worst <= 1e-10,
        format!("max reconstruction error {worst:.3e}"),
    )
}

fn preparation_norm_check(options: SelftestOptions) -> CheckResult {
    let cases = if options.quick { 20 } else { 100 };
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n = rng.random_range(1..=5usize);
        let len = rng.random_range(1..=(1 << n));
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-9 {
            continue;
        }
        let state = prepare_state(&v, n).unwrap().run_from_zero();
        worst = worst.max((state.norm() - 1.0).abs());
    }
    check(
        "preparation-unitarity",
        worst <= 1e-12,
        format!("{cases} cases, max norm drift {worst:.3e}"),
    )
}
