//! Run records and their CSV/JSON serializations.

use crate::vqls::FidelityRecord;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Default, PartialEq)]
pub struct StageTimings {
    pub solve_ms: u64,
    pub estimate_ms: u64,
    pub total_ms: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VqlsIterationInfo {
    pub final_cost: f64,
    pub norm_estimate: f64,
    pub fidelity_vs_classical: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub n_free: usize,
    pub n_elements: usize,
    /// Global estimator of the path that drives marking.
    pub eta: f64,
    /// Exact-source quadrature value, always recorded.
    pub eta_classical: f64,
    /// Quadratic-forms value on the projected source, always recorded.
    pub eta_forms: f64,
    /// Quantum-path value when that path is active.
    pub eta_quantum: Option<f64>,
    pub hcurl_error: f64,
    pub marked: usize,
    /// Largest block-encoding subnormalization of the iteration.
    pub max_alpha: Option<f64>,
    pub shots: Option<u64>,
    pub vqls: Option<VqlsIterationInfo>,
    pub per_element_csv: Option<String>,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: BTreeMap<String, String>,
    pub iterations: Vec<IterationRecord>,
}

impl RunReport {
    /// Copy with wall times zeroed; two runs of the same seeded config must
    /// serialize this identically.
    pub fn redacted(&self) -> RunReport {
        let mut copy = self.clone();
        for record in &mut copy.iterations {
            record.timings = StageTimings::default();
        }
        copy
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Convergence table: one row per iteration. The quantum column appears
    /// only when the quantum path produced values.
    pub fn convergence_csv(&self) -> String {
        let quantum = self.iterations.iter().any(|r| r.eta_quantum.is_some());
        let mut out = String::from(if quantum {
            "iter,Ndof,eta,hcurlError,markedCount,etaQuantum\n"
        } else {
            "iter,Ndof,eta,hcurlError,markedCount\n"
        });
        for r in &self.iterations {
            if quantum {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.iteration,
                    r.n_free,
                    r.eta,
                    r.hcurl_error,
                    r.marked,
                    r.eta_quantum.unwrap_or(f64::NAN)
                ));
            } else {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.iteration, r.n_free, r.eta, r.hcurl_error, r.marked
                ));
            }
        }
        out
    }
}

/// Per-element estimator table for one iteration.
pub fn per_element_csv(
    estimator: &crate::estimator::LocalEstimator,
    hcurl_per_element: &[f64],
) -> String {
    let mut out = String::from("elementId,eta1sq,eta2sq,eta3sq,eta4sq,etaK,hcurlErrK\n");
    for k in 0..estimator.n_elements() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            k,
            estimator.eta1_sq[k],
            estimator.eta2_sq[k],
            estimator.eta3_sq[k],
            estimator.eta4_sq[k],
            estimator.eta_k(k),
            hcurl_per_element[k]
        ));
    }
    out
}

/// Fidelity study table.
pub fn fidelity_csv(records: &[FidelityRecord]) -> String {
    let mut out = String::from("n,layout,layers,maxIters,trial,finalCost,fidelity\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            r.layout.name(),
            r.layers,
            r.max_iters,
            r.trial,
            r.final_cost,
            r.fidelity
        ));
    }
    out
}
