use super::{AbstractProblem, MnaError};
use crate::netmodel::Terminal;
use nalgebra::DMatrix;
use nalgebra_sparse::{factorization::CscCholesky, CooMatrix, CscMatrix};
use std::fmt::Write as _;

/// Nodal pressures and signed edge flows (positive from `edge.a` to `edge.b`).
#[derive(Debug, Clone, PartialEq)]
pub struct NodalSolution {
    pub labels: Vec<Terminal>,
    /// Pa
    pub pressures: Vec<f64>,
    /// m²/s
    pub flows: Vec<f64>,
}

impl NodalSolution {
    pub fn pressure_at(&self, terminal: Terminal) -> Option<f64> {
        self.labels
            .iter()
            .position(|&t| t == terminal)
            .map(|i| self.pressures[i])
    }

    /// `node,pressure_pa` rows.
    pub fn pressures_csv(&self) -> String {
        let mut out = String::from("node,pressure_pa\n");
        for (label, p) in self.labels.iter().zip(&self.pressures) {
            let _ = writeln!(out, "{},{:.5e}", terminal_label(*label), p);
        }
        out
    }

    /// `edge,flow_m2_per_s` rows.
    pub fn flows_csv(&self) -> String {
        let mut out = String::from("edge,flow_m2_per_s\n");
        for (i, q) in self.flows.iter().enumerate() {
            let _ = writeln!(out, "{i},{q:.5e}");
        }
        out
    }
}

pub fn terminal_label(t: Terminal) -> String {
    match t {
        Terminal::Node(n) => format!("n{}", n.0),
        Terminal::Port(p) => format!("p{}", p.0),
    }
}

/// Solves the reduced conductance system for the nodes without a prescribed
/// pressure by sparse Cholesky factorisation.
pub fn solve(problem: &AbstractProblem) -> Result<NodalSolution, MnaError> {
    problem.check()?;
    let n = problem.node_count();

    // Unknown numbering; Dirichlet nodes map to None.
    let mut unknown = vec![None; n];
    let mut count = 0;
    for (i, slot) in unknown.iter_mut().enumerate() {
        if !problem.dirichlet.contains_key(&i) {
            *slot = Some(count);
            count += 1;
        }
    }

    let mut pressures: Vec<f64> = (0..n)
        .map(|i| problem.dirichlet.get(&i).copied().unwrap_or(0.0))
        .collect();

    if count > 0 {
        let mut coo = CooMatrix::new(count, count);
        let mut rhs = DMatrix::zeros(count, 1);
        for (&node, &q) in &problem.flow_sources {
            if let Some(k) = unknown[node] {
                rhs[k] += q;
            }
        }
        for e in &problem.edges {
            let g = 1.0 / e.resistance;
            match (unknown[e.a], unknown[e.b]) {
                (Some(i), Some(j)) => {
                    coo.push(i, i, g);
                    coo.push(j, j, g);
                    coo.push(i, j, -g);
                    coo.push(j, i, -g);
                }
                (Some(i), None) => {
                    coo.push(i, i, g);
                    rhs[i] += g * pressures[e.b];
                }
                (None, Some(j)) => {
                    coo.push(j, j, g);
                    rhs[j] += g * pressures[e.a];
                }
                (None, None) => {}
            }
        }
        let matrix = CscMatrix::from(&coo);
        let factor = CscCholesky::factor(&matrix).map_err(|_| MnaError::Singular)?;
        let x = factor.solve(&rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(MnaError::Singular);
        }
        for (i, slot) in unknown.iter().enumerate() {
            if let Some(k) = *slot {
                pressures[i] = x[k];
            }
        }
    }

    let flows = problem
        .edges
        .iter()
        .map(|e| (pressures[e.a] - pressures[e.b]) / e.resistance)
        .collect();
    Ok(NodalSolution {
        labels: problem.labels.clone(),
        pressures,
        flows,
    })
}
