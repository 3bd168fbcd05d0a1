use serde::{Deserialize, Serialize};

use super::system::{SystemSpec, VectorField};
use crate::error::{Error, Result};

/// Identical oscillators with all-to-all diffusive coupling
/// `ẋ_i = F(x_i) + eps * Σ_j [H(x_j) - H(x_i)]`, where `H` keeps the
/// channels selected by `coupling_mask` and zeroes the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledNetworkSpec {
    pub node: SystemSpec,
    pub n_nodes: usize,
    pub eps: f64,
    pub coupling_mask: Vec<bool>,
}

impl CoupledNetworkSpec {
    /// Network with diagonal coupling on every channel.
    pub fn diagonal(node: SystemSpec, n_nodes: usize, eps: f64) -> Result<Self> {
        let mask = vec![true; node.dim()];
        CoupledNetworkSpec::new(node, n_nodes, eps, mask)
    }

    pub fn new(
        node: SystemSpec,
        n_nodes: usize,
        eps: f64,
        coupling_mask: Vec<bool>,
    ) -> Result<Self> {
        let net = CoupledNetworkSpec {
            node,
            n_nodes,
            eps,
            coupling_mask,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::Contract(format!(
                "network needs >= 2 nodes, got {}",
                self.n_nodes
            )));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Domain(format!(
                "coupling strength must be >= 0, got {}",
                self.eps
            )));
        }
        if self.coupling_mask.len() != self.node.dim() {
            return Err(Error::Contract(format!(
                "coupling mask has {} entries for a {}-dimensional node",
                self.coupling_mask.len(),
                self.node.dim()
            )));
        }
        Ok(())
    }

    /// Column index of channel `channel` of node `node` in the flat state.
    pub fn index(&self, node: usize, channel: usize) -> usize {
        node * self.node.dim() + channel
    }

    /// Checked evaluation of the coupled right-hand side.
    pub fn coupled_rhs(&self, flat_state: &[f64], t: f64) -> Result<Vec<f64>> {
        if flat_state.len() != self.dim() {
            return Err(Error::Contract(format!(
                "flat state has length {}, expected {}",
                flat_state.len(),
                self.dim()
            )));
        }
        if flat_state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite network state".into()));
        }
        let mut out = vec![0.0; self.dim()];
        self.eval(t, flat_state, &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite network derivative".into()));
        }
        Ok(out)
    }
}

impl VectorField for CoupledNetworkSpec {
    fn dim(&self) -> usize {
        self.n_nodes * self.node.dim()
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let d = self.node.dim();
        for i in 0..self.n_nodes {
            let xi = &x[i * d..(i + 1) * d];
            let oi = &mut out[i * d..(i + 1) * d];
            self.node.eval(t, xi, oi);
            for c in (0..d).filter(|&c| self.coupling_mask[c]) {
                // Summing differences keeps the term exactly zero on the
                // synchronization manifold.
                let pull: f64 = (0..self.n_nodes).map(|j| x[j * d + c] - xi[c]).sum();
                oi[c] += self.eps * pull;
            }
        }
    }
}
