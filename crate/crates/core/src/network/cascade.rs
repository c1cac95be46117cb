//! Cascaded open systems: stage k feeds stage k+1 through one
//! unidirectional channel.
//!
//! With channel operators `L_k`,
//!
//! ```text
//! H_eff = Σ H_k − (i/2) Σ L_k†L_k − i Σ_{j<k} L_k† L_j − (i/2) Σ losses
//! c     = Σ L_k
//! ```
//!
//! A propagation delay is removed by running every earlier stage on a clock
//! retarded by the travel time, so the simulation time is the clock of the
//! last stage.

use crate::envelope::ComplexEnvelope;
use crate::error::{Error, Result};
use crate::network::source::VirtualSource;
use crate::node::{constant_op, NodeModel};
use crate::open::{JumpChannel, JumpKind, OpenSystem};
use crate::operator::TimeDependentOperator;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub dim: usize,
    /// Local Hermitian Hamiltonian.
    pub hamiltonian: TimeDependentOperator,
    /// Coupling to the channel, including √rate.
    pub channel: TimeDependentOperator,
    /// Local jump operators that do not enter the channel.
    pub losses: Vec<(JumpKind, TimeDependentOperator)>,
}

impl Stage {
    /// Node driven by `omega` (gate applied here).
    pub fn node(model: &NodeModel, omega: &ComplexEnvelope) -> Self {
        Self {
            dim: model.dim(),
            hamiltonian: model.hamiltonian(&model.gate(omega)),
            channel: constant_op(model.channel_operator()),
            losses: model.local_jumps().into_iter().map(|(k, m)| (k, constant_op(m))).collect(),
        }
    }

    pub fn source(source: &VirtualSource) -> Self {
        Self { dim: 2, hamiltonian: TimeDependentOperator::new(2), channel: source.channel_operator(), losses: Vec::new() }
    }

    fn advanced(&self, d: f64) -> Self {
        Self {
            dim: self.dim,
            hamiltonian: self.hamiltonian.advanced(d),
            channel: self.channel.advanced(d),
            losses: self.losses.iter().map(|(k, op)| (*k, op.advanced(d))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSystem {
    pub stages: Vec<Stage>,
    /// Phase picked up between consecutive stages.
    pub propagation_phase: f64,
    /// Travel time between consecutive stages (ps).
    pub delay: f64,
}

impl CascadeSystem {
    pub fn new(stages: Vec<Stage>) -> Self {
        Self { stages, propagation_phase: 0.0, delay: 0.0 }
    }

    pub fn with_phase(mut self, phi: f64) -> Self {
        self.propagation_phase = phi;
        self
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }

    /// Virtual source emitting into a node driven by `omega`.
    pub fn source_into_node(source: VirtualSource, model: NodeModel, omega: ComplexEnvelope) -> Self {
        Self::new(vec![Stage::source(&source), Stage::node(&model, &omega)])
    }

    /// Sender node `(model, Ω₁)` cascaded into receiver `(model, Ω₂)`.
    pub fn two_nodes(sender: (&NodeModel, &ComplexEnvelope), receiver: (&NodeModel, &ComplexEnvelope)) -> Self {
        Self::new(vec![Stage::node(sender.0, sender.1), Stage::node(receiver.0, receiver.1)])
    }

    pub fn dims(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.dim).collect()
    }

    /// Stages with delays and propagation phases folded in, embedded in the
    /// product space.
    fn embedded(&self) -> Vec<(TimeDependentOperator, TimeDependentOperator, Vec<(JumpKind, TimeDependentOperator)>)> {
        let dims = self.dims();
        let n = self.stages.len();
        self.stages
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let hops = (n - 1 - k) as f64;
                let s = s.advanced(-self.delay * hops);
                let phase = C64::from_polar(1.0, self.propagation_phase * hops);
                (
                    s.hamiltonian.embed(&dims, k),
                    s.channel.scaled(phase).embed(&dims, k),
                    s.losses.iter().map(|(kind, op)| (*kind, op.embed(&dims, k))).collect(),
                )
            })
            .collect()
    }

    /// Hermitian part `Σ H_k` only.
    pub fn hamiltonian(&self) -> Result<TimeDependentOperator> {
        let parts = self.embedded();
        let mut iter = parts.into_iter();
        let (h, _, _) = iter.next().ok_or_else(|| Error::InvalidParams("empty cascade".into()))?;
        Ok(iter.fold(h, |acc, (h, _, _)| acc.sum(&h)))
    }

    pub fn collective_jump(&self) -> Result<TimeDependentOperator> {
        let parts = self.embedded();
        let mut iter = parts.into_iter();
        let (_, c, _) = iter.next().ok_or_else(|| Error::InvalidParams("empty cascade".into()))?;
        Ok(iter.fold(c, |acc, (_, c, _)| acc.sum(&c)))
    }

    pub fn open_system(&self) -> Result<OpenSystem> {
        if self.stages.is_empty() {
            return Err(Error::InvalidParams("empty cascade".into()));
        }
        if !self.delay.is_finite() || self.delay < 0.0 {
            return Err(Error::InvalidParams(format!("delay {} must be finite and >= 0", self.delay)));
        }
        let parts = self.embedded();
        let dim: usize = self.dims().iter().product();
        let mut h_eff = TimeDependentOperator::new(dim);
        let mut jumps = Vec::new();
        for (k, (h, l, losses)) in parts.iter().enumerate() {
            h_eff = h_eff.sum(h);
            h_eff = h_eff.sum(&l.adjoint().product(l).scaled(I * -0.5));
            for (_, lj, _) in parts.iter().take(k) {
                h_eff = h_eff.sum(&l.adjoint().product(lj).scaled(-I));
            }
            for (kind, m) in losses {
                h_eff = h_eff.sum(&m.adjoint().product(m).scaled(I * -0.5));
                jumps.push(JumpChannel { kind: *kind, node: Some(k), op: m.clone() });
            }
        }
        jumps.insert(0, JumpChannel { kind: JumpKind::Channel, node: None, op: self.collective_jump()? });
        Ok(OpenSystem { dims: self.dims(), h_eff, jumps })
    }
}
