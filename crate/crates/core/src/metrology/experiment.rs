use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{pauli, ComplexMatrix, DensityMatrix};
use crate::liouville::VectorizedLiouvillian;
use crate::model::{
    collapse_dissipator_spec, initial_product_state, ising_hamiltonian, ising_probe_hamiltonian,
    two_qubit_hamiltonian, BlochState, DissipatorSpec, IsingChainSpec, NoiseKind, NoiseSpec, ProbeCouplingSpec,
    TwoQubitProbeModel,
};

/// Everything but the collapse rate and the probe preparation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Experiment {
    /// One collapsing qubit with `H = (ω0/2)σˣ` coupled to the probe by `g σᶻσᶻ`.
    TwoQubit { omega0: f64, omega_p: f64, g: f64, beta: f64 },
    /// Ising chain of `N` collapsing sites with the probe attached to site `N`.
    IsingChain { chain: IsingChainSpec, probe: ProbeCouplingSpec, noise: NoiseKind, beta: f64 },
}

impl Experiment {
    /// Qubits including the probe, which is always the last factor.
    pub fn n_qubits(&self) -> usize {
        match self {
            Experiment::TwoQubit { .. } => 2,
            Experiment::IsingChain { chain, .. } => chain.n_sites + 1,
        }
    }

    pub fn probe_factor(&self) -> usize {
        self.n_qubits() - 1
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Experiment::TwoQubit { beta, .. } | Experiment::IsingChain { beta, .. } => beta,
        }
    }

    pub fn hamiltonian(&self) -> Result<ComplexMatrix> {
        Ok(match *self {
            Experiment::TwoQubit { omega0, omega_p, g, .. } => {
                two_qubit_hamiltonian(&TwoQubitProbeModel::new(omega0, omega_p, g, 0.0)?)
            }
            Experiment::IsingChain { chain, probe, .. } => ising_probe_hamiltonian(&chain, &probe),
        })
    }

    /// Hamiltonian of the collapsing system alone, used for the thermal state.
    pub fn system_hamiltonian(&self) -> ComplexMatrix {
        match *self {
            Experiment::TwoQubit { omega0, .. } => pauli::x().scale_real(omega0 / 2.0),
            Experiment::IsingChain { chain, .. } => ising_hamiltonian(&chain),
        }
    }

    pub fn dissipator(&self) -> Result<DissipatorSpec> {
        match *self {
            Experiment::TwoQubit { .. } => collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Local, 0.0)?, 1),
            Experiment::IsingChain { chain, noise, .. } => {
                collapse_dissipator_spec(&NoiseSpec::new(noise, 0.0)?, chain.n_sites)
            }
        }
    }

    pub fn liouvillian(&self, lambda: f64) -> Result<VectorizedLiouvillian> {
        VectorizedLiouvillian::new(self.hamiltonian()?, &self.dissipator()?, self.n_qubits(), lambda)
    }

    /// Thermal system state times the pure probe state.
    pub fn initial_state(&self, probe: &BlochState) -> Result<DensityMatrix> {
        initial_product_state(&self.system_hamiltonian(), self.beta(), probe)
    }

    /// Copy with a different noise kernel (chain experiments only).
    pub fn with_noise(&self, noise: NoiseKind) -> Experiment {
        match *self {
            Experiment::IsingChain { chain, probe, beta, .. } => Experiment::IsingChain { chain, probe, noise, beta },
            other => other,
        }
    }

    /// Copy with a different chain (chain experiments only).
    pub fn with_chain(&self, chain: IsingChainSpec) -> Experiment {
        match *self {
            Experiment::IsingChain { probe, noise, beta, .. } => Experiment::IsingChain { chain, probe, noise, beta },
            other => other,
        }
    }
}
