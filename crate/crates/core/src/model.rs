//! Hamiltonians, dissipator specifications and initial states.
//!
//! Basis per qubit is `(|0⟩, |1⟩)` with `σᶻ = diag(−1, +1)`. Tensor factors
//! are ordered chain site 1 … N, then the probe. Site labels are 1-based.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, eigh, gibbs_state, kron, pauli, ComplexMatrix, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Pure probe state `cos(θ/2)|1⟩ + e^{iφ} sin(θ/2)|0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub theta: f64,
    pub phi: f64,
}

impl BlochState {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid(format!("theta = {theta} outside [0, π]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::invalid(format!("phi = {phi} outside [0, 2π)")));
        }
        Ok(Self { theta, phi })
    }

    /// Amplitudes in the `(|0⟩, |1⟩)` basis.
    pub fn amplitudes(&self) -> [c64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [c64::from_polar(s, self.phi), c64::new(c, 0.0)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitModel {
    pub omega0: f64,
    pub lambda: f64,
}

impl SingleQubitModel {
    pub fn new(omega0: f64, lambda: f64) -> Result<Self> {
        check_positive("omega0", omega0)?;
        check_rate(lambda)?;
        Ok(Self { omega0, lambda })
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        pauli::x().scale_real(self.omega0 / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitProbeModel {
    pub omega0: f64,
    pub omega_p: f64,
    pub g: f64,
    pub lambda: f64,
}

impl TwoQubitProbeModel {
    pub fn new(omega0: f64, omega_p: f64, g: f64, lambda: f64) -> Result<Self> {
        check_positive("omega0", omega0)?;
        check_positive("omega_p", omega_p)?;
        check_finite("g", g)?;
        check_rate(lambda)?;
        Ok(Self { omega0, omega_p, g, lambda })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingChainSpec {
    pub n_sites: usize,
    pub h: f64,
    pub j: f64,
}

impl IsingChainSpec {
    pub fn new(n_sites: usize, h: f64, j: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::invalid("chain needs at least one site"));
        }
        check_positive("h", h)?;
        check_positive("J", j)?;
        Ok(Self { n_sites, h, j })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeCouplingSpec {
    pub h_p: f64,
    pub j_p: f64,
}

impl ProbeCouplingSpec {
    pub fn new(h_p: f64, j_p: f64) -> Result<Self> {
        check_finite("h_p", h_p)?;
        check_finite("J_p", j_p)?;
        Ok(Self { h_p, j_p })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseKind {
    Local,
    Correlated { rc_over_a: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub lambda: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, lambda: f64) -> Result<Self> {
        check_rate(lambda)?;
        if let NoiseKind::Correlated { rc_over_a } = kind {
            check_positive("rc_over_a", rc_over_a)?;
        }
        Ok(Self { kind, lambda })
    }
}

/// Weighted σᶻ double-commutator terms `(i, j, f(i, j))` on chain sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipatorSpec {
    n_sites: usize,
    terms: Vec<(usize, usize, f64)>,
}

impl DissipatorSpec {
    /// Validates site labels (1-based, within `n_sites`), weight symmetry and
    /// positive semidefiniteness of the weight matrix.
    pub fn new(n_sites: usize, terms: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut w = vec![vec![0.0; n_sites]; n_sites];
        for &(i, j, f) in &terms {
            if i == 0 || j == 0 || i > n_sites || j > n_sites {
                return Err(Error::invalid(format!("dissipator site ({i}, {j}) outside 1..={n_sites}")));
            }
            if !(f >= 0.0 && f.is_finite()) {
                return Err(Error::invalid(format!("dissipator weight {f} must be finite and non-negative")));
            }
            w[i - 1][j - 1] += f;
        }
        for (i, row) in w.iter().enumerate() {
            for (j, &wij) in row.iter().enumerate() {
                if (wij - w[j][i]).abs() > 1e-12 {
                    return Err(Error::invalid(format!("dissipator weights not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        if n_sites > 0 {
            let m = ComplexMatrix::from_fn(n_sites, n_sites, |i, j| c64::new(w[i][j], 0.0));
            let (ev, _) = eigh(&m)?;
            if ev[0] < -1e-12 {
                return Err(Error::invalid(format!("dissipator weight matrix not PSD (eigenvalue {:.3e})", ev[0])));
            }
        }
        Ok(Self { n_sites, terms })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> &[(usize, usize, f64)] {
        &self.terms
    }

    /// Dense `n_sites × n_sites` weight matrix (0-based).
    pub fn weight_matrix(&self) -> Vec<Vec<f64>> {
        let mut w = vec![vec![0.0; self.n_sites]; self.n_sites];
        for &(i, j, f) in &self.terms {
            w[i - 1][j - 1] += f;
        }
        w
    }
}

/// `I ⊗ … ⊗ σ^axis ⊗ … ⊗ I` with the Pauli at factor `site` (1-based).
pub fn pauli_site(axis: Axis, site: usize, n_total: usize) -> Result<ComplexMatrix> {
    if site == 0 || site > n_total {
        return Err(Error::invalid(format!("site {site} outside 1..={n_total}")));
    }
    let sigma = match axis {
        Axis::X => pauli::x(),
        Axis::Y => pauli::y(),
        Axis::Z => pauli::z(),
    };
    let left = ComplexMatrix::identity(1 << (site - 1));
    let right = ComplexMatrix::identity(1 << (n_total - site));
    Ok(kron(&kron(&left, &sigma), &right))
}

/// `(ω0/2)σˣ ⊗ I + I ⊗ (ω_p/2)σˣ + g σᶻ ⊗ σᶻ`, factors (system, probe).
pub fn two_qubit_hamiltonian(m: &TwoQubitProbeModel) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let hs = kron(&pauli::x(), &id).scale_real(m.omega0 / 2.0);
    let hp = kron(&id, &pauli::x()).scale_real(m.omega_p / 2.0);
    let hi = kron(&pauli::z(), &pauli::z()).scale_real(m.g);
    &(&hs + &hp) + &hi
}

/// `−h Σ σˣⱼ − J Σ σᶻⱼσᶻⱼ₊₁`, open boundary.
pub fn ising_hamiltonian(spec: &IsingChainSpec) -> ComplexMatrix {
    chain_hamiltonian(&vec![spec.h; spec.n_sites], &vec![spec.j; spec.n_sites.saturating_sub(1)])
}

/// Chain plus probe on `N + 1` factors: an `(N+1)`-site chain whose last
/// field is `h_p` and last bond is `J_p`.
pub fn ising_probe_hamiltonian(chain: &IsingChainSpec, probe: &ProbeCouplingSpec) -> ComplexMatrix {
    let mut fields = vec![chain.h; chain.n_sites];
    fields.push(probe.h_p);
    let mut bonds = vec![chain.j; chain.n_sites - 1];
    bonds.push(probe.j_p);
    chain_hamiltonian(&fields, &bonds)
}

fn chain_hamiltonian(fields: &[f64], bonds: &[f64]) -> ComplexMatrix {
    let n = fields.len();
    let dim = 1usize << n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for a in 0..dim {
        // σᶻσᶻ bonds are diagonal
        let mut diag = 0.0;
        for (k, &jk) in bonds.iter().enumerate() {
            diag -= jk * z_value(a, k + 1, n) * z_value(a, k + 2, n);
        }
        h[(a, a)] += c64::new(diag, 0.0);
        for (k, &hk) in fields.iter().enumerate() {
            let b = a ^ (1 << (n - 1 - k));
            h[(b, a)] -= c64::new(hk, 0.0);
        }
    }
    h
}

/// Eigenvalue of `σᶻ_site` on computational basis state `a` among `n` qubits.
pub(crate) fn z_value(a: usize, site: usize, n: usize) -> f64 {
    if (a >> (n - site)) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

pub fn bloch_pure_state(b: &BlochState) -> DensityMatrix {
    let psi = b.amplitudes();
    DensityMatrix::from_trusted(ComplexMatrix::from_fn(2, 2, |i, j| psi[i] * psi[j].conj()))
}

/// `gibbs_state(h_system, β) ⊗ |ψ_p⟩⟨ψ_p|`.
pub fn initial_product_state(h_system: &ComplexMatrix, beta: f64, probe: &BlochState) -> Result<DensityMatrix> {
    let gibbs = gibbs_state(h_system, beta)?;
    let probe = bloch_pure_state(probe);
    Ok(DensityMatrix::from_trusted(kron(gibbs.matrix(), probe.matrix())))
}

/// Collapse terms on chain sites `1..=n_chain`; the probe is never included.
/// Correlated weights use `f(i, j) = exp(−(i−j)²/(4 (r_C/a)²))`.
pub fn collapse_dissipator_spec(noise: &NoiseSpec, n_chain: usize) -> Result<DissipatorSpec> {
    if n_chain == 0 {
        return Err(Error::invalid("chain needs at least one site"));
    }
    let terms = match noise.kind {
        NoiseKind::Local => (1..=n_chain).map(|j| (j, j, 1.0)).collect(),
        NoiseKind::Correlated { rc_over_a } => {
            let mut t = Vec::with_capacity(n_chain * n_chain);
            for i in 1..=n_chain {
                for j in 1..=n_chain {
                    let d = i as f64 - j as f64;
                    t.push((i, j, (-d * d / (4.0 * rc_over_a * rc_over_a)).exp()));
                }
            }
            t
        }
    };
    DissipatorSpec::new(n_chain, terms)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {v} must be finite and positive")))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite")))
    }
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda = {lambda} must be finite and non-negative")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::partial_trace;

    fn spectrum(h: &ComplexMatrix) -> Vec<f64> {
        eigh(h).unwrap().0
    }

    #[test]
    fn pauli_site_examples() {
        assert_eq!(pauli_site(Axis::Z, 1, 1).unwrap(), ComplexMatrix::diagonal(&[c64::new(-1.0, 0.0), c64::new(1.0, 0.0)]));
        assert_eq!(pauli_site(Axis::X, 2, 2).unwrap(), kron(&ComplexMatrix::identity(2), &pauli::x()));
        assert!(pauli_site(Axis::X, 0, 2).is_err());
        assert!(pauli_site(Axis::X, 3, 2).is_err());
        for i in 1..=3 {
            for j in 1..=3 {
                let a = pauli_site(Axis::Z, i, 3).unwrap();
                let b = pauli_site(Axis::Z, j, 3).unwrap();
                assert!(a.commutator(&b).max_abs() == 0.0);
            }
        }
    }

    #[test]
    fn z_value_matches_pauli_site() {
        for n in 1..=3 {
            for site in 1..=n {
                let z = pauli_site(Axis::Z, site, n).unwrap();
                for a in 0..1 << n {
                    assert_eq!(z[(a, a)].re, z_value(a, site, n));
                }
            }
        }
    }

    #[test]
    fn two_qubit_hamiltonian_structure() {
        let decoupled = two_qubit_hamiltonian(&TwoQubitProbeModel::new(1.0, 0.3, 0.0, 0.0).unwrap());
        let w = spectrum(&decoupled);
        let expected = [-0.65, -0.35, 0.35, 0.65];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }

        let h = two_qubit_hamiltonian(&TwoQubitProbeModel::new(1.0, 0.3, 0.2, 0.1).unwrap());
        assert!(h.is_hermitian(1e-14));
        assert!(h.trace().norm() < 1e-14);
        let w = spectrum(&h);
        for k in 0..4 {
            assert!((w[k] + w[3 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn ising_examples() {
        let single = ising_hamiltonian(&IsingChainSpec::new(1, 0.7, 1.0).unwrap());
        assert!(single.max_abs_diff(&pauli::x().scale_real(-0.7)) < 1e-15);

        // explicit 4×4 for N = 2, h = J = 1 in basis |00⟩, |01⟩, |10⟩, |11⟩
        let explicit = ComplexMatrix::from_real_rows(&[
            &[-1.0, -1.0, -1.0, 0.0],
            &[-1.0, 1.0, 0.0, -1.0],
            &[-1.0, 0.0, 1.0, -1.0],
            &[0.0, -1.0, -1.0, -1.0],
        ])
        .unwrap();
        let h2 = ising_hamiltonian(&IsingChainSpec::new(2, 1.0, 1.0).unwrap());
        assert!(h2.max_abs_diff(&explicit) < 1e-15);
        assert!((spectrum(&h2)[0] + 5f64.sqrt()).abs() < 1e-12);

        // classical limit, tiny h stands in for h = 0
        let h3 = ising_hamiltonian(&IsingChainSpec::new(3, 1e-300, 1.0).unwrap());
        let w = spectrum(&h3);
        let expected = [-2.0, -2.0, 0.0, 0.0, 0.0, 0.0, 2.0, 2.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn probe_hamiltonian_examples() {
        let chain = IsingChainSpec::new(2, 0.8, 1.0).unwrap();
        let same = ising_probe_hamiltonian(&chain, &ProbeCouplingSpec::new(0.8, 1.0).unwrap());
        let longer = ising_hamiltonian(&IsingChainSpec::new(3, 0.8, 1.0).unwrap());
        assert!(same.max_abs_diff(&longer) < 1e-15);

        // term-by-term assembly
        let probe = ProbeCouplingSpec::new(0.5, 0.3).unwrap();
        let h = ising_probe_hamiltonian(&chain, &probe);
        let x = |s| pauli_site(Axis::X, s, 3).unwrap();
        let z = |s| pauli_site(Axis::Z, s, 3).unwrap();
        let mut oracle = ComplexMatrix::zeros(8, 8);
        for s in 1..=2 {
            oracle = &oracle - &x(s).scale_real(0.8);
        }
        oracle = &oracle - &(&z(1) * &z(2)).scale_real(1.0);
        oracle = &oracle - &x(3).scale_real(0.5);
        oracle = &oracle - &(&z(2) * &z(3)).scale_real(0.3);
        assert!(h.max_abs_diff(&oracle) < 1e-15);

        // J_p = 0 decouples the probe
        let free = ising_probe_hamiltonian(&chain, &ProbeCouplingSpec::new(0.5, 0.0).unwrap());
        let chain_w = spectrum(&ising_hamiltonian(&chain));
        let mut expected: Vec<f64> = chain_w.iter().flat_map(|e| [e - 0.5, e + 0.5]).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in spectrum(&free).iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bloch_examples() {
        let up = bloch_pure_state(&BlochState::new(0.0, 0.0).unwrap());
        assert!(up.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[c64::new(0.0, 0.0), c64::new(1.0, 0.0)])) < 1e-15);
        let down = bloch_pure_state(&BlochState::new(PI, 1.3).unwrap());
        assert!(down.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[c64::new(1.0, 0.0), c64::new(0.0, 0.0)])) < 1e-15);
        let eq = bloch_pure_state(&BlochState::new(PI / 2.0, 0.0).unwrap());
        assert!(eq.matrix().max_abs_diff(&ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()) < 1e-15);
        assert!(BlochState::new(4.0, 0.0).is_err());
        assert!(BlochState::new(1.0, 2.0 * PI).is_err());
    }

    #[test]
    fn initial_state_examples() {
        let chain = IsingChainSpec::new(2, 1.0, 1.0).unwrap();
        let probe = BlochState::new(PI, 0.0).unwrap();
        let h = ising_hamiltonian(&chain);
        let hot = initial_product_state(&h, 0.0, &probe).unwrap();
        let expected = kron(&ComplexMatrix::identity(4).scale_real(0.25), bloch_pure_state(&probe).matrix());
        assert!(hot.matrix().max_abs_diff(&expected) < 1e-15);

        let rho = initial_product_state(&h, 0.1, &probe).unwrap();
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        let reduced = partial_trace(&rho, &[2, 2, 2], &[0, 1]).unwrap();
        assert!(reduced.matrix().max_abs_diff(gibbs_state(&h, 0.1).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn dissipator_examples() {
        let local = collapse_dissipator_spec(&NoiseSpec::new(NoiseKind::Local, 0.1).unwrap(), 3).unwrap();
        assert_eq!(local.terms(), &[(1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)]);

        let narrow = NoiseSpec::new(NoiseKind::Correlated { rc_over_a: 1e-3 }, 0.1).unwrap();
        let w = collapse_dissipator_spec(&narrow, 4).unwrap().weight_matrix();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((w[i][j] - expected).abs() < 1e-100);
            }
        }

        let wide = NoiseSpec::new(NoiseKind::Correlated { rc_over_a: 2.0 }, 0.1).unwrap();
        let w = collapse_dissipator_spec(&wide, 4).unwrap().weight_matrix();
        assert!((w[0][1] - (-1.0f64 / 16.0).exp()).abs() < 1e-15);

        assert!(DissipatorSpec::new(2, vec![(1, 3, 1.0)]).is_err());
        assert!(DissipatorSpec::new(2, vec![(1, 2, 1.0)]).is_err());
        assert!(DissipatorSpec::new(2, vec![(1, 2, 1.0), (2, 1, 1.0)]).is_err());
        assert!(NoiseSpec::new(NoiseKind::Correlated { rc_over_a: 0.0 }, 0.1).is_err());
        assert!(NoiseSpec::new(NoiseKind::Local, -1.0).is_err());
    }
}
