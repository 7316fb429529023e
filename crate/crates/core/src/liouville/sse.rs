//! Euler–Maruyama integration of the single-qubit collapse SSE
//! `dψ = [−iH dt + √λ (σᶻ − ⟨σᶻ⟩) dW − (λ/2)(σᶻ − ⟨σᶻ⟩)² dt] ψ`
//! with renormalization after every step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};
use crate::model::SingleQubitModel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SseConfig {
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SseResult {
    pub times: Vec<f64>,
    /// Ensemble-mean density matrix per sample time.
    pub mean_rho: Vec<ComplexMatrix>,
    /// Ensemble-mean `(τx, τy, τz)` per sample time.
    pub mean_bloch: Vec<[f64; 3]>,
    /// Standard error of each Bloch component.
    pub std_err: Vec<[f64; 3]>,
    /// `τz` of every trajectory at the last sample time.
    pub final_tau_z: Vec<f64>,
}

/// Runs `cfg.n_traj` trajectories to the largest sample time. Trajectory `k`
/// draws from ChaCha8 stream `k` of `cfg.seed`, so results do not depend on
/// thread count.
pub fn sse_simulate(m: &SingleQubitModel, psi0: [c64; 2], sample_times: &[f64], cfg: &SseConfig) -> Result<SseResult> {
    let norm = psi0[0].norm_sqr() + psi0[1].norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!("initial state not normalized (‖ψ‖² = {norm})")));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::invalid("dt must be positive"));
    }
    if cfg.dt * m.omega0 > 1e-2 {
        return Err(Error::invalid(format!("dt·ω0 = {} exceeds 1e-2", cfg.dt * m.omega0)));
    }
    if cfg.n_traj == 0 {
        return Err(Error::invalid("need at least one trajectory"));
    }
    if sample_times.is_empty() || sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times[0] < 0.0 {
        return Err(Error::invalid("sample times must be non-empty, non-negative and non-decreasing"));
    }
    let sample_steps: Vec<usize> = sample_times.iter().map(|t| (t / cfg.dt).round() as usize).collect();

    let per_traj: Vec<Vec<[c64; 2]>> =
        (0..cfg.n_traj).into_par_iter().map(|k| trajectory(m, psi0, &sample_steps, cfg, k as u64)).collect();

    let n = cfg.n_traj as f64;
    let mut mean_rho = Vec::with_capacity(sample_times.len());
    let mut mean_bloch = Vec::with_capacity(sample_times.len());
    let mut std_err = Vec::with_capacity(sample_times.len());
    for s in 0..sample_times.len() {
        let mut rho = ComplexMatrix::zeros(2, 2);
        let mut sum = [0.0; 3];
        let mut sum_sq = [0.0; 3];
        for traj in &per_traj {
            let psi = traj[s];
            for i in 0..2 {
                for j in 0..2 {
                    rho[(i, j)] += psi[i] * psi[j].conj() / n;
                }
            }
            let b = bloch(psi);
            for c in 0..3 {
                sum[c] += b[c];
                sum_sq[c] += b[c] * b[c];
            }
        }
        let mean = sum.map(|x| x / n);
        let mut se = [0.0; 3];
        if cfg.n_traj > 1 {
            for c in 0..3 {
                let var = ((sum_sq[c] - n * mean[c] * mean[c]) / (n - 1.0)).max(0.0);
                se[c] = (var / n).sqrt();
            }
        }
        mean_rho.push(rho);
        mean_bloch.push(mean);
        std_err.push(se);
    }
    let final_tau_z = per_traj.iter().map(|traj| bloch(*traj.last().expect("non-empty samples"))[2]).collect();
    Ok(SseResult { times: sample_times.to_vec(), mean_rho, mean_bloch, std_err, final_tau_z })
}

fn trajectory(m: &SingleQubitModel, psi0: [c64; 2], sample_steps: &[usize], cfg: &SseConfig, index: u64) -> Vec<[c64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let normal = Normal::new(0.0, cfg.dt.sqrt()).expect("positive dt");
    let half_w = m.omega0 / 2.0;
    let sqrt_l = m.lambda.sqrt();
    let dt = cfg.dt;
    let mut psi = psi0;
    let mut out = Vec::with_capacity(sample_steps.len());
    let mut step = 0usize;
    for &target in sample_steps {
        while step < target {
            let mz = psi[1].norm_sqr() - psi[0].norm_sqr();
            // σᶻ − ⟨σᶻ⟩ is diagonal: (−1 − mz, 1 − mz)
            let a = [-1.0 - mz, 1.0 - mz];
            let dw = if m.lambda > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            // −iH ψ with H = (ω0/2)σˣ
            let h_psi = [c64::new(0.0, -half_w) * psi[1], c64::new(0.0, -half_w) * psi[0]];
            let mut next = [c64::new(0.0, 0.0); 2];
            for i in 0..2 {
                next[i] = psi[i] + h_psi[i] * dt + psi[i] * (sqrt_l * a[i] * dw - 0.5 * m.lambda * a[i] * a[i] * dt);
            }
            let norm = (next[0].norm_sqr() + next[1].norm_sqr()).sqrt();
            psi = [next[0] / norm, next[1] / norm];
            step += 1;
        }
        out.push(psi);
    }
    out
}

fn bloch(psi: [c64; 2]) -> [f64; 3] {
    // ρ = |ψ⟩⟨ψ|; components under σᶻ = diag(−1, +1)
    let r10 = psi[1] * psi[0].conj();
    [2.0 * r10.re, -2.0 * r10.im, psi[1].norm_sqr() - psi[0].norm_sqr()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{bloch_components, DensityMatrix};

    #[test]
    fn bloch_helper_matches_density_convention() {
        let psi = [c64::new(0.6, 0.0), c64::new(0.0, 0.8)];
        let rho = ComplexMatrix::from_fn(2, 2, |i, j| psi[i] * psi[j].conj());
        let b = bloch(psi);
        let reference = DensityMatrix::new(rho.clone()).unwrap().bloch_vector().unwrap();
        for c in 0..3 {
            assert!((b[c] - reference[c]).abs() < 1e-15);
            assert!((bloch_components(&rho)[c] - b[c]).abs() < 1e-15);
        }
    }

    #[test]
    fn noiseless_matches_unitary() {
        let m = SingleQubitModel::new(1.0, 0.0).unwrap();
        let cfg = SseConfig { dt: 1e-4, n_traj: 3, seed: 1 };
        let r = sse_simulate(&m, [c64::new(0.0, 0.0), c64::new(1.0, 0.0)], &[1.0, 2.0], &cfg).unwrap();
        for (t, b) in r.times.iter().zip(&r.mean_bloch) {
            assert!((b[2] - t.cos()).abs() < 1e-3);
        }
        assert!(r.std_err.iter().all(|s| s.iter().all(|x| *x < 1e-12)));
    }

    #[test]
    fn deterministic_given_seed() {
        let m = SingleQubitModel::new(1.0, 0.3).unwrap();
        let cfg = SseConfig { dt: 1e-3, n_traj: 20, seed: 7 };
        let psi = [c64::new(0.0, 0.0), c64::new(1.0, 0.0)];
        let a = sse_simulate(&m, psi, &[0.5, 1.0], &cfg).unwrap();
        let b = sse_simulate(&m, psi, &[0.5, 1.0], &cfg).unwrap();
        assert_eq!(a.final_tau_z, b.final_tau_z);
        assert_eq!(a.mean_bloch, b.mean_bloch);
    }

    #[test]
    fn rejects_bad_input() {
        let m = SingleQubitModel::new(1.0, 0.1).unwrap();
        let cfg = SseConfig { dt: 1e-3, n_traj: 1, seed: 0 };
        assert!(sse_simulate(&m, [c64::new(1.0, 0.0), c64::new(1.0, 0.0)], &[1.0], &cfg).is_err());
        let coarse = SseConfig { dt: 0.1, ..cfg };
        assert!(sse_simulate(&m, [c64::new(1.0, 0.0), c64::new(0.0, 0.0)], &[1.0], &coarse).is_err());
    }
}
