use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::dense::{ground_search, DenseModel};
use crate::error::{Error, Result};
use crate::qubo::{to_spin, Domain, QuadraticModel};

/// Largest model accepted by [`noise_robustness`].
pub const MAX_NOISE_VARS: usize = 20;

/// Shape of the static coefficient shifts; both have zero mean and the
/// requested standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseReport {
    pub trials: usize,
    pub unchanged: usize,
    pub fraction: f64,
}

enum Sampler {
    Gaussian(Normal<f64>),
    Uniform(Uniform<f64>),
    Zero,
}

impl Sampler {
    fn new(kind: NoiseKind, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!(
                "noise level must be finite and non-negative, got {sigma}"
            )));
        }
        if sigma == 0.0 {
            return Ok(Sampler::Zero);
        }
        Ok(match kind {
            NoiseKind::Gaussian => {
                Sampler::Gaussian(Normal::new(0.0, sigma).map_err(|e| Error::domain(e.to_string()))?)
            }
            NoiseKind::Uniform => {
                let half = sigma * 3f64.sqrt();
                Sampler::Uniform(Uniform::new_inclusive(-half, half).map_err(|e| Error::domain(e.to_string()))?)
            }
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Gaussian(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
            Sampler::Zero => 0.0,
        }
    }
}

/// Share of trials whose ground states all remain nominal ground states after
/// shifting every field by `N(0, σ_h)` and every present coupling by
/// `N(0, σ_J)` in the Ising form of `model`.
///
/// A perturbation generically splits a degenerate ground level, so a trial
/// counts as unchanged when the perturbed argmin set is contained in the
/// nominal one.
pub fn noise_robustness(
    model: &QuadraticModel,
    sigma_h: f64,
    sigma_j: f64,
    trials: usize,
    seed: u64,
    kind: NoiseKind,
) -> Result<NoiseReport> {
    if model.num_vars() > MAX_NOISE_VARS {
        return Err(Error::domain(format!(
            "{} variables exceed the noise-study cap of {MAX_NOISE_VARS}",
            model.num_vars()
        )));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let spin = match model.domain() {
        Domain::Spin => model.clone(),
        Domain::Binary => to_spin(model)?,
    };
    let h_noise = Sampler::new(kind, sigma_h)?;
    let j_noise = Sampler::new(kind, sigma_j)?;
    let nominal_dm = DenseModel::<f64>::from_model(&spin);
    let keep = 1usize << spin.num_vars();
    let nominal = ground_search(&nominal_dm, 1e-9, keep)?.minimizers;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unchanged = 0;
    for _ in 0..trials {
        let mut dm = nominal_dm.clone();
        for h in dm.linear.iter_mut() {
            *h += h_noise.draw(&mut rng);
        }
        // each coupling appears in both endpoint lists; shift them together
        for i in 0..dm.adj.len() {
            for k in 0..dm.adj[i].len() {
                let j = dm.adj[i][k].0;
                if j > i {
                    let shift = j_noise.draw(&mut rng);
                    dm.adj[i][k].1 += shift;
                    let back = dm.adj[j]
                        .iter()
                        .position(|&(t, _)| t == i)
                        .expect("symmetric adjacency");
                    dm.adj[j][back].1 += shift;
                }
            }
        }
        let perturbed = ground_search(&dm, 1e-9, keep)?.minimizers;
        if perturbed.iter().all(|x| nominal.binary_search(x).is_ok()) {
            unchanged += 1;
        }
    }
    Ok(NoiseReport {
        trials,
        unchanged,
        fraction: unchanged as f64 / trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{build_r33_model, build_rm2_model, PenaltyConfig};

    fn r42() -> QuadraticModel {
        build_rm2_model(4, &PenaltyConfig::default()).unwrap()
    }

    #[test]
    fn zero_noise_keeps_everything() {
        let r = noise_robustness(&r42(), 0.0, 0.0, 10, 1, NoiseKind::Gaussian).unwrap();
        assert_eq!(r.fraction, 1.0);
    }

    #[test]
    fn small_noise_is_harmless() {
        for kind in [NoiseKind::Gaussian, NoiseKind::Uniform] {
            let r = noise_robustness(&r42(), 0.01, 0.01, 100, 2, kind).unwrap();
            assert!(r.fraction >= 0.99, "{kind:?}: {r:?}");
        }
    }

    #[test]
    fn huge_noise_scrambles_ground_states() {
        let model = build_r33_model(5, false).unwrap();
        let r = noise_robustness(&model, 10.0, 10.0, 100, 3, NoiseKind::Gaussian).unwrap();
        assert!(r.fraction < 0.9, "{r:?}");
    }

    #[test]
    fn caps_and_bad_inputs() {
        let big = build_r33_model(6, false).unwrap();
        assert_eq!(big.num_vars(), 15);
        assert!(noise_robustness(
            &build_rm2_model(6, &PenaltyConfig::default()).unwrap(),
            0.1,
            0.1,
            1,
            0,
            NoiseKind::Gaussian
        )
        .is_err());
        assert!(noise_robustness(&r42(), -1.0, 0.0, 1, 0, NoiseKind::Gaussian).is_err());
        assert!(noise_robustness(&r42(), 0.1, 0.1, 0, 0, NoiseKind::Gaussian).is_err());
    }
}
