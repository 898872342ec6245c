use serde::Serialize;
use serde_json::{Map, Value};

use crate::dense::DenseModel;
use crate::embed::EmbeddedModel;
use crate::error::{Error, Result};
use crate::sa::SampleSet;

/// Energies closer than this share a histogram bin or an energy level.
pub const ENERGY_TOL: f64 = 1e-9;

/// Smallest `k ≥ 1` with `1 − ε^k ≥ δ`.
pub fn repetition_count(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let holds = |k: u64| 1.0 - epsilon.powf(k as f64) >= delta;
    let mut k = ((1.0 - delta).ln() / epsilon.ln()).ceil().max(1.0) as u64;
    // the closed form can land one off when the ratio is within rounding of an integer
    while k > 1 && holds(k - 1) {
        k -= 1;
    }
    while !holds(k) {
        k += 1;
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub energy: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnergyHistogram {
    /// Ascending in energy.
    pub bins: Vec<HistogramBin>,
    pub total_reads: u64,
    pub feasible_reads: u64,
}

impl EnergyHistogram {
    pub fn from_counts(counts: impl IntoIterator<Item = (f64, u64)>, total_reads: u64) -> Self {
        let mut items: Vec<(f64, u64)> = counts.into_iter().collect();
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut bins: Vec<HistogramBin> = Vec::new();
        for (energy, count) in items {
            match bins.last_mut() {
                Some(last) if (energy - last.energy).abs() <= ENERGY_TOL * (1.0 + energy.abs()) => last.count += count,
                _ => bins.push(HistogramBin { energy, count }),
            }
        }
        let feasible_reads = bins.iter().map(|b| b.count).sum();
        Self {
            bins,
            total_reads,
            feasible_reads,
        }
    }

    pub fn count(&self, energy: f64) -> u64 {
        self.bins
            .iter()
            .find(|b| (b.energy - energy).abs() <= ENERGY_TOL * (1.0 + energy.abs()))
            .map_or(0, |b| b.count)
    }

    /// Share of feasible reads in the bin at `energy`.
    pub fn relative_frequency(&self, energy: f64) -> f64 {
        if self.feasible_reads == 0 {
            return 0.0;
        }
        self.count(energy) as f64 / self.feasible_reads as f64
    }

    pub fn min_energy(&self) -> Option<f64> {
        self.bins.first().map(|b| b.energy)
    }

    /// `{"energy": count}` with energies printed in shortest round-trip form.
    pub fn to_json_map(&self) -> Value {
        let map: Map<String, Value> = self
            .bins
            .iter()
            .map(|b| (format_energy(b.energy), Value::from(b.count)))
            .collect();
        Value::Object(map)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Parse(format!("csv: {e}"));
        out.write_record(["energy", "count", "relative_frequency"])
            .map_err(err)?;
        for b in &self.bins {
            out.write_record([
                format_energy(b.energy),
                b.count.to_string(),
                self.relative_frequency(b.energy).to_string(),
            ])
            .map_err(err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Text bar chart, one line per bin, longest bar `width` characters.
    pub fn render(&self, width: usize) -> String {
        let peak = self.bins.iter().map(|b| b.count).max().unwrap_or(0).max(1);
        let label_width = self
            .bins
            .iter()
            .map(|b| format_energy(b.energy).len())
            .max()
            .unwrap_or(1);
        let mut out = String::new();
        for b in &self.bins {
            let len = ((b.count as f64 / peak as f64) * width as f64).round() as usize;
            out.push_str(&format!(
                "{:>w$} | {:<bw$} {} ({:.4})\n",
                format_energy(b.energy),
                "#".repeat(len.max(usize::from(b.count > 0))),
                b.count,
                self.relative_frequency(b.energy),
                w = label_width,
                bw = width
            ));
        }
        out
    }
}

/// Integers print bare; other values keep ten decimals with trailing zeros
/// dropped, which hides accumulated rounding noise.
pub fn format_energy(e: f64) -> String {
    if (e - e.round()).abs() <= ENERGY_TOL * (1.0 + e.abs()) && e.abs() < 1e15 {
        format!("{}", e.round() as i64)
    } else {
        let s = format!("{e:.10}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Hardware-level and logical-level energy histograms of one sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramPair {
    pub logical: EnergyHistogram,
    pub hardware: EnergyHistogram,
}

/// The hardware histogram counts every read at its recorded energy. The
/// logical histogram keeps reads whose chains are unanimous and bins them at
/// the source model's energy; without an embedding both coincide.
pub fn histogram(samples: &SampleSet, embedded: Option<&EmbeddedModel>) -> HistogramPair {
    let total = samples.total_reads();
    let hardware = EnergyHistogram::from_counts(samples.samples.iter().map(|s| (s.energy, s.multiplicity)), total);
    let logical = match embedded {
        None => hardware.clone(),
        Some(em) => {
            let dm = DenseModel::from_model(&em.source);
            let counts = samples
                .samples
                .iter()
                .filter_map(|s| em.unembed(&s.spins).map(|x| (dm.energy(&x), s.multiplicity)));
            EnergyHistogram::from_counts(counts, total)
        }
    };
    HistogramPair { logical, hardware }
}

/// Maximum-likelihood Boltzmann temperature over the observed configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoltzmannFit {
    /// `f64::INFINITY` when the likelihood peaks at `β ≤ 0`.
    pub temperature: f64,
    pub beta: f64,
    pub log_likelihood: f64,
    pub infinite_temperature: bool,
}

/// Per-configuration `(energy, count)` pairs of a sample set.
pub fn configuration_counts(samples: &SampleSet) -> Vec<(f64, u64)> {
    samples.samples.iter().map(|s| (s.energy, s.multiplicity)).collect()
}

fn log_likelihood(configs: &[(f64, u64)], beta: f64, e0: f64) -> f64 {
    let n: f64 = configs.iter().map(|c| c.1 as f64).sum();
    let log_z = configs.iter().map(|&(e, _)| (-beta * (e - e0)).exp()).sum::<f64>().ln();
    configs.iter().map(|&(e, c)| c as f64 * (-beta * (e - e0))).sum::<f64>() - n * log_z
}

/// Mean energy of the Boltzmann distribution at `beta` restricted to the
/// observed configurations.
fn model_mean(configs: &[(f64, u64)], beta: f64, e0: f64) -> f64 {
    let mut z = 0.0;
    let mut ez = 0.0;
    for &(e, _) in configs {
        let w = (-beta * (e - e0)).exp();
        z += w;
        ez += e * w;
    }
    ez / z
}

/// Fits `p(x) ∝ exp(−E(x)/T)` over the distinct observed configurations by
/// solving the likelihood equation `⟨E⟩_β = Ē` with bisection in `β`; the
/// temperature is resolved to `1e−6`.
pub fn boltzmann_fit(configs: &[(f64, u64)]) -> Result<BoltzmannFit> {
    let configs: Vec<(f64, u64)> = configs.iter().copied().filter(|c| c.1 > 0).collect();
    if configs.is_empty() {
        return Err(Error::domain("no observed configurations"));
    }
    let e0 = configs.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let e1 = configs.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    if e1 - e0 <= ENERGY_TOL * (1.0 + e0.abs()) {
        return Err(Error::domain("degenerate fit: only one energy level observed"));
    }
    let n: f64 = configs.iter().map(|c| c.1 as f64).sum();
    let mean = configs.iter().map(|&(e, c)| e * c as f64).sum::<f64>() / n;
    if mean >= model_mean(&configs, 0.0, e0) {
        return Ok(BoltzmannFit {
            temperature: f64::INFINITY,
            beta: 0.0,
            log_likelihood: log_likelihood(&configs, 0.0, e0),
            infinite_temperature: true,
        });
    }
    // ⟨E⟩_β decreases monotonically; bracket the root then bisect
    let mut lo = 0.0;
    let mut hi = 1.0 / (e1 - e0);
    while model_mean(&configs, hi, e0) > mean {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(Error::Numerical("temperature bracket diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model_mean(&configs, mid, e0) > mean {
            lo = mid;
        } else {
            hi = mid;
        }
        if lo > 0.0 && (1.0 / lo - 1.0 / hi) < 1e-6 {
            break;
        }
    }
    let beta = 0.5 * (lo + hi);
    Ok(BoltzmannFit {
        temperature: 1.0 / beta,
        beta,
        log_likelihood: log_likelihood(&configs, beta, e0),
        infinite_temperature: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelDispersion {
    pub energy: f64,
    pub configurations: usize,
    pub min_probability: f64,
    pub max_probability: f64,
    /// `max / min` of the empirical probabilities within the level.
    pub ratio: f64,
}

/// Spread of empirical probabilities among observed configurations sharing an
/// energy. Equilibrium sampling gives ratios near one.
pub fn equal_energy_dispersion(configs: &[(f64, u64)]) -> Vec<LevelDispersion> {
    let total: u64 = configs.iter().map(|c| c.1).sum();
    let mut sorted: Vec<(f64, u64)> = configs.iter().copied().filter(|c| c.1 > 0).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut levels: Vec<(f64, Vec<u64>)> = Vec::new();
    for (e, c) in sorted {
        match levels.last_mut() {
            Some((le, counts)) if (e - *le).abs() <= ENERGY_TOL * (1.0 + e.abs()) => counts.push(c),
            _ => levels.push((e, vec![c])),
        }
    }
    levels
        .into_iter()
        .map(|(energy, counts)| {
            let lo = *counts.iter().min().expect("non-empty level") as f64;
            let hi = *counts.iter().max().expect("non-empty level") as f64;
            LevelDispersion {
                energy,
                configurations: counts.len(),
                min_probability: lo / total as f64,
                max_probability: hi / total as f64,
                ratio: hi / lo,
            }
        })
        .collect()
}

/// Largest per-level ratio among levels with at least two configurations.
pub fn max_dispersion(levels: &[LevelDispersion]) -> Option<f64> {
    levels
        .iter()
        .filter(|l| l.configurations >= 2)
        .map(|l| l.ratio)
        .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
}

/// Empirical `(energy, count)` pairs keyed by configuration index, handy for
/// planted-distribution checks.
pub fn counts_by_index(energies: &[f64], counts: &[u64]) -> Vec<(f64, u64)> {
    energies.iter().copied().zip(counts.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sa::{Sample, SampleMetadata};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{weighted::WeightedIndex, Distribution};

    fn scan(epsilon: f64, delta: f64) -> u64 {
        (1..).find(|&k| 1.0 - epsilon.powi(k as i32) >= delta).unwrap()
    }

    #[test]
    fn repetition_examples() {
        assert_eq!(repetition_count(0.5, 0.99).unwrap(), 7);
        assert_eq!(repetition_count(0.355, 0.999).unwrap(), 7);
        assert_eq!(repetition_count(0.35, 0.999).unwrap(), 7);
        assert_eq!(repetition_count(0.6, 0.3).unwrap(), 1);
        assert_eq!(repetition_count(0.5, 0.5).unwrap(), 1);
        assert!(repetition_count(0.0, 0.5).is_err());
        assert!(repetition_count(0.5, 1.0).is_err());
        assert!(repetition_count(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn repetition_matches_scan() {
        for i in 1..100 {
            for j in 1..100 {
                let (e, d) = (i as f64 / 100.0, j as f64 / 100.0);
                assert_eq!(repetition_count(e, d).unwrap(), scan(e, d), "eps={e} delta={d}");
            }
        }
    }

    fn planted(energies: &[f64], t: f64, draws: usize, seed: u64) -> Vec<(f64, u64)> {
        let w: Vec<f64> = energies.iter().map(|e| (-e / t).exp()).collect();
        let dist = WeightedIndex::new(&w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; energies.len()];
        for _ in 0..draws {
            counts[dist.sample(&mut rng)] += 1;
        }
        counts_by_index(energies, &counts)
    }

    #[test]
    fn fit_recovers_planted_temperature() {
        let energies = [0.0, 0.1, 0.1, 0.2, 0.3, 0.4];
        let fit = boltzmann_fit(&planted(&energies, 0.3, 1_000_000, 1)).unwrap();
        assert!((fit.temperature - 0.3).abs() <= 0.01, "{fit:?}");
        assert!(!fit.infinite_temperature);
    }

    #[test]
    fn fit_on_exact_exponential_counts() {
        let energies = [0.0, 1.0, 2.0, 3.0];
        let configs: Vec<(f64, u64)> = energies
            .iter()
            .map(|&e| (e, (1e9 * f64::exp(-e)).round() as u64))
            .collect();
        let fit = boltzmann_fit(&configs).unwrap();
        assert!((fit.temperature - 1.0).abs() <= 1e-3, "{fit:?}");
    }

    #[test]
    fn fit_boundaries() {
        let fit = boltzmann_fit(&[(0.0, 10), (1.0, 10)]).unwrap();
        assert!(fit.infinite_temperature);
        assert!(fit.temperature.is_infinite());
        assert!(boltzmann_fit(&[(0.0, 10), (0.0, 3)]).is_err());
        assert!(boltzmann_fit(&[]).is_err());
    }

    #[test]
    fn likelihood_is_maximal_at_fit() {
        let configs = [(0.0, 50), (1.0, 20), (1.0, 15), (2.0, 5)];
        let fit = boltzmann_fit(&configs).unwrap();
        let e0 = 0.0;
        for db in [-0.01, 0.01] {
            assert!(log_likelihood(&configs, fit.beta + db, e0) <= fit.log_likelihood + 1e-9);
        }
    }

    #[test]
    fn dispersion_cases() {
        let levels = equal_energy_dispersion(&[(0.0, 5), (1.0, 200), (1.0, 100)]);
        assert_eq!(levels.len(), 2);
        assert_eq!(levels[0].ratio, 1.0);
        assert_eq!(levels[1].ratio, 2.0);
        assert_eq!(max_dispersion(&levels), Some(2.0));
        let energies = [0.0, 0.1, 0.1, 0.2, 0.2, 0.2];
        let levels = equal_energy_dispersion(&planted(&energies, 0.3, 1_000_000, 3));
        assert!(max_dispersion(&levels).unwrap() <= 1.1);
    }

    fn sample(spins: &[i8], energy: f64, multiplicity: u64) -> Sample {
        Sample {
            spins: spins.to_vec(),
            energy,
            multiplicity,
        }
    }

    #[test]
    fn histogram_without_embedding_is_shared() {
        let set = SampleSet {
            samples: vec![
                sample(&[1, 1], -1.0, 3),
                sample(&[1, -1], 1.0, 2),
                sample(&[-1, 1], 1.0, 1),
            ],
            metadata: SampleMetadata::default(),
        };
        let h = histogram(&set, None);
        assert_eq!(h.logical, h.hardware);
        assert_eq!(h.hardware.count(1.0), 3);
        assert_eq!(h.hardware.feasible_reads, 6);
        assert_eq!(h.hardware.to_json_map(), serde_json::json!({"-1": 3, "1": 3}));
        assert!(h.hardware.render(10).contains("##########"));
    }
}
