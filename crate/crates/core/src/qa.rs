//! Closed-system statevector simulation of the annealing Hamiltonian
//! `H(t) = A(t/t_f)·H_i + B(t/t_f)·H_P` with `H_i = −Σ σ_x` and `H_P`
//! diagonal in the computational basis.
//!
//! Basis index bit `i` is variable `i` taking the value 1 (binary) or +1
//! (spin).

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dense::DenseModel;
use crate::error::{Error, Result};
use crate::qubo::{Coef, QuadraticModel};
use crate::sa::{model_hash, SampleMetadata, SampleSet};

/// Largest register simulated.
pub const MAX_QUBITS: usize = 20;
/// Largest register for [`instantaneous_spectrum`].
pub const MAX_SPECTRUM_QUBITS: usize = 14;
/// Registers up to this size are diagonalized densely.
const DENSE_SPECTRUM_QUBITS: usize = 10;
/// Amplitude count above which Hamiltonian application runs in parallel.
const PARALLEL_LEN: usize = 1 << 12;

type C64 = Complex<f64>;

/// Tabulated `A(s)`, `B(s)` on `s ∈ [0, 1]`, linearly interpolated, plus the
/// total anneal time.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    pub t_f: f64,
    s: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl AnnealSchedule {
    pub fn new(t_f: f64, s: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if !(t_f >= 0.0 && t_f.is_finite()) {
            return Err(Error::domain(format!(
                "anneal time must be finite and non-negative, got {t_f}"
            )));
        }
        if s.len() < 2 || s.len() != a.len() || s.len() != b.len() {
            return Err(Error::domain("schedule needs at least two rows of equal length"));
        }
        if s[0] != 0.0 || s[s.len() - 1] != 1.0 || s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("schedule s must increase strictly from 0 to 1"));
        }
        let last = s.len() - 1;
        if a[last] != 0.0 || b[0] != 0.0 {
            return Err(Error::domain("schedule needs A(1) = 0 and B(0) = 0"));
        }
        // written negated so NaN entries are rejected too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if a[..last].iter().any(|&x| !(x > 0.0)) || b[1..].iter().any(|&x| !(x > 0.0)) {
            return Err(Error::domain(
                "A must be positive before s = 1 and B positive after s = 0",
            ));
        }
        if a.windows(2).any(|w| w[1] > w[0]) || b.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("A must be non-increasing and B non-decreasing"));
        }
        Ok(Self { t_f, s, a, b })
    }

    /// `A(s) = 1 − s`, `B(s) = s`.
    pub fn linear(t_f: f64) -> Result<Self> {
        Self::new(t_f, vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0])
    }

    /// Parses a whitespace table `s A(s) B(s)` whose first line is a header.
    /// Blank lines and `#` comments are skipped.
    pub fn from_table(t_f: f64, text: &str) -> Result<Self> {
        let (mut s, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .skip(1);
        for (k, line) in rows.enumerate() {
            let cols: Vec<f64> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(f64::from_str)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("schedule row {}: {e}", k + 1)))?;
            if cols.len() != 3 {
                return Err(Error::Parse(format!(
                    "schedule row {} has {} columns, expected 3",
                    k + 1,
                    cols.len()
                )));
            }
            s.push(cols[0]);
            a.push(cols[1]);
            b.push(cols[2]);
        }
        Self::new(t_f, s, a, b)
    }

    pub fn from_file(t_f: f64, path: impl AsRef<Path>) -> Result<Self> {
        Self::from_table(t_f, &std::fs::read_to_string(path)?)
    }

    pub fn with_time(&self, t_f: f64) -> Result<Self> {
        Self::new(t_f, self.s.clone(), self.a.clone(), self.b.clone())
    }

    /// `(A(s), B(s))` with `s` clamped to `[0, 1]`.
    pub fn coefficients(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let k = self.s.partition_point(|&x| x <= s).clamp(1, self.s.len() - 1);
        let (s0, s1) = (self.s[k - 1], self.s[k]);
        let w = (s - s0) / (s1 - s0);
        let lerp = |v: &[f64]| v[k - 1] + w * (v[k] - v[k - 1]);
        (lerp(&self.a), lerp(&self.b))
    }

    fn max_a(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max)
    }

    fn max_b(&self) -> f64 {
        self.b.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub num_qubits: usize,
    pub amplitudes: Vec<C64>,
}

impl QuantumState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `⟨ψ|H_i|ψ⟩` for `H_i = −Σ σ_x`.
    pub fn transverse_expectation(&self) -> f64 {
        let mut out = vec![C64::new(0.0, 0.0); self.amplitudes.len()];
        apply_transverse(&self.amplitudes, self.num_qubits, &mut out);
        self.amplitudes.iter().zip(&out).map(|(x, y)| (x.conj() * y).re).sum()
    }
}

fn check_qubits(l: usize, cap: usize) -> Result<()> {
    if l == 0 || l > cap {
        return Err(Error::domain(format!("register of {l} qubits outside 1..={cap}")));
    }
    Ok(())
}

/// Uniform superposition, the ground state of `−Σ σ_x`.
pub fn initial_state(l: usize) -> Result<QuantumState> {
    check_qubits(l, MAX_QUBITS)?;
    let amp = C64::new((0.5f64).powf(l as f64 / 2.0), 0.0);
    Ok(QuantumState {
        num_qubits: l,
        amplitudes: vec![amp; 1 << l],
    })
}

/// Diagonal of `H_P`: the model energy of every basis state as an exact
/// integer multiple of `1/denominator`. Returns `(numerators, denominator)`.
pub fn problem_diagonal_scaled(model: &QuadraticModel) -> Result<(Vec<i64>, i64)> {
    let l = model.num_vars();
    check_qubits(l, MAX_QUBITS)?;
    let (dm, d) = DenseModel::from_model_scaled(model);
    let dim = 1usize << l;
    let low = l.min(12);
    let mut diag = vec![0i64; dim];
    diag.par_chunks_mut(1 << low).enumerate().for_each(|(c, chunk)| {
        let base = (c << low) as u64;
        let mut x = dm.assignment_of_bits(base);
        let mut e = dm.energy(&x);
        let mut bits = base;
        chunk[0] = e;
        for step in 1u64..1 << low {
            let k = step.trailing_zeros() as usize;
            e += dm.flip_delta(k, &x);
            x[k] = match dm.domain {
                crate::qubo::Domain::Binary => 1 - x[k],
                crate::qubo::Domain::Spin => -x[k],
            };
            bits ^= 1 << k;
            chunk[(bits - base) as usize] = e;
        }
    });
    Ok((diag, d))
}

pub fn problem_diagonal(model: &QuadraticModel) -> Result<Vec<f64>> {
    let (diag, d) = problem_diagonal_scaled(model)?;
    Ok(diag.into_iter().map(|e| e as f64 / d as f64).collect())
}

/// `out = −Σ_j σ_x^{(j)} ψ`.
fn apply_transverse(psi: &[C64], l: usize, out: &mut [C64]) {
    let body = |(x, o): (usize, &mut C64)| {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..l {
            acc += psi[x ^ (1 << j)];
        }
        *o = -acc;
    };
    if psi.len() >= PARALLEL_LEN {
        out.par_iter_mut().enumerate().for_each(body);
    } else {
        out.iter_mut().enumerate().for_each(body);
    }
}

/// `out = −i·(A·H_i + B·(H_P − shift))·ψ`.
fn derivative(psi: &[C64], l: usize, diag: &[f64], shift: f64, a: f64, b: f64, out: &mut [C64]) {
    let body = |(x, o): (usize, &mut C64)| {
        let mut flip = C64::new(0.0, 0.0);
        for j in 0..l {
            flip += psi[x ^ (1 << j)];
        }
        let h = -a * flip + psi[x] * (b * (diag[x] - shift));
        *o = C64::new(h.im, -h.re);
    };
    if psi.len() >= PARALLEL_LEN {
        out.par_iter_mut().enumerate().for_each(body);
    } else {
        out.iter_mut().enumerate().for_each(body);
    }
}

fn diag_span(diag: &[f64]) -> (f64, f64) {
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ((lo + hi) / 2.0, (hi - lo) / 2.0)
}

/// RK4 step count keeping `dt·‖H‖` at or below 0.01, which holds the norm
/// drift of a run well under 1e-8 for the anneal times used here.
pub fn recommended_steps(model: &QuadraticModel, sched: &AnnealSchedule) -> Result<usize> {
    let diag = problem_diagonal(model)?;
    let (_, radius) = diag_span(&diag);
    let bound = sched.max_a() * model.num_vars() as f64 + sched.max_b() * radius;
    Ok(((sched.t_f * bound / 0.01).ceil() as usize).max(1))
}

/// Integrates `i dψ/dt = H(t) ψ` from the uniform state with `steps`
/// fixed RK4 steps.
pub fn evolve(model: &QuadraticModel, sched: &AnnealSchedule, steps: usize) -> Result<QuantumState> {
    if steps == 0 {
        return Err(Error::domain("steps must be positive"));
    }
    let l = model.num_vars();
    let mut state = initial_state(l)?;
    let diag = problem_diagonal(model)?;
    // a constant shift of H_P only changes a global phase
    let (shift, _) = diag_span(&diag);
    let dim = 1usize << l;
    let dt = sched.t_f / steps as f64;
    let zero = C64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
    );
    let psi = &mut state.amplitudes;
    let axpy = |y: &mut [C64], x: &[C64], k: &[C64], h: f64| {
        y.iter_mut().zip(x.iter().zip(k)).for_each(|(y, (x, k))| *y = x + k * h);
    };
    for n in 0..steps {
        let s0 = n as f64 / steps as f64;
        let sm = (n as f64 + 0.5) / steps as f64;
        let s1 = (n + 1) as f64 / steps as f64;
        let (a0, b0) = sched.coefficients(s0);
        let (am, bm) = sched.coefficients(sm);
        let (a1, b1) = sched.coefficients(s1);
        derivative(psi, l, &diag, shift, a0, b0, &mut k1);
        axpy(&mut tmp, psi, &k1, dt / 2.0);
        derivative(&tmp, l, &diag, shift, am, bm, &mut k2);
        axpy(&mut tmp, psi, &k2, dt / 2.0);
        derivative(&tmp, l, &diag, shift, am, bm, &mut k3);
        axpy(&mut tmp, psi, &k3, dt);
        derivative(&tmp, l, &diag, shift, a1, b1, &mut k4);
        for x in 0..dim {
            psi[x] += (k1[x] + (k2[x] + k3[x]) * 2.0 + k4[x]) * (dt / 6.0);
        }
    }
    Ok(state)
}

/// Probability of each distinct energy level after a computational-basis
/// measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDistribution {
    /// `(energy, probability)` ascending in energy.
    pub levels: Vec<(Coef, f64)>,
}

impl EnergyDistribution {
    pub fn probability(&self, energy: Coef) -> f64 {
        self.levels.iter().find(|(e, _)| *e == energy).map_or(0.0, |&(_, p)| p)
    }

    pub fn total(&self) -> f64 {
        self.levels.iter().map(|&(_, p)| p).sum()
    }

    /// Probability of the lowest energy level of the model (even when the
    /// state has no weight there).
    pub fn lowest_level(&self) -> Option<(Coef, f64)> {
        self.levels.first().copied()
    }
}

pub fn measure_energies(state: &QuantumState, model: &QuadraticModel) -> Result<EnergyDistribution> {
    if state.num_qubits != model.num_vars() {
        return Err(Error::domain(format!(
            "state has {} qubits but the model has {} variables",
            state.num_qubits,
            model.num_vars()
        )));
    }
    let (diag, d) = problem_diagonal_scaled(model)?;
    let mut levels: BTreeMap<i64, f64> = BTreeMap::new();
    for (e, z) in diag.iter().zip(&state.amplitudes) {
        *levels.entry(*e).or_insert(0.0) += z.norm_sqr();
    }
    Ok(EnergyDistribution {
        levels: levels.into_iter().map(|(e, p)| (Coef::new(e, d), p)).collect(),
    })
}

/// Draws `reads` basis states from `|ψ|²` and records them in the model's
/// domain. Deterministic for a fixed seed.
pub fn sample_state(state: &QuantumState, model: &QuadraticModel, reads: usize, seed: u64) -> Result<SampleSet> {
    if state.num_qubits != model.num_vars() {
        return Err(Error::domain("state and model sizes differ"));
    }
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p / total;
        cdf.push(acc);
    }
    let dm = DenseModel::from_model(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reads: Vec<(Vec<i8>, f64)> = (0..reads)
        .map(|_| {
            let u: f64 = rng.random();
            let idx = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
            let x = dm.assignment_of_bits(idx as u64);
            let e = dm.energy(&x);
            (x, e)
        })
        .collect();
    Ok(SampleSet::from_reads(
        reads,
        SampleMetadata {
            sampler: "qa-statevector".into(),
            seed: Some(seed),
            schedule: None,
            model_hash: model_hash(model),
        },
    ))
}

/// Real symmetric `A·H_i + B·H_P` applied to a real vector.
fn apply_real(x: &[f64], l: usize, diag: &[f64], a: f64, b: f64, out: &mut [f64]) {
    let body = |(i, o): (usize, &mut f64)| {
        let mut flip = 0.0;
        for j in 0..l {
            flip += x[i ^ (1 << j)];
        }
        *o = -a * flip + b * diag[i] * x[i];
    };
    if x.len() >= PARALLEL_LEN {
        out.par_iter_mut().enumerate().for_each(body);
    } else {
        out.iter_mut().enumerate().for_each(body);
    }
}

fn dense_hamiltonian(l: usize, diag: &[f64], a: f64, b: f64) -> DMatrix<f64> {
    let dim = 1usize << l;
    DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            b * diag[r]
        } else if (r ^ c).is_power_of_two() {
            -a
        } else {
            0.0
        }
    })
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Lowest `k` eigenvalues of `A(s)·H_i + B(s)·H_P`, ascending, with
/// multiplicity.
pub fn instantaneous_spectrum(model: &QuadraticModel, sched: &AnnealSchedule, s: f64, k: usize) -> Result<Vec<f64>> {
    let l = model.num_vars();
    check_qubits(l, MAX_SPECTRUM_QUBITS)?;
    let dim = 1usize << l;
    if k == 0 || k > dim {
        return Err(Error::domain(format!(
            "cannot take {k} eigenvalues of a {dim}-dimensional operator"
        )));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::domain(format!("s = {s} outside [0, 1]")));
    }
    let diag = problem_diagonal(model)?;
    let (a, b) = sched.coefficients(s);
    if a == 0.0 {
        let mut ev: Vec<f64> = diag.iter().map(|&e| b * e).collect();
        ev.sort_by(f64::total_cmp);
        ev.truncate(k);
        return Ok(ev);
    }
    if l <= DENSE_SPECTRUM_QUBITS {
        let mut ev = sorted_eigenvalues(dense_hamiltonian(l, &diag, a, b));
        ev.truncate(k);
        return Ok(ev);
    }
    block_lanczos(l, &diag, a, b, k, 0x5eed)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Orthogonalizes `v` against `basis` twice; returns the remaining norm.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
    dot(v, v).sqrt()
}

/// Block Krylov subspace with full reorthogonalization and Rayleigh–Ritz
/// extraction, restarted from the current Ritz vectors. A random block of
/// `k + 2` vectors resolves eigenvalues of multiplicity up to that size.
fn block_lanczos(l: usize, diag: &[f64], a: f64, b: f64, k: usize, seed: u64) -> Result<Vec<f64>> {
    let dim = 1usize << l;
    let block = (k + 2).min(dim);
    let max_basis = (block * 40).clamp(block, 400).min(dim);
    let scale = a * l as f64 + b * diag.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let tol = 1e-11 * scale.max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..dim).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    let mut hv = vec![0.0; dim];
    for _restart in 0..50 {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
        let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
        let mut frontier = std::mem::take(&mut start);
        while basis.len() < max_basis && !frontier.is_empty() {
            let mut next = Vec::new();
            for mut v in frontier {
                if basis.len() >= max_basis {
                    break;
                }
                let before = dot(&v, &v).sqrt();
                let after = orthogonalize(&mut v, &basis);
                if after <= 1e-10 * before.max(1e-300) {
                    continue;
                }
                v.iter_mut().for_each(|x| *x /= after);
                apply_real(&v, l, diag, a, b, &mut hv);
                next.push(hv.clone());
                images.push(hv.clone());
                basis.push(v);
            }
            frontier = next;
        }
        let m = basis.len();
        let t = DMatrix::from_fn(m, m, |i, j| dot(&basis[i], &images[j]));
        let t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut converged = true;
        let mut ritz_vectors = Vec::with_capacity(block);
        for &col in order.iter().take(block.min(m)) {
            let theta = eig.eigenvalues[col];
            let mut y = vec![0.0; dim];
            let mut hy = vec![0.0; dim];
            for (r, (q, hq)) in basis.iter().zip(&images).enumerate() {
                let c = eig.eigenvectors[(r, col)];
                y.iter_mut().zip(q).for_each(|(a, b)| *a += c * b);
                hy.iter_mut().zip(hq).for_each(|(a, b)| *a += c * b);
            }
            if ritz_vectors.len() < k {
                let res = hy
                    .iter()
                    .zip(&y)
                    .map(|(h, v)| (h - theta * v).powi(2))
                    .sum::<f64>()
                    .sqrt();
                converged &= res <= tol;
            }
            ritz_vectors.push(y);
        }
        if converged || m == dim {
            return Ok(order.iter().take(k).map(|&c| eig.eigenvalues[c]).collect());
        }
        // keep a random component so unconverged multiplicities stay reachable
        start = ritz_vectors;
        for v in &mut start {
            for x in v.iter_mut() {
                *x += 1e-6 * (rng.random::<f64>() - 0.5);
            }
        }
    }
    Err(Error::Numerical(format!(
        "block Lanczos did not converge for the lowest {k} eigenvalues"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{ramsey_energy, RamseyInstance};
    use crate::graph::GraphBits;
    use crate::qubo::{build_r33_model, build_rm2_model, to_spin, Domain, PenaltyConfig};
    use num_traits::Zero;

    fn single_spin(h: i64) -> QuadraticModel {
        let mut m = QuadraticModel::new(1, Domain::Spin);
        m.add_linear(0, Coef::from_integer(h));
        m
    }

    fn random_model(l: usize, seed: u64) -> QuadraticModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = QuadraticModel::new(l, Domain::Spin);
        for i in 0..l {
            m.add_linear(i, Coef::new(rng.random_range(-8..=8), 4));
            for j in i + 1..l {
                if rng.random_bool(0.6) {
                    m.add_quadratic(i, j, Coef::new(rng.random_range(-4..=4), 4));
                }
            }
        }
        m
    }

    #[test]
    fn uniform_initial_state() {
        let s1 = initial_state(1).unwrap();
        for z in &s1.amplitudes {
            assert!((z.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        let s2 = initial_state(2).unwrap();
        assert!(s2.amplitudes.iter().all(|z| (z.re - 0.5).abs() < 1e-15));
        let s6 = initial_state(6).unwrap();
        assert!((s6.transverse_expectation() + 6.0).abs() < 1e-12);
        assert!(initial_state(21).is_err());
        assert!(initial_state(0).is_err());
    }

    #[test]
    fn schedule_validation_and_interpolation() {
        let lin = AnnealSchedule::linear(5.0).unwrap();
        assert_eq!(lin.coefficients(0.25), (0.75, 0.25));
        assert!(AnnealSchedule::new(1.0, vec![0.0, 1.0], vec![1.0, 0.1], vec![0.0, 1.0]).is_err());
        assert!(AnnealSchedule::new(1.0, vec![0.0, 1.0], vec![1.0, 0.0], vec![0.2, 1.0]).is_err());
        assert!(AnnealSchedule::new(1.0, vec![0.0, 0.5, 1.0], vec![1.0, 1.2, 0.0], vec![0.0, 0.5, 1.0]).is_err());
        let table = "s A B\n0 2 0\n0.5 0.5 1\n1 0 3\n";
        let t = AnnealSchedule::from_table(1.0, table).unwrap();
        assert_eq!(t.coefficients(0.25), (1.25, 0.5));
        assert_eq!(t.coefficients(1.0), (0.0, 3.0));
        assert!(AnnealSchedule::from_table(1.0, "s A B\n0 1\n").is_err());
    }

    #[test]
    fn diagonal_matches_ramsey_energy() {
        for n in [4usize, 5] {
            let model = build_r33_model(n, false).unwrap();
            let inst = RamseyInstance::new(n, 3, 3).unwrap();
            let (diag, d) = problem_diagonal_scaled(&model).unwrap();
            assert_eq!(d, 1);
            for (x, &e) in diag.iter().enumerate() {
                let g = GraphBits::from_word(n, x as u64).unwrap();
                assert_eq!(e as u64, ramsey_energy(&g, &inst).unwrap());
            }
        }
    }

    #[test]
    fn slow_single_spin_relaxes() {
        let model = single_spin(1);
        let sched = AnnealSchedule::linear(50.0).unwrap();
        let steps = recommended_steps(&model, &sched).unwrap();
        let state = evolve(&model, &sched, steps).unwrap();
        // h = +1 favours s = -1, basis index 0
        assert!(state.probabilities()[0] >= 0.99);
        assert!((state.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn r33_four_vertices_slow_anneal() {
        let model = build_r33_model(4, false).unwrap();
        let sched = AnnealSchedule::linear(100.0).unwrap();
        let steps = recommended_steps(&model, &sched).unwrap();
        let state = evolve(&model, &sched, steps).unwrap();
        assert!((state.norm() - 1.0).abs() <= 1e-8);
        let dist = measure_energies(&state, &model).unwrap();
        assert!(dist.probability(Coef::zero()) >= 0.99, "{dist:?}");
    }

    #[test]
    fn sudden_limit_keeps_uniform() {
        let model = build_r33_model(4, false).unwrap();
        let sched = AnnealSchedule::linear(1e-6).unwrap();
        let state = evolve(&model, &sched, 10).unwrap();
        for p in state.probabilities() {
            assert!((p - 1.0 / 64.0).abs() <= 0.01);
        }
    }

    #[test]
    fn uniform_measurement_counts_degeneracy() {
        let model = build_r33_model(4, false).unwrap();
        let dist = measure_energies(&initial_state(6).unwrap(), &model).unwrap();
        assert!((dist.probability(Coef::zero()) - 18.0 / 64.0).abs() < 1e-12);
        assert!((dist.total() - 1.0).abs() < 1e-12);
        let mut basis = initial_state(6).unwrap();
        basis.amplitudes.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        basis.amplitudes[0] = C64::new(1.0, 0.0);
        let point = measure_energies(&basis, &model).unwrap();
        // empty graph on 4 vertices has 4 independent triples
        assert_eq!(point.levels.iter().filter(|(_, p)| *p > 0.0).count(), 1);
        assert_eq!(point.probability(Coef::from_integer(4)), 1.0);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let model = random_model(4, 3);
        let sched = AnnealSchedule::linear(2.0).unwrap();
        let reference = evolve(&model, &sched, 4096).unwrap();
        let err = |steps| {
            let s = evolve(&model, &sched, steps).unwrap();
            s.amplitudes
                .iter()
                .zip(&reference.amplitudes)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let (coarse, fine) = (err(32), err(64));
        assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn ground_probability_grows_with_time() {
        let model = build_r33_model(4, false).unwrap();
        let mut last = 0.0;
        for t_f in [1.0, 10.0, 100.0] {
            let sched = AnnealSchedule::linear(t_f).unwrap();
            let state = evolve(&model, &sched, recommended_steps(&model, &sched).unwrap()).unwrap();
            let p = measure_energies(&state, &model).unwrap().probability(Coef::zero());
            assert!(p >= last - 1e-9, "t_f={t_f}: {p} < {last}");
            last = p;
        }
    }

    #[test]
    fn spectrum_endpoints() {
        let model = to_spin(&build_rm2_model(4, &PenaltyConfig::default()).unwrap()).unwrap();
        let sched = AnnealSchedule::linear(1.0).unwrap();
        let l = model.num_vars() as f64;
        let ev = instantaneous_spectrum(&model, &sched, 0.0, 3).unwrap();
        assert!((ev[0] + l).abs() < 1e-9);
        assert!((ev[1] - ev[0] - 2.0).abs() < 1e-9);
        let fixed = to_spin(&build_r33_model(6, true).unwrap()).unwrap();
        let ev = instantaneous_spectrum(&fixed, &sched, 1.0, 2).unwrap();
        assert_eq!(ev, vec![2.0, 2.0]);
    }

    #[test]
    fn lanczos_matches_dense_solver() {
        for seed in 0..4 {
            let model = random_model(6, seed);
            let diag = problem_diagonal(&model).unwrap();
            for (a, b) in [(0.7, 0.3), (0.2, 0.8), (1.0, 0.05)] {
                let dense = sorted_eigenvalues(dense_hamiltonian(6, &diag, a, b));
                let lanczos = block_lanczos(6, &diag, a, b, 4, seed).unwrap();
                for (x, y) in lanczos.iter().zip(&dense) {
                    assert!((x - y).abs() < 1e-9, "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn lanczos_on_wider_register() {
        let model = to_spin(&build_r33_model(5, false).unwrap()).unwrap();
        let diag = problem_diagonal(&model).unwrap();
        let dense = sorted_eigenvalues(dense_hamiltonian(10, &diag, 0.4, 0.6));
        let lanczos = block_lanczos(10, &diag, 0.4, 0.6, 3, 1).unwrap();
        for (x, y) in lanczos.iter().zip(&dense) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn sampling_follows_probabilities() {
        let model = single_spin(1);
        let mut state = initial_state(1).unwrap();
        state.amplitudes = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let set = sample_state(&state, &model, 20000, 7).unwrap();
        let minus = set.samples.iter().find(|s| s.spins == vec![-1]).unwrap();
        assert!((minus.multiplicity as f64 / 20000.0 - 0.36).abs() < 0.02);
        assert_eq!(minus.energy, -1.0);
    }
}
