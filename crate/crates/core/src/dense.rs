//! Numeric adjacency-list form of a [`QuadraticModel`] for samplers and
//! exhaustive enumeration, plus a parallel Gray-code ground-state search.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubo::{Coef, Domain, QuadraticModel};

/// Largest variable count accepted by [`ground_search`].
pub const MAX_ENUMERATION_VARS: usize = 30;

pub trait Scalar:
    Copy
    + Send
    + Sync
    + PartialOrd
    + Zero
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + std::fmt::Debug
{
    fn from_i8(v: i8) -> Self;
}

impl Scalar for f64 {
    fn from_i8(v: i8) -> Self {
        v as f64
    }
}

impl Scalar for i64 {
    fn from_i8(v: i8) -> Self {
        v as i64
    }
}

#[derive(Debug, Clone)]
pub struct DenseModel<T> {
    pub domain: Domain,
    pub offset: T,
    pub linear: Vec<T>,
    /// `adj[i]` lists `(j, J_ij)` for every coupling touching `i`.
    pub adj: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> DenseModel<T> {
    fn build(model: &QuadraticModel, conv: impl Fn(&Coef) -> T) -> Self {
        let mut adj = vec![Vec::new(); model.num_vars()];
        for (&(i, j), c) in model.quadratic() {
            let v = conv(c);
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        Self {
            domain: model.domain(),
            offset: conv(&model.offset()),
            linear: model.linear().iter().map(&conv).collect(),
            adj,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    /// Energy of `x` given in the model's domain.
    pub fn energy(&self, x: &[i8]) -> T {
        let mut e = self.offset;
        for (i, &xi) in x.iter().enumerate() {
            let vi = T::from_i8(xi);
            e += self.linear[i] * vi;
            for &(j, c) in &self.adj[i] {
                if j > i {
                    e += c * vi * T::from_i8(x[j]);
                }
            }
        }
        e
    }

    /// `h_i + Σ_j J_ij x_j`.
    #[inline]
    pub fn local_field(&self, i: usize, x: &[i8]) -> T {
        let mut f = self.linear[i];
        for &(j, c) in &self.adj[i] {
            f += c * T::from_i8(x[j]);
        }
        f
    }

    /// Energy change from flipping variable `i`.
    #[inline]
    pub fn flip_delta(&self, i: usize, x: &[i8]) -> T {
        let f = self.local_field(i, x);
        self.flip_delta_with_field(i, x[i], f)
    }

    #[inline]
    fn flip_delta_with_field(&self, _i: usize, xi: i8, field: T) -> T {
        match self.domain {
            // x -> 1 - x
            Domain::Binary => T::from_i8(1 - 2 * xi) * field,
            // s -> -s
            Domain::Spin => T::from_i8(-2 * xi) * field,
        }
    }

    pub fn assignment_of_bits(&self, bits: u64) -> Vec<i8> {
        (0..self.num_vars())
            .map(|i| self.domain.value(bits >> i & 1 == 1))
            .collect()
    }
}

impl DenseModel<f64> {
    pub fn from_model(model: &QuadraticModel) -> Self {
        Self::build(model, |c| c.to_f64().expect("finite rational"))
    }
}

impl DenseModel<i64> {
    /// Integer model `D·E` where `D` is the common denominator; returns `(model, D)`.
    pub fn from_model_scaled(model: &QuadraticModel) -> (Self, i64) {
        let d = model.common_denominator();
        let dm = Self::build(model, |c| (c * Coef::from_integer(d)).to_integer());
        (dm, d)
    }
}

/// Minimum, degeneracy and (up to a cap) the minimizing basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundInfo<T> {
    pub min: T,
    pub degeneracy: u64,
    /// Basis states (bit `i` = variable `i` is 1 / +1), ascending; empty when
    /// the degeneracy exceeded the retention cap.
    pub minimizers: Vec<u64>,
}

impl<T: Scalar> GroundInfo<T> {
    fn merge(self, other: Self, tol: T, cap: usize) -> Self {
        let (lo, hi) = if self.min <= other.min {
            (self, other)
        } else {
            (other, self)
        };
        if hi.min - lo.min > tol {
            return lo;
        }
        let degeneracy = lo.degeneracy + hi.degeneracy;
        let mut minimizers = Vec::new();
        let complete = |g: &Self| g.minimizers.len() as u64 == g.degeneracy;
        if degeneracy as usize <= cap && complete(&lo) && complete(&hi) {
            minimizers = lo.minimizers;
            minimizers.extend(hi.minimizers);
            minimizers.sort_unstable();
        }
        GroundInfo {
            min: lo.min,
            degeneracy,
            minimizers,
        }
    }
}

/// Exhaustive search over all `2^n` basis states using Gray-code single-flip
/// updates, partitioned over the high bits and reduced in parallel.
///
/// States within `tol` of the minimum count as degenerate (pass zero for
/// integer models).
pub fn ground_search<T: Scalar>(model: &DenseModel<T>, tol: T, keep: usize) -> Result<GroundInfo<T>> {
    let n = model.num_vars();
    if n > MAX_ENUMERATION_VARS {
        return Err(Error::domain(format!(
            "{n} variables exceed the enumeration cap of {MAX_ENUMERATION_VARS}"
        )));
    }
    let low = n.min(16);
    let high = n - low;
    let chunks: Vec<u64> = (0..1u64 << high).collect();
    let result = chunks
        .into_par_iter()
        .map(|c| scan_chunk(model, c << low, low, tol, keep))
        .reduce_with(|a, b| a.merge(b, tol, keep))
        .expect("at least one chunk");
    Ok(result)
}

fn scan_chunk<T: Scalar>(model: &DenseModel<T>, base: u64, low: usize, tol: T, keep: usize) -> GroundInfo<T> {
    let mut x = model.assignment_of_bits(base);
    let mut fields: Vec<T> = (0..model.num_vars()).map(|i| model.local_field(i, &x)).collect();
    let mut energy = model.energy(&x);
    let mut bits = base;
    let mut best = GroundInfo {
        min: energy,
        degeneracy: 1,
        minimizers: vec![bits],
    };
    for step in 1u64..1 << low {
        let k = step.trailing_zeros() as usize;
        let old = x[k];
        energy += model.flip_delta_with_field(k, old, fields[k]);
        let new = match model.domain {
            Domain::Binary => 1 - old,
            Domain::Spin => -old,
        };
        x[k] = new;
        bits ^= 1 << k;
        let dv = T::from_i8(new - old);
        for &(j, c) in &model.adj[k] {
            fields[j] += c * dv;
        }
        if best.min - energy > tol {
            best.min = energy;
            best.degeneracy = 1;
            best.minimizers.clear();
            best.minimizers.push(bits);
        } else if energy - best.min <= tol {
            best.degeneracy += 1;
            if best.minimizers.len() < keep {
                best.minimizers.push(bits);
            }
        }
    }
    if best.minimizers.len() as u64 != best.degeneracy {
        best.minimizers.clear();
    }
    best.minimizers.sort_unstable();
    best
}
