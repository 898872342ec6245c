//! Quadratic pseudo-Boolean and Ising models with exact rational
//! coefficients, and the builders for the Ramsey cost functions.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cost::{RamseyInstance, SubsetMasks};
use crate::error::{Error, Result};
use crate::graph::{edge_count, GraphBits};

pub type Coef = Rational64;

/// Largest `m` accepted by [`build_rm2_model`].
pub const MAX_RM2_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Variables take values in {0, 1}.
    Binary,
    /// Variables take values in {-1, +1}.
    Spin,
}

impl Domain {
    /// Value of a variable whose basis bit is `bit` (bit 1 is `a = 1`, `s = +1`).
    #[inline]
    pub fn value(self, bit: bool) -> i8 {
        match (self, bit) {
            (Domain::Binary, b) => b as i8,
            (Domain::Spin, true) => 1,
            (Domain::Spin, false) => -1,
        }
    }
}

/// What a model variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRole {
    /// Edge bit `a_{edge+1}` (0-based edge position).
    Computational {
        edge: usize,
    },
    /// Chain ancilla `b_index`.
    Ancilla {
        index: usize,
    },
    /// Hardware qubit (1-based Chimera id).
    Qubit {
        id: usize,
    },
    Free,
}

impl fmt::Display for VarRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRole::Computational { edge } => write!(f, "a{}", edge + 1),
            VarRole::Ancilla { index } => write!(f, "b{index}"),
            VarRole::Qubit { id } => write!(f, "q{id}"),
            VarRole::Free => write!(f, "x"),
        }
    }
}

impl std::str::FromStr for VarRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown variable role {s:?}"));
        if s == "x" {
            return Ok(VarRole::Free);
        }
        let (tag, num) = s.split_at(1.min(s.len()));
        let k: usize = num.parse().map_err(|_| bad())?;
        match tag {
            "a" if k >= 1 => Ok(VarRole::Computational { edge: k - 1 }),
            "b" => Ok(VarRole::Ancilla { index: k }),
            "q" => Ok(VarRole::Qubit { id: k }),
            _ => Err(bad()),
        }
    }
}

/// `E(x) = offset + Σ linear[i]·x_i + Σ quadratic[(i,j)]·x_i·x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    domain: Domain,
    linear: Vec<Coef>,
    quadratic: BTreeMap<(usize, usize), Coef>,
    offset: Coef,
    labels: Vec<VarRole>,
    /// Edge bits removed from the model with a fixed value.
    fixed: BTreeMap<usize, bool>,
    /// Product constraints `x_out = x_left · x_right` (in binary terms) that
    /// every feasible assignment satisfies.
    products: Vec<[usize; 3]>,
    graph_vertices: Option<usize>,
}

impl QuadraticModel {
    pub fn new(num_vars: usize, domain: Domain) -> Self {
        Self {
            domain,
            linear: vec![Coef::zero(); num_vars],
            quadratic: BTreeMap::new(),
            offset: Coef::zero(),
            labels: vec![VarRole::Free; num_vars],
            fixed: BTreeMap::new(),
            products: Vec::new(),
            graph_vertices: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn offset(&self) -> Coef {
        self.offset
    }

    pub fn linear(&self) -> &[Coef] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), Coef> {
        &self.quadratic
    }

    pub fn labels(&self) -> &[VarRole] {
        &self.labels
    }

    pub fn label(&self, var: usize) -> VarRole {
        self.labels[var]
    }

    pub fn set_label(&mut self, var: usize, role: VarRole) {
        self.labels[var] = role;
    }

    pub fn fixed(&self) -> &BTreeMap<usize, bool> {
        &self.fixed
    }

    pub fn products(&self) -> &[[usize; 3]] {
        &self.products
    }

    /// Vertex count of the graph whose edge bits the computational variables encode.
    pub fn graph_vertices(&self) -> Option<usize> {
        self.graph_vertices
    }

    pub fn set_graph_vertices(&mut self, n: Option<usize>) {
        self.graph_vertices = n;
    }

    pub fn add_offset(&mut self, c: Coef) {
        self.offset += c;
    }

    pub fn add_linear(&mut self, i: usize, c: Coef) {
        self.linear[i] += c;
    }

    /// Adds `c·x_i·x_j`. A diagonal term folds into the linear part (binary,
    /// `x² = x`) or the offset (spin, `s² = 1`).
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: Coef) {
        assert!(i < self.num_vars() && j < self.num_vars(), "variable out of range");
        if i == j {
            match self.domain {
                Domain::Binary => self.linear[i] += c,
                Domain::Spin => self.offset += c,
            }
            return;
        }
        let key = (i.min(j), i.max(j));
        let entry = self.quadratic.entry(key).or_insert_with(Coef::zero);
        *entry += c;
        if entry.is_zero() {
            self.quadratic.remove(&key);
        }
    }

    /// Adds `weight · other` with `other`'s variable `k` mapped to `map[k]`.
    pub fn add_scaled(&mut self, other: &QuadraticModel, map: &[usize], weight: Coef) -> Result<()> {
        if other.domain != self.domain {
            return Err(Error::domain("cannot add models over different domains"));
        }
        if map.len() != other.num_vars() {
            return Err(Error::domain("variable map length mismatch"));
        }
        self.offset += other.offset * weight;
        for (k, &c) in other.linear.iter().enumerate() {
            self.add_linear(map[k], c * weight);
        }
        for (&(i, j), &c) in &other.quadratic {
            self.add_quadratic(map[i], map[j], c * weight);
        }
        Ok(())
    }

    /// Couplings with a nonzero coefficient, i.e. the edges of the primal graph.
    pub fn primal_edges(&self) -> Vec<(usize, usize)> {
        self.quadratic
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vars()];
        for (i, j) in self.primal_edges() {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    fn check_assignment(&self, x: &[i8]) -> Result<()> {
        if x.len() != self.num_vars() {
            return Err(Error::domain(format!(
                "assignment has {} values, model has {} variables",
                x.len(),
                self.num_vars()
            )));
        }
        let ok = match self.domain {
            Domain::Binary => x.iter().all(|&v| v == 0 || v == 1),
            Domain::Spin => x.iter().all(|&v| v == 1 || v == -1),
        };
        if !ok {
            return Err(Error::domain(format!(
                "assignment values outside {:?} domain",
                self.domain
            )));
        }
        Ok(())
    }

    /// Exact energy of an assignment given in the model's own domain.
    pub fn energy(&self, x: &[i8]) -> Result<Coef> {
        self.check_assignment(x)?;
        let mut e = self.offset;
        for (c, &v) in self.linear.iter().zip(x) {
            e += c * Coef::from_integer(v as i64);
        }
        for (&(i, j), c) in &self.quadratic {
            e += c * Coef::from_integer((x[i] * x[j]) as i64);
        }
        Ok(e)
    }

    /// Energy of basis state `bits` (bit `i` is variable `i`), exact.
    pub fn energy_of_bits(&self, bits: u64) -> Coef {
        let x: Vec<i8> = (0..self.num_vars())
            .map(|i| self.domain.value(bits >> i & 1 == 1))
            .collect();
        self.energy(&x).expect("assignment built in-domain")
    }

    /// Binary `b = (x + 1)/2` view of a value in the model's domain.
    fn as_binary(&self, v: i8) -> u8 {
        match self.domain {
            Domain::Binary => v as u8,
            Domain::Spin => ((v + 1) / 2) as u8,
        }
    }

    /// True when every recorded product constraint holds.
    pub fn products_satisfied(&self, x: &[i8]) -> bool {
        self.products
            .iter()
            .all(|&[l, r, out]| self.as_binary(x[out]) == self.as_binary(x[l]) * self.as_binary(x[r]))
    }

    /// The graph encoded by the computational variables of `x`, with fixed
    /// bits filled in.
    pub fn graph_of(&self, x: &[i8]) -> Result<GraphBits> {
        let n = self
            .graph_vertices
            .ok_or_else(|| Error::domain("model does not encode a graph"))?;
        let mut g = GraphBits::empty(n)?;
        for (&edge, &value) in &self.fixed {
            g.set(edge, value);
        }
        for (var, role) in self.labels.iter().enumerate() {
            if let VarRole::Computational { edge } = *role {
                g.set(edge, self.as_binary(x[var]) == 1);
            }
        }
        Ok(g)
    }

    /// Substitutes `x_var = value` and removes the variable; remaining
    /// variables shift down by one.
    pub fn fix_variable(&self, var: usize, value: i8) -> Result<QuadraticModel> {
        if var >= self.num_vars() {
            return Err(Error::domain(format!("variable {var} out of range")));
        }
        self.check_value(value)?;
        let shift = |k: usize| if k > var { k - 1 } else { k };
        let v = Coef::from_integer(value as i64);
        let mut out = QuadraticModel::new(self.num_vars() - 1, self.domain);
        out.offset = self.offset + self.linear[var] * v;
        for (k, &c) in self.linear.iter().enumerate() {
            if k != var {
                out.linear[shift(k)] += c;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if i == var {
                out.linear[shift(j)] += c * v;
            } else if j == var {
                out.linear[shift(i)] += c * v;
            } else {
                out.add_quadratic(shift(i), shift(j), c);
            }
        }
        for (k, &role) in self.labels.iter().enumerate() {
            if k != var {
                out.labels[shift(k)] = role;
            }
        }
        out.fixed = self.fixed.clone();
        if let VarRole::Computational { edge } = self.labels[var] {
            out.fixed.insert(edge, self.as_binary(value) == 1);
        }
        if self.products.iter().any(|p| p.contains(&var)) {
            return Err(Error::domain(
                "cannot fix a variable that takes part in a product constraint",
            ));
        }
        out.products = self
            .products
            .iter()
            .map(|p| [shift(p[0]), shift(p[1]), shift(p[2])])
            .collect();
        out.graph_vertices = self.graph_vertices;
        Ok(out)
    }

    fn check_value(&self, value: i8) -> Result<()> {
        let ok = match self.domain {
            Domain::Binary => value == 0 || value == 1,
            Domain::Spin => value == 1 || value == -1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("value {value} outside {:?} domain", self.domain)))
        }
    }

    /// Largest |h| and |J|.
    pub fn coefficient_ranges(&self) -> (Coef, Coef) {
        let max_abs = |it: &mut dyn Iterator<Item = &Coef>| it.map(|c| c.abs()).max().unwrap_or_else(Coef::zero);
        (max_abs(&mut self.linear.iter()), max_abs(&mut self.quadratic.values()))
    }

    /// Multiplies every coefficient, including the offset, by `factor`.
    pub fn scaled(&self, factor: Coef) -> QuadraticModel {
        let mut out = self.clone();
        out.offset *= factor;
        out.linear.iter_mut().for_each(|c| *c *= factor);
        out.quadratic.values_mut().for_each(|c| *c *= factor);
        out
    }

    /// Least common multiple of all coefficient denominators.
    pub fn common_denominator(&self) -> i64 {
        let gcd = |mut a: i64, mut b: i64| {
            while b != 0 {
                (a, b) = (b, a % b);
            }
            a
        };
        std::iter::once(&self.offset)
            .chain(&self.linear)
            .chain(self.quadratic.values())
            .fold(1i64, |acc, c| acc / gcd(acc, *c.denom()) * c.denom())
    }
}

/// `P(a1, a2; b) = a1·a2 − 2(a1 + a2)·b + 3b`, zero iff `b = a1·a2`.
///
/// Returned as a binary model over `max(a1, a2, b) + 1` variables.
pub fn penalty_and(a1: usize, a2: usize, b: usize) -> Result<QuadraticModel> {
    if a1 == a2 || a1 == b || a2 == b {
        return Err(Error::domain(format!(
            "penalty variables must be distinct, got ({a1}, {a2}, {b})"
        )));
    }
    let mut p = QuadraticModel::new(a1.max(a2).max(b) + 1, Domain::Binary);
    p.add_quadratic(a1, a2, Coef::one());
    p.add_quadratic(a1, b, Coef::from_integer(-2));
    p.add_quadratic(a2, b, Coef::from_integer(-2));
    p.add_linear(b, Coef::from_integer(3));
    p.products.push([a1, a2, b]);
    Ok(p)
}

fn add_penalty(model: &mut QuadraticModel, a1: usize, a2: usize, b: usize, mu: Coef) -> Result<()> {
    let p = penalty_and(a1, a2, b)?;
    let map: Vec<usize> = (0..p.num_vars()).collect();
    model.add_scaled(&p, &map, mu)?;
    model.products.extend(p.products);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PenaltyConfig {
    pub mu: Coef,
}

impl PenaltyConfig {
    pub fn new(mu: Coef) -> Result<Self> {
        if mu < Coef::one() {
            return Err(Error::domain(format!("penalty weight {mu} below 1")));
        }
        Ok(Self { mu })
    }
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            mu: Coef::from_integer(2),
        }
    }
}

/// `I_2(a) = Σ (1 − a_i)` over the first `len` variables.
fn add_missing_edges(model: &mut QuadraticModel, len: usize) {
    for i in 0..len {
        model.add_offset(Coef::one());
        model.add_linear(i, -Coef::one());
        model.labels[i] = VarRole::Computational { edge: i };
    }
}

/// Variable holding ancilla `b_j` in [`build_rm2_model`] (`2 <= j <= L-1`).
pub fn rm2_ancilla_var(m: usize, j: usize) -> usize {
    edge_count(m) + j - 2
}

/// Quadratized `h^m_{m,2}(a, b) = a_1·b_2 + μ·P(a; b) + I_2(a)` for `N = m`.
///
/// Variables: `a_1..a_L` (edge order) then ancillas `b_2..b_{L-1}`, where
/// `P(a; b) = P(a_{L-1}, a_L; b_{L-1}) + Σ_{j=2}^{L-2} P(a_j, b_{j+1}; b_j)`.
pub fn build_rm2_model(m: usize, cfg: &PenaltyConfig) -> Result<QuadraticModel> {
    if !(3..=MAX_RM2_ORDER).contains(&m) {
        return Err(Error::domain(format!("m={m} outside 3..={MAX_RM2_ORDER}")));
    }
    let len = edge_count(m);
    let a = |i: usize| i - 1;
    let b = |j: usize| rm2_ancilla_var(m, j);
    let mut model = QuadraticModel::new(2 * len - 2, Domain::Binary);
    add_missing_edges(&mut model, len);
    for j in 2..len {
        model.labels[b(j)] = VarRole::Ancilla { index: j };
    }
    model.add_quadratic(a(1), b(2), Coef::one());
    add_penalty(&mut model, a(len - 1), a(len), b(len - 1), cfg.mu)?;
    for j in 2..=len - 2 {
        add_penalty(&mut model, a(j), b(j + 1), b(j), cfg.mu)?;
    }
    model.graph_vertices = Some(m);
    Ok(model)
}

/// Ancilla values satisfying the chain constraints for computational bits `a`.
pub fn rm2_consistent_ancillas(a: &[u8]) -> Vec<u8> {
    let len = a.len();
    let mut b = vec![0u8; len.saturating_sub(2)];
    if len < 3 {
        return b;
    }
    // b_j lives at b[j - 2]
    b[len - 3] = a[len - 2] & a[len - 1];
    for j in (2..=len - 2).rev() {
        b[j - 2] = a[j - 1] & b[j - 1];
    }
    b
}

/// `h^N_{m,2}(a) = Σ (1 − a_i)` for `N < m`: uncoupled variables.
pub fn build_rm2_subcritical_model(m: usize, n: usize) -> Result<QuadraticModel> {
    if n < 2 || n >= m {
        return Err(Error::domain(format!(
            "subcritical model needs 2 <= N < m, got N={n}, m={m}"
        )));
    }
    let len = edge_count(n);
    let mut model = QuadraticModel::new(len, Domain::Binary);
    add_missing_edges(&mut model, len);
    model.graph_vertices = Some(n);
    Ok(model)
}

/// Vertex-triangle edge triples `(i, j, k)` (0-based edge positions, ascending).
pub fn triangle_edges(n: usize) -> Result<Vec<[usize; 3]>> {
    let masks = SubsetMasks::new(n, 3)?;
    Ok(masks
        .masks()
        .iter()
        .map(|m| {
            let mut out = [0usize; 3];
            let mut k = 0;
            for (w, &word) in m.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    out[k] = w * 64 + bits.trailing_zeros() as usize;
                    k += 1;
                    bits &= bits - 1;
                }
            }
            out
        })
        .collect())
}

/// `f_{ijk} = a_i a_j a_k + ā_i ā_j ā_k` in pairwise form
/// `−2 + ā_i + ā_j + ā_k + a_i a_j + a_i a_k + a_j a_k`.
fn add_triangle(model: &mut QuadraticModel, [i, j, k]: [usize; 3]) {
    model.add_offset(Coef::from_integer(-2));
    for v in [i, j, k] {
        model.add_offset(Coef::one());
        model.add_linear(v, -Coef::one());
    }
    for (u, w) in [(i, j), (i, k), (j, k)] {
        model.add_quadratic(u, w, Coef::one());
    }
}

/// `h^N_{3,3}(a) = Σ_triangles f_{ijk}` for `N ∈ {4, 5, 6}`. With
/// `fix_first`, `a_1 = 0` is substituted and the variable removed.
pub fn build_r33_model(n: usize, fix_first: bool) -> Result<QuadraticModel> {
    if !(4..=6).contains(&n) {
        return Err(Error::domain(format!("R(3,3) model supports N in 4..=6, got {n}")));
    }
    let len = edge_count(n);
    let mut model = QuadraticModel::new(len, Domain::Binary);
    for i in 0..len {
        model.labels[i] = VarRole::Computational { edge: i };
    }
    for t in triangle_edges(n)? {
        add_triangle(&mut model, t);
    }
    model.graph_vertices = Some(n);
    if fix_first {
        model.fix_variable(0, 0)
    } else {
        Ok(model)
    }
}

/// Pointwise check of the pairwise rewrite of `f_{ijk}` on all 8 assignments.
pub fn f_ijk_identity_check() -> bool {
    let mut pairwise = QuadraticModel::new(3, Domain::Binary);
    add_triangle(&mut pairwise, [0, 1, 2]);
    (0u64..8).all(|bits| {
        let a: Vec<i64> = (0..3).map(|k| (bits >> k & 1) as i64).collect();
        let cubic = a[0] * a[1] * a[2] + (1 - a[0]) * (1 - a[1]) * (1 - a[2]);
        pairwise.energy_of_bits(bits) == Coef::from_integer(cubic)
    })
}

/// Model for any supported Ramsey instance:
/// `(m, 2)` with `N < m` (linear) or `N = m <= 8` (quadratized), and
/// `(3, 3)` with `N ∈ {4, 5, 6}`.
pub fn build_ramsey_model(inst: &RamseyInstance, cfg: &PenaltyConfig, fix_first: bool) -> Result<QuadraticModel> {
    let (n, m, k) = (inst.n_vertices, inst.clique_order, inst.independent_order);
    match (m, k) {
        (m, 2) if n < m => build_rm2_subcritical_model(m, n),
        (m, 2) if n == m && m <= MAX_RM2_ORDER => build_rm2_model(m, cfg),
        (3, 3) if (4..=6).contains(&n) => build_r33_model(n, fix_first),
        _ => Err(Error::domain(format!(
            "unsupported instance (m={m}, n={k}, N={n}); supported: (m,2) with N<m or N=m<={MAX_RM2_ORDER}, (3,3) with N in 4..=6"
        ))),
    }
}

/// Substitutes `x = (s + 1)/2`; energies agree on corresponding assignments.
pub fn to_spin(model: &QuadraticModel) -> Result<QuadraticModel> {
    if model.domain != Domain::Binary {
        return Err(Error::domain("model is already in the spin domain"));
    }
    let half = Coef::new(1, 2);
    let quarter = Coef::new(1, 4);
    let mut out = QuadraticModel::new(model.num_vars(), Domain::Spin);
    out.offset = model.offset;
    for (i, &c) in model.linear.iter().enumerate() {
        out.offset += c * half;
        out.linear[i] += c * half;
    }
    for (&(i, j), &c) in &model.quadratic {
        out.offset += c * quarter;
        out.linear[i] += c * quarter;
        out.linear[j] += c * quarter;
        out.add_quadratic(i, j, c * quarter);
    }
    out.labels = model.labels.clone();
    out.fixed = model.fixed.clone();
    out.products = model.products.clone();
    out.graph_vertices = model.graph_vertices;
    Ok(out)
}

/// Scales a spin model uniformly so that `|h| <= 2` and `|J| <= 1`.
/// Returns the scaled model and the factor applied (never above 1).
pub fn normalize_ranges(model: &QuadraticModel) -> Result<(QuadraticModel, Coef)> {
    if model.domain != Domain::Spin {
        return Err(Error::domain("range normalization applies to spin models"));
    }
    let (max_h, max_j) = model.coefficient_ranges();
    let mut scale = Coef::one();
    if max_j > Coef::one() {
        scale = scale.min(max_j.recip());
    }
    if max_h > Coef::from_integer(2) {
        scale = scale.min(Coef::from_integer(2) / max_h);
    }
    Ok((model.scaled(scale), scale))
}

// ---------------------------------------------------------------------------
// JSON model file

fn coef_to_json(c: &Coef) -> Value {
    let d = *c.denom();
    if d & (d - 1) == 0 {
        // dyadic: exact as an f64
        serde_json::Number::from_f64(*c.numer() as f64 / d as f64)
            .map(Value::Number)
            .unwrap_or_else(|| Value::String(c.to_string()))
    } else {
        Value::String(c.to_string())
    }
}

pub(crate) fn coef_from_json(v: &Value) -> Result<Coef> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(Coef::from_integer(i));
            }
            let f = n.as_f64().ok_or_else(|| Error::Parse(format!("bad coefficient {n}")))?;
            coef_from_f64(f)
        }
        Value::String(s) => s
            .trim()
            .parse::<Coef>()
            .map_err(|e| Error::Parse(format!("bad coefficient {s:?}: {e}"))),
        other => Err(Error::Parse(format!("bad coefficient {other}"))),
    }
}

/// Exact conversion for dyadic values with at most 30 fractional bits.
pub fn coef_from_f64(f: f64) -> Result<Coef> {
    let mut denom = 1i64;
    for _ in 0..=30 {
        let scaled = f * denom as f64;
        if scaled.fract() == 0.0 && scaled.abs() < 9.0e15 {
            return Ok(Coef::new(scaled as i64, denom));
        }
        denom *= 2;
    }
    Err(Error::Parse(format!("coefficient {f} is not an exact dyadic value")))
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    num_vars: usize,
    domain: Domain,
    offset: Value,
    linear: Map<String, Value>,
    quadratic: Map<String, Value>,
    labels: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    fixed: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    products: Vec<[usize; 3]>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    graph_vertices: Option<usize>,
}

impl QuadraticModel {
    /// `{num_vars, domain, offset, linear:{var:coef}, quadratic:{"i,j":coef}, labels:{var:role}}`
    /// plus optional `fixed`, `products` and `N`.
    pub fn to_json(&self) -> Value {
        let file = ModelFile {
            num_vars: self.num_vars(),
            domain: self.domain,
            offset: coef_to_json(&self.offset),
            linear: self
                .linear
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i.to_string(), coef_to_json(c)))
                .collect(),
            quadratic: self
                .quadratic
                .iter()
                .map(|(&(i, j), c)| (format!("{i},{j}"), coef_to_json(c)))
                .collect(),
            labels: self
                .labels
                .iter()
                .enumerate()
                .map(|(i, r)| (i.to_string(), Value::String(r.to_string())))
                .collect(),
            fixed: self
                .fixed
                .iter()
                .map(|(&e, &v)| (VarRole::Computational { edge: e }.to_string(), Value::from(v as u8)))
                .collect(),
            products: self.products.clone(),
            graph_vertices: self.graph_vertices,
        };
        serde_json::to_value(file).expect("model file serializes")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let file: ModelFile = serde_json::from_value(v.clone())?;
        let mut model = QuadraticModel::new(file.num_vars, file.domain);
        let var = |s: &str| -> Result<usize> {
            let i: usize = s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad variable id {s:?}")))?;
            if i >= file.num_vars {
                return Err(Error::Parse(format!("variable {i} out of range")));
            }
            Ok(i)
        };
        model.offset = coef_from_json(&file.offset)?;
        for (k, c) in &file.linear {
            model.linear[var(k)?] += coef_from_json(c)?;
        }
        for (k, c) in &file.quadratic {
            let (i, j) = k
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad coupling key {k:?}")))?;
            let (i, j) = (var(i)?, var(j)?);
            if i == j {
                return Err(Error::Parse(format!("self-coupling {k:?}")));
            }
            model.add_quadratic(i, j, coef_from_json(c)?);
        }
        for (k, r) in &file.labels {
            let role = r
                .as_str()
                .ok_or_else(|| Error::Parse(format!("label for {k} is not a string")))?;
            model.labels[var(k)?] = role.parse()?;
        }
        for (k, v) in &file.fixed {
            let VarRole::Computational { edge } = k.parse()? else {
                return Err(Error::Parse(format!("fixed entry {k:?} is not an edge variable")));
            };
            model.fixed.insert(edge, v.as_u64() == Some(1));
        }
        if file.products.iter().flatten().any(|&k| k >= file.num_vars) {
            return Err(Error::Parse("product constraint references unknown variable".into()));
        }
        model.products = file.products;
        model.graph_vertices = file.graph_vertices;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::ramsey_energy;
    use crate::graph::GraphBits;

    fn bits_of(x: u64, len: usize) -> Vec<u8> {
        (0..len).map(|i| (x >> i & 1) as u8).collect()
    }

    fn to_i8(v: &[u8]) -> Vec<i8> {
        v.iter().map(|&b| b as i8).collect()
    }

    #[test]
    fn penalty_truth_table() {
        let p = penalty_and(0, 1, 2).unwrap();
        assert_eq!(p.energy(&[1, 1, 1]).unwrap(), Coef::zero());
        assert_eq!(p.energy(&[0, 0, 1]).unwrap(), Coef::from_integer(3));
        for x in 0u64..8 {
            let (a1, a2, b) = (x & 1, x >> 1 & 1, x >> 2 & 1);
            let e = p.energy_of_bits(x);
            if b == a1 * a2 {
                assert_eq!(e, Coef::zero());
            } else {
                assert!(e == Coef::one() || e == Coef::from_integer(3), "row {x}: {e}");
            }
        }
        assert!(penalty_and(0, 0, 1).is_err());
        assert!(penalty_and(0, 1, 1).is_err());
    }

    #[test]
    fn rm2_variable_counts() {
        let m8 = build_rm2_model(8, &PenaltyConfig::default()).unwrap();
        assert_eq!(m8.num_vars(), 54);
        let comp = m8
            .labels()
            .iter()
            .filter(|r| matches!(r, VarRole::Computational { .. }))
            .count();
        assert_eq!(comp, 28);
        assert!(build_rm2_model(2, &PenaltyConfig::default()).is_err());
        assert!(build_rm2_model(9, &PenaltyConfig::default()).is_err());
    }

    #[test]
    fn rm2_all_ones_energy() {
        let model = build_rm2_model(4, &PenaltyConfig::default()).unwrap();
        let a = vec![1u8; 6];
        let mut x = a.clone();
        x.extend(rm2_consistent_ancillas(&a));
        assert_eq!(model.energy(&to_i8(&x)).unwrap(), Coef::one());
        assert!(model.products_satisfied(&to_i8(&x)));
    }

    #[test]
    fn rm2_min_over_ancillas_matches_cost() {
        for mu in [Coef::one(), Coef::from_integer(2)] {
            let cfg = PenaltyConfig::new(mu).unwrap();
            let model = build_rm2_model(4, &cfg).unwrap();
            let inst = RamseyInstance::new(4, 4, 2).unwrap();
            for av in 0u64..64 {
                let a = bits_of(av, 6);
                let target = ramsey_energy(&GraphBits::from_bits(4, &a).unwrap(), &inst).unwrap();
                let consistent = rm2_consistent_ancillas(&a);
                let mut x_c = a.clone();
                x_c.extend(&consistent);
                let e_c = model.energy(&to_i8(&x_c)).unwrap();
                assert_eq!(e_c, Coef::from_integer(target as i64));
                let mut best = None::<Coef>;
                for bv in 0u64..16 {
                    let mut x = a.clone();
                    x.extend(bits_of(bv, 4));
                    let e = model.energy(&to_i8(&x)).unwrap();
                    assert!(e >= e_c);
                    // with μ = 1 a violated penalty can tie with the a_1·b_2 saving
                    if e == e_c && mu > Coef::one() {
                        assert!(model.products_satisfied(&to_i8(&x)));
                    }
                    best = Some(best.map_or(e, |b: Coef| b.min(e)));
                }
                assert_eq!(best.unwrap(), Coef::from_integer(target as i64));
            }
        }
        assert!(PenaltyConfig::new(Coef::new(1, 2)).is_err());
    }

    #[test]
    fn subcritical_examples() {
        let m = build_rm2_subcritical_model(8, 7).unwrap();
        assert_eq!(m.num_vars(), 21);
        assert!(m.quadratic().is_empty());
        let mut zeros = 0;
        for x in [0u64, (1 << 21) - 1] {
            if m.energy_of_bits(x).is_zero() {
                zeros += 1;
            }
        }
        assert_eq!(zeros, 1);
        assert_eq!(m.energy_of_bits((1 << 21) - 1), Coef::zero());
        let m = build_rm2_subcritical_model(5, 4).unwrap();
        assert_eq!(m.energy_of_bits(0), Coef::from_integer(6));
        let m = build_rm2_subcritical_model(4, 3).unwrap();
        let zero_count = (0u64..8).filter(|&x| m.energy_of_bits(x).is_zero()).count();
        assert_eq!(zero_count, 1);
        assert!(build_rm2_subcritical_model(4, 4).is_err());
        assert!(build_rm2_subcritical_model(4, 1).is_err());
    }

    #[test]
    fn triangle_lists_match_published_cost_functions() {
        let one_based = |n| -> Vec<[usize; 3]> {
            let mut t: Vec<[usize; 3]> = triangle_edges(n)
                .unwrap()
                .into_iter()
                .map(|[i, j, k]| [i + 1, j + 1, k + 1])
                .collect();
            t.sort();
            t
        };
        assert_eq!(one_based(4), vec![[1, 2, 4], [1, 3, 5], [2, 3, 6], [4, 5, 6]]);
        assert_eq!(
            one_based(5),
            vec![
                [1, 2, 5],
                [1, 3, 6],
                [1, 4, 7],
                [2, 3, 8],
                [2, 4, 9],
                [3, 4, 10],
                [5, 6, 8],
                [5, 7, 9],
                [6, 7, 10],
                [8, 9, 10]
            ]
        );
        assert_eq!(
            one_based(6),
            vec![
                [1, 2, 6],
                [1, 3, 7],
                [1, 4, 8],
                [1, 5, 9],
                [2, 3, 10],
                [2, 4, 11],
                [2, 5, 12],
                [3, 4, 13],
                [3, 5, 14],
                [4, 5, 15],
                [6, 7, 10],
                [6, 8, 11],
                [6, 9, 12],
                [7, 8, 13],
                [7, 9, 14],
                [8, 9, 15],
                [10, 11, 13],
                [10, 12, 14],
                [11, 12, 15],
                [13, 14, 15]
            ]
        );
    }

    #[test]
    fn r33_primal_graph_sizes() {
        let full = build_r33_model(6, false).unwrap();
        assert_eq!(full.num_vars(), 15);
        assert_eq!(full.primal_edges().len(), 60);
        let fixed = build_r33_model(6, true).unwrap();
        assert_eq!(fixed.num_vars(), 14);
        assert_eq!(fixed.primal_edges().len(), 52);
        assert_eq!(fixed.fixed().get(&0), Some(&false));
        assert!(build_r33_model(3, false).is_err());
        assert!(build_r33_model(7, false).is_err());
    }

    #[test]
    fn r33_energy_matches_cost_for_n4() {
        let model = build_r33_model(4, false).unwrap();
        let inst = RamseyInstance::new(4, 3, 3).unwrap();
        for x in 0u64..64 {
            let g = GraphBits::from_word(4, x).unwrap();
            let e = ramsey_energy(&g, &inst).unwrap();
            assert_eq!(model.energy_of_bits(x), Coef::from_integer(e as i64));
        }
    }

    #[test]
    fn fixed_model_recovers_graph() {
        let fixed = build_r33_model(5, true).unwrap();
        let inst = RamseyInstance::new(5, 3, 3).unwrap();
        for x in 0u64..(1 << 9) {
            let assign: Vec<i8> = (0..9).map(|i| (x >> i & 1) as i8).collect();
            let g = fixed.graph_of(&assign).unwrap();
            assert!(!g.get(0));
            let e = ramsey_energy(&g, &inst).unwrap();
            assert_eq!(fixed.energy(&assign).unwrap(), Coef::from_integer(e as i64));
        }
    }

    #[test]
    fn f_ijk_rewrite_holds() {
        assert!(f_ijk_identity_check());
    }

    #[test]
    fn to_spin_single_var() {
        let mut m = QuadraticModel::new(1, Domain::Binary);
        m.add_linear(0, Coef::one());
        let s = to_spin(&m).unwrap();
        assert_eq!(s.offset(), Coef::new(1, 2));
        assert_eq!(s.linear()[0], Coef::new(1, 2));
        assert!(to_spin(&s).is_err());
    }

    #[test]
    fn to_spin_penalty_zero_rows() {
        let s = to_spin(&penalty_and(0, 1, 2).unwrap()).unwrap();
        for x in 0u64..8 {
            let (a1, a2, b) = (x & 1, x >> 1 & 1, x >> 2 & 1);
            assert_eq!(s.energy_of_bits(x).is_zero(), b == a1 * a2);
        }
    }

    #[test]
    fn to_spin_r33_n4_agrees() {
        let b = build_r33_model(4, false).unwrap();
        let s = to_spin(&b).unwrap();
        for x in 0u64..64 {
            assert_eq!(s.energy_of_bits(x), b.energy_of_bits(x));
        }
    }

    #[test]
    fn normalize_examples() {
        let mut m = QuadraticModel::new(2, Domain::Spin);
        m.add_quadratic(0, 1, Coef::from_integer(2));
        let (n, scale) = normalize_ranges(&m).unwrap();
        assert_eq!(scale, Coef::new(1, 2));
        assert_eq!(n.quadratic()[&(0, 1)], Coef::one());

        let mut m = QuadraticModel::new(2, Domain::Spin);
        m.add_quadratic(0, 1, Coef::new(-1, 2));
        m.add_linear(0, Coef::from_integer(2));
        let (n, scale) = normalize_ranges(&m).unwrap();
        assert_eq!(scale, Coef::one());
        assert_eq!(n, m);

        let zero = QuadraticModel::new(3, Domain::Spin);
        assert_eq!(normalize_ranges(&zero).unwrap().1, Coef::one());
        assert!(normalize_ranges(&QuadraticModel::new(1, Domain::Binary)).is_err());
    }

    #[test]
    fn fix_variable_substitutes() {
        let m = build_r33_model(4, false).unwrap();
        let f = m.fix_variable(2, 1).unwrap();
        assert_eq!(f.num_vars(), 5);
        for x in 0u64..32 {
            let lo = x & 0b11;
            let hi = x >> 2;
            let full = lo | 1 << 2 | hi << 3;
            assert_eq!(f.energy_of_bits(x), m.energy_of_bits(full));
        }
        assert!(m.fix_variable(9, 0).is_err());
        assert!(m.fix_variable(0, 2).is_err());
    }

    #[test]
    fn json_roundtrip() {
        for model in [
            build_rm2_model(5, &PenaltyConfig::default()).unwrap(),
            to_spin(&build_r33_model(6, true).unwrap()).unwrap(),
            to_spin(&build_rm2_model(4, &PenaltyConfig::default()).unwrap())
                .unwrap()
                .scaled(Coef::new(1, 3)),
        ] {
            let text = serde_json::to_string(&model.to_json()).unwrap();
            let back = QuadraticModel::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back, model);
        }
    }

    #[test]
    fn json_rejects_malformed() {
        let v = serde_json::json!({
            "num_vars": 2, "domain": "spin", "offset": 0,
            "linear": {"5": 1}, "quadratic": {}, "labels": {}
        });
        assert!(QuadraticModel::from_json(&v).is_err());
        let v = serde_json::json!({
            "num_vars": 2, "domain": "spin", "offset": 0,
            "linear": {}, "quadratic": {"1,1": 1}, "labels": {}
        });
        assert!(QuadraticModel::from_json(&v).is_err());
        assert!(coef_from_f64(0.1).is_err());
        assert_eq!(coef_from_f64(-0.75).unwrap(), Coef::new(-3, 4));
    }

    #[test]
    fn dispatch() {
        let cfg = PenaltyConfig::default();
        let n = |n, m, k| RamseyInstance::new(n, m, k).unwrap();
        assert_eq!(build_ramsey_model(&n(8, 8, 2), &cfg, false).unwrap().num_vars(), 54);
        assert_eq!(build_ramsey_model(&n(7, 8, 2), &cfg, false).unwrap().num_vars(), 21);
        assert_eq!(build_ramsey_model(&n(6, 3, 3), &cfg, true).unwrap().num_vars(), 14);
        assert!(build_ramsey_model(&n(9, 8, 2), &cfg, false).is_err());
        assert!(build_ramsey_model(&n(5, 4, 4), &cfg, false).is_err());
    }
}
