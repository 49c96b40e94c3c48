//! Laguerre expansions on the orthant and Hermite expansions on `ℝ^d`.
//!
//! Coefficients are computed by full tensor-product Gauss quadrature and
//! stored densely up to per-axis degree caps. Multi-dimensional projections
//! and reconstructions are done one axis at a time (sum factorization), so a
//! `d`-dimensional transform with `m` nodes per axis costs `O(d·m^{d+1})`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::{hermite_fn_table, laguerre_fn_table};
use crate::error::{Error, Result};
use crate::multiindex::{BoxShape, MultiIndex};
use crate::numeric::pairwise_sum;
use crate::quadrature::{gauss_hermite_rule, gauss_laguerre_rule, QuadratureKind, QuadratureRule};

/// Relative size below which quadrature-computed coefficients are noise.
pub const QUADRATURE_NOISE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTag {
    Laguerre,
    Hermite,
}

impl BasisTag {
    fn table(self, nmax: usize, x: f64) -> Vec<f64> {
        match self {
            BasisTag::Laguerre => laguerre_fn_table(nmax, x),
            BasisTag::Hermite => hermite_fn_table(nmax, x),
        }
    }

    fn rule(self, m: usize) -> Result<QuadratureRule> {
        match self {
            BasisTag::Laguerre => gauss_laguerre_rule(m),
            BasisTag::Hermite => gauss_hermite_rule(m),
        }
    }

    fn quadrature_kind(self) -> QuadratureKind {
        match self {
            BasisTag::Laguerre => QuadratureKind::Laguerre,
            BasisTag::Hermite => QuadratureKind::Hermite,
        }
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisTag::Laguerre => "laguerre",
            BasisTag::Hermite => "hermite",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
    #[serde(default)]
    pub source: String,
    /// Magnitude at or below which entries are indistinguishable from zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_floor: Option<f64>,
}

/// Dense coefficients `c_n`, `n ≤ caps` componentwise, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientArray {
    basis: BasisTag,
    shape: BoxShape,
    values: Vec<f64>,
    meta: Meta,
}

#[derive(Serialize, Deserialize)]
struct CoefficientFile {
    basis: BasisTag,
    dimension: usize,
    caps: Vec<usize>,
    values: Vec<f64>,
    meta: Meta,
}

impl CoefficientArray {
    pub fn new(basis: BasisTag, caps: &[usize], values: Vec<f64>) -> Result<Self> {
        if caps.is_empty() {
            return Err(Error::invalid("coefficient array needs at least one axis"));
        }
        let shape = BoxShape::new(caps);
        if values.len() != shape.len() {
            return Err(Error::invalid(format!(
                "caps {caps:?} need {} values, got {}",
                shape.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "coefficient at {} is not finite",
                shape.index(i)
            )));
        }
        Ok(CoefficientArray {
            basis,
            shape,
            values,
            meta: Meta::default(),
        })
    }

    pub fn zeros(basis: BasisTag, caps: &[usize]) -> Self {
        let shape = BoxShape::new(caps);
        let values = vec![0.0; shape.len()];
        CoefficientArray {
            basis,
            shape,
            values,
            meta: Meta::default(),
        }
    }

    pub fn from_fn(
        basis: BasisTag,
        caps: &[usize],
        f: impl Fn(&MultiIndex) -> f64,
    ) -> Result<Self> {
        let shape = BoxShape::new(caps);
        let values = shape.iter().map(|n| f(&n)).collect();
        CoefficientArray::new(basis, caps, values)
    }

    /// Unit coefficient at `n`, zero elsewhere.
    pub fn delta(basis: BasisTag, caps: &[usize], n: &MultiIndex) -> Result<Self> {
        let mut c = CoefficientArray::zeros(basis, caps);
        let i = c
            .shape
            .flat(n)
            .ok_or_else(|| Error::invalid(format!("index {n} outside caps {caps:?}")))?;
        c.values[i] = 1.0;
        Ok(c)
    }

    pub fn with_meta(mut self, meta: Meta) -> Self {
        self.meta = meta;
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.meta.source = source.into();
        self
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn dimension(&self) -> usize {
        self.shape.dim()
    }

    pub fn caps(&self) -> &[usize] {
        self.shape.caps()
    }

    pub fn shape(&self) -> &BoxShape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coefficient at `n`; zero outside the stored box.
    pub fn get(&self, n: &MultiIndex) -> f64 {
        self.shape.flat(n).map_or(0.0, |i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        self.shape.iter().zip(self.values.iter().copied())
    }

    /// New array with the same basis and caps and transformed entries.
    pub fn map_indexed(&self, f: impl Fn(&MultiIndex, f64) -> f64) -> Result<Self> {
        let values = self.iter().map(|(n, v)| f(&n, v)).collect();
        let mut out = CoefficientArray::new(self.basis, self.caps(), values)?;
        out.meta = self.meta.clone();
        Ok(out)
    }

    /// Entries with magnitude at or below the recorded noise floor set to zero.
    pub fn denoised(&self) -> Vec<f64> {
        let floor = self.meta.noise_floor.unwrap_or(0.0);
        self.values
            .iter()
            .map(|&v| if v.abs() <= floor { 0.0 } else { v })
            .collect()
    }

    pub fn l2_norm(&self) -> f64 {
        pairwise_sum(&self.values.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// First entry with an odd component whose magnitude exceeds `tol`.
    pub fn first_odd_violation(&self, tol: f64) -> Option<(MultiIndex, f64)> {
        self.iter()
            .find(|(n, v)| n.has_odd_entry() && v.abs() > tol)
    }

    /// True when every entry with an odd component is at most `tol`.
    pub fn is_even(&self, tol: f64) -> bool {
        self.first_odd_violation(tol).is_none()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CoefficientFile {
            basis: self.basis,
            dimension: self.dimension(),
            caps: self.caps().to_vec(),
            values: self.values.clone(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CoefficientFile = serde_json::from_str(text)?;
        if file.dimension != file.caps.len() {
            return Err(Error::invalid(format!(
                "dimension {} does not match {} caps",
                file.dimension,
                file.caps.len()
            )));
        }
        Ok(CoefficientArray::new(file.basis, &file.caps, file.values)?.with_meta(file.meta))
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        CoefficientArray::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Monotone piecewise-cubic interpolant of 1d samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::invalid("samples need at least two (x, y) pairs"));
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("samples must be finite"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sample grid must be strictly increasing"));
        }
        let slopes = pchip_slopes(&grid, &values);
        Ok(SampledFunction {
            grid,
            values,
            slopes,
        })
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().expect("non-empty grid"))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.hull();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfHull { x, lo, hi });
        }
        let k = match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&x).expect("finite grid"))
        {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i - 1,
        };
        let h = self.grid[k + 1] - self.grid[k];
        let t = (x - self.grid[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.values[k]
            + h10 * h * self.slopes[k]
            + h01 * self.values[k + 1]
            + h11 * h * self.slopes[k + 1])
    }

    /// Read `x,y` lines; blank lines and lines starting with `#` are skipped,
    /// as is a non-numeric header line.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split([',', ' ', '\t']).filter(|s| !s.is_empty());
            let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
                return Err(Error::Parse(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    grid.push(x);
                    values.push(y);
                }
                _ if grid.is_empty() => continue,
                _ => return Err(Error::Parse(format!("line {}: not numeric", lineno + 1))),
            }
        }
        SampledFunction::new(grid, values)
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    m[0] = end(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substitution {
    /// `x ↦ (x_1², …, x_d²)`, from `ℝ^d` onto the orthant.
    Square,
    /// `x ↦ (√x_1, …, √x_d)`, defined on the closed orthant.
    Sqrt,
}

/// A function that can be expanded or evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionHandle {
    /// Tensor-product Laguerre function `l_n`.
    Laguerre(MultiIndex),
    /// Tensor-product Hermite function `h_n`.
    Hermite(MultiIndex),
    /// `scale · ∏ x_j^{k_j} · exp(-rate Σ x_j - gauss_rate Σ x_j²)`.
    PowerExp {
        scale: f64,
        powers: Vec<u32>,
        rate: f64,
        gauss_rate: f64,
    },
    /// `e^{-x/2} p(x)` in one dimension, `p` given by ascending coefficients.
    DampedPoly(Vec<f64>),
    /// Finite combination `Σ c_n basis_n`.
    Combination(CoefficientArray),
    Samples(SampledFunction),
    Composed {
        inner: Box<FunctionHandle>,
        map: Substitution,
    },
}

impl FunctionHandle {
    /// Number of variables, when the handle fixes it.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            FunctionHandle::Laguerre(n) | FunctionHandle::Hermite(n) => Some(n.dim()),
            FunctionHandle::PowerExp { powers, .. } => Some(powers.len()),
            FunctionHandle::DampedPoly(_) | FunctionHandle::Samples(_) => Some(1),
            FunctionHandle::Combination(c) => Some(c.dimension()),
            FunctionHandle::Composed { inner, .. } => inner.dimension(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dimension() {
            if d != x.len() {
                return Err(Error::invalid(format!(
                    "function of {d} variables evaluated at a point of dimension {}",
                    x.len()
                )));
            }
        }
        match self {
            FunctionHandle::Laguerre(n) => crate::basis::laguerre_fn(n, x),
            FunctionHandle::Hermite(n) => crate::basis::hermite_fn(n, x),
            FunctionHandle::PowerExp {
                scale,
                powers,
                rate,
                gauss_rate,
            } => {
                let mut v = *scale;
                let mut expo = 0.0;
                for (&k, &xj) in powers.iter().zip(x) {
                    v *= xj.powi(k as i32);
                    expo += rate * xj + gauss_rate * xj * xj;
                }
                Ok(v * (-expo).exp())
            }
            FunctionHandle::DampedPoly(coeffs) => {
                let t = x[0];
                let p = coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
                Ok(p * (-0.5 * t).exp())
            }
            FunctionHandle::Combination(c) => reconstruct(c, x),
            FunctionHandle::Samples(s) => s.eval(x[0]),
            FunctionHandle::Composed { inner, map } => {
                let y: Vec<f64> = match map {
                    Substitution::Square => x.iter().map(|v| v * v).collect(),
                    Substitution::Sqrt => {
                        if let Some(bad) = x.iter().find(|&&v| v < 0.0) {
                            return Err(Error::Domain(format!(
                                "square-root substitution at negative coordinate {bad}"
                            )));
                        }
                        x.iter().map(|v| v.sqrt()).collect()
                    }
                };
                inner.eval(&y)
            }
        }
    }

    /// Parse a catalog spec:
    ///
    /// * `l:3`, `l:1,2` Laguerre function; `h:4` Hermite function
    /// * `lin:c0,c1,…` finite combination in `basis`
    /// * `poly:c0,c1,…` for `e^{-x/2}(c0 + c1 x + …)`
    /// * `samples:<path>` two-column CSV
    /// * expressions such as `x*exp(-x/2)`, `2*x^3*exp(-1.5*x)`, `exp(-x^2/2)`
    pub fn parse(spec: &str, basis: BasisTag) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("l:") {
            return Ok(FunctionHandle::Laguerre(parse_index(rest)?));
        }
        if let Some(rest) = spec.strip_prefix("h:") {
            return Ok(FunctionHandle::Hermite(parse_index(rest)?));
        }
        if let Some(rest) = spec.strip_prefix("lin:") {
            let coeffs = parse_list(rest)?;
            if coeffs.is_empty() {
                return Err(Error::Parse("lin: needs at least one coefficient".into()));
            }
            let caps = [coeffs.len() - 1];
            let c = CoefficientArray::new(basis, &caps, coeffs)?.with_source(spec);
            return Ok(FunctionHandle::Combination(c));
        }
        if let Some(rest) = spec.strip_prefix("poly:") {
            return Ok(FunctionHandle::DampedPoly(parse_list(rest)?));
        }
        if let Some(path) = spec.strip_prefix("samples:") {
            return Ok(FunctionHandle::Samples(SampledFunction::read_csv(path)?));
        }
        parse_expression(spec)
    }
}

impl fmt::Display for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionHandle::Laguerre(n) => write!(f, "l:{n}"),
            FunctionHandle::Hermite(n) => write!(f, "h:{n}"),
            FunctionHandle::PowerExp {
                scale,
                powers,
                rate,
                gauss_rate,
            } => {
                write!(f, "{scale}")?;
                for (j, k) in powers.iter().enumerate() {
                    if *k > 0 {
                        write!(f, "*x{j}^{k}")?;
                    }
                }
                write!(f, "*exp(-{rate}*|x|-{gauss_rate}*|x|^2)")
            }
            FunctionHandle::DampedPoly(c) => write!(f, "poly:{c:?}"),
            FunctionHandle::Combination(c) => write!(f, "lin[{}]:{:?}", c.basis(), c.caps()),
            FunctionHandle::Samples(s) => {
                let (lo, hi) = s.hull();
                write!(f, "samples[{lo},{hi}]")
            }
            FunctionHandle::Composed { inner, map } => match map {
                Substitution::Square => write!(f, "({inner})∘v"),
                Substitution::Sqrt => write!(f, "({inner})∘w"),
            },
        }
    }
}

fn parse_index(s: &str) -> Result<MultiIndex> {
    let entries = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad index entry {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if entries.is_empty() {
        return Err(Error::Parse("empty index".into()));
    }
    Ok(MultiIndex::new(entries))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {t:?}")))
        })
        .collect()
}

/// One-variable expressions: a `*`-separated product of numbers, powers of
/// `x`, and `exp(-[c*]x[^2][/c])` factors.
fn parse_expression(spec: &str) -> Result<FunctionHandle> {
    let src: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if src.is_empty() {
        return Err(Error::Parse("empty function spec".into()));
    }
    let mut scale = 1.0;
    let mut power = 0u32;
    let mut rate = 0.0;
    let mut gauss_rate = 0.0;
    for factor in split_top_level(&src)? {
        if let Some(inner) = factor
            .strip_prefix("exp(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let (c, quadratic) = parse_exponent(inner)?;
            if quadratic {
                gauss_rate += c;
            } else {
                rate += c;
            }
        } else if factor == "x" {
            power += 1;
        } else if let Some(k) = factor.strip_prefix("x^") {
            power += k
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad power {k:?}")))?;
        } else {
            scale *= factor
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("unrecognized factor {factor:?} in {spec:?}")))?;
        }
    }
    Ok(FunctionHandle::PowerExp {
        scale,
        powers: vec![power],
        rate,
        gauss_rate,
    })
}

fn split_top_level(src: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in src.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse(format!("unbalanced parentheses in {src:?}")));
        }
        if ch == '*' && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in {src:?}")));
    }
    out.push(cur);
    if out.iter().any(|f| f.is_empty()) {
        return Err(Error::Parse(format!("empty factor in {src:?}")));
    }
    Ok(out)
}

/// Parses `-[c*]x[^2][/d]`, returning `(c/d, quadratic)`.
fn parse_exponent(inner: &str) -> Result<(f64, bool)> {
    let bad = || Error::Parse(format!("unsupported exponent {inner:?}"));
    let body = inner.strip_prefix('-').ok_or_else(bad)?;
    let (num, rest) = match body.find('x') {
        Some(0) => (1.0, body),
        Some(i) => {
            let coeff = body[..i].strip_suffix('*').ok_or_else(bad)?;
            (coeff.parse::<f64>().map_err(|_| bad())?, &body[i..])
        }
        None => return Err(bad()),
    };
    let rest = rest.strip_prefix('x').ok_or_else(bad)?;
    let (quadratic, rest) = match rest.strip_prefix("^2") {
        Some(r) => (true, r),
        None => (false, rest),
    };
    let den = match rest.strip_prefix('/') {
        Some(d) => d.parse::<f64>().map_err(|_| bad())?,
        None if rest.is_empty() => 1.0,
        None => return Err(bad()),
    };
    Ok((num / den, quadratic))
}

/// Apply `mat` (`rows × dims[axis]`, row-major) along `axis`.
fn contract_axis(data: &[f64], dims: &[usize], axis: usize, mat: &[f64], rows: usize) -> Vec<f64> {
    let cols = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * rows * inner];
    let mut buf = vec![0.0; cols];
    for o in 0..outer {
        for r in 0..rows {
            let row = &mat[r * cols..(r + 1) * cols];
            for i in 0..inner {
                for (c, b) in buf.iter_mut().enumerate() {
                    *b = row[c] * data[(o * cols + c) * inner + i];
                }
                out[(o * rows + r) * inner + i] = pairwise_sum(&buf);
            }
        }
    }
    out
}

/// Basis tables `T[k][i] = basis_k(x_i)` for `k ≤ nmax`, row-major `(nmax+1) × len`.
fn basis_matrix(basis: BasisTag, nmax: usize, points: &[f64]) -> Vec<f64> {
    let cols: Vec<Vec<f64>> = points.iter().map(|&x| basis.table(nmax, x)).collect();
    let mut mat = vec![0.0; (nmax + 1) * points.len()];
    for (i, col) in cols.iter().enumerate() {
        for k in 0..=nmax {
            mat[k * points.len() + i] = col[k];
        }
    }
    mat
}

fn rows_upto(mat: &[f64], cols: usize, rows: usize) -> &[f64] {
    &mat[..rows * cols]
}

fn transpose(mat: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; mat.len()];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = mat[r * cols + c];
        }
    }
    t
}

fn project(
    basis: BasisTag,
    f: &FunctionHandle,
    caps: &[usize],
    m: usize,
) -> Result<CoefficientArray> {
    let d = caps.len();
    if d == 0 {
        return Err(Error::invalid("caps must name at least one axis"));
    }
    if let Some(fd) = f.dimension() {
        if fd != d {
            return Err(Error::invalid(format!(
                "function has {fd} variables but {d} caps were given"
            )));
        }
    }
    let max_cap = caps.iter().copied().max().expect("non-empty caps");
    if m <= max_cap {
        return Err(Error::invalid(format!(
            "quadrature order {m} cannot resolve degree {max_cap}"
        )));
    }
    let rule = basis.rule(m)?;
    let mut node_values = Vec::with_capacity(m.pow(d as u32));
    let mut norm_terms = Vec::with_capacity(m.pow(d as u32));
    let mut err = None;
    crate::quadrature::for_each_tensor_node(&rule, d, |x, w| {
        if err.is_some() {
            return;
        }
        match f.eval(x) {
            Ok(v) => {
                let lifted = w * v;
                if !lifted.is_finite() {
                    err = Some(Error::Overflow(format!(
                        "lifted integrand is not finite at {x:?}; {f} does not decay fast enough"
                    )));
                    return;
                }
                node_values.push(lifted);
                norm_terms.push(w * v * v);
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let table = basis_matrix(basis, max_cap, rule.nodes());
    let mut dims = vec![m; d];
    let mut data = node_values;
    for axis in 0..d {
        let rows = caps[axis] + 1;
        data = contract_axis(&data, &dims, axis, rows_upto(&table, m, rows), rows);
        dims[axis] = rows;
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!("coefficient {i} is not finite")));
    }
    let norm = pairwise_sum(&norm_terms).max(0.0).sqrt();
    let meta = Meta {
        quad_order: Some(m),
        source: f.to_string(),
        noise_floor: Some(QUADRATURE_NOISE * norm),
    };
    Ok(CoefficientArray::new(basis, caps, data)?.with_meta(meta))
}

/// `a_n = ∫_{orthant} f l_n dx` for all `n ≤ caps`, using an `m`-point rule per axis.
pub fn laguerre_coeffs(f: &FunctionHandle, caps: &[usize], m: usize) -> Result<CoefficientArray> {
    project(BasisTag::Laguerre, f, caps, m)
}

/// `b_n = ∫_{ℝ^d} f h_n dx` for all `n ≤ caps`.
pub fn hermite_coeffs(f: &FunctionHandle, caps: &[usize], m: usize) -> Result<CoefficientArray> {
    project(BasisTag::Hermite, f, caps, m)
}

/// `Σ_{n ≤ caps} c_n basis_n(x)`.
pub fn reconstruct(c: &CoefficientArray, x: &[f64]) -> Result<f64> {
    if x.len() != c.dimension() {
        return Err(Error::invalid(format!(
            "point of dimension {} for a {}-dimensional expansion",
            x.len(),
            c.dimension()
        )));
    }
    if c.basis() == BasisTag::Laguerre {
        if let Some(bad) = x.iter().find(|&&v| v < 0.0) {
            return Err(Error::Domain(format!(
                "Laguerre expansion at coordinate {bad} < 0"
            )));
        }
    }
    let tables: Vec<Vec<f64>> = x
        .iter()
        .zip(c.caps())
        .map(|(&xj, &cap)| c.basis().table(cap, xj))
        .collect();
    let terms: Vec<f64> = c
        .iter()
        .map(|(n, v)| {
            if v == 0.0 {
                return 0.0;
            }
            v * n
                .entries()
                .iter()
                .zip(&tables)
                .map(|(&k, t)| t[k])
                .product::<f64>()
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Values of the expansion on the tensor grid `points^d`, row-major.
pub fn evaluate_on_grid(c: &CoefficientArray, points: &[f64]) -> Result<Vec<f64>> {
    if c.basis() == BasisTag::Laguerre && points.iter().any(|&p| p < 0.0) {
        return Err(Error::Domain(
            "Laguerre expansion at a negative coordinate".into(),
        ));
    }
    let max_cap = c.caps().iter().copied().max().expect("non-empty caps");
    let table = basis_matrix(c.basis(), max_cap, points);
    Ok(synthesize_with_table(c, &table, points.len()))
}

/// Basis values `T[k][i]`, `k ≤ nmax`, at `points`, for reuse across many
/// expansions on the same grid.
pub(crate) fn basis_table(basis: BasisTag, nmax: usize, points: &[f64]) -> Vec<f64> {
    basis_matrix(basis, nmax, points)
}

/// Tensor-grid synthesis with a precomputed [`basis_table`] covering every cap of `c`.
pub(crate) fn synthesize_with_table(c: &CoefficientArray, table: &[f64], np: usize) -> Vec<f64> {
    let mut dims: Vec<usize> = c.caps().iter().map(|k| k + 1).collect();
    let mut data = c.values().to_vec();
    for axis in 0..c.dimension() {
        let rows = c.caps()[axis] + 1;
        let synth = transpose(rows_upto(table, np, rows), rows, np);
        data = contract_axis(&data, &dims, axis, &synth, np);
        dims[axis] = np;
    }
    data
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// Quadrature estimate of `‖f - Σ c_n basis_n‖_{L²}`.
    pub l2: f64,
    /// `‖f‖² - Σ c_n²`.
    pub parseval: f64,
    pub f_norm_sq: f64,
}

/// Truncation residual of `c` as an expansion of `f`, by quadrature with `rule`.
pub fn truncation_residual(
    f: &FunctionHandle,
    c: &CoefficientArray,
    rule: &QuadratureRule,
) -> Result<Residual> {
    if rule.kind() != c.basis().quadrature_kind() {
        return Err(Error::invalid(format!(
            "{:?} rule cannot integrate a {} expansion",
            rule.kind(),
            c.basis()
        )));
    }
    let d = c.dimension();
    let rec = evaluate_on_grid(c, rule.nodes())?;
    let mut diff_terms = Vec::with_capacity(rec.len());
    let mut norm_terms = Vec::with_capacity(rec.len());
    let mut i = 0;
    let mut err = None;
    crate::quadrature::for_each_tensor_node(rule, d, |x, w| {
        if err.is_some() {
            return;
        }
        match f.eval(x) {
            Ok(v) => {
                let r = v - rec[i];
                diff_terms.push(w * r * r);
                norm_terms.push(w * v * v);
            }
            Err(e) => err = Some(e),
        }
        i += 1;
    });
    if let Some(e) = err {
        return Err(e);
    }
    let l2 = pairwise_sum(&diff_terms).max(0.0).sqrt();
    let f_norm_sq = pairwise_sum(&norm_terms);
    let coeff_sq = pairwise_sum(&c.values().iter().map(|v| v * v).collect::<Vec<_>>());
    Ok(Residual {
        l2,
        parseval: f_norm_sq - coeff_sq,
        f_norm_sq,
    })
}
