//! Uniform grids on [0, 1], sampled functions, quadrature and norms.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{NehariError, Result};

/// Default node count.
pub const DEFAULT_NODES: usize = 401;

/// Uniform grid with an odd number of nodes, so that t = 1/2 is a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(NehariError::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        if n.is_multiple_of(2) {
            return Err(NehariError::InvalidGrid(format!("node count must be odd, got {n}")));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing 1/(n-1).
    #[inline]
    pub fn spacing(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    /// Node t_i; exact at both ends.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / (self.n - 1) as f64
    }

    /// Index of the midpoint node t = 1/2.
    #[inline]
    pub fn mid(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self { n: DEFAULT_NODES }
    }
}

/// Values of a function at every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NehariError::GridMismatch { expected: grid.len(), actual: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: Grid, mut f: F) -> Self {
        let values = grid.nodes().map(&mut f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F: FnMut(f64) -> f64>(&self, f: F) -> Self {
        Self { grid: self.grid, values: self.values.iter().copied().map(f).collect() }
    }

    pub fn try_map<F: FnMut(f64) -> Result<f64>>(&self, f: F) -> Result<Self> {
        let values = self.values.iter().copied().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: self.grid, values })
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(NehariError::GridMismatch {
                expected: self.grid.len(),
                actual: other.grid.len(),
            });
        }
        Ok(())
    }

    pub fn is_dirichlet(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.grid.len() - 1] == 0.0
    }

    /// Sets both endpoint values to exactly zero.
    pub fn pin_dirichlet(&mut self) {
        let last = self.values.len() - 1;
        self.values[0] = 0.0;
        self.values[last] = 0.0;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes the `t,value` CSV representation with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut buf = String::with_capacity(self.values.len() * 48);
        buf.push_str("t,value\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(buf, "{:.16e},{:.16e}", self.grid.node(i), v);
        }
        w.write_all(buf.as_bytes())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("csv output is ascii")
    }

    /// Parses the `t,value` CSV produced by [`SampledFunction::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| NehariError::InvalidArgument("empty csv".into()))?
            .map_err(|e| NehariError::InvalidArgument(e.to_string()))?;
        if header.trim() != "t,value" {
            return Err(NehariError::InvalidArgument(format!("unexpected csv header {header:?}")));
        }
        let mut ts = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| NehariError::InvalidArgument(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.trim().parse().ok()).ok_or_else(|| {
                    NehariError::InvalidArgument(format!("bad csv row {}: {line:?}", lineno + 2))
                })
            };
            ts.push(parse(parts.next())?);
            values.push(parse(parts.next())?);
        }
        let grid = Grid::new(values.len())?;
        for (i, t) in ts.iter().enumerate() {
            if (t - grid.node(i)).abs() > 1e-12 {
                return Err(NehariError::InvalidGrid(format!(
                    "csv node {i} at t = {t} is not on the uniform grid"
                )));
            }
        }
        Self::new(grid, values)
    }
}

impl Add for &SampledFunction {
    type Output = SampledFunction;
    fn add(self, rhs: Self) -> SampledFunction {
        self.combine(1.0, rhs, 1.0).expect("operands share a grid")
    }
}

impl Sub for &SampledFunction {
    type Output = SampledFunction;
    fn sub(self, rhs: Self) -> SampledFunction {
        self.combine(1.0, rhs, -1.0).expect("operands share a grid")
    }
}

impl Mul<f64> for &SampledFunction {
    type Output = SampledFunction;
    fn mul(self, c: f64) -> SampledFunction {
        self.map(|v| c * v)
    }
}

/// Composite Simpson rule over [0, 1]; exact for cubics on each panel pair.
pub fn integrate(g: &SampledFunction) -> f64 {
    simpson(g.values(), g.grid().spacing())
}

pub(crate) fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + 4.0 * odd + 2.0 * even + values[n - 1])
}

/// Finite-difference derivative.
///
/// Five-point fourth-order stencils: centred in the interior, offset at the
/// nodes next to the boundary and one-sided at the endpoints. Exact for
/// polynomials of degree <= 4. Grids with fewer than five nodes fall back to
/// second-order three-point stencils.
pub fn derivative(u: &SampledFunction) -> SampledFunction {
    let grid = u.grid();
    let n = grid.len();
    let h = grid.spacing();
    let v = u.values();
    let mut d = vec![0.0; n];
    if n < 5 {
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    } else {
        let c = 1.0 / (12.0 * h);
        d[0] = c * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
        d[1] = c * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
        for i in 2..n - 2 {
            d[i] = c * (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]);
        }
        d[n - 2] = -c * (-3.0 * v[n - 1] - 10.0 * v[n - 2] + 18.0 * v[n - 3] - 6.0 * v[n - 4]
            + v[n - 5]);
        d[n - 1] = -c * (-25.0 * v[n - 1] + 48.0 * v[n - 2] - 36.0 * v[n - 3] + 16.0 * v[n - 4]
            - 3.0 * v[n - 5]);
    }
    SampledFunction { grid, values: d }
}

/// Energetic norm (∫|u'|^p)^(1/p).
pub fn norm_w1p(u: &SampledFunction, p: f64) -> f64 {
    let du = derivative(u);
    integrate(&du.map(|d| d.abs().powf(p))).max(0.0).powf(1.0 / p)
}

/// Lebesgue norm (∫|u|^p)^(1/p).
pub fn norm_lp(u: &SampledFunction, p: f64) -> f64 {
    integrate(&u.map(|v| v.abs().powf(p))).max(0.0).powf(1.0 / p)
}
