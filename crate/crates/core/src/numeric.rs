//! Grid utilities shared by the sampled representations: cumulative
//! trapezoid, three-point derivatives and linear interpolation.

use crate::error::Error;

/// Singular-value threshold on |sin ζ|, |sin θ| and similar denominators.
pub const EPS_SING: f64 = 1e-9;

/// Running trapezoid integral of `y` over `x`, starting at `start`.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64], start: f64) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    let mut out = Vec::with_capacity(x.len());
    let mut acc = start;
    if !x.is_empty() {
        out.push(acc);
    }
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// dy/dx at every node: central three-point stencil in the interior and
/// one-sided second-order stencils at the ends. Exact for quadratics on
/// non-uniform grids. Requires at least three nodes.
pub fn derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(
        n >= 3 && y.len() == n,
        "derivative needs three or more nodes"
    );
    let mut d = vec![0.0; n];
    for (i, out) in d.iter_mut().enumerate() {
        let (a, b, c) = match i {
            0 => (0, 1, 2),
            i if i == n - 1 => (n - 3, n - 2, n - 1),
            i => (i - 1, i, i + 1),
        };
        *out = lagrange_slope(x[a], x[b], x[c], y[a], y[b], y[c], x[i]);
    }
    d
}

/// Slope at `at` of the parabola through three points.
fn lagrange_slope(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64, at: f64) -> f64 {
    let w0 = (2.0 * at - x1 - x2) / ((x0 - x1) * (x0 - x2));
    let w1 = (2.0 * at - x0 - x2) / ((x1 - x0) * (x1 - x2));
    let w2 = (2.0 * at - x0 - x1) / ((x2 - x0) * (x2 - x1));
    w0 * y0 + w1 * y1 + w2 * y2
}

/// Evenly spaced grid with both end points included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Segment index and weight for linear interpolation on an increasing grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub index: usize,
    pub weight: f64,
}

impl Bracket {
    pub fn lerp(&self, values: &[f64]) -> f64 {
        let a = values[self.index];
        if self.weight == 0.0 {
            return a;
        }
        let b = values[self.index + 1];
        a + self.weight * (b - a)
    }
}

/// Locate `x` on the increasing grid `grid`.
pub fn locate(grid: &[f64], x: f64) -> Result<Bracket, Error> {
    let n = grid.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let (lo, hi) = (grid[0], grid[n - 1]);
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfRange { value: x, lo, hi });
    }
    if n == 1 || x == hi {
        let index = n.saturating_sub(2);
        return Ok(Bracket {
            index,
            weight: if n == 1 { 0.0 } else { 1.0 },
        });
    }
    // first node strictly greater than x
    let upper = grid.partition_point(|&g| g <= x);
    let index = upper - 1;
    let weight = (x - grid[index]) / (grid[index + 1] - grid[index]);
    Ok(Bracket { index, weight })
}

/// Largest residual of a check and the location where it occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub max: f64,
    pub argmax: Vec<f64>,
    pub samples: usize,
}

impl Residual {
    pub fn empty() -> Self {
        Residual {
            max: 0.0,
            argmax: Vec::new(),
            samples: 0,
        }
    }

    pub fn record(&mut self, value: f64, at: f64) {
        self.record_at(value, &[at]);
    }

    pub fn record_at(&mut self, value: f64, at: &[f64]) {
        self.samples += 1;
        // NaN residuals must never pass silently
        if value > self.max
            || value.is_nan() && !self.max.is_nan()
            || self.argmax.is_empty() && value == self.max
        {
            self.max = value;
            self.argmax = at.to_vec();
        }
    }

    /// Fold another residual into this one.
    pub fn merge(&mut self, other: &Residual) {
        let samples = self.samples + other.samples;
        if other.samples > 0 {
            self.record_at(other.max, &other.argmax);
        }
        self.samples = samples;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let x = linspace(0.0, 2.0, 11);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        let c = cumulative_trapezoid(&x, &y, 0.5);
        for (xi, ci) in x.iter().zip(&c) {
            assert!((ci - (0.5 + 1.5 * xi * xi + xi)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_exact_for_quadratics_on_uneven_grid() {
        let x = vec![0.0, 0.1, 0.35, 0.4, 0.9, 1.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v * v - v + 3.0).collect();
        for (xi, di) in x.iter().zip(derivative(&x, &y)) {
            assert!((di - (4.0 * xi - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn locate_brackets() {
        let g = linspace(0.0, 1.0, 5);
        assert_eq!(
            locate(&g, 0.0).unwrap(),
            Bracket {
                index: 0,
                weight: 0.0
            }
        );
        let b = locate(&g, 0.3).unwrap();
        assert_eq!(b.index, 1);
        assert!((b.weight - 0.2).abs() < 1e-15);
        assert_eq!(
            locate(&g, 1.0).unwrap(),
            Bracket {
                index: 3,
                weight: 1.0
            }
        );
        assert!(locate(&g, 1.0 + 1e-12).is_err());
        assert!(locate(&g, f64::NAN).is_err());
    }
}
