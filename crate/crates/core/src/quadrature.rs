//! Gauss–Legendre rules on the reference interval `[0, 1]` and their tensor
//! products.

use crate::error::{domain, Result};

/// Largest supported number of Gauss points.
pub const MAX_POINTS: usize = 20;

/// A one-dimensional quadrature rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(a + len * x))
            .sum::<f64>()
            * len
    }
}

/// Gauss–Legendre rule with `n` points mapped to `[0, 1]`.
///
/// Exact for polynomials up to degree `2n - 1`.
pub fn gauss_rule(n: usize) -> Result<QuadRule> {
    if !(1..=MAX_POINTS).contains(&n) {
        return domain(format!("gauss rule needs 1..={MAX_POINTS} points, got {n}"));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // roots are symmetric; compute the upper half with Newton on P_n
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.5;
    }
    Ok(QuadRule { points, weights })
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature on a product of unit intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRule {
    pub dim: usize,
    /// Points stored row-major, `dim` coordinates each.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ProductRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// Tensor product of one to three rules. The first factor varies slowest.
pub fn tensor_rule(rules: &[QuadRule]) -> Result<ProductRule> {
    if rules.is_empty() || rules.len() > 3 {
        return domain(format!("tensor rule takes 1 to 3 factors, got {}", rules.len()));
    }
    let dim = rules.len();
    let mut points = vec![];
    let mut weights = vec![];
    let mut idx = vec![0usize; dim];
    loop {
        let mut w = 1.0;
        for (d, r) in rules.iter().enumerate() {
            points.push(r.points[idx[d]]);
            w *= r.weights[idx[d]];
        }
        weights.push(w);
        // odometer increment, last factor fastest
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(ProductRule { dim, points, weights });
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < rules[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_and_two_point() {
        let r = gauss_rule(1).unwrap();
        assert_eq!(r.points, vec![0.5]);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);

        let r = gauss_rule(2).unwrap();
        let off = 0.5 / 3f64.sqrt();
        assert!((r.points[0] - (0.5 - off)).abs() < 1e-15);
        assert!((r.points[1] - (0.5 + off)).abs() < 1e-15);
        assert!((r.weights[0] - 0.5).abs() < 1e-15 && (r.weights[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_points_integrate_x4() {
        let r = gauss_rule(3).unwrap();
        let v = r.integrate(0.0, 1.0, |x| x.powi(4));
        assert!((v - 0.2).abs() < 1e-14);
    }

    #[test]
    fn exactness_up_to_2n_minus_1() {
        for n in 1..=MAX_POINTS {
            let r = gauss_rule(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "n={n} weight sum {s}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.points.windows(2).all(|p| p[0] < p[1]));
            for deg in 0..2 * n {
                let v = r.integrate(0.0, 1.0, |x| x.powi(deg as i32));
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!((v - exact).abs() < 1e-13, "n={n} deg={deg}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn out_of_range() {
        assert!(gauss_rule(0).is_err());
        assert!(gauss_rule(21).is_err());
    }

    #[test]
    fn tensor_products() {
        let r2 = gauss_rule(2).unwrap();
        let t = tensor_rule(&[r2.clone(), r2.clone()]).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.weights.iter().all(|&w| (w - 0.25).abs() < 1e-15));
        let v: f64 = (0..t.len())
            .map(|i| {
                let p = t.point(i);
                t.weights[i] * p[0].powi(2) * p[1].powi(2)
            })
            .sum();
        assert!((v - 1.0 / 9.0).abs() < 1e-14);

        let r1 = gauss_rule(1).unwrap();
        let t = tensor_rule(&[r1.clone(), r1.clone(), r1]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.point(0), &[0.5, 0.5, 0.5]);
        assert!((t.weights[0] - 1.0).abs() < 1e-15);

        assert!(tensor_rule(&[]).is_err());
    }
}
