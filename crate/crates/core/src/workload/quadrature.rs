//! Gauss-Legendre quadrature on an upper-half-plane semicircle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{EmuError, Result};

/// Nodes (ascending) and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_{n-1}(x) by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Quadrature nodes `z_j` and complex weights `w_j` (carrying `dz`) on the
/// semicircle from `e_bottom` over the upper half plane to `e_fermi`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourSpec {
    pub e_bottom: f64,
    pub e_fermi: f64,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

impl ContourSpec {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_j w_j f(z_j)`.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// `z(theta) = c + r e^{i theta}` with `theta = pi (1 - x) / 2`, so `x = -1`
/// maps to `e_bottom` and `x = 1` to `e_fermi`.
pub fn contour_nodes(e_bottom: f64, e_fermi: f64, n: usize) -> Result<ContourSpec> {
    if !e_bottom.is_finite() || !e_fermi.is_finite() || e_bottom >= e_fermi {
        return Err(EmuError::InvalidParameter(format!("contour interval [{e_bottom}, {e_fermi}] is empty")));
    }
    if n < 2 {
        return Err(EmuError::InvalidParameter(format!("contour needs at least 2 nodes, got {n}")));
    }
    let c = 0.5 * (e_bottom + e_fermi);
    let r = 0.5 * (e_fermi - e_bottom);
    let (xs, ws) = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (&x, &w) in xs.iter().zip(&ws) {
        let theta = 0.5 * PI * (1.0 - x);
        let e = Complex64::from_polar(1.0, theta);
        nodes.push(c + r * e);
        // dz = i r e^{i theta} dtheta, dtheta = -(pi/2) dx
        weights.push(w * (-0.5 * PI) * Complex64::i() * r * e);
    }
    Ok(ContourSpec { e_bottom, e_fermi, nodes, weights })
}
