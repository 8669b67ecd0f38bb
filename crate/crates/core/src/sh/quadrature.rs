use std::f64::consts::{PI, TAU};

use super::{channel_count, order_from_channels, sh_sn3d_into, Direction};
use crate::error::{AmbiError, Result};

/// Directions with positive weights (steradians) that integrate every
/// spherical polynomial up to `exactness_degree` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    directions: Vec<Direction>,
    weights: Vec<f64>,
    exactness_degree: usize,
}

impl QuadratureGrid {
    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let n = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    if count % 2 == 1 {
        nodes[count / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Product grid: Gauss–Legendre in `sin(elevation)` times equiangular
/// azimuths. Deterministic for a given degree.
pub fn quadrature_grid(degree: usize) -> QuadratureGrid {
    let rings = degree / 2 + 1;
    let per_ring = degree + 1;
    let (nodes, gl_weights) = gauss_legendre(rings);
    let mut directions = Vec::with_capacity(rings * per_ring);
    let mut weights = Vec::with_capacity(rings * per_ring);
    let az_weight = TAU / per_ring as f64;
    for (x, w) in nodes.iter().zip(&gl_weights) {
        let el = x.asin();
        for j in 0..per_ring {
            directions.push(Direction::new(TAU * j as f64 / per_ring as f64, el));
            weights.push(w * az_weight);
        }
    }
    QuadratureGrid {
        directions,
        weights,
        exactness_degree: degree,
    }
}

/// SN3D coefficients up to `order` of a function sampled on `grid`.
pub fn sh_analysis(samples: &[f64], grid: &QuadratureGrid, order: usize) -> Result<Vec<f64>> {
    if grid.exactness_degree < 2 * order {
        return Err(AmbiError::invalid(format!(
            "grid exactness {} is below 2*order = {}",
            grid.exactness_degree,
            2 * order
        )));
    }
    if samples.len() != grid.len() {
        return Err(AmbiError::invalid(format!(
            "{} samples for a grid of {} directions",
            samples.len(),
            grid.len()
        )));
    }
    let count = channel_count(order);
    let mut coeffs = vec![0.0; count];
    let mut y = vec![0.0; count];
    for ((dir, w), f) in grid.directions.iter().zip(&grid.weights).zip(samples) {
        sh_sn3d_into(*dir, order, &mut y);
        let wf = w * f;
        for (c, yk) in coeffs.iter_mut().zip(&y) {
            *c += wf * yk;
        }
    }
    for n in 0..=order {
        let scale = (2 * n + 1) as f64 / (4.0 * PI);
        for c in &mut coeffs[n * n..(n + 1) * (n + 1)] {
            *c *= scale;
        }
    }
    Ok(coeffs)
}

/// Evaluates the SN3D expansion `coeffs` at each direction.
pub fn sh_synthesis(coeffs: &[f64], directions: &[Direction]) -> Result<Vec<f64>> {
    let order = order_from_channels(coeffs.len()).ok_or_else(|| {
        AmbiError::MalformedSignal(format!(
            "coefficient count {} is not (N+1)^2",
            coeffs.len()
        ))
    })?;
    let mut y = vec![0.0; coeffs.len()];
    Ok(directions
        .iter()
        .map(|d| {
            sh_sn3d_into(*d, order, &mut y);
            coeffs.iter().zip(&y).map(|(c, v)| c * v).sum()
        })
        .collect())
}
