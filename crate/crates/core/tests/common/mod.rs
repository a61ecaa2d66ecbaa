//! Gauss-Legendre quadrature of normalized Legendre polynomials (the m = 0
//! spherical harmonics in x = cosθ), shared by the oracle-backed suites.

pub const POINTS: usize = 200;

pub struct Gauss {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

pub fn gauss_legendre(n: usize) -> Gauss {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    Gauss { nodes, weights }
}

/// Normalized `P̃_0..P̃_{count-1}` at `x`.
pub fn normalized_legendre(count: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; count.max(2)];
    p[0] = 1.0;
    p[1] = x;
    for k in 2..count {
        p[k] = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
    }
    p.truncate(count);
    p.iter()
        .enumerate()
        .map(|(k, v)| v * ((2 * k + 1) as f64 / 2.0).sqrt())
        .collect()
}

/// `∫ P̃_j(x) w(x) P̃_k(x) dx` for all `j, k < dim`.
pub fn matrix_of(g: &Gauss, dim: usize, w: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; dim]; dim];
    for (&x, &wt) in g.nodes.iter().zip(&g.weights) {
        let p = normalized_legendre(dim, x);
        let f = w(x) * wt;
        for j in 0..dim {
            for k in 0..dim {
                m[j][k] += p[j] * f * p[k];
            }
        }
    }
    m
}

