//! Matrix elements against 200-point Gauss-Legendre quadrature of normalized
//! Legendre polynomials (the m = 0 spherical harmonics reduced to x = cosθ).

use rotorkick::basis::{build_cos_power, build_sigma_theta, build_sin2_2theta};
use rotorkick::{build_cos, build_cos2, build_j2};

mod common;

use common::{gauss_legendre, matrix_of, normalized_legendre, POINTS};

const TOL: f64 = 1e-10;

fn assert_matches(name: &str, built: &nalgebra::DMatrix<rotorkick::C<f64>>, oracle: &[Vec<f64>]) {
    for (j, row) in oracle.iter().enumerate() {
        for (k, &want) in row.iter().enumerate() {
            let got = built[(j, k)];
            assert!(
                (got.re - want).abs() < TOL && got.im == 0.0,
                "{name} ({j},{k}): {} vs {want}",
                got.re
            );
        }
    }
}

#[test]
fn quadrature_rule_integrates_polynomials() {
    let g = gauss_legendre(POINTS);
    let total: f64 = g.weights.iter().sum();
    assert!((total - 2.0).abs() < 1e-13);
    let x4: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(4)).sum();
    assert!((x4 - 0.4).abs() < 1e-14);
}

#[test]
fn cos_and_powers_match_quadrature() {
    let g = gauss_legendre(POINTS);
    for dim in [1, 2, 3, 5, 6, 13, 40] {
        assert_matches("cos", build_cos::<f64>(dim).unwrap().matrix(), &matrix_of(&g, dim, |x| x));
        assert_matches("cos2", build_cos2::<f64>(dim).unwrap().matrix(), &matrix_of(&g, dim, |x| x * x));
        assert_matches(
            "cos3",
            build_cos_power::<f64>(dim, 3).unwrap().matrix(),
            &matrix_of(&g, dim, |x| x.powi(3)),
        );
        assert_matches(
            "sin2_2theta",
            build_sin2_2theta::<f64>(dim).unwrap().matrix(),
            &matrix_of(&g, dim, |x| 4.0 * x * x * (1.0 - x * x)),
        );
    }
}

#[test]
fn named_entries() {
    let c = build_cos::<f64>(6).unwrap();
    assert!((c.entry(4, 5).re - 5.0 / 99f64.sqrt()).abs() < 1e-15);
    assert!((build_cos::<f64>(2).unwrap().entry(0, 1).re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    let c2 = build_cos2::<f64>(5).unwrap();
    assert!((c2.entry(0, 2).re - 2.0 / (3.0 * 5f64.sqrt())).abs() < 1e-15);
    let small = build_cos2::<f64>(2).unwrap();
    assert!((small.entry(0, 0).re - 1.0 / 3.0).abs() < 1e-15);
    assert!((small.entry(1, 1).re - 0.6).abs() < 1e-15);
}

#[test]
fn j2_is_the_legendre_eigenvalue() {
    // Legendre's equation: −d/dx[(1−x²)P_n'] = n(n+1)P_n.
    let j2 = build_j2::<f64>(7).unwrap();
    for j in 0..7 {
        assert_eq!(j2.entry(j, j).re, (j * (j + 1)) as f64);
    }
}

#[test]
fn sigma_theta_matches_quadrature() {
    // σ_θ = sinθ ∂/∂θ = −(1 − x²) d/dx, and (1 − x²)P_k' = k(P_{k−1} − xP_k).
    let g = gauss_legendre(POINTS);
    let dim = 9;
    let sigma = build_sigma_theta::<f64>(dim).unwrap();
    let norm = |k: usize| ((2 * k + 1) as f64 / 2.0).sqrt();
    for j in 0..dim {
        for k in 0..dim {
            let mut acc = 0.0;
            for (&x, &w) in g.nodes.iter().zip(&g.weights) {
                let p = normalized_legendre(dim + 1, x);
                let raw = |n: usize| p[n] / norm(n);
                let dk = if k == 0 { 0.0 } else { k as f64 * (raw(k - 1) - x * raw(k)) };
                acc += w * p[j] * (-dk * norm(k));
            }
            assert!((sigma[(j, k)].re - acc).abs() < TOL, "σ ({j},{k})");
        }
    }
}
